//! Evaluation reports: a JSON document holding the data-loader hashes and
//! every metric result, plus a comparability check between two reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Task;
use crate::error::{Error, Result};
use crate::hashing::{DataHashes, HashCode};
use crate::metrics::MetricResult;

pub const REPORT_EXTENSION: &str = "evalreport";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub toolkit_version: String,
    pub task: Task,
    pub hashes: DataHashes,
    pub metrics: Vec<MetricResult>,
    /// Free-form run details such as the model name.
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl EvalReport {
    pub fn new(task: Task, hashes: DataHashes) -> Self {
        EvalReport {
            toolkit_version: crate::VERSION.to_string(),
            task,
            hashes,
            metrics: Vec::new(),
            metadata: BTreeMap::new(),
            extra: serde_json::Map::new(),
        }
    }

    pub fn metric(&self, name: &str) -> Option<&MetricResult> {
        self.metrics.iter().find(|m| m.metric == name)
    }

    /// Checks the invariants a reader relies on: a consistent general hash,
    /// unique metric names and finite values.
    pub fn validate(&self) -> Result<()> {
        if !self.hashes.is_consistent() {
            return Err(Error::Input(
                "general hash does not match the four component hashes".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        for m in &self.metrics {
            if !seen.insert(m.metric.as_str()) {
                return Err(Error::Input(format!("duplicate metric {:?}", m.metric)));
            }
            if !m.value.is_finite() {
                return Err(Error::Input(format!("metric {:?} has a non-finite value", m.metric)));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, label: &str) -> Result<Self> {
        let report: EvalReport = serde_json::from_str(text).map_err(|e| {
            Error::parse(format!("{label}:{}:{}", e.line(), e.column()), e.to_string())
        })?;
        report.validate().map_err(|e| Error::parse(label, e.to_string()))?;
        Ok(report)
    }
}

pub fn write_report(report: &EvalReport, path: &Path) -> Result<()> {
    report.validate()?;
    std::fs::write(path, report.to_json()).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_report(path: &Path) -> Result<EvalReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::load(path, e))?;
    EvalReport::from_json(&text, &path.display().to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Comparable,
    Incomparable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Comparable => "COMPARABLE",
            Verdict::Incomparable => "INCOMPARABLE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HashRow {
    pub name: &'static str,
    pub a: HashCode,
    pub b: HashCode,
}

impl HashRow {
    pub fn differs(&self) -> bool {
        self.a != self.b
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MetricRow {
    pub metric: String,
    pub a: HashCode,
    pub b: HashCode,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Comparison {
    pub data_hashes: Vec<HashRow>,
    /// Metrics present in both reports, sorted by name.
    pub metrics: Vec<MetricRow>,
    pub only_in_a: Vec<String>,
    pub only_in_b: Vec<String>,
}

impl Comparison {
    pub fn differing_hashes(&self) -> Vec<&'static str> {
        self.data_hashes.iter().filter(|r| r.differs()).map(|r| r.name).collect()
    }

    pub fn all_comparable(&self) -> bool {
        self.metrics.iter().all(|m| m.verdict == Verdict::Comparable)
    }

    pub fn verdict(&self, metric: &str) -> Option<Verdict> {
        self.metrics.iter().find(|m| m.metric == metric).map(|m| m.verdict)
    }

    /// The same comparison with the two sides exchanged.
    pub fn swapped(&self) -> Comparison {
        Comparison {
            data_hashes: self
                .data_hashes
                .iter()
                .map(|r| HashRow { name: r.name, a: r.b, b: r.a })
                .collect(),
            metrics: self
                .metrics
                .iter()
                .map(|m| MetricRow { metric: m.metric.clone(), a: m.b, b: m.a, verdict: m.verdict })
                .collect(),
            only_in_a: self.only_in_b.clone(),
            only_in_b: self.only_in_a.clone(),
        }
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .metrics
            .iter()
            .map(|m| m.metric.len())
            .chain(DataHashes::NAMES.iter().map(|n| n.len()))
            .max()
            .unwrap_or(0);
        writeln!(f, "{:<width$}  {:<6}  {:<6}  status", "data hash", "a", "b")?;
        for r in &self.data_hashes {
            let status = if r.differs() { "differs" } else { "same" };
            writeln!(f, "{:<width$}  {}  {}  {status}", r.name, r.a.short(), r.b.short())?;
        }
        writeln!(f)?;
        writeln!(f, "{:<width$}  {:<6}  {:<6}  verdict", "metric", "a", "b")?;
        for m in &self.metrics {
            writeln!(f, "{:<width$}  {}  {}  {}", m.metric, m.a.short(), m.b.short(), m.verdict)?;
        }
        for name in &self.only_in_a {
            writeln!(f, "{name:<width$}  only in a")?;
        }
        for name in &self.only_in_b {
            writeln!(f, "{name:<width$}  only in b")?;
        }
        let diff = self.differing_hashes();
        if !self.all_comparable() && !diff.is_empty() {
            writeln!(f, "\ndiffering data hashes: {}", diff.join(", "))?;
        }
        Ok(())
    }
}

/// Two metric scores are comparable exactly when their hash codes agree.
pub fn compare_reports(a: &EvalReport, b: &EvalReport) -> Comparison {
    let data_hashes = a
        .hashes
        .entries()
        .into_iter()
        .zip(b.hashes.entries())
        .map(|((name, ha), (_, hb))| HashRow { name, a: ha, b: hb })
        .collect();
    let index = |r: &EvalReport| -> BTreeMap<String, HashCode> {
        r.metrics.iter().map(|m| (m.metric.clone(), m.hash)).collect()
    };
    let (ia, ib) = (index(a), index(b));
    let metrics = ia
        .iter()
        .filter_map(|(name, &ha)| {
            ib.get(name).map(|&hb| MetricRow {
                metric: name.clone(),
                a: ha,
                b: hb,
                verdict: if ha == hb { Verdict::Comparable } else { Verdict::Incomparable },
            })
        })
        .collect();
    let only = |x: &BTreeMap<String, HashCode>, y: &BTreeMap<String, HashCode>| {
        x.keys().filter(|k| !y.contains_key(*k)).cloned().collect()
    };
    Comparison {
        data_hashes,
        metrics,
        only_in_a: only(&ia, &ib),
        only_in_b: only(&ib, &ia),
    }
}
