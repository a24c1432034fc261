//! Comparison-safe evaluation for text generation.
//!
//! Every metric result carries a SHA-256 hash code describing exactly what it
//! depends on (references, vocabulary union, parameters). Two scores are
//! comparable if and only if their hash codes are equal. Data loaders expose
//! five further hash codes (raw data, tokenized data, vocabulary, settings and
//! a general hash over all four) so that differences in experimental setup can
//! be detected mechanically.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod hashing;
pub mod metrics;
pub mod ngram;
pub mod report;
pub mod tokenizer;
pub mod vocab;

pub use error::{Error, ErrorCategory, Result};

/// Version string embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
