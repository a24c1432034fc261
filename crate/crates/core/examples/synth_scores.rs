//! Writes token scores for a corpus's test targets from an add-one unigram
//! model of its training split, so the perplexity metrics can be exercised
//! without a neural generator.
//!
//! cargo run --example synth_scores -- --task single-turn --corpus DIR --tmin 2 > scores.jsonl

use clap::Parser;
use geneval::cli::{prepare, DataArgs};
use geneval::metrics::unigram_baseline_scores;

#[derive(Parser)]
struct Opts {
    #[command(flatten)]
    data: DataArgs,
}

fn main() {
    let opts = Opts::parse();
    let result = opts.data.resolve().and_then(|cfg| prepare(&cfg));
    match result {
        Ok(p) => print!("{}", unigram_baseline_scores(&p.corpus, &p.vocab).to_jsonl()),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(geneval::cli::exit_code(&e));
        }
    }
}
