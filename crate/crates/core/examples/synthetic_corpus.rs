//! Generate a synthetic bibliographic corpus with known topics.
//!
//! ```text
//! cargo run --example synthetic_corpus -- [N_DOCS] [SEED] [OUT.csv]
//! ```
//!
//! Without an output path the CSV goes to stdout.

use std::error::Error;
use std::fs::File;
use std::io::Write;

use topic_resonance::synthetic::{fixture_records, write_records_csv};

pub fn run_example(n_docs: usize, seed: u64, out: &mut dyn Write) -> Result<usize, Box<dyn Error>> {
    let records = fixture_records(n_docs, seed)?;
    write_records_csv(out, &records)?;
    Ok(records.len())
}

fn main() -> Result<(), Box<dyn Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n_docs = args.first().map(|s| s.parse()).transpose()?.unwrap_or(200);
    let seed = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(7);
    let n = match args.get(2) {
        Some(path) => run_example(n_docs, seed, &mut File::create(path)?)?,
        None => run_example(n_docs, seed, &mut std::io::stdout().lock())?,
    };
    eprintln!("wrote {n} records");
    Ok(())
}
