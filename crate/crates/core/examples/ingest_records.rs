//! Read bibliographic records, resolve dates to months and tokenize abstracts.
//!
//! ```text
//! cargo run --example ingest_records -- [records.csv]
//! ```

use std::error::Error;
use std::fs::File;
use std::path::{Path, PathBuf};

use topic_resonance::corpus::{bin_by_month, ingest, read_csv, ColumnMap, IngestConfig};
use topic_resonance::{Document, IngestReport, Tokenizer};

pub fn run_example(path: &Path) -> Result<(Vec<Document>, IngestReport), Box<dyn Error>> {
    let rows = read_csv(File::open(path)?, &ColumnMap::default())?;
    Ok(ingest(rows, &IngestConfig::default(), &Tokenizer::default()))
}

fn main() -> Result<(), Box<dyn Error>> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/records.csv"));
    let (docs, report) = run_example(&path)?;
    println!(
        "{} records: {} retained, {} without abstract, {} without date ({} season, {} year-only dates repaired)",
        report.total,
        report.retained,
        report.excluded_no_abstract,
        report.excluded_no_date,
        report.repaired_season_dates,
        report.year_only_dates
    );
    let by_month = bin_by_month(&docs);
    if let (Some((first, _)), Some((last, _))) = (by_month.first_key_value(), by_month.last_key_value()) {
        println!("{} months from {first} to {last}", by_month.len());
    }
    if let Some(d) = docs.first() {
        println!(
            "{} ({}, {}): {} tokens, first five {:?}",
            d.id,
            d.venue,
            d.month,
            d.tokens.len(),
            &d.tokens[..d.tokens.len().min(5)]
        );
    }
    Ok(())
}
