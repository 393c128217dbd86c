//! Prune the vocabulary by document frequency and TF-IDF and encode documents as bags of words.
//!
//! ```text
//! cargo run --example build_vocabulary -- [DF_MAX] [TFIDF_MIN]
//! ```

use std::error::Error;
use std::fs::File;
use std::path::Path;

use topic_resonance::corpus::{ingest, read_csv, ColumnMap, IngestConfig};
use topic_resonance::{BagOfWords, Tokenizer, Vocabulary};

pub fn run_example(df_max: f64, tfidf_min: f64) -> Result<(Vocabulary, Vec<BagOfWords>), Box<dyn Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/records.csv");
    let (docs, _) =
        ingest(read_csv(File::open(path)?, &ColumnMap::default())?, &IngestConfig::default(), &Tokenizer::default());
    let tokens: Vec<&[String]> = docs.iter().map(|d| d.tokens.as_slice()).collect();
    let vocab = Vocabulary::build(&tokens, df_max, tfidf_min)?;
    let bows = docs.iter().map(|d| vocab.to_bow(&d.tokens)).collect();
    Ok((vocab, bows))
}

fn main() -> Result<(), Box<dyn Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let df_max = args.first().map(|s| s.parse()).transpose()?.unwrap_or(0.5);
    let tfidf_min = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(0.0075);
    let (vocab, bows) = run_example(df_max, tfidf_min)?;
    println!(
        "{} terms kept from {} documents (fingerprint {})",
        vocab.len(),
        vocab.n_docs(),
        &vocab.fingerprint()[..12]
    );
    let empty = bows.iter().filter(|b| b.is_empty()).count();
    let tokens: u64 = bows.iter().map(BagOfWords::total).sum();
    println!("{tokens} in-vocabulary tokens, {empty} documents left empty");
    for id in 0..vocab.len().min(5) as u32 {
        println!(
            "  {:<10} df={:<4} tfidf={:.4}",
            vocab.term(id).unwrap_or("?"),
            vocab.doc_freq(id),
            vocab.tfidf_score(id)
        );
    }
    Ok(())
}
