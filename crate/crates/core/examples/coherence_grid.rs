//! Score NPMI coherence across a small hyperparameter grid and keep the best model.
//!
//! ```text
//! cargo run --release --example coherence_grid
//! ```

use std::error::Error;

use topic_resonance::coherence::{grid_search, write_grid_csv, CoherenceConfig, GridOutcome, GridSpec};
use topic_resonance::lda::{sample_documents, AlphaMode, EtaMode, SamplerConfig};
use topic_resonance::synthetic::{block_topics, pseudo_word};
use topic_resonance::LdaConfig;

pub fn run_example(seed: u64) -> Result<GridOutcome, Box<dyn Error>> {
    let beta = block_topics(5, 100, 0.9, seed);
    let sampled = sample_documents(&SamplerConfig { alpha: vec![0.1; 5], xi: 40.0, seed: seed + 1 }, &beta, 1500)?;
    let docs: Vec<Vec<String>> =
        sampled.iter().map(|d| d.tokens.iter().map(|&t| pseudo_word(t as usize)).collect()).collect();
    let spec = GridSpec {
        df_max: vec![1.0],
        tfidf_min: vec![0.0],
        num_topics: vec![2, 5, 20],
        alpha: vec![AlphaMode::Symmetric, AlphaMode::Auto],
        eta: vec![EtaMode::Symmetric],
    };
    let base = LdaConfig { passes: 5, ..LdaConfig::default() };
    Ok(grid_search(&docs, &spec, &base, &CoherenceConfig::default(), seed)?)
}

fn main() -> Result<(), Box<dyn Error>> {
    let outcome = run_example(3)?;
    write_grid_csv(std::io::stdout().lock(), &outcome.rows)?;
    if let Some((cell, _, report)) = &outcome.best {
        println!(
            "\nbest: K={} alpha={} eta={} mean coherence {:.4}",
            cell.num_topics, cell.alpha, cell.eta, report.mean
        );
        for (t, c) in report.per_topic.iter().enumerate() {
            println!("  topic {t}: {c:.4}");
        }
    }
    Ok(())
}
