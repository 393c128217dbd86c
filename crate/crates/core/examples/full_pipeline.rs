//! Every CLI stage on the bundled fixture, driven in-process.
//!
//! ```text
//! cargo run --release --example full_pipeline -- [RUN_DIR]
//! ```
//!
//! Equivalent to `topic-resonance -c fixtures/pipeline.toml --run-dir RUN_DIR all`.

use std::error::Error;
use std::path::{Path, PathBuf};

use topic_resonance::cli::{execute, Command, Outcome, RunConfig, Stage};

pub fn run_example(run_dir: &Path) -> Result<Vec<(Stage, Outcome)>, Box<dyn Error>> {
    let config_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/pipeline.toml");
    let mut config = RunConfig::load(&config_path, &[]).map_err(|p| p.join("; "))?;
    config.paths.run_dir = Some(run_dir.to_path_buf());
    let problems = config.problems();
    if !problems.is_empty() {
        return Err(problems.join("; ").into());
    }
    Ok(execute(&config, Command::All, false)?)
}

fn main() -> Result<(), Box<dyn Error>> {
    let run_dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("topic-resonance-example"));
    for (stage, outcome) in run_example(&run_dir)? {
        println!("{stage:<11} {outcome:?}");
    }
    println!("\n{}", std::fs::read_to_string(run_dir.join("export/summary.json"))?);
    Ok(())
}
