//! Command-line driver: configuration, stage gating, run-directory locking and manifests.

pub mod config;
pub mod stages;

use std::ffi::OsString;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::RunConfig;
pub use stages::{read_manifest, Manifest, Outcome, Stage};

#[derive(Debug, Parser)]
#[command(name = "topic-resonance", version, about = "Topic models, novelty and resonance for dated document corpora")]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(short, long, global = true, default_value = "topic-resonance.toml")]
    pub config: PathBuf,
    /// Overrides `paths.run_dir`.
    #[arg(long, global = true)]
    pub run_dir: Option<PathBuf>,
    /// Overrides `seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Rerun stages even when their manifests are current.
    #[arg(long, global = true)]
    pub force: bool,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Repeat for more detail.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    /// Config override such as `lda.num_topics=40`; may be repeated.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Read raw records and write the normalized document table.
    Ingest,
    /// Build the vocabulary.
    Preprocess,
    /// Fit the topic model and infer per-document topic mixtures.
    Train,
    /// Score topic coherence, optionally over a hyperparameter grid.
    Coherence,
    /// Monthly topic and group prevalence series.
    Trends,
    /// Per-document novelty, transience and resonance.
    Innovation,
    /// Author and venue rankings.
    Entities,
    /// Collect a run summary.
    Export,
    /// Every stage in order.
    All,
}

impl Command {
    pub fn stages(self) -> Vec<Stage> {
        match self {
            Command::Ingest => vec![Stage::Ingest],
            Command::Preprocess => vec![Stage::Preprocess],
            Command::Train => vec![Stage::Train],
            Command::Coherence => vec![Stage::Coherence],
            Command::Trends => vec![Stage::Trends],
            Command::Innovation => vec![Stage::Innovation],
            Command::Entities => vec![Stage::Entities],
            Command::Export => vec![Stage::Export],
            Command::All => Stage::ALL.to_vec(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    #[error("missing artifact from stage `{stage}`: {detail}")]
    MissingArtifact { stage: &'static str, detail: String },
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::MissingArtifact { .. } => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

/// Held while a command writes into a run directory.
struct RunLock {
    path: PathBuf,
}

impl RunLock {
    fn acquire(run_dir: &Path) -> Result<Self, CliError> {
        let path = run_dir.join(".lock");
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(RunLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(CliError::Runtime(format!(
                "{} is locked by another run; remove {} if no run is active",
                run_dir.display(),
                path.display()
            ))),
            Err(e) => Err(CliError::Runtime(format!("{}: {e}", path.display()))),
        }
    }
}

impl Drop for RunLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Load the config named on the command line and apply flag overrides.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    if !cli.config.is_file() {
        return Err(CliError::Validation(vec![format!("config file {} not found", cli.config.display())]));
    }
    let mut cfg = RunConfig::load(&cli.config, &cli.overrides).map_err(CliError::Validation)?;
    if let Some(dir) = &cli.run_dir {
        let cwd = std::env::current_dir().map_err(|e| CliError::Runtime(e.to_string()))?;
        cfg.paths.run_dir = Some(cwd.join(dir));
    }
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    let problems = cfg.problems();
    if !problems.is_empty() {
        return Err(CliError::Validation(problems));
    }
    Ok(cfg)
}

/// Run the stages of `command` against a validated config.
pub fn execute(cfg: &RunConfig, command: Command, force: bool) -> Result<Vec<(Stage, Outcome)>, CliError> {
    let run_dir =
        cfg.paths.run_dir.as_deref().ok_or_else(|| CliError::Validation(vec!["paths.run_dir is required".into()]))?;
    fs::create_dir_all(run_dir).map_err(|e| CliError::Runtime(format!("{}: {e}", run_dir.display())))?;
    let _lock = RunLock::acquire(run_dir)?;
    let ctx = stages::Context { config: cfg, run_dir, force };
    let mut done = Vec::new();
    for stage in command.stages() {
        done.push((stage, stages::run_stage(stage, &ctx)?));
    }
    Ok(done)
}

/// Parse `args` (including the program name) and run. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().try_init();

    let result = resolve_config(&cli).and_then(|cfg| {
        if let Some(n) = cfg.threads {
            // Only the first call in a process takes effect.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        execute(&cfg, cli.command, cli.force)
    });
    match result {
        Ok(done) => {
            for (stage, outcome) in done {
                match outcome {
                    Outcome::Ran => eprintln!("{stage}: done"),
                    Outcome::UpToDate => eprintln!("{stage}: up to date"),
                }
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
