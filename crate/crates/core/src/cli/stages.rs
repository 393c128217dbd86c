//! Pipeline stages. Each stage reads its predecessors' artifacts from the run directory and
//! writes its own into `<run_dir>/<stage>/` together with a manifest.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::config::{InputFormat, RunConfig};
use super::CliError;
use crate::coherence::{grid_search, model_coherence, stats_for_model, write_grid_csv, CoherenceReport};
use crate::corpus::{ingest, read_csv, read_documents, read_jsonl, write_documents, Document, Month};
use crate::entities::{
    aggregate, quadrants, rank_by_delta_z, resolve_authors, venue_groups, write_quadrants_csv, write_rankings_csv,
};
use crate::innovation::{
    novelty_effectiveness, read_scores_csv, valid_points, write_scores_csv, InnovationScorer, RegressionSummary,
};
use crate::lda::{fit_online, infer_corpus, top_words, TopicDistribution, TopicModel};
use crate::textprep::{Tokenizer, Vocabulary};
use crate::trends::{all_topic_series, group_series, moving_average, pearson, write_series_csv, GroupMap, TopicSeries};

pub const MANIFEST_FORMAT: &str = "topic-resonance/manifest";
pub const MANIFEST_VERSION: u32 = 1;
/// Words per topic written to `train/top_words.csv`.
pub const TOP_WORDS_EXPORT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Ingest,
    Preprocess,
    Train,
    Coherence,
    Trends,
    Innovation,
    Entities,
    Export,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Ingest,
        Stage::Preprocess,
        Stage::Train,
        Stage::Coherence,
        Stage::Trends,
        Stage::Innovation,
        Stage::Entities,
        Stage::Export,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Preprocess => "preprocess",
            Stage::Train => "train",
            Stage::Coherence => "coherence",
            Stage::Trends => "trends",
            Stage::Innovation => "innovation",
            Stage::Entities => "entities",
            Stage::Export => "export",
        }
    }

    /// Stages whose artifacts this one reads.
    pub fn requires(self) -> &'static [Stage] {
        match self {
            Stage::Ingest => &[],
            Stage::Preprocess => &[Stage::Ingest],
            Stage::Train => &[Stage::Ingest, Stage::Preprocess],
            Stage::Coherence => &[Stage::Ingest, Stage::Preprocess, Stage::Train],
            Stage::Trends | Stage::Innovation => &[Stage::Train],
            Stage::Entities => &[Stage::Ingest, Stage::Innovation],
            Stage::Export => &[
                Stage::Ingest,
                Stage::Preprocess,
                Stage::Train,
                Stage::Coherence,
                Stage::Trends,
                Stage::Innovation,
                Stage::Entities,
            ],
        }
    }

    /// Artifacts of earlier stages read by this one, relative to the run directory.
    fn artifact_inputs(self) -> Vec<String> {
        let files: &[&str] = match self {
            Stage::Ingest => &[],
            Stage::Preprocess => &["ingest/documents.jsonl"],
            Stage::Train => &["ingest/documents.jsonl", "preprocess/vocabulary.json"],
            Stage::Coherence => &["ingest/documents.jsonl", "preprocess/vocabulary.json", "train/model.json"],
            Stage::Trends | Stage::Innovation => &["train/theta.csv"],
            Stage::Entities => &["ingest/documents.jsonl", "innovation/scores.csv"],
            Stage::Export => &[
                "ingest/manifest.json",
                "preprocess/manifest.json",
                "train/manifest.json",
                "coherence/manifest.json",
                "trends/manifest.json",
                "innovation/manifest.json",
                "entities/manifest.json",
            ],
        };
        files.iter().map(|s| s.to_string()).collect()
    }

    /// Configuration this stage depends on; changes to it make the stage stale.
    fn config_slice(self, cfg: &RunConfig) -> Value {
        let v = |x: &dyn erased::Ser| x.to_value();
        match self {
            Stage::Ingest => json!({
                "input": cfg.paths.input.as_ref().and_then(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()),
                "format": v(&cfg.input_format()),
                "columns": v(&cfg.columns),
                "ingest": v(&cfg.ingest),
                "tokenizer_min_len": cfg.tokenizer.min_len,
                "custom_stopwords": cfg.tokenizer.stopwords.is_some(),
            }),
            Stage::Preprocess => json!({ "textprep": v(&cfg.textprep) }),
            Stage::Train => json!({ "lda": v(&cfg.effective_lda()) }),
            Stage::Coherence => json!({
                "coherence": v(&cfg.coherence),
                "lda": v(&cfg.effective_lda()),
                "seed": cfg.seed,
            }),
            Stage::Trends => json!({ "trends": v(&cfg.trends), "group_map": cfg.paths.group_map.is_some() }),
            Stage::Innovation => json!({ "innovation": v(&cfg.innovation) }),
            Stage::Entities => json!({ "entities": v(&cfg.entities), "window_months": cfg.innovation.window_months }),
            Stage::Export => json!({}),
        }
    }

    /// Files outside the run directory read by this stage, keyed by a stable label.
    fn external_inputs(self, cfg: &RunConfig) -> Vec<(String, PathBuf)> {
        let mut out = Vec::new();
        match self {
            Stage::Ingest => {
                if let Some(p) = &cfg.paths.input {
                    out.push(("input".to_string(), p.clone()));
                }
                if let Some(p) = &cfg.tokenizer.stopwords {
                    out.push(("stopwords".to_string(), p.clone()));
                }
            }
            Stage::Trends => {
                if let Some(p) = &cfg.paths.group_map {
                    out.push(("group_map".to_string(), p.clone()));
                }
            }
            _ => {}
        }
        out
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

mod erased {
    use serde::Serialize;
    use serde_json::Value;

    pub trait Ser {
        fn to_value(&self) -> Value;
    }

    impl<T: Serialize> Ser for T {
        fn to_value(&self) -> Value {
            serde_json::to_value(self).expect("config values serialize")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub stage: String,
    pub tool_version: String,
    pub config_hash: String,
    /// Effective run configuration, minus machine-specific settings.
    pub config: Value,
    /// sha256 of every file read, keyed by run-relative path or input label.
    pub inputs: BTreeMap<String, String>,
    /// sha256 of every file written.
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    let mut hasher = Sha256::new();
    std::io::copy(&mut File::open(path)?, &mut hasher)?;
    Ok(hex::encode(hasher.finalize()))
}

/// Config as echoed into manifests: no run directory, thread count or absolute paths.
fn config_echo(cfg: &RunConfig) -> Value {
    let mut c = cfg.clone();
    c.threads = None;
    c.paths.run_dir = None;
    let name = |p: &Option<PathBuf>| p.as_ref().and_then(|p| p.file_name()).map(PathBuf::from);
    c.paths.input = name(&c.paths.input);
    c.paths.group_map = name(&c.paths.group_map);
    c.tokenizer.stopwords = name(&c.tokenizer.stopwords);
    c.lda = c.effective_lda();
    serde_json::to_value(c).expect("config serializes")
}

pub struct Context<'a> {
    pub config: &'a RunConfig,
    pub run_dir: &'a Path,
    pub force: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ran,
    UpToDate,
}

fn runtime<E: fmt::Display>(stage: Stage) -> impl Fn(E) -> CliError {
    move |e| CliError::Runtime(format!("{stage}: {e}"))
}

fn manifest_path(run_dir: &Path, stage: Stage) -> PathBuf {
    run_dir.join(stage.name()).join("manifest.json")
}

pub fn read_manifest(run_dir: &Path, stage: Stage) -> Option<Manifest> {
    let text = fs::read_to_string(manifest_path(run_dir, stage)).ok()?;
    serde_json::from_str(&text).ok()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), String> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| format!("{}: {e}", path.display()))?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| e.to_string())?;
    w.write_all(b"\n").map_err(|e| e.to_string())?;
    w.flush().map_err(|e| e.to_string())
}

fn create(path: &Path) -> Result<BufWriter<File>, String> {
    File::create(path).map(BufWriter::new).map_err(|e| format!("{}: {e}", path.display()))
}

fn open(path: &Path) -> Result<BufReader<File>, String> {
    File::open(path).map(BufReader::new).map_err(|e| format!("{}: {e}", path.display()))
}

/// Run one stage unless its manifest shows it is current.
pub fn run_stage(stage: Stage, ctx: &Context) -> Result<Outcome, CliError> {
    for &dep in stage.requires() {
        if read_manifest(ctx.run_dir, dep).is_none() {
            return Err(CliError::MissingArtifact {
                stage: dep.name(),
                detail: format!("`{stage}` needs the output of `{dep}`; run `topic-resonance {dep}` first"),
            });
        }
    }
    let mut inputs = BTreeMap::new();
    for rel in stage.artifact_inputs() {
        let path = ctx.run_dir.join(&rel);
        let hash = sha256_file(&path).map_err(|_| CliError::MissingArtifact {
            stage: stage.requires().iter().find(|d| rel.starts_with(d.name())).map_or("unknown", |d| d.name()),
            detail: format!("`{stage}` cannot read {}", path.display()),
        })?;
        inputs.insert(rel, hash);
    }
    for (label, path) in stage.external_inputs(ctx.config) {
        let hash =
            sha256_file(&path).map_err(|e| CliError::Validation(vec![format!("{label} {}: {e}", path.display())]))?;
        inputs.insert(label, hash);
    }
    let config_hash = sha256_hex(serde_json::to_string(&stage.config_slice(ctx.config)).expect("json").as_bytes());

    let out_dir = ctx.run_dir.join(stage.name());
    if !ctx.force {
        if let Some(m) = read_manifest(ctx.run_dir, stage) {
            let outputs_intact =
                m.outputs.iter().all(|(f, h)| sha256_file(&out_dir.join(f)).map(|x| x == *h).unwrap_or(false));
            if m.config_hash == config_hash && m.inputs == inputs && outputs_intact {
                log::info!("{stage}: up to date");
                return Ok(Outcome::UpToDate);
            }
        }
    }

    fs::create_dir_all(&out_dir).map_err(runtime(stage))?;
    let _ = fs::remove_file(manifest_path(ctx.run_dir, stage));
    let started = Instant::now();
    let files = match stage {
        Stage::Ingest => ingest_stage(ctx, &out_dir),
        Stage::Preprocess => preprocess_stage(ctx, &out_dir),
        Stage::Train => train_stage(ctx, &out_dir),
        Stage::Coherence => coherence_stage(ctx, &out_dir),
        Stage::Trends => trends_stage(ctx, &out_dir),
        Stage::Innovation => innovation_stage(ctx, &out_dir),
        Stage::Entities => entities_stage(ctx, &out_dir),
        Stage::Export => export_stage(ctx, &out_dir),
    }
    .map_err(runtime(stage))?;
    let elapsed = started.elapsed();

    let mut outputs = BTreeMap::new();
    for f in files {
        outputs.insert(f.clone(), sha256_file(&out_dir.join(&f)).map_err(runtime(stage))?);
    }
    let manifest = Manifest {
        format: MANIFEST_FORMAT.into(),
        version: MANIFEST_VERSION,
        stage: stage.name().into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        config_hash,
        config: config_echo(ctx.config),
        inputs,
        outputs,
    };
    write_json(&manifest_path(ctx.run_dir, stage), &manifest).map_err(runtime(stage))?;
    fs::write(out_dir.join("timings.txt"), format!("{stage}\t{:.3}s\n", elapsed.as_secs_f64()))
        .map_err(runtime(stage))?;
    log::info!("{stage}: done in {:.2?}", elapsed);
    Ok(Outcome::Ran)
}

fn load_documents(run_dir: &Path) -> Result<Vec<Document>, String> {
    read_documents(open(&run_dir.join("ingest/documents.jsonl"))?).map_err(|e| e.to_string())
}

fn load_vocabulary(run_dir: &Path) -> Result<Vocabulary, String> {
    Vocabulary::read_sidecar(open(&run_dir.join("preprocess/vocabulary.json"))?).map_err(|e| e.to_string())
}

fn load_model(run_dir: &Path) -> Result<TopicModel, String> {
    TopicModel::read_json(open(&run_dir.join("train/model.json"))?).map_err(|e| e.to_string())
}

fn ingest_stage(ctx: &Context, out: &Path) -> Result<Vec<String>, String> {
    let cfg = ctx.config;
    let input = cfg.paths.input.as_ref().ok_or("paths.input is not set")?;
    let tokenizer = match &cfg.tokenizer.stopwords {
        Some(p) => {
            Tokenizer::from_stopword_file(p, cfg.tokenizer.min_len).map_err(|e| format!("{}: {e}", p.display()))?
        }
        None => Tokenizer::default().with_min_len(cfg.tokenizer.min_len),
    };
    let records = match cfg.input_format() {
        Some(InputFormat::Jsonl) => read_jsonl(open(input)?, &cfg.columns),
        _ => read_csv(open(input)?, &cfg.columns),
    }
    .map_err(|e| e.to_string())?;
    let (docs, report) = ingest(records, &cfg.ingest, &tokenizer);
    log::info!(
        "ingest: {} records, {} without abstract, {} without date, {} retained",
        report.total,
        report.excluded_no_abstract,
        report.excluded_no_date,
        report.retained
    );
    if docs.is_empty() {
        return Err("no documents retained".into());
    }
    let mut w = create(&out.join("documents.jsonl"))?;
    write_documents(&mut w, &docs).map_err(|e| e.to_string())?;
    write_json(&out.join("ingest_report.json"), &report)?;
    Ok(vec!["documents.jsonl".into(), "ingest_report.json".into()])
}

fn preprocess_stage(ctx: &Context, out: &Path) -> Result<Vec<String>, String> {
    let docs = load_documents(ctx.run_dir)?;
    let tokens: Vec<&[String]> = docs.iter().map(|d| d.tokens.as_slice()).collect();
    let vocab = Vocabulary::build(&tokens, ctx.config.textprep.df_max, ctx.config.textprep.tfidf_min)
        .map_err(|e| e.to_string())?;
    let empty = docs.iter().filter(|d| vocab.to_bow(&d.tokens).is_empty()).count();
    vocab.write_terms(create(&out.join("vocabulary.txt"))?).map_err(|e| e.to_string())?;
    vocab.write_sidecar(create(&out.join("vocabulary.json"))?).map_err(|e| e.to_string())?;
    write_json(
        &out.join("preprocess_report.json"),
        &json!({
            "n_docs": docs.len(),
            "n_terms": vocab.len(),
            "docs_without_terms": empty,
            "fingerprint": vocab.fingerprint(),
        }),
    )?;
    Ok(vec!["vocabulary.txt".into(), "vocabulary.json".into(), "preprocess_report.json".into()])
}

/// `doc_id, month, from_prior, topic_0 … topic_{K-1}`.
fn write_theta_csv(path: &Path, docs: &[Document], thetas: &[TopicDistribution]) -> Result<(), String> {
    let k = thetas.first().map_or(0, |t| t.theta.len());
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut header = vec!["doc_id".to_string(), "month".into(), "from_prior".into()];
    header.extend((0..k).map(|t| format!("topic_{t}")));
    w.write_record(&header).map_err(|e| e.to_string())?;
    for (d, t) in docs.iter().zip(thetas) {
        let mut row = vec![d.id.clone(), d.month.to_string(), t.from_prior.to_string()];
        row.extend(t.theta.iter().map(|x| x.to_string()));
        w.write_record(&row).map_err(|e| e.to_string())?;
    }
    w.flush().map_err(|e| e.to_string())
}

pub struct ThetaTable {
    pub ids: Vec<String>,
    pub months: Vec<Month>,
    pub thetas: Vec<Vec<f64>>,
}

pub fn read_theta_csv(path: &Path) -> Result<ThetaTable, String> {
    let mut r = csv::Reader::from_reader(open(path)?);
    let mut table = ThetaTable { ids: Vec::new(), months: Vec::new(), thetas: Vec::new() };
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let bad = |m: String| format!("{} row {}: {m}", path.display(), i + 2);
        table.ids.push(rec[0].to_string());
        table.months.push(rec[1].parse().map_err(|e: crate::corpus::CorpusError| bad(e.to_string()))?);
        let theta =
            rec.iter().skip(3).map(|x| x.parse::<f64>().map_err(|e| bad(e.to_string()))).collect::<Result<_, _>>()?;
        table.thetas.push(theta);
    }
    Ok(table)
}

fn train_stage(ctx: &Context, out: &Path) -> Result<Vec<String>, String> {
    let docs = load_documents(ctx.run_dir)?;
    let vocab = load_vocabulary(ctx.run_dir)?;
    let bows: Vec<_> = docs.iter().map(|d| vocab.to_bow(&d.tokens)).collect();
    let config = ctx.config.effective_lda();
    let model = fit_online(&bows, &vocab.signature(), &config).map_err(|e| e.to_string())?;
    let thetas = infer_corpus(&bows, &model).map_err(|e| e.to_string())?;

    model.write_json(create(&out.join("model.json"))?).map_err(|e| e.to_string())?;
    write_theta_csv(&out.join("theta.csv"), &docs, &thetas)?;
    let mut w = csv::Writer::from_writer(create(&out.join("top_words.csv"))?);
    w.write_record(["topic", "rank", "term", "weight"]).map_err(|e| e.to_string())?;
    for t in 0..model.num_topics() {
        for (rank, (id, weight)) in
            top_words(&model, t, TOP_WORDS_EXPORT).map_err(|e| e.to_string())?.into_iter().enumerate()
        {
            let term = vocab.term(id).unwrap_or_default();
            w.write_record([t.to_string(), (rank + 1).to_string(), term.to_string(), weight.to_string()])
                .map_err(|e| e.to_string())?;
        }
    }
    w.flush().map_err(|e| e.to_string())?;
    Ok(vec!["model.json".into(), "theta.csv".into(), "top_words.csv".into()])
}

#[derive(Serialize)]
struct CoherenceArtifact<'a> {
    report: &'a CoherenceReport,
    top_terms: Vec<Vec<&'a str>>,
}

fn coherence_stage(ctx: &Context, out: &Path) -> Result<Vec<String>, String> {
    let cfg = ctx.config;
    let docs = load_documents(ctx.run_dir)?;
    let vocab = load_vocabulary(ctx.run_dir)?;
    let model = load_model(ctx.run_dir)?;
    let settings = cfg.coherence.settings();
    let encoded: Vec<Vec<u32>> = docs.iter().map(|d| vocab.encode(&d.tokens)).collect();
    let stats = stats_for_model(&model, &encoded, &settings).map_err(|e| e.to_string())?;
    let mut report = model_coherence(&model, &stats, settings.topn).map_err(|e| e.to_string())?;
    report.echo.df_max = Some(cfg.textprep.df_max);
    report.echo.tfidf_min = Some(cfg.textprep.tfidf_min);
    let top_terms =
        report.top_words.iter().map(|ws| ws.iter().map(|&w| vocab.term(w).unwrap_or_default()).collect()).collect();
    write_json(&out.join("coherence.json"), &CoherenceArtifact { report: &report, top_terms })?;
    let mut files = vec!["coherence.json".to_string()];

    if let Some(grid) = &cfg.coherence.grid {
        let tokens: Vec<Vec<String>> = docs.iter().map(|d| d.tokens.clone()).collect();
        let seed = cfg.seed.ok_or("seed is not set")?;
        let outcome = grid_search(&tokens, grid, &cfg.effective_lda(), &settings, seed).map_err(|e| e.to_string())?;
        write_grid_csv(create(&out.join("grid.csv"))?, &outcome.rows).map_err(|e| e.to_string())?;
        files.push("grid.csv".into());
    }
    Ok(files)
}

fn trends_stage(ctx: &Context, out: &Path) -> Result<Vec<String>, String> {
    let cfg = &ctx.config.trends;
    let table = read_theta_csv(&ctx.run_dir.join("train/theta.csv"))?;
    let mut series = all_topic_series(&table.thetas, &table.months).map_err(|e| e.to_string())?;
    if let Some(path) = &ctx.config.paths.group_map {
        let groups = GroupMap::read_csv(open(path)?).map_err(|e| e.to_string())?;
        for label in groups.labels() {
            series.push(group_series(&table.thetas, &table.months, &groups, label).map_err(|e| e.to_string())?);
        }
    }
    if cfg.smoothing_width > 1 {
        series = series
            .iter()
            .map(|s| moving_average(s, cfg.smoothing_width))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
    }
    write_series_csv(create(&out.join("series.csv"))?, &series).map_err(|e| e.to_string())?;
    let mut files = vec!["series.csv".to_string()];

    if !cfg.correlate.is_empty() {
        let find = |id: &str| -> Result<&TopicSeries, String> {
            series.iter().find(|s| s.id == id).ok_or_else(|| format!("trends.correlate: unknown series `{id}`"))
        };
        let mut w = csv::Writer::from_writer(create(&out.join("correlations.csv"))?);
        w.write_record(["series_a", "series_b", "pearson_r", "status"]).map_err(|e| e.to_string())?;
        for [a, b] in &cfg.correlate {
            let (r, status) = match pearson(find(a)?, find(b)?) {
                Ok(r) => (r.to_string(), "ok".to_string()),
                Err(e) => (String::new(), format!("failed: {e}")),
            };
            w.write_record([a.as_str(), b.as_str(), &r, &status]).map_err(|e| e.to_string())?;
        }
        w.flush().map_err(|e| e.to_string())?;
        files.push("correlations.csv".into());
    }
    Ok(files)
}

fn innovation_stage(ctx: &Context, out: &Path) -> Result<Vec<String>, String> {
    let cfg = &ctx.config.innovation;
    let table = read_theta_csv(&ctx.run_dir.join("train/theta.csv"))?;
    let scorer = InnovationScorer::new(&table.thetas, &table.months, cfg.smoothing).map_err(|e| e.to_string())?;
    let scores = scorer.score_all(&table.ids, cfg.window_months).map_err(|e| e.to_string())?;
    write_scores_csv(create(&out.join("scores.csv"))?, &scores).map_err(|e| e.to_string())?;
    let fit = novelty_effectiveness(&valid_points(&scores)).map_err(|e| format!("novelty effectiveness: {e}"))?;
    write_json(&out.join("regression.json"), &RegressionSummary::new(&fit, cfg.window_months))?;
    Ok(vec!["scores.csv".into(), "regression.json".into()])
}

fn entities_stage(ctx: &Context, out: &Path) -> Result<Vec<String>, String> {
    let cfg = &ctx.config.entities;
    let docs = load_documents(ctx.run_dir)?;
    let scores =
        read_scores_csv(open(&ctx.run_dir.join("innovation/scores.csv"))?, ctx.config.innovation.window_months)
            .map_err(|e| e.to_string())?;

    let authors = resolve_authors(&docs, cfg.top_authors, cfg.threshold);
    log::info!("entities: {} author spellings selected, {} identities", authors.selected, authors.identities.len());
    let author_profiles = aggregate(&authors.groups, &docs, &scores).map_err(|e| format!("authors: {e}"))?;
    write_rankings_csv(create(&out.join("authors.csv"))?, &rank_by_delta_z(&author_profiles))
        .map_err(|e| e.to_string())?;
    write_quadrants_csv(create(&out.join("author_quadrants.csv"))?, &quadrants(&author_profiles, &cfg.quadrants))
        .map_err(|e| e.to_string())?;

    let mut w = csv::Writer::from_writer(create(&out.join("author_identities.csv"))?);
    w.write_record(["name", "n_variants", "variants"]).map_err(|e| e.to_string())?;
    for id in &authors.identities {
        let variants: Vec<&str> = id.variants.iter().map(String::as_str).collect();
        w.write_record([id.display.as_str(), &variants.len().to_string(), &variants.join(" | ")])
            .map_err(|e| e.to_string())?;
    }
    w.flush().map_err(|e| e.to_string())?;

    let venue_profiles =
        aggregate(&venue_groups(&docs, cfg.top_venues), &docs, &scores).map_err(|e| format!("venues: {e}"))?;
    write_rankings_csv(create(&out.join("venues.csv"))?, &rank_by_delta_z(&venue_profiles))
        .map_err(|e| e.to_string())?;
    Ok(vec!["authors.csv".into(), "author_quadrants.csv".into(), "author_identities.csv".into(), "venues.csv".into()])
}

fn read_json_value(path: &Path) -> Result<Value, String> {
    serde_json::from_reader(open(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn export_stage(ctx: &Context, out: &Path) -> Result<Vec<String>, String> {
    let dir = ctx.run_dir;
    let ingest = read_json_value(&dir.join("ingest/ingest_report.json"))?;
    let prep = read_json_value(&dir.join("preprocess/preprocess_report.json"))?;
    let coherence = read_json_value(&dir.join("coherence/coherence.json"))?;
    let regression = read_json_value(&dir.join("innovation/regression.json"))?;
    let scores = read_scores_csv(open(&dir.join("innovation/scores.csv"))?, ctx.config.innovation.window_months)
        .map_err(|e| e.to_string())?;
    let count_rows =
        |rel: &str| -> Result<usize, String> { Ok(csv::Reader::from_reader(open(&dir.join(rel))?).records().count()) };
    let mut stages = serde_json::Map::new();
    for stage in Stage::ALL.iter().filter(|s| **s != Stage::Export) {
        let m = read_manifest(dir, *stage).ok_or_else(|| format!("missing manifest for {stage}"))?;
        stages.insert(stage.name().into(), json!({ "config_hash": m.config_hash, "outputs": m.outputs }));
    }
    let summary = json!({
        "documents": {
            "total": ingest["total"],
            "excluded_no_abstract": ingest["excluded_no_abstract"],
            "excluded_no_date": ingest["excluded_no_date"],
            "retained": ingest["retained"],
        },
        "vocabulary_size": prep["n_terms"],
        "num_topics": coherence["report"]["echo"]["num_topics"],
        "mean_coherence": coherence["report"]["mean"],
        "innovation": {
            "window_months": ctx.config.innovation.window_months,
            "valid_scores": scores.iter().filter(|s| s.valid).count(),
            "novelty_effectiveness": regression["slope"],
            "intercept": regression["intercept"],
        },
        "authors_ranked": count_rows("entities/authors.csv")?,
        "venues_ranked": count_rows("entities/venues.csv")?,
        "stages": stages,
    });
    write_json(&out.join("summary.json"), &summary)?;
    Ok(vec!["summary.json".into()])
}
