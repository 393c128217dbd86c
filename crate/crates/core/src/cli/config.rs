//! Run configuration: a TOML file plus `key=value` overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coherence::{CoherenceConfig, GridSpec, DEFAULT_EPSILON, DEFAULT_TOPN, DEFAULT_WINDOW};
use crate::corpus::{ColumnMap, IngestConfig};
use crate::entities::{QuadrantSpec, DEFAULT_THRESHOLD, DEFAULT_TOP_AUTHORS};
use crate::innovation::{DEFAULT_SMOOTHING, DEFAULT_WINDOW_MONTHS};
use crate::lda::LdaConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsConfig {
    pub input: Option<PathBuf>,
    /// Inferred from the input extension when absent (`.jsonl` / `.json` → JSON lines).
    pub format: Option<InputFormat>,
    pub run_dir: Option<PathBuf>,
    /// Two-column CSV `topic_id,group_label`.
    pub group_map: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TokenizerConfig {
    /// One word per line; the bundled English list when absent.
    pub stopwords: Option<PathBuf>,
    pub min_len: usize,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig { stopwords: None, min_len: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TextprepConfig {
    pub df_max: f64,
    pub tfidf_min: f64,
}

impl Default for TextprepConfig {
    fn default() -> Self {
        TextprepConfig { df_max: 0.5, tfidf_min: 0.0075 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoherenceSection {
    pub window_size: usize,
    pub topn: usize,
    pub epsilon: f64,
    /// When present the coherence stage also runs this grid search.
    pub grid: Option<GridSpec>,
}

impl Default for CoherenceSection {
    fn default() -> Self {
        CoherenceSection { window_size: DEFAULT_WINDOW, topn: DEFAULT_TOPN, epsilon: DEFAULT_EPSILON, grid: None }
    }
}

impl CoherenceSection {
    pub fn settings(&self) -> CoherenceConfig {
        CoherenceConfig { window_size: self.window_size, topn: self.topn, epsilon: self.epsilon }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrendsConfig {
    /// Centered moving-average width in months; 1 disables smoothing.
    pub smoothing_width: usize,
    /// Pairs of series ids (`topic_3`, `group_vision`) to correlate.
    pub correlate: Vec<[String; 2]>,
}

impl Default for TrendsConfig {
    fn default() -> Self {
        TrendsConfig { smoothing_width: 1, correlate: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InnovationConfig {
    pub window_months: u32,
    pub smoothing: f64,
}

impl Default for InnovationConfig {
    fn default() -> Self {
        InnovationConfig { window_months: DEFAULT_WINDOW_MONTHS, smoothing: DEFAULT_SMOOTHING }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EntitiesConfig {
    pub top_authors: usize,
    pub threshold: f64,
    /// Keep only the most frequent venues (ties included); all venues when absent.
    pub top_venues: Option<usize>,
    pub quadrants: QuadrantSpec,
}

impl Default for EntitiesConfig {
    fn default() -> Self {
        EntitiesConfig {
            top_authors: DEFAULT_TOP_AUTHORS,
            threshold: DEFAULT_THRESHOLD,
            top_venues: None,
            quadrants: QuadrantSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Required. Copied into `lda.seed` and used for grid cell seeds.
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub paths: PathsConfig,
    pub columns: ColumnMap,
    pub ingest: IngestConfig,
    pub tokenizer: TokenizerConfig,
    pub textprep: TextprepConfig,
    pub lda: LdaConfig,
    pub coherence: CoherenceSection,
    pub trends: TrendsConfig,
    pub innovation: InnovationConfig,
    pub entities: EntitiesConfig,
}

/// Parse the right-hand side of an override as a TOML value, falling back to a plain string.
fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Apply `a.b.c=value` to a TOML table, creating intermediate tables.
pub fn apply_override(root: &mut toml::Table, assignment: &str) -> Result<(), String> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| format!("override `{assignment}` is not KEY=VALUE"))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(format!("override key `{key}` is malformed"));
    }
    let mut table = root;
    for part in &parts[..parts.len() - 1] {
        let entry = table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry.as_table_mut().ok_or_else(|| format!("override `{key}`: `{part}` is not a table"))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), parse_value(raw.trim()));
    Ok(())
}

impl RunConfig {
    /// Parse TOML text and apply overrides in order.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self, Vec<String>> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| vec![format!("config: {}", e.message())])?;
        let errors: Vec<String> = overrides.iter().filter_map(|o| apply_override(&mut table, o).err()).collect();
        if !errors.is_empty() {
            return Err(errors);
        }
        toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| vec![format!("config: {}", e.message())])
    }

    /// Read a config file; relative paths inside it are resolved against its directory.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, Vec<String>> {
        let text =
            std::fs::read_to_string(path).map_err(|e| vec![format!("cannot read config {}: {e}", path.display())])?;
        let mut config = Self::from_toml(&text, overrides)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        config.resolve_paths(&base);
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        fix(&mut self.paths.input);
        fix(&mut self.paths.run_dir);
        fix(&mut self.paths.group_map);
        fix(&mut self.tokenizer.stopwords);
    }

    pub fn input_format(&self) -> Option<InputFormat> {
        self.paths.format.or_else(|| {
            let ext = self.paths.input.as_ref()?.extension()?.to_str()?.to_ascii_lowercase();
            Some(if ext == "jsonl" || ext == "json" { InputFormat::Jsonl } else { InputFormat::Csv })
        })
    }

    /// LDA settings with the run seed applied.
    pub fn effective_lda(&self) -> LdaConfig {
        LdaConfig { seed: self.seed.unwrap_or(self.lda.seed), ..self.lda.clone() }
    }

    /// Every problem found, not just the first.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        match self.seed {
            None => out.push("seed is required: set `seed` in the config or pass --seed".to_string()),
            Some(s) if self.lda.seed != 0 && self.lda.seed != s => {
                out.push(format!("lda.seed ({}) conflicts with seed ({s}); set only the top-level seed", self.lda.seed))
            }
            _ => {}
        }
        if self.threads == Some(0) {
            out.push("threads must be >= 1".into());
        }
        match &self.paths.input {
            None => out.push("paths.input is required".into()),
            Some(p) if !p.is_file() => out.push(format!("paths.input {} does not exist", p.display())),
            _ => {}
        }
        if self.paths.run_dir.is_none() {
            out.push("paths.run_dir is required (or pass --run-dir)".into());
        }
        for (key, p) in [("paths.group_map", &self.paths.group_map), ("tokenizer.stopwords", &self.tokenizer.stopwords)]
        {
            if let Some(p) = p {
                if !p.is_file() {
                    out.push(format!("{key} {} does not exist", p.display()));
                }
            }
        }
        if let Err(e) = self.ingest.season_map.validate() {
            out.push(format!("ingest.season_map: {e}"));
        }
        if let Some(m) = self.ingest.year_only_month {
            if !(1..=12).contains(&m) {
                out.push(format!("ingest.year_only_month must be 1-12, got {m}"));
            }
        }
        if self.tokenizer.min_len == 0 {
            out.push("tokenizer.min_len must be >= 1".into());
        }
        if !(self.textprep.df_max > 0.0 && self.textprep.df_max <= 1.0) {
            out.push(format!("textprep.df_max must lie in (0, 1], got {}", self.textprep.df_max));
        }
        if !(self.textprep.tfidf_min >= 0.0) {
            out.push(format!("textprep.tfidf_min must be >= 0, got {}", self.textprep.tfidf_min));
        }
        out.extend(self.effective_lda().problems().into_iter().map(|p| format!("lda: {p}")));
        out.extend(self.coherence.settings().problems());
        if let Some(grid) = &self.coherence.grid {
            if grid.is_empty() {
                out.push("coherence.grid has an empty axis".into());
            }
            if grid.df_max.iter().any(|d| !(*d > 0.0 && *d <= 1.0)) {
                out.push("coherence.grid.df_max values must lie in (0, 1]".into());
            }
            if grid.num_topics.iter().any(|k| *k < 2) {
                out.push("coherence.grid.num_topics values must be >= 2".into());
            }
        }
        if self.trends.smoothing_width == 0 || self.trends.smoothing_width.is_multiple_of(2) {
            out.push(format!("trends.smoothing_width must be odd and positive, got {}", self.trends.smoothing_width));
        }
        if self.innovation.window_months == 0 {
            out.push("innovation.window_months must be >= 1".into());
        }
        if !(self.innovation.smoothing >= 0.0 && self.innovation.smoothing < 1.0) {
            out.push(format!("innovation.smoothing must lie in [0, 1), got {}", self.innovation.smoothing));
        }
        if self.entities.top_authors == 0 {
            out.push("entities.top_authors must be >= 1".into());
        }
        if !(self.entities.threshold > 0.0 && self.entities.threshold <= 1.0) {
            out.push(format!("entities.threshold must lie in (0, 1], got {}", self.entities.threshold));
        }
        out
    }
}
