//! Sliding-window co-occurrence statistics, PMI/NPMI and topic coherence, plus the grid search
//! that trains one model per configuration cell and ranks cells by mean coherence.
//!
//! The coherence of a topic is the plain mean of NPMI over all unordered pairs of its top
//! words. It shares a name with, but is simpler than, the indirect-confirmation C_V measure
//! built on cosine similarity of context vectors. Logs are natural.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lda::{fit_online, top_words, AlphaMode, EtaMode, LdaConfig, LdaError, TopicModel};
use crate::textprep::{TextprepError, Vocabulary};

pub const DEFAULT_WINDOW: usize = 10;
pub const DEFAULT_TOPN: usize = 10;
pub const DEFAULT_EPSILON: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CoherenceError {
    #[error("empty corpus: no document has a token")]
    EmptyCorpus,
    #[error("window size must be at least 2, got {0}")]
    WindowTooSmall(usize),
    #[error("term {0} never occurs in any window")]
    ZeroMarginal(u32),
    #[error("term {0} was not tracked when counting windows")]
    UntrackedTerm(u32),
    #[error("NPMI undefined for ({0}, {1}): joint probability plus epsilon is at least 1")]
    UndefinedNpmi(u32, u32),
    #[error("a topic needs at least 2 words, got {0}")]
    TooFewWords(usize),
    #[error("empty grid")]
    EmptyGrid,
    #[error(transparent)]
    Lda(#[from] LdaError),
    #[error(transparent)]
    Textprep(#[from] TextprepError),
}

/// Window counts over token-id streams.
///
/// Every document contributes `len - window + 1` windows of stride 1, or a single window
/// when it is shorter than `window`. Empty documents contribute nothing. Counts are exact
/// integers; probabilities are counts over the total number of windows.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceStats {
    window_size: usize,
    n_windows: u64,
    epsilon: f64,
    tracked: Option<BTreeSet<u32>>,
    single: HashMap<u32, u64>,
    joint: HashMap<(u32, u32), u64>,
}

#[derive(Default)]
struct Counts {
    n_windows: u64,
    single: HashMap<u32, u64>,
    joint: HashMap<(u32, u32), u64>,
}

impl Counts {
    fn merge(mut self, other: Counts) -> Counts {
        self.n_windows += other.n_windows;
        for (k, v) in other.single {
            *self.single.entry(k).or_default() += v;
        }
        for (k, v) in other.joint {
            *self.joint.entry(k).or_default() += v;
        }
        self
    }

    fn add_window(&mut self, present: &[u32]) {
        self.n_windows += 1;
        for (i, &a) in present.iter().enumerate() {
            *self.single.entry(a).or_default() += 1;
            for &b in &present[i + 1..] {
                *self.joint.entry((a, b)).or_default() += 1;
            }
        }
    }

    /// Slide over one document. `present` is kept sorted so pair keys come out ordered.
    fn add_document(&mut self, doc: &[u32], window: usize, tracked: Option<&BTreeSet<u32>>) {
        if doc.is_empty() {
            return;
        }
        let keep = |t: &u32| tracked.is_none_or(|s| s.contains(t));
        let span = window.min(doc.len());
        let mut in_window: HashMap<u32, usize> = HashMap::new();
        for t in doc[..span].iter().filter(|t| keep(t)) {
            *in_window.entry(*t).or_default() += 1;
        }
        let mut present: Vec<u32> = in_window.keys().copied().collect();
        present.sort_unstable();
        self.add_window(&present);
        for start in 1..=doc.len() - span {
            let (out, inc) = (doc[start - 1], doc[start + span - 1]);
            let mut changed = false;
            if keep(&out) {
                let c = in_window.get_mut(&out).expect("outgoing token is in the window");
                *c -= 1;
                if *c == 0 {
                    in_window.remove(&out);
                    changed = true;
                }
            }
            if keep(&inc) {
                let c = in_window.entry(inc).or_default();
                *c += 1;
                changed |= *c == 1;
            }
            if changed {
                present = in_window.keys().copied().collect();
                present.sort_unstable();
            }
            self.add_window(&present);
        }
    }
}

impl CooccurrenceStats {
    /// Count windows over every term.
    pub fn count(docs: &[Vec<u32>], window_size: usize, epsilon: f64) -> Result<Self, CoherenceError> {
        Self::build(docs, window_size, epsilon, None)
    }

    /// Count windows, keeping single and joint counts only for `terms`. The window total
    /// still covers the whole corpus, so probabilities equal those of [`Self::count`].
    pub fn count_for(
        docs: &[Vec<u32>],
        window_size: usize,
        epsilon: f64,
        terms: BTreeSet<u32>,
    ) -> Result<Self, CoherenceError> {
        Self::build(docs, window_size, epsilon, Some(terms))
    }

    fn build(
        docs: &[Vec<u32>],
        window_size: usize,
        epsilon: f64,
        tracked: Option<BTreeSet<u32>>,
    ) -> Result<Self, CoherenceError> {
        if window_size < 2 {
            return Err(CoherenceError::WindowTooSmall(window_size));
        }
        let counts = docs
            .par_iter()
            .fold(Counts::default, |mut acc, d| {
                acc.add_document(d, window_size, tracked.as_ref());
                acc
            })
            .reduce(Counts::default, Counts::merge);
        if counts.n_windows == 0 {
            return Err(CoherenceError::EmptyCorpus);
        }
        Ok(CooccurrenceStats {
            window_size,
            n_windows: counts.n_windows,
            epsilon,
            tracked,
            single: counts.single,
            joint: counts.joint,
        })
    }

    pub fn window_size(&self) -> usize {
        self.window_size
    }

    pub fn n_windows(&self) -> u64 {
        self.n_windows
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn check(&self, t: u32) -> Result<(), CoherenceError> {
        match &self.tracked {
            Some(s) if !s.contains(&t) => Err(CoherenceError::UntrackedTerm(t)),
            _ => Ok(()),
        }
    }

    /// Windows containing `t`.
    pub fn single_count(&self, t: u32) -> Result<u64, CoherenceError> {
        self.check(t)?;
        Ok(self.single.get(&t).copied().unwrap_or(0))
    }

    /// Windows containing both terms. Symmetric; `joint_count(t, t)` is `single_count(t)`.
    pub fn joint_count(&self, a: u32, b: u32) -> Result<u64, CoherenceError> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return self.single_count(a);
        }
        Ok(self.joint.get(&(a.min(b), a.max(b))).copied().unwrap_or(0))
    }

    pub fn p(&self, t: u32) -> Result<f64, CoherenceError> {
        Ok(self.single_count(t)? as f64 / self.n_windows as f64)
    }

    pub fn p_joint(&self, a: u32, b: u32) -> Result<f64, CoherenceError> {
        Ok(self.joint_count(a, b)? as f64 / self.n_windows as f64)
    }
}

/// `ln((P(a,b) + ε) / (P(a) P(b)))`.
pub fn pmi(a: u32, b: u32, stats: &CooccurrenceStats) -> Result<f64, CoherenceError> {
    let pa = stats.p(a)?;
    let pb = stats.p(b)?;
    for (t, p) in [(a, pa), (b, pb)] {
        if p == 0.0 {
            return Err(CoherenceError::ZeroMarginal(t));
        }
    }
    Ok(((stats.p_joint(a, b)? + stats.epsilon) / (pa * pb)).ln())
}

/// PMI divided by `-ln(P(a,b) + ε)`.
pub fn npmi(a: u32, b: u32, stats: &CooccurrenceStats) -> Result<f64, CoherenceError> {
    let value = pmi(a, b, stats)?;
    let pe = stats.p_joint(a, b)? + stats.epsilon;
    if pe >= 1.0 {
        return Err(CoherenceError::UndefinedNpmi(a, b));
    }
    Ok(value / -pe.ln())
}

/// Mean NPMI over the `n(n-1)/2` unordered pairs of `words`.
pub fn topic_coherence(words: &[u32], stats: &CooccurrenceStats) -> Result<f64, CoherenceError> {
    let n = words.len();
    if n < 2 {
        return Err(CoherenceError::TooFewWords(n));
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            total += npmi(words[i], words[j], stats)?;
        }
    }
    Ok(2.0 / (n * (n - 1)) as f64 * total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoherenceConfig {
    pub window_size: usize,
    pub topn: usize,
    pub epsilon: f64,
}

impl Default for CoherenceConfig {
    fn default() -> Self {
        CoherenceConfig { window_size: DEFAULT_WINDOW, topn: DEFAULT_TOPN, epsilon: DEFAULT_EPSILON }
    }
}

impl CoherenceConfig {
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.window_size < 2 {
            out.push(format!("coherence.window_size must be >= 2, got {}", self.window_size));
        }
        if self.topn < 2 {
            out.push(format!("coherence.topn must be >= 2, got {}", self.topn));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            out.push(format!("coherence.epsilon must be in (0, 1), got {}", self.epsilon));
        }
        out
    }
}

/// Settings that produced a coherence report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEcho {
    pub num_topics: usize,
    pub df_max: Option<f64>,
    pub tfidf_min: Option<f64>,
    pub alpha_mode: AlphaMode,
    pub eta_mode: EtaMode,
    pub window_size: usize,
    pub topn: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub per_topic: Vec<f64>,
    pub mean: f64,
    pub top_words: Vec<Vec<u32>>,
    pub echo: ReportEcho,
}

/// The `topn` highest-weight term ids of every topic.
pub fn model_top_words(model: &TopicModel, topn: usize) -> Result<Vec<Vec<u32>>, LdaError> {
    (0..model.num_topics()).map(|k| Ok(top_words(model, k, topn)?.into_iter().map(|(t, _)| t).collect())).collect()
}

/// Count windows over `docs`, tracking only the top words of `model`.
pub fn stats_for_model(
    model: &TopicModel,
    docs: &[Vec<u32>],
    config: &CoherenceConfig,
) -> Result<CooccurrenceStats, CoherenceError> {
    let terms = model_top_words(model, config.topn)?.into_iter().flatten().collect();
    CooccurrenceStats::count_for(docs, config.window_size, config.epsilon, terms)
}

pub fn model_coherence(
    model: &TopicModel,
    stats: &CooccurrenceStats,
    topn: usize,
) -> Result<CoherenceReport, CoherenceError> {
    let top = model_top_words(model, topn)?;
    let per_topic = top.iter().map(|w| topic_coherence(w, stats)).collect::<Result<Vec<_>, _>>()?;
    let mean = per_topic.iter().sum::<f64>() / per_topic.len() as f64;
    let cfg = model.config();
    Ok(CoherenceReport {
        per_topic,
        mean,
        top_words: top,
        echo: ReportEcho {
            num_topics: model.num_topics(),
            df_max: None,
            tfidf_min: None,
            alpha_mode: cfg.alpha,
            eta_mode: cfg.eta,
            window_size: stats.window_size(),
            topn,
        },
    })
}

/// Cartesian product of configuration values. Cells are enumerated with `df_max` outermost
/// and `eta` innermost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub df_max: Vec<f64>,
    pub tfidf_min: Vec<f64>,
    pub num_topics: Vec<usize>,
    pub alpha: Vec<AlphaMode>,
    pub eta: Vec<EtaMode>,
}

impl Default for GridSpec {
    /// Sixteen cells at K = 60.
    fn default() -> Self {
        GridSpec {
            df_max: vec![0.5, 1.0],
            tfidf_min: vec![0.0075, 0.015],
            num_topics: vec![60],
            alpha: vec![AlphaMode::Symmetric, AlphaMode::Asymmetric],
            eta: vec![EtaMode::Symmetric, EtaMode::Auto],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub index: usize,
    pub df_max: f64,
    pub tfidf_min: f64,
    pub num_topics: usize,
    pub alpha: AlphaMode,
    pub eta: EtaMode,
}

impl GridSpec {
    pub fn len(&self) -> usize {
        self.df_max.len() * self.tfidf_min.len() * self.num_topics.len() * self.alpha.len() * self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cells(&self) -> Vec<GridCell> {
        let mut out = Vec::with_capacity(self.len());
        for &df_max in &self.df_max {
            for &tfidf_min in &self.tfidf_min {
                for &num_topics in &self.num_topics {
                    for &alpha in &self.alpha {
                        for &eta in &self.eta {
                            out.push(GridCell { index: out.len(), df_max, tfidf_min, num_topics, alpha, eta });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CellStatus {
    Ok,
    Failed(String),
}

impl fmt::Display for CellStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellStatus::Ok => f.write_str("ok"),
            CellStatus::Failed(msg) => write!(f, "failed: {msg}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub cell: GridCell,
    pub seed: u64,
    pub coherence: Option<f64>,
    pub status: CellStatus,
}

#[derive(Debug, Clone)]
pub struct GridOutcome {
    /// One row per cell, best first; failed cells last in cell order.
    pub rows: Vec<GridRow>,
    /// Best model and its report, when any cell succeeded.
    pub best: Option<(GridCell, TopicModel, CoherenceReport)>,
}

impl GridOutcome {
    pub fn best_cell(&self) -> Option<&GridCell> {
        self.best.as_ref().map(|(c, _, _)| c)
    }
}

fn run_cell(
    docs: &[Vec<String>],
    vocab: &Vocabulary,
    cell: &GridCell,
    base: &LdaConfig,
    coherence: &CoherenceConfig,
    seed: u64,
) -> Result<(TopicModel, CoherenceReport), CoherenceError> {
    let encoded: Vec<Vec<u32>> = docs.iter().map(|d| vocab.encode(d)).collect();
    let bows: Vec<_> = docs.iter().map(|d| vocab.to_bow(d)).collect();
    let config = LdaConfig { num_topics: cell.num_topics, alpha: cell.alpha, eta: cell.eta, seed, ..base.clone() };
    let model = fit_online(&bows, &vocab.signature(), &config)?;
    let stats = stats_for_model(&model, &encoded, coherence)?;
    let mut report = model_coherence(&model, &stats, coherence.topn)?;
    report.echo.df_max = Some(cell.df_max);
    report.echo.tfidf_min = Some(cell.tfidf_min);
    Ok((model, report))
}

/// Train and score every cell. Cell `i` trains with seed `run_seed + i`. A failing cell is
/// reported in its row and does not stop the search.
pub fn grid_search(
    docs: &[Vec<String>],
    spec: &GridSpec,
    base: &LdaConfig,
    coherence: &CoherenceConfig,
    run_seed: u64,
) -> Result<GridOutcome, CoherenceError> {
    let cells = spec.cells();
    if cells.is_empty() {
        return Err(CoherenceError::EmptyGrid);
    }
    let mut vocabs: Vec<((f64, f64), Result<Vocabulary, String>)> = Vec::new();
    for c in &cells {
        let key = (c.df_max, c.tfidf_min);
        if !vocabs.iter().any(|(k, _)| *k == key) {
            vocabs.push((key, Vocabulary::build(docs, c.df_max, c.tfidf_min).map_err(|e| e.to_string())));
        }
    }
    let results: Vec<(GridRow, Option<(TopicModel, CoherenceReport)>)> = cells
        .par_iter()
        .map(|cell| {
            let seed = run_seed.wrapping_add(cell.index as u64);
            let vocab = &vocabs.iter().find(|(k, _)| *k == (cell.df_max, cell.tfidf_min)).expect("built above").1;
            let outcome = match vocab {
                Ok(v) => run_cell(docs, v, cell, base, coherence, seed).map_err(|e| e.to_string()),
                Err(e) => Err(e.clone()),
            };
            match outcome {
                Ok((model, report)) => (
                    GridRow { cell: *cell, seed, coherence: Some(report.mean), status: CellStatus::Ok },
                    Some((model, report)),
                ),
                Err(msg) => (GridRow { cell: *cell, seed, coherence: None, status: CellStatus::Failed(msg) }, None),
            }
        })
        .collect();

    let mut order: Vec<usize> = (0..results.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (&results[a].0, &results[b].0);
        match (ra.coherence, rb.coherence) {
            (Some(x), Some(y)) => y.total_cmp(&x).then(ra.cell.num_topics.cmp(&rb.cell.num_topics)),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => std::cmp::Ordering::Equal,
        }
        .then(ra.cell.index.cmp(&rb.cell.index))
    });
    let mut slots: Vec<Option<(GridRow, Option<(TopicModel, CoherenceReport)>)>> =
        results.into_iter().map(Some).collect();
    let mut rows = Vec::with_capacity(slots.len());
    let mut best = None;
    for i in order {
        let (row, fitted) = slots[i].take().expect("each index visited once");
        if best.is_none() {
            if let Some((model, report)) = fitted {
                best = Some((row.cell, model, report));
            }
        }
        rows.push(row);
    }
    Ok(GridOutcome { rows, best })
}

/// CSV with columns `df_max, tfidf_min, K, alpha_mode, eta_mode, coherence, status`.
pub fn write_grid_csv<W: Write>(writer: W, rows: &[GridRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["df_max", "tfidf_min", "K", "alpha_mode", "eta_mode", "coherence", "status"])?;
    for r in rows {
        w.write_record([
            r.cell.df_max.to_string(),
            r.cell.tfidf_min.to_string(),
            r.cell.num_topics.to_string(),
            r.cell.alpha.to_string(),
            r.cell.eta.to_string(),
            r.coherence.map(|c| c.to_string()).unwrap_or_default(),
            r.status.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
