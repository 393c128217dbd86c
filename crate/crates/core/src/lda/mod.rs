//! Latent Dirichlet allocation: generative sampler, online variational Bayes trainer
//! and per-document topic inference.
//!
//! Training follows the stochastic variational scheme: each minibatch runs a per-document
//! fixed-point E-step, forms the minibatch estimate `λ̂ = η + (D / |B|) · sstats`, and blends
//! it into the topic-word parameter with step size `ρ_t = (τ0 + t)^(-κ)`.
//!
//! Topic indices are not canonical across runs; downstream grouping takes a per-model map.

mod prior;
mod sampler;

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::special::{dirichlet_expectation, ln_gamma};
use crate::textprep::{BagOfWords, VocabSignature};

pub use prior::{asymmetric_weights, make_prior, update_dirichlet_prior, AlphaMode, EtaMode, PRIOR_FLOOR};
pub use sampler::{sample_corpus, sample_documents, SampledDocument, SamplerConfig};

pub const MODEL_FORMAT: &str = "topic-resonance/lda-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum LdaError {
    #[error("invalid LDA configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
    #[error("unknown prior mode `{0}`")]
    UnknownPriorMode(String),
    #[error("vocabulary mismatch: {0}")]
    VocabularyMismatch(String),
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("non-finite or non-positive topic-word parameter after update {update}: {detail}")]
    NonFinite { update: u64, detail: String },
    #[error("topic {0} of the generating matrix is degenerate")]
    DegenerateTopic(usize),
    #[error("topic {topic} out of range for a {num_topics}-topic model")]
    TopicOutOfRange { topic: usize, num_topics: usize },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("model file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LdaConfig {
    pub num_topics: usize,
    pub alpha: AlphaMode,
    pub eta: EtaMode,
    pub minibatch_size: usize,
    /// Learning-rate offset τ0.
    pub tau0: f64,
    /// Learning-rate decay κ, in (0.5, 1].
    pub kappa: f64,
    pub passes: usize,
    /// E-step stops once the mean absolute change of γ drops below this.
    pub e_step_tol: f64,
    pub e_step_max_iter: usize,
    pub seed: u64,
    /// Expected document length; only used when sampling synthetic corpora.
    pub xi: f64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            num_topics: 60,
            alpha: AlphaMode::Symmetric,
            eta: EtaMode::Symmetric,
            minibatch_size: 256,
            tau0: 1.0,
            kappa: 0.7,
            passes: 1,
            e_step_tol: 1e-3,
            e_step_max_iter: 100,
            seed: 0,
            xi: 100.0,
        }
    }
}

impl LdaConfig {
    /// All violated constraints, not just the first.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.num_topics < 2 {
            out.push(format!("num_topics must be >= 2, got {}", self.num_topics));
        }
        if !(self.kappa > 0.5 && self.kappa <= 1.0) {
            out.push(format!("kappa must lie in (0.5, 1], got {}", self.kappa));
        }
        if !(self.tau0 >= 0.0) {
            out.push(format!("tau0 must be >= 0, got {}", self.tau0));
        }
        if self.minibatch_size == 0 {
            out.push("minibatch_size must be >= 1".into());
        }
        if self.passes == 0 {
            out.push("passes must be >= 1".into());
        }
        if !(self.e_step_tol > 0.0) {
            out.push(format!("e_step_tol must be > 0, got {}", self.e_step_tol));
        }
        if self.e_step_max_iter == 0 {
            out.push("e_step_max_iter must be >= 1".into());
        }
        if !(self.xi > 0.0) {
            out.push(format!("xi must be > 0, got {}", self.xi));
        }
        out
    }

    pub fn validate(&self) -> Result<(), LdaError> {
        let p = self.problems();
        if p.is_empty() {
            Ok(())
        } else {
            Err(LdaError::InvalidConfig(p))
        }
    }

    /// Step size for the `t`-th minibatch update, `t >= 1`.
    pub fn rho(&self, t: u64) -> f64 {
        (self.tau0 + t as f64).powf(-self.kappa)
    }
}

/// Per-document topic proportions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicDistribution {
    pub theta: Vec<f64>,
    /// Set when the document had no in-vocabulary terms and θ is the prior mean.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub from_prior: bool,
}

impl TopicDistribution {
    pub fn from_gamma(gamma: &[f64]) -> Self {
        let total: f64 = gamma.iter().sum();
        TopicDistribution { theta: gamma.iter().map(|g| g / total).collect(), from_prior: false }
    }

    pub fn argmax(&self) -> usize {
        self.theta.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0))).map(|(i, _)| i).unwrap_or(0)
    }
}

/// Variational posterior over topic-word distributions plus the priors.
#[derive(Debug, Clone)]
pub struct TopicModel {
    num_topics: usize,
    n_terms: usize,
    /// K × V, row-major.
    lambda: Vec<f64>,
    alpha: Vec<f64>,
    eta: Vec<f64>,
    updates_seen: u64,
    vocab: VocabSignature,
    config: LdaConfig,
    /// exp(E[log β]) stored V × K for per-term access.
    exp_elog_beta_t: Vec<f64>,
}

impl PartialEq for TopicModel {
    fn eq(&self, other: &Self) -> bool {
        self.num_topics == other.num_topics
            && self.n_terms == other.n_terms
            && self.lambda == other.lambda
            && self.alpha == other.alpha
            && self.eta == other.eta
            && self.updates_seen == other.updates_seen
            && self.vocab == other.vocab
            && self.config == other.config
    }
}

impl TopicModel {
    /// Assemble a model from raw parameters. Accepts any `K >= 1`, which the trainer
    /// never produces but inference and tests can use.
    pub fn from_parts(
        lambda: Vec<f64>,
        alpha: Vec<f64>,
        eta: Vec<f64>,
        vocab: VocabSignature,
        config: LdaConfig,
    ) -> Result<Self, LdaError> {
        let k = alpha.len();
        let v = vocab.n_terms;
        let mut problems = Vec::new();
        if k == 0 || v == 0 {
            problems.push("model needs at least one topic and one term".to_string());
        }
        if lambda.len() != k * v {
            problems.push(format!("lambda has {} entries, expected {k} x {v}", lambda.len()));
        }
        if eta.len() != v {
            problems.push(format!("eta has {} entries, expected {v}", eta.len()));
        }
        if lambda.iter().chain(&alpha).chain(&eta).any(|x| !(x.is_finite() && *x > 0.0)) {
            problems.push("lambda, alpha and eta must be finite and positive".into());
        }
        if !problems.is_empty() {
            return Err(LdaError::InvalidConfig(problems));
        }
        let mut model = TopicModel {
            num_topics: k,
            n_terms: v,
            lambda,
            alpha,
            eta,
            updates_seen: 0,
            vocab,
            config,
            exp_elog_beta_t: Vec::new(),
        };
        model.refresh_expectations();
        Ok(model)
    }

    /// Untrained model with λ drawn element-wise from Gamma(100, 1/100) under `config.seed`.
    pub fn initial(config: &LdaConfig, vocab: VocabSignature) -> Result<Self, LdaError> {
        config.validate()?;
        let k = config.num_topics;
        let v = vocab.n_terms;
        if v == 0 {
            return Err(LdaError::VocabularyMismatch("vocabulary is empty".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let gamma = Gamma::new(100.0, 0.01).expect("valid gamma parameters");
        let lambda: Vec<f64> = (0..k * v).map(|_| gamma.sample(&mut rng)).collect();
        let alpha = make_prior(config.alpha, k)?;
        let eta = vec![1.0 / k as f64; v];
        Self::from_parts(lambda, alpha, eta, vocab, config.clone())
    }

    fn refresh_expectations(&mut self) {
        let (k, v) = (self.num_topics, self.n_terms);
        let mut row = vec![0.0; v];
        self.exp_elog_beta_t.resize(k * v, 0.0);
        for t in 0..k {
            dirichlet_expectation(&self.lambda[t * v..(t + 1) * v], &mut row);
            for (w, &e) in row.iter().enumerate() {
                self.exp_elog_beta_t[w * k + t] = e.exp();
            }
        }
    }

    pub fn num_topics(&self) -> usize {
        self.num_topics
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn lambda_row(&self, topic: usize) -> &[f64] {
        &self.lambda[topic * self.n_terms..(topic + 1) * self.n_terms]
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn updates_seen(&self) -> u64 {
        self.updates_seen
    }

    pub fn vocab(&self) -> &VocabSignature {
        &self.vocab
    }

    pub fn config(&self) -> &LdaConfig {
        &self.config
    }

    /// Normalized λ row: the expected topic-word distribution.
    pub fn topic_word(&self, topic: usize) -> Vec<f64> {
        let row = self.lambda_row(topic);
        let total: f64 = row.iter().sum();
        row.iter().map(|x| x / total).collect()
    }

    fn check_bow(&self, bow: &BagOfWords) -> Result<(), LdaError> {
        match bow.max_term() {
            Some(t) if t as usize >= self.n_terms => {
                Err(LdaError::VocabularyMismatch(format!("term id {t} outside a {}-term vocabulary", self.n_terms)))
            }
            _ => Ok(()),
        }
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<(), LdaError> {
        let file = ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            config: self.config.clone(),
            vocab: self.vocab.clone(),
            num_topics: self.num_topics,
            n_terms: self.n_terms,
            updates_seen: self.updates_seen,
            alpha: self.alpha.clone(),
            eta: self.eta.clone(),
            lambda: self.lambda.clone(),
        };
        serde_json::to_writer(w, &file)?;
        Ok(())
    }

    pub fn read_json<R: Read>(r: R) -> Result<Self, LdaError> {
        let file: ModelFile = serde_json::from_reader(r)?;
        if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
            return Err(LdaError::Format(format!("unsupported format {} v{}", file.format, file.version)));
        }
        if file.num_topics != file.alpha.len() || file.n_terms != file.vocab.n_terms {
            return Err(LdaError::Format("dimension fields disagree with stored arrays".into()));
        }
        let mut model = Self::from_parts(file.lambda, file.alpha, file.eta, file.vocab, file.config)?;
        model.updates_seen = file.updates_seen;
        Ok(model)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    config: LdaConfig,
    vocab: VocabSignature,
    num_topics: usize,
    n_terms: usize,
    updates_seen: u64,
    alpha: Vec<f64>,
    eta: Vec<f64>,
    lambda: Vec<f64>,
}

/// E-step output for one document.
#[derive(Debug, Clone, PartialEq)]
pub struct EStep {
    pub gamma: Vec<f64>,
    /// Distinct term ids of the document.
    pub term_ids: Vec<u32>,
    /// `count(w) · φ_wk`, term-major: entry `i * K + k` belongs to `term_ids[i]`.
    pub sstats: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Mean absolute γ change after each iteration.
    pub mean_changes: Vec<f64>,
}

fn exp_elog_theta(gamma: &[f64], out: &mut [f64]) {
    dirichlet_expectation(gamma, out);
    for x in out.iter_mut() {
        *x = x.exp();
    }
}

/// Accumulate `count · φ` for every term into `sink(i, k, value)`.
fn responsibilities(bow: &BagOfWords, exp_theta: &[f64], model: &TopicModel, mut sink: impl FnMut(usize, usize, f64)) {
    let k = model.num_topics;
    let mut weights = vec![0.0; k];
    for (i, &(w, c)) in bow.pairs.iter().enumerate() {
        let exp_beta = &model.exp_elog_beta_t[w as usize * k..(w as usize + 1) * k];
        let mut norm = 0.0;
        for t in 0..k {
            weights[t] = exp_theta[t] * exp_beta[t];
            norm += weights[t];
        }
        let c = c as f64;
        if norm > 0.0 {
            for t in 0..k {
                sink(i, t, c * (weights[t] / norm));
            }
        } else {
            for t in 0..k {
                sink(i, t, c / k as f64);
            }
        }
    }
}

/// Fixed-point variational update of one document's γ and φ.
///
/// γ starts at `α + N_d / K`. Iteration stops when the mean absolute change of γ is below
/// `config.e_step_tol` or after `config.e_step_max_iter` iterations.
pub fn e_step(bow: &BagOfWords, model: &TopicModel) -> Result<EStep, LdaError> {
    model.check_bow(bow)?;
    let k = model.num_topics;
    if bow.is_empty() {
        return Ok(EStep {
            gamma: model.alpha.clone(),
            term_ids: Vec::new(),
            sstats: Vec::new(),
            iterations: 0,
            converged: true,
            mean_changes: Vec::new(),
        });
    }
    let n_d = bow.total() as f64;
    let mut gamma: Vec<f64> = model.alpha.iter().map(|a| a + n_d / k as f64).collect();
    let mut exp_theta = vec![0.0; k];
    let mut next = vec![0.0; k];
    let mut mean_changes = Vec::new();
    let mut converged = false;

    for _ in 0..model.config.e_step_max_iter {
        exp_elog_theta(&gamma, &mut exp_theta);
        next.copy_from_slice(&model.alpha);
        responsibilities(bow, &exp_theta, model, |_, t, v| next[t] += v);
        let change = gamma.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum::<f64>() / k as f64;
        std::mem::swap(&mut gamma, &mut next);
        mean_changes.push(change);
        if change < model.config.e_step_tol {
            converged = true;
            break;
        }
    }

    exp_elog_theta(&gamma, &mut exp_theta);
    let mut sstats = vec![0.0; bow.len() * k];
    responsibilities(bow, &exp_theta, model, |i, t, v| sstats[i * k + t] = v);
    Ok(EStep {
        gamma,
        term_ids: bow.pairs.iter().map(|&(w, _)| w).collect(),
        sstats,
        iterations: mean_changes.len(),
        converged,
        mean_changes,
    })
}

/// θ = γ / Σγ from a converged E-step. Empty documents get the prior mean, flagged.
pub fn infer_theta(bow: &BagOfWords, model: &TopicModel) -> Result<TopicDistribution, LdaError> {
    let step = e_step(bow, model)?;
    let mut dist = TopicDistribution::from_gamma(&step.gamma);
    dist.from_prior = bow.is_empty();
    Ok(dist)
}

/// Inference over a whole corpus, in parallel, preserving order.
pub fn infer_corpus(corpus: &[BagOfWords], model: &TopicModel) -> Result<Vec<TopicDistribution>, LdaError> {
    corpus.par_iter().map(|bow| infer_theta(bow, model)).collect()
}

/// The `n` most probable terms of `topic`, ties broken by lower term id.
pub fn top_words(model: &TopicModel, topic: usize, n: usize) -> Result<Vec<(u32, f64)>, LdaError> {
    if topic >= model.num_topics {
        return Err(LdaError::TopicOutOfRange { topic, num_topics: model.num_topics });
    }
    let mut ranked: Vec<(u32, f64)> =
        model.topic_word(topic).into_iter().enumerate().map(|(i, p)| (i as u32, p)).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(n);
    Ok(ranked)
}

/// Stateful online trainer.
pub struct OnlineTrainer {
    model: TopicModel,
    total_docs: usize,
}

impl OnlineTrainer {
    pub fn new(config: &LdaConfig, vocab: VocabSignature, total_docs: usize) -> Result<Self, LdaError> {
        if total_docs == 0 {
            return Err(LdaError::EmptyCorpus);
        }
        Ok(OnlineTrainer { model: TopicModel::initial(config, vocab)?, total_docs })
    }

    /// Start from an existing model instead of a fresh initialization.
    pub fn resume(model: TopicModel, total_docs: usize) -> Result<Self, LdaError> {
        if total_docs == 0 {
            return Err(LdaError::EmptyCorpus);
        }
        Ok(OnlineTrainer { model, total_docs })
    }

    pub fn model(&self) -> &TopicModel {
        &self.model
    }

    pub fn into_model(self) -> TopicModel {
        self.model
    }

    /// Process one minibatch.
    pub fn update(&mut self, batch: &[BagOfWords]) -> Result<(), LdaError> {
        if batch.is_empty() {
            return Ok(());
        }
        for bow in batch {
            self.model.check_bow(bow)?;
        }
        let m = &self.model;
        let (k, v) = (m.num_topics, m.n_terms);
        let t = m.updates_seen + 1;
        let rho = m.config.rho(t);

        let steps: Vec<EStep> = batch.par_iter().map(|bow| e_step(bow, m)).collect::<Result<_, _>>()?;

        // ordered reduction keeps the result independent of thread count
        let mut sstats = vec![0.0; k * v];
        for s in &steps {
            for (i, &w) in s.term_ids.iter().enumerate() {
                for topic in 0..k {
                    sstats[topic * v + w as usize] += s.sstats[i * k + topic];
                }
            }
        }

        if m.config.alpha == AlphaMode::Auto {
            let mut logphat = vec![0.0; k];
            let mut buf = vec![0.0; k];
            for s in &steps {
                dirichlet_expectation(&s.gamma, &mut buf);
                for (acc, x) in logphat.iter_mut().zip(&buf) {
                    *acc += x;
                }
            }
            let n = steps.len() as f64;
            logphat.iter_mut().for_each(|x| *x /= n);
            update_dirichlet_prior(&mut self.model.alpha, n, &logphat, rho);
        }

        let scale = self.total_docs as f64 / batch.len() as f64;
        let m = &mut self.model;
        for topic in 0..k {
            for w in 0..v {
                let idx = topic * v + w;
                let estimate = m.eta[w] + scale * sstats[idx];
                m.lambda[idx] = (1.0 - rho) * m.lambda[idx] + rho * estimate;
            }
        }
        if let Some(pos) = m.lambda.iter().position(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(LdaError::NonFinite {
                update: t,
                detail: format!("lambda[{}][{}] = {}", pos / v, pos % v, m.lambda[pos]),
            });
        }

        if m.config.eta == EtaMode::Auto {
            let mut logphat = vec![0.0; v];
            let mut buf = vec![0.0; v];
            for topic in 0..k {
                dirichlet_expectation(&m.lambda[topic * v..(topic + 1) * v], &mut buf);
                for (acc, x) in logphat.iter_mut().zip(&buf) {
                    *acc += x;
                }
            }
            logphat.iter_mut().for_each(|x| *x /= k as f64);
            update_dirichlet_prior(&mut m.eta, k as f64, &logphat, rho);
        }

        m.updates_seen = t;
        m.refresh_expectations();
        Ok(())
    }

    /// One pass over `corpus` in order, in minibatches of the configured size.
    pub fn pass(&mut self, corpus: &[BagOfWords]) -> Result<(), LdaError> {
        let size = self.model.config.minibatch_size;
        for batch in corpus.chunks(size) {
            self.update(batch)?;
        }
        Ok(())
    }
}

/// Train a model with online variational Bayes.
pub fn fit_online(corpus: &[BagOfWords], vocab: &VocabSignature, config: &LdaConfig) -> Result<TopicModel, LdaError> {
    fit_online_monitored(corpus, vocab, config, None).map(|(m, _)| m)
}

/// As [`fit_online`], also returning the per-word variational bound on `held_out`
/// after every pass.
pub fn fit_online_monitored(
    corpus: &[BagOfWords],
    vocab: &VocabSignature,
    config: &LdaConfig,
    held_out: Option<&[BagOfWords]>,
) -> Result<(TopicModel, Vec<f64>), LdaError> {
    if corpus.is_empty() {
        return Err(LdaError::EmptyCorpus);
    }
    let mut trainer = OnlineTrainer::new(config, vocab.clone(), corpus.len())?;
    let mut bounds = Vec::new();
    for pass in 0..config.passes {
        trainer.pass(corpus)?;
        log::debug!("pass {} done, {} updates", pass + 1, trainer.model.updates_seen);
        if let Some(docs) = held_out {
            bounds.push(per_word_bound(trainer.model(), docs)?);
        }
    }
    Ok((trainer.into_model(), bounds))
}

/// Variational lower bound on log p(docs), divided by the number of tokens.
///
/// The topic-level term is included once, as if `docs` were the whole corpus.
pub fn per_word_bound(model: &TopicModel, docs: &[BagOfWords]) -> Result<f64, LdaError> {
    let k = model.num_topics;
    let v = model.n_terms;
    let steps: Vec<EStep> = docs.par_iter().map(|bow| e_step(bow, model)).collect::<Result<_, _>>()?;

    let mut elog_beta = vec![0.0; k * v];
    for t in 0..k {
        dirichlet_expectation(model.lambda_row(t), &mut elog_beta[t * v..(t + 1) * v]);
    }
    let alpha_sum: f64 = model.alpha.iter().sum();
    let ln_gamma_alpha: f64 = model.alpha.iter().map(|&a| ln_gamma(a)).sum();

    let mut score = 0.0;
    let mut words = 0.0;
    let mut elog_theta = vec![0.0; k];
    let mut tmp = vec![0.0; k];
    for (bow, s) in docs.iter().zip(&steps) {
        dirichlet_expectation(&s.gamma, &mut elog_theta);
        for &(w, c) in &bow.pairs {
            for t in 0..k {
                tmp[t] = elog_theta[t] + elog_beta[t * v + w as usize];
            }
            let mx = tmp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = mx + tmp.iter().map(|x| (x - mx).exp()).sum::<f64>().ln();
            score += c as f64 * lse;
            words += c as f64;
        }
        let gamma_sum: f64 = s.gamma.iter().sum();
        for t in 0..k {
            score += (model.alpha[t] - s.gamma[t]) * elog_theta[t] + ln_gamma(s.gamma[t]);
        }
        score += ln_gamma(alpha_sum) - ln_gamma_alpha - ln_gamma(gamma_sum);
    }

    let eta_sum: f64 = model.eta.iter().sum();
    let ln_gamma_eta: f64 = model.eta.iter().map(|&e| ln_gamma(e)).sum();
    for t in 0..k {
        let row = model.lambda_row(t);
        for w in 0..v {
            score += (model.eta[w] - row[w]) * elog_beta[t * v + w] + ln_gamma(row[w]);
        }
        score += ln_gamma(eta_sum) - ln_gamma_eta - ln_gamma(row.iter().sum());
    }
    if words == 0.0 {
        return Err(LdaError::EmptyCorpus);
    }
    Ok(score / words)
}

#[cfg(test)]
mod tests;
