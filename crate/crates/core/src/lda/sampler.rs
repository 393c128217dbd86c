//! Draws synthetic corpora from the LDA generative process.
//!
//! For each document: `N_d ~ Poisson(ξ)`, `θ ~ Dir(α)`, and for each token
//! `z_n ~ Multinomial(θ)`, `w_n ~ Multinomial(β_{z_n})`.

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use super::{LdaError, TopicDistribution};
use crate::textprep::BagOfWords;

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    /// Dirichlet parameter for θ; its length fixes K.
    pub alpha: Vec<f64>,
    /// Poisson mean of the document length.
    pub xi: f64,
    pub seed: u64,
}

/// One generated document, tokens in generation order.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledDocument {
    pub tokens: Vec<u32>,
    pub topics: Vec<u32>,
    pub theta: Vec<f64>,
}

impl SampledDocument {
    pub fn bow(&self) -> BagOfWords {
        BagOfWords::from_ids(self.tokens.iter().copied())
    }
}

/// Dirichlet draw by normalizing Gamma variates. Shapes below 1 are drawn in log space
/// through `G(a) = G(a + 1) · U^(1/a)` so that small concentrations do not underflow.
fn sample_dirichlet<R: Rng>(alpha: &[f64], rng: &mut R) -> Vec<f64> {
    if alpha.len() == 1 {
        return vec![1.0];
    }
    let logs: Vec<f64> = alpha
        .iter()
        .map(|&a| {
            if a < 1.0 {
                let g = Gamma::new(a + 1.0, 1.0).expect("positive shape").sample(rng);
                let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
                g.ln() + u.ln() / a
            } else {
                Gamma::new(a, 1.0).expect("positive shape").sample(rng).ln()
            }
        })
        .collect();
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

fn check_inputs(config: &SamplerConfig, true_beta: &[Vec<f64>]) -> Result<(), LdaError> {
    let mut problems = Vec::new();
    if true_beta.is_empty() {
        problems.push("true_beta has no topics".to_string());
    }
    if config.alpha.len() != true_beta.len() {
        problems.push(format!("alpha has {} entries for {} topics", config.alpha.len(), true_beta.len()));
    }
    if config.alpha.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
        problems.push("alpha entries must be finite and positive".into());
    }
    if !(config.xi > 0.0) {
        problems.push(format!("xi must be > 0, got {}", config.xi));
    }
    if let Some(first) = true_beta.first() {
        if true_beta.iter().any(|r| r.len() != first.len()) {
            problems.push("true_beta rows differ in length".into());
        }
    }
    if !problems.is_empty() {
        return Err(LdaError::InvalidConfig(problems));
    }
    for (k, row) in true_beta.iter().enumerate() {
        let total: f64 = row.iter().sum();
        if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || total == 0.0 || (total - 1.0).abs() > 1e-9 {
            return Err(LdaError::DegenerateTopic(k));
        }
    }
    Ok(())
}

/// Generate `n_docs` documents. Deterministic under `config.seed`.
pub fn sample_documents(
    config: &SamplerConfig,
    true_beta: &[Vec<f64>],
    n_docs: usize,
) -> Result<Vec<SampledDocument>, LdaError> {
    check_inputs(config, true_beta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let words: Vec<WeightedIndex<f64>> = true_beta
        .iter()
        .enumerate()
        .map(|(k, row)| WeightedIndex::new(row).map_err(|_| LdaError::DegenerateTopic(k)))
        .collect::<Result<_, _>>()?;
    let length = Poisson::new(config.xi).map_err(|e| LdaError::InvalidConfig(vec![e.to_string()]))?;

    let mut docs = Vec::with_capacity(n_docs);
    for _ in 0..n_docs {
        let n = length.sample(&mut rng) as usize;
        let theta = sample_dirichlet(&config.alpha, &mut rng);
        let mut tokens = Vec::with_capacity(n);
        let mut topics = Vec::with_capacity(n);
        if theta.len() == 1 {
            for _ in 0..n {
                topics.push(0);
                tokens.push(words[0].sample(&mut rng) as u32);
            }
        } else {
            let z_dist = WeightedIndex::new(&theta).expect("θ is a probability vector");
            for _ in 0..n {
                let z = z_dist.sample(&mut rng);
                topics.push(z as u32);
                tokens.push(words[z].sample(&mut rng) as u32);
            }
        }
        docs.push(SampledDocument { tokens, topics, theta });
    }
    Ok(docs)
}

/// Bags of words plus the generating θ of each document.
pub fn sample_corpus(
    config: &SamplerConfig,
    true_beta: &[Vec<f64>],
    n_docs: usize,
) -> Result<(Vec<BagOfWords>, Vec<TopicDistribution>), LdaError> {
    let docs = sample_documents(config, true_beta, n_docs)?;
    Ok(docs.into_iter().map(|d| (d.bow(), TopicDistribution { theta: d.theta, from_prior: false })).unzip())
}
