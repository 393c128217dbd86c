//! Dirichlet priors: fixed symmetric / asymmetric vectors and the learned ("auto") update.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::LdaError;
use crate::special::{digamma, ln_gamma, trigamma};

/// Smallest value a learned prior component may take.
pub const PRIOR_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaMode {
    Symmetric,
    Asymmetric,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EtaMode {
    Symmetric,
    Auto,
}

impl fmt::Display for AlphaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlphaMode::Symmetric => "symmetric",
            AlphaMode::Asymmetric => "asymmetric",
            AlphaMode::Auto => "auto",
        })
    }
}

impl fmt::Display for EtaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EtaMode::Symmetric => "symmetric",
            EtaMode::Auto => "auto",
        })
    }
}

impl FromStr for AlphaMode {
    type Err = LdaError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "symmetric" => Ok(AlphaMode::Symmetric),
            "asymmetric" => Ok(AlphaMode::Asymmetric),
            "auto" => Ok(AlphaMode::Auto),
            other => Err(LdaError::UnknownPriorMode(other.to_string())),
        }
    }
}

impl FromStr for EtaMode {
    type Err = LdaError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "symmetric" => Ok(EtaMode::Symmetric),
            "auto" => Ok(EtaMode::Auto),
            other => Err(LdaError::UnknownPriorMode(other.to_string())),
        }
    }
}

/// Unnormalized asymmetric weights `1 / (k + sqrt(K))`, `k` zero-based.
pub fn asymmetric_weights(num_topics: usize) -> Vec<f64> {
    let offset = (num_topics as f64).sqrt();
    (0..num_topics).map(|k| 1.0 / (k as f64 + offset)).collect()
}

/// Initial document-topic prior for `mode`. `Auto` starts symmetric.
pub fn make_prior(mode: AlphaMode, num_topics: usize) -> Result<Vec<f64>, LdaError> {
    if num_topics < 2 {
        return Err(LdaError::InvalidConfig(vec![format!("num_topics must be >= 2, got {num_topics}")]));
    }
    Ok(match mode {
        AlphaMode::Symmetric | AlphaMode::Auto => vec![1.0 / num_topics as f64; num_topics],
        AlphaMode::Asymmetric => {
            let w = asymmetric_weights(num_topics);
            let total: f64 = w.iter().sum();
            w.into_iter().map(|x| x / total).collect()
        }
    })
}

/// Log-likelihood of `n` Dirichlet observations with mean log-sufficient statistics `logphat`.
fn dirichlet_objective(prior: &[f64], n: f64, logphat: &[f64]) -> f64 {
    let total: f64 = prior.iter().sum();
    let mut acc = ln_gamma(total);
    for (&a, &lp) in prior.iter().zip(logphat) {
        acc += (a - 1.0) * lp - ln_gamma(a);
    }
    n * acc
}

/// One damped Newton step on a Dirichlet prior.
///
/// The Newton direction uses the diagonal-plus-rank-one Hessian structure. The step
/// starts at `rho` and is halved until the objective improves; components are clipped
/// below at [`PRIOR_FLOOR`]. Returns whether the prior changed.
pub fn update_dirichlet_prior(prior: &mut [f64], n: f64, logphat: &[f64], rho: f64) -> bool {
    debug_assert_eq!(prior.len(), logphat.len());
    let total: f64 = prior.iter().sum();
    let psi_total = digamma(total);
    let grad: Vec<f64> = prior.iter().zip(logphat).map(|(&a, &lp)| n * (psi_total - digamma(a) + lp)).collect();
    let c = n * trigamma(total);
    let q: Vec<f64> = prior.iter().map(|&a| -n * trigamma(a)).collect();
    let b = grad.iter().zip(&q).map(|(g, q)| g / q).sum::<f64>() / (1.0 / c + q.iter().map(|q| 1.0 / q).sum::<f64>());
    let direction: Vec<f64> = grad.iter().zip(&q).map(|(g, q)| -(g - b) / q).collect();
    if direction.iter().any(|d| !d.is_finite()) {
        return false;
    }

    let current = dirichlet_objective(prior, n, logphat);
    let mut step = rho;
    let mut candidate = vec![0.0; prior.len()];
    for _ in 0..30 {
        for ((c, &a), &d) in candidate.iter_mut().zip(prior.iter()).zip(&direction) {
            *c = (a + step * d).max(PRIOR_FLOOR);
        }
        let value = dirichlet_objective(&candidate, n, logphat);
        if value.is_finite() && value > current {
            prior.copy_from_slice(&candidate);
            return true;
        }
        step *= 0.5;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_prior() {
        assert_eq!(make_prior(AlphaMode::Symmetric, 4).unwrap(), vec![0.25; 4]);
        assert_eq!(make_prior(AlphaMode::Auto, 4).unwrap(), vec![0.25; 4]);
    }

    #[test]
    fn asymmetric_prior() {
        let raw = asymmetric_weights(4);
        let expected = [0.5, 1.0 / 3.0, 0.25, 0.2];
        for (a, e) in raw.iter().zip(expected) {
            assert!((a - e).abs() < 1e-15);
        }
        let p = make_prior(AlphaMode::Asymmetric, 4).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.windows(2).all(|w| w[0] > w[1]));
        assert!((p[0] / p[3] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn prior_errors() {
        assert!(make_prior(AlphaMode::Symmetric, 1).is_err());
        assert!(matches!("diagonal".parse::<AlphaMode>(), Err(LdaError::UnknownPriorMode(_))));
        assert!("asymmetric".parse::<EtaMode>().is_err());
        assert_eq!("AUTO".parse::<EtaMode>().unwrap(), EtaMode::Auto);
    }

    #[test]
    fn newton_moves_toward_mle() {
        // logphat from a known Dirichlet(2, 5, 1) is E[log x_k] = ψ(a_k) - ψ(Σa)
        let truth = [2.0, 5.0, 1.0];
        let total: f64 = truth.iter().sum();
        let logphat: Vec<f64> = truth.iter().map(|&a| digamma(a) - digamma(total)).collect();
        let mut prior = vec![1.0, 1.0, 1.0];
        for _ in 0..50 {
            update_dirichlet_prior(&mut prior, 100.0, &logphat, 1.0);
        }
        for (p, t) in prior.iter().zip(truth) {
            assert!((p - t).abs() < 1e-6, "{prior:?}");
        }
    }

    #[test]
    fn newton_never_decreases_objective() {
        let logphat = [-0.2, -3.0, -9.0, -1.5];
        let mut prior = vec![0.25; 4];
        let mut last = dirichlet_objective(&prior, 10.0, &logphat);
        for _ in 0..20 {
            update_dirichlet_prior(&mut prior, 10.0, &logphat, 0.7);
            let now = dirichlet_objective(&prior, 10.0, &logphat);
            assert!(now >= last);
            assert!(prior.iter().all(|&a| a >= PRIOR_FLOOR));
            last = now;
        }
    }
}
