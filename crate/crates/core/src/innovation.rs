//! KLD surprise between topic mixtures and the windowed innovation measures built on it.
//!
//! For a document `j` published in month `m` and a window of `w` months:
//!
//! - novelty: mean of `KLD(θ_j ‖ θ_i)` over every document `i` published in months `[m - w, m - 1]`
//! - transience: the same mean over months `[m + 1, m + w]`
//! - resonance: novelty minus transience
//!
//! Documents from month `m` itself never enter either window. A score is valid only when the
//! corpus covers `w` whole months on both sides of `m` and both windows hold documents.
//! KLD is measured in bits.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Month;

/// Added to every θ component before renormalizing, so reference distributions are strictly positive.
pub const DEFAULT_SMOOTHING: f64 = 1e-10;
pub const DEFAULT_WINDOW_MONTHS: u32 = 12;

#[derive(Debug, Error, PartialEq)]
pub enum InnovationError {
    #[error("distributions have different lengths ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("{which} sums to {sum}, not 1")]
    NotNormalized { which: &'static str, sum: f64 },
    #[error("reference distribution has a zero or negative component at index {0}")]
    ZeroReference(usize),
    #[error("need at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("regressor is constant; slope undefined")]
    DegenerateDesign,
    #[error("input is constant; standard deviation is zero")]
    ConstantInput,
    #[error("{0}")]
    Invalid(String),
}

/// Add `eps` to every component and renormalize.
pub fn smooth(theta: &[f64], eps: f64) -> Vec<f64> {
    let total: f64 = theta.iter().map(|t| t + eps).sum();
    theta.iter().map(|t| (t + eps) / total).collect()
}

/// `Σ_k p_k log2(p_k / q_k)`; components with `p_k = 0` contribute nothing.
pub fn kld(p: &[f64], q: &[f64]) -> Result<f64, InnovationError> {
    if p.len() != q.len() {
        return Err(InnovationError::DimensionMismatch(p.len(), q.len()));
    }
    for (which, v) in [("p", p), ("q", q)] {
        let sum: f64 = v.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(InnovationError::NotNormalized { which, sum });
        }
    }
    let mut acc = 0.0;
    for (k, (&pk, &qk)) in p.iter().zip(q).enumerate() {
        if pk == 0.0 {
            continue;
        }
        if !(qk > 0.0) {
            return Err(InnovationError::ZeroReference(k));
        }
        acc += pk * (pk / qk).log2();
    }
    Ok(acc)
}

/// `N - T` when both are defined.
pub fn resonance(novelty: Option<f64>, transience: Option<f64>) -> Option<f64> {
    Some(novelty? - transience?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnovationScore {
    pub doc_id: String,
    pub month: Month,
    pub window_months: u32,
    pub novelty: Option<f64>,
    pub transience: Option<f64>,
    pub resonance: Option<f64>,
    pub valid: bool,
}

/// Smoothed topic mixtures indexed by month, ready for windowed KLD averaging.
#[derive(Debug, Clone)]
pub struct InnovationScorer {
    num_topics: usize,
    /// smoothed θ, n × K
    theta: Vec<f64>,
    /// log2 of smoothed θ, n × K
    log_theta: Vec<f64>,
    months: Vec<Month>,
    by_month: BTreeMap<Month, Vec<usize>>,
}

impl InnovationScorer {
    pub fn new(thetas: &[Vec<f64>], months: &[Month], smoothing: f64) -> Result<Self, InnovationError> {
        if thetas.len() != months.len() {
            return Err(InnovationError::Invalid(format!("{} θ rows for {} months", thetas.len(), months.len())));
        }
        if thetas.is_empty() {
            return Err(InnovationError::InsufficientPoints { needed: 1, got: 0 });
        }
        if !(smoothing >= 0.0) {
            return Err(InnovationError::Invalid(format!("smoothing must be >= 0, got {smoothing}")));
        }
        let k = thetas[0].len();
        let mut theta = Vec::with_capacity(thetas.len() * k);
        for t in thetas {
            if t.len() != k {
                return Err(InnovationError::DimensionMismatch(k, t.len()));
            }
            let s = smooth(t, smoothing);
            if let Some(i) = s.iter().position(|x| !(*x > 0.0)) {
                return Err(InnovationError::ZeroReference(i));
            }
            theta.extend(s);
        }
        let log_theta = theta.iter().map(|x| x.log2()).collect();
        let mut by_month: BTreeMap<Month, Vec<usize>> = BTreeMap::new();
        for (i, m) in months.iter().enumerate() {
            by_month.entry(*m).or_default().push(i);
        }
        Ok(InnovationScorer { num_topics: k, theta, log_theta, months: months.to_vec(), by_month })
    }

    pub fn len(&self) -> usize {
        self.months.len()
    }

    pub fn is_empty(&self) -> bool {
        self.months.is_empty()
    }

    fn first_month(&self) -> Month {
        *self.by_month.keys().next().expect("non-empty")
    }

    fn last_month(&self) -> Month {
        *self.by_month.keys().next_back().expect("non-empty")
    }

    /// Documents published in `[from, to]`, in ascending index order.
    fn docs_between(&self, from: Month, to: Month) -> Vec<usize> {
        let mut out: Vec<usize> = self.by_month.range(from..=to).flat_map(|(_, v)| v.iter().copied()).collect();
        out.sort_unstable();
        out
    }

    fn row<'a>(&self, data: &'a [f64], i: usize) -> &'a [f64] {
        &data[i * self.num_topics..(i + 1) * self.num_topics]
    }

    /// KLD in bits between smoothed mixtures of documents `j` and `i`.
    pub fn surprise(&self, j: usize, i: usize) -> f64 {
        let p = self.row(&self.theta, j);
        let lp = self.row(&self.log_theta, j);
        let lq = self.row(&self.log_theta, i);
        p.iter().zip(lp).zip(lq).map(|((p, lp), lq)| p * (lp - lq)).sum()
    }

    fn mean_surprise(&self, j: usize, window: &[usize]) -> Option<f64> {
        if window.is_empty() {
            return None;
        }
        let total: f64 = window.iter().map(|&i| self.surprise(j, i)).sum();
        Some(total / window.len() as f64)
    }

    fn preceding(&self, month: Month, w: u32) -> Option<Vec<usize>> {
        let start = month.offset(-(w as i32));
        (w > 0 && start >= self.first_month()).then(|| self.docs_between(start, month.offset(-1)))
    }

    fn following(&self, month: Month, w: u32) -> Option<Vec<usize>> {
        let end = month.offset(w as i32);
        (w > 0 && end <= self.last_month()).then(|| self.docs_between(month.offset(1), end))
    }

    pub fn novelty(&self, j: usize, w: u32) -> Option<f64> {
        self.mean_surprise(j, &self.preceding(self.months[j], w)?)
    }

    pub fn transience(&self, j: usize, w: u32) -> Option<f64> {
        self.mean_surprise(j, &self.following(self.months[j], w)?)
    }

    /// Scores for every document, in input order. Window lists are built once per month.
    pub fn score_all(&self, doc_ids: &[String], w: u32) -> Result<Vec<InnovationScore>, InnovationError> {
        if doc_ids.len() != self.len() {
            return Err(InnovationError::Invalid(format!("{} ids for {} documents", doc_ids.len(), self.len())));
        }
        let per_month: Vec<Vec<(usize, Option<f64>, Option<f64>)>> = self
            .by_month
            .par_iter()
            .map(|(&month, docs)| {
                let before = self.preceding(month, w);
                let after = self.following(month, w);
                docs.iter()
                    .map(|&j| {
                        let n = before.as_deref().and_then(|win| self.mean_surprise(j, win));
                        let t = after.as_deref().and_then(|win| self.mean_surprise(j, win));
                        (j, n, t)
                    })
                    .collect()
            })
            .collect();

        let mut out: Vec<Option<InnovationScore>> = vec![None; self.len()];
        for (j, novelty, transience) in per_month.into_iter().flatten() {
            let res = resonance(novelty, transience);
            out[j] = Some(InnovationScore {
                doc_id: doc_ids[j].clone(),
                month: self.months[j],
                window_months: w,
                novelty,
                transience,
                resonance: res,
                valid: res.is_some(),
            });
        }
        Ok(out.into_iter().map(|s| s.expect("every document scored")).collect())
    }
}

/// Ordinary least squares fit of `y = intercept + slope · x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub intercept: f64,
    pub slope: f64,
    pub n_points: usize,
    pub residual_variance: f64,
}

impl RegressionFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

pub fn ols(x: &[f64], y: &[f64]) -> Result<RegressionFit, InnovationError> {
    if x.len() != y.len() {
        return Err(InnovationError::DimensionMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(InnovationError::InsufficientPoints { needed: 3, got: n });
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if !(sxx > 0.0) {
        return Err(InnovationError::DegenerateDesign);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    Ok(RegressionFit { intercept, slope, n_points: n, residual_variance: ssr / (nf - 2.0) })
}

/// Regression of resonance on novelty; the slope is the novelty effectiveness Γ.
pub fn novelty_effectiveness(points: &[(f64, f64)]) -> Result<RegressionFit, InnovationError> {
    let (x, y): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
    ols(&x, &y)
}

/// `(x - mean) / s` with the sample standard deviation `s`.
pub fn zscore(values: &[f64]) -> Result<Vec<f64>, InnovationError> {
    let n = values.len();
    if n < 2 {
        return Err(InnovationError::InsufficientPoints { needed: 2, got: n });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    if !(sd > 0.0) || !sd.is_finite() {
        return Err(InnovationError::ConstantInput);
    }
    Ok(values.iter().map(|v| (v - mean) / sd).collect())
}

/// Deviation of `z_resonance` from the value the fit predicts for `z_novelty`.
pub fn delta_z(z_novelty: f64, z_resonance: f64, fit: &RegressionFit) -> f64 {
    z_resonance - fit.predict(z_novelty)
}

/// `(novelty, resonance)` pairs of the valid scores.
pub fn valid_points(scores: &[InnovationScore]) -> Vec<(f64, f64)> {
    scores.iter().filter(|s| s.valid).filter_map(|s| Some((s.novelty?, s.resonance?))).collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// CSV with columns `doc_id, month, novelty, transience, resonance, valid`.
pub fn write_scores_csv<W: Write>(writer: W, scores: &[InnovationScore]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["doc_id", "month", "novelty", "transience", "resonance", "valid"])?;
    for s in scores {
        w.write_record([
            s.doc_id.clone(),
            s.month.to_string(),
            opt(s.novelty),
            opt(s.transience),
            opt(s.resonance),
            s.valid.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Read a table written by [`write_scores_csv`]. The file does not record the window, so
/// the caller supplies it.
pub fn read_scores_csv<R: std::io::Read>(
    reader: R,
    window_months: u32,
) -> Result<Vec<InnovationScore>, InnovationError> {
    let bad = |row: usize, msg: String| InnovationError::Invalid(format!("scores row {row}: {msg}"));
    let mut r = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| bad(row, e.to_string()))?;
        if rec.len() != 6 {
            return Err(bad(row, format!("expected 6 fields, got {}", rec.len())));
        }
        let num = |j: usize| -> Result<Option<f64>, InnovationError> {
            match &rec[j] {
                "" => Ok(None),
                s => s.parse().map(Some).map_err(|e| bad(row, format!("`{s}`: {e}"))),
            }
        };
        out.push(InnovationScore {
            doc_id: rec[0].to_string(),
            month: rec[1].parse().map_err(|e: crate::corpus::CorpusError| bad(row, e.to_string()))?,
            window_months,
            novelty: num(2)?,
            transience: num(3)?,
            resonance: num(4)?,
            valid: rec[5].parse().map_err(|e: std::str::ParseBoolError| bad(row, e.to_string()))?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionSummary {
    pub intercept: f64,
    /// Novelty effectiveness Γ.
    pub slope: f64,
    pub n: usize,
    pub residual_variance: f64,
    pub window_months: u32,
}

impl RegressionSummary {
    pub fn new(fit: &RegressionFit, window_months: u32) -> Self {
        RegressionSummary {
            intercept: fit.intercept,
            slope: fit.slope,
            n: fit.n_points,
            residual_variance: fit.residual_variance,
            window_months,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("d{i}")).collect()
    }

    #[test]
    fn kld_hand_values() {
        assert_eq!(kld(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        let v = kld(&[0.5, 0.5], &[0.25, 0.75]).unwrap();
        let hand = 0.5 * 2f64.log2() + 0.5 * (2.0f64 / 3.0).log2();
        assert!((v - hand).abs() < 1e-15);
        assert!((v - 0.207519).abs() < 1e-6);
        assert_eq!(kld(&[1.0, 0.0], &[0.5, 0.5]).unwrap(), 1.0);
    }

    #[test]
    fn kld_errors() {
        assert_eq!(kld(&[1.0], &[0.5, 0.5]), Err(InnovationError::DimensionMismatch(1, 2)));
        assert_eq!(kld(&[0.5, 0.5], &[1.0, 0.0]), Err(InnovationError::ZeroReference(1)));
        assert!(matches!(kld(&[0.5, 0.6], &[0.5, 0.5]), Err(InnovationError::NotNormalized { which: "p", .. })));
    }

    #[test]
    fn kld_is_asymmetric() {
        let p = [0.9, 0.1];
        let q = [0.5, 0.5];
        assert!((kld(&p, &q).unwrap() - kld(&q, &p).unwrap()).abs() > 0.1);
    }

    #[test]
    fn smoothing_keeps_distribution() {
        let s = smooth(&[1.0, 0.0, 0.0], DEFAULT_SMOOTHING);
        assert!(s.iter().all(|x| *x > 0.0));
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_stream_scores_zero() {
        let months: Vec<Month> = (0..30).flat_map(|m| [Month(m), Month(m)]).collect();
        let thetas = vec![vec![0.2, 0.5, 0.3]; months.len()];
        let sc = InnovationScorer::new(&thetas, &months, DEFAULT_SMOOTHING).unwrap();
        let scores = sc.score_all(&ids(months.len()), 12).unwrap();
        for s in scores.iter().filter(|s| s.valid) {
            assert_eq!(s.novelty, Some(0.0));
            assert_eq!(s.transience, Some(0.0));
            assert_eq!(s.resonance, Some(0.0));
        }
        assert_eq!(scores.iter().filter(|s| s.valid).count(), 2 * (30 - 24));
    }

    #[test]
    fn novelty_is_mean_over_preceding_window() {
        // target in month 2, two docs in the preceding window, one same-month doc ignored
        let thetas = vec![vec![0.5, 0.5], vec![0.25, 0.75], vec![0.75, 0.25], vec![0.1, 0.9], vec![0.6, 0.4]];
        let months = vec![Month(2), Month(0), Month(1), Month(2), Month(3)];
        let sc = InnovationScorer::new(&thetas, &months, 0.0).unwrap();
        let k1 = kld(&thetas[0], &thetas[1]).unwrap();
        let k2 = kld(&thetas[0], &thetas[2]).unwrap();
        assert!((sc.novelty(0, 2).unwrap() - (k1 + k2) / 2.0).abs() < 1e-15);
        // mirror: following window of month 0 with w = 2 holds months 1 and 2
        let f = [2usize, 0, 3].map(|i| kld(&thetas[1], &thetas[i]).unwrap());
        assert!((sc.transience(1, 2).unwrap() - f.iter().sum::<f64>() / 3.0).abs() < 1e-15);
        assert_eq!(sc.novelty(1, 1), None);
        assert_eq!(sc.transience(4, 1), None);
        assert_eq!(sc.novelty(0, 3), None);
    }

    #[test]
    fn empty_window_is_invalid() {
        let thetas = vec![vec![0.5, 0.5], vec![0.4, 0.6], vec![0.3, 0.7]];
        let months = vec![Month(0), Month(5), Month(10)];
        let sc = InnovationScorer::new(&thetas, &months, 0.0).unwrap();
        let s = sc.score_all(&ids(3), 2).unwrap();
        assert!(!s[1].valid);
        assert_eq!(s[1].novelty, None);
    }

    #[test]
    fn single_outlier_has_zero_resonance() {
        let mut thetas = vec![vec![0.7, 0.2, 0.1]; 25];
        let months: Vec<Month> = (0..25).map(Month).collect();
        thetas[12] = vec![0.05, 0.15, 0.8];
        let sc = InnovationScorer::new(&thetas, &months, DEFAULT_SMOOTHING).unwrap();
        let s = &sc.score_all(&ids(25), 12).unwrap()[12];
        assert!(s.valid);
        assert!(s.novelty.unwrap() > 1.0);
        assert!(s.resonance.unwrap().abs() < 1e-9);
    }

    fn random_corpus(seed: u64, n_months: i32, k: usize) -> (Vec<Vec<f64>>, Vec<Month>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut thetas = Vec::new();
        let mut months = Vec::new();
        for m in 0..n_months {
            for _ in 0..rng.random_range(0..5) {
                let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
                let s: f64 = raw.iter().sum();
                thetas.push(raw.iter().map(|x| x / s).collect());
                months.push(Month(100 + m));
            }
        }
        // guarantee both ends of the range are populated
        thetas.push(vec![1.0 / k as f64; k]);
        months.push(Month(100));
        thetas.push(vec![1.0 / k as f64; k]);
        months.push(Month(100 + n_months - 1));
        (thetas, months)
    }

    #[test]
    fn time_reversal_swaps_novelty_and_transience() {
        let (thetas, months) = random_corpus(7, 36, 6);
        let lo = months.iter().min().unwrap().0;
        let hi = months.iter().max().unwrap().0;
        let reversed: Vec<Month> = months.iter().map(|m| Month(lo + hi - m.0)).collect();
        let n = thetas.len();
        let a = InnovationScorer::new(&thetas, &months, DEFAULT_SMOOTHING).unwrap().score_all(&ids(n), 12).unwrap();
        let b = InnovationScorer::new(&thetas, &reversed, DEFAULT_SMOOTHING).unwrap().score_all(&ids(n), 12).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.novelty, y.transience);
            assert_eq!(x.transience, y.novelty);
            assert_eq!(x.resonance, y.resonance.map(|r| -r));
            assert_eq!(x.valid, y.valid);
        }
        assert!(a.iter().any(|s| s.valid));
    }

    #[test]
    fn edge_months_are_invalid() {
        let (thetas, months) = random_corpus(3, 40, 4);
        let n = thetas.len();
        let scores =
            InnovationScorer::new(&thetas, &months, DEFAULT_SMOOTHING).unwrap().score_all(&ids(n), 12).unwrap();
        for s in &scores {
            if s.month.0 < 112 || s.month.0 > 139 - 12 {
                assert!(!s.valid, "{s:?}");
            }
            if s.valid {
                assert_eq!(s.resonance.unwrap(), s.novelty.unwrap() - s.transience.unwrap());
            }
        }
    }

    #[test]
    fn ols_exact_line_and_constant_response() {
        let pts: Vec<(f64, f64)> = [0.0, 0.3, 1.1, 2.0, 4.5].iter().map(|&n| (n, 0.1 + 0.5 * n)).collect();
        let fit = novelty_effectiveness(&pts).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-12);
        assert!((fit.intercept - 0.1).abs() < 1e-12);
        let flat: Vec<(f64, f64)> = [1.0, 2.0, 3.0].iter().map(|&n| (n, 0.7)).collect();
        assert_eq!(novelty_effectiveness(&flat).unwrap().slope, 0.0);
        assert_eq!(
            novelty_effectiveness(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]),
            Err(InnovationError::DegenerateDesign)
        );
        assert!(matches!(
            novelty_effectiveness(&[(1.0, 1.0), (2.0, 2.0)]),
            Err(InnovationError::InsufficientPoints { .. })
        ));
    }

    #[test]
    fn ols_matches_normal_equations() {
        let x = [0.4, 1.3, 2.2, 2.9, 4.1];
        let y = [0.9, 1.1, 2.4, 2.2, 3.8];
        // (XᵀX) β = Xᵀy solved by Cramer's rule on raw sums
        let n = 5.0;
        let sx: f64 = x.iter().sum();
        let sy: f64 = y.iter().sum();
        let sxx: f64 = x.iter().map(|a| a * a).sum();
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let det = n * sxx - sx * sx;
        let b0 = (sy * sxx - sx * sxy) / det;
        let b1 = (n * sxy - sx * sy) / det;
        let fit = ols(&x, &y).unwrap();
        assert!((fit.intercept - b0).abs() < 1e-12);
        assert!((fit.slope - b1).abs() < 1e-12);
    }

    #[test]
    fn zscore_cases() {
        let z = zscore(&[1.0, 2.0, 3.0]).unwrap();
        for (a, b) in z.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(zscore(&[2.0, 2.0, 2.0]), Err(InnovationError::ConstantInput));
        assert!(zscore(&[1.0]).is_err());
    }

    #[test]
    fn scores_csv_round_trip() {
        let (thetas, months) = random_corpus(11, 30, 3);
        let n = thetas.len();
        let scores = InnovationScorer::new(&thetas, &months, DEFAULT_SMOOTHING).unwrap().score_all(&ids(n), 6).unwrap();
        let mut buf = Vec::new();
        write_scores_csv(&mut buf, &scores).unwrap();
        assert_eq!(read_scores_csv(buf.as_slice(), 6).unwrap(), scores);
    }

    #[test]
    fn delta_z_cases() {
        let fit = RegressionFit { intercept: 0.0, slope: 1.0, n_points: 3, residual_variance: 0.0 };
        assert_eq!(delta_z(-0.5, 1.5, &fit), 2.0);
        assert_eq!(delta_z(0.25, 0.25, &fit), 0.0);
    }

    proptest! {
        #[test]
        fn kld_nonnegative_and_zero_on_self(raw_p in prop::collection::vec(0.0f64..1.0, 2..12), raw_q in prop::collection::vec(0.0f64..1.0, 12)) {
            let k = raw_p.len();
            let p = smooth(&raw_p.iter().map(|x| x / raw_p.iter().sum::<f64>().max(1e-300)).collect::<Vec<_>>(), DEFAULT_SMOOTHING);
            let q = smooth(&raw_q[..k].iter().map(|x| x / raw_q[..k].iter().sum::<f64>().max(1e-300)).collect::<Vec<_>>(), DEFAULT_SMOOTHING);
            prop_assert_eq!(kld(&p, &p).unwrap(), 0.0);
            prop_assert!(kld(&p, &q).unwrap() >= -1e-9);
        }

        #[test]
        fn zscore_standardizes_and_is_affine_invariant(v in prop::collection::vec(-100.0f64..100.0, 3..40)) {
            prop_assume!(v.iter().any(|x| (x - v[0]).abs() > 1e-6));
            let z = zscore(&v).unwrap();
            let mean = z.iter().sum::<f64>() / z.len() as f64;
            let sd = (z.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (z.len() - 1) as f64).sqrt();
            prop_assert!(mean.abs() < 1e-12);
            prop_assert!((sd - 1.0).abs() < 1e-12);
            let shifted: Vec<f64> = v.iter().map(|x| 2.0 * x + 7.0).collect();
            for (a, b) in zscore(&shifted).unwrap().iter().zip(&z) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn residuals_average_to_zero(pts in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..60)) {
            let (x, y): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
            prop_assume!(x.iter().any(|a| (a - x[0]).abs() > 1e-3));
            let fit = ols(&x, &y).unwrap();
            let mean_dz = x.iter().zip(&y).map(|(a, b)| delta_z(*a, *b, &fit)).sum::<f64>() / x.len() as f64;
            prop_assert!(mean_dz.abs() < 1e-9);
        }
    }
}
