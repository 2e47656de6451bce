use std::fmt::Write as _;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{interval_j, tau};
use crate::cascade::{CascadeRealization, NodeAddress};
use crate::error::{Error, Result};
use crate::numeric::log_sum_exp;
use crate::rng::{derive_seed, seeded_rng};

/// `μ_q` on the cylinders of one level, with addresses drawn from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuQSample {
    pub q: f64,
    pub tau_q: f64,
    pub target_depth: usize,
    pub y_trunc_depth: usize,
    /// Normalized weights of every cylinder of length `target_depth`.
    pub weights: Vec<f64>,
    pub draws: Vec<NodeAddress>,
    /// Some finite-stage `Y_q(w)` underflowed to zero.
    pub underflow: bool,
}

impl MuQSample {
    pub fn to_csv(&self) -> String {
        let b = self.draws.first().map(|a| a.base()).unwrap_or(2);
        let mut out = String::from("addr,weight\n");
        for (j, w) in self.weights.iter().enumerate() {
            let a = NodeAddress::from_index(b, self.target_depth, j as u64);
            let _ = writeln!(out, "{},{}", a, w);
        }
        out
    }
}

/// `ln Q_q(u) = q ln|Q_W(u)| - τ ln Q_L(u)` on every word of length `depth`;
/// `-inf` where `Q_W(u) = 0`.
fn log_q_q(real: &CascadeRealization, q: f64, tau_q: f64, depth: usize) -> Result<Vec<f64>> {
    let qw = real.products_w(depth)?;
    let ql = real.products_l(depth)?;
    Ok(qw
        .par_iter()
        .zip(ql.par_iter())
        .map(|(w, &l)| {
            let r = w.norm();
            if r == 0.0 {
                f64::NEG_INFINITY
            } else {
                q * r.ln() - tau_q * l.ln()
            }
        })
        .collect())
}

/// `ln(Q_q(w) Y_{q,k}(w))` for `|w| = target`, summing `Q_q(w·v)` over
/// `|v| = k`.
fn log_masses(log_terms: &[f64], b: usize, k: usize) -> Vec<f64> {
    let width = b.pow(k as u32);
    log_terms.par_chunks(width).map(log_sum_exp).collect()
}

fn check_q(real: &CascadeRealization, q: f64) -> Result<f64> {
    let j = interval_j(real.model());
    if !(q > j.q_lower() && q < j.q_upper()) {
        return Err(Error::OutsideJ { q, lower: j.q_lower(), upper: j.q_upper() });
    }
    tau(real.model(), q)
}

/// Weights `μ_q([w]) ∝ Q_q(w) Y_{q,k}(w)` at `target_depth`, with
/// `k = y_trunc_depth`, and `draws` addresses sampled from them.
pub fn sample_mu_q(
    real: &CascadeRealization,
    q: f64,
    target_depth: usize,
    y_trunc_depth: usize,
    draws: usize,
    seed: u64,
) -> Result<MuQSample> {
    let tau_q = check_q(real, q)?;
    let total = target_depth + y_trunc_depth;
    if total > real.depth() {
        return Err(Error::LevelOutOfRange { level: total, depth: real.depth() });
    }
    let b = real.base();
    let terms = log_q_q(real, q, tau_q, total)?;
    let logs = log_masses(&terms, b, y_trunc_depth);
    let norm = log_sum_exp(&logs);
    let weights: Vec<f64> = logs.iter().map(|&v| (v - norm).exp()).collect();
    let underflow = logs.contains(&f64::NEG_INFINITY)
        && real.products_w(target_depth)?.iter().zip(&logs).any(|(w, &v)| w.norm() > 0.0 && v == f64::NEG_INFINITY);
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::Config(format!("μ_q weights: {e}")))?;
    let mut rng = seeded_rng(derive_seed(seed, q.to_bits()));
    let draws = (0..draws).map(|_| NodeAddress::from_index(b, target_depth, dist.sample(&mut rng) as u64)).collect();
    Ok(MuQSample { q, tau_q, target_depth, y_trunc_depth, weights, draws, underflow })
}

/// Parent-child additivity defect `Σ_w |Σ_i μ_k(wi) - μ_k(w)| / Σ_w μ_k(w)`
/// of the unnormalized finite-stage masses at `target_depth`, for each
/// truncation depth `k` in `ks`.
pub fn additivity_residual(real: &CascadeRealization, q: f64, target_depth: usize, ks: &[usize]) -> Result<Vec<(usize, f64)>> {
    let tau_q = check_q(real, q)?;
    let b = real.base();
    ks.iter()
        .map(|&k| {
            let total = target_depth + 1 + k;
            if total > real.depth() {
                return Err(Error::LevelOutOfRange { level: total, depth: real.depth() });
            }
            let terms = log_q_q(real, q, tau_q, total)?;
            // children at target+1 with depth-k masses
            let child = log_masses(&terms, b, k);
            // parents at target with depth-k masses: drop the last level
            let parent_terms = log_q_q(real, q, tau_q, target_depth + k)?;
            let parent = log_masses(&parent_terms, b, k);
            let shift = log_sum_exp(&parent);
            let mut defect = 0.0;
            let mut mass = 0.0;
            for (w, &lp) in parent.iter().enumerate() {
                let p = (lp - shift).exp();
                let c: f64 = child[w * b..(w + 1) * b].iter().map(|&v| (v - shift).exp()).sum();
                defect += (c - p).abs();
                mass += p;
            }
            Ok((k, defect / mass))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::sample_tree;
    use crate::numeric::median;
    use crate::weights::presets;

    #[test]
    fn q_zero_uniform_for_nonzero_weights() {
        let r = sample_tree(&presets::beta_bell(), 10, 5).unwrap();
        let s = sample_mu_q(&r, 0.0, 6, 4, 10, 1).unwrap();
        assert!((s.tau_q + 1.0).abs() < 1e-12);
        for w in &s.weights {
            assert!((w - 1.0 / 64.0).abs() < 1e-12);
        }
        assert!((s.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(s.draws.len(), 10);
    }

    #[test]
    fn q_one_binomial_is_cascade_measure() {
        let r = sample_tree(&presets::deterministic_binomial(), 10, 0).unwrap();
        let s = sample_mu_q(&r, 1.0, 6, 3, 0, 1).unwrap();
        let qw = r.products_w(6).unwrap();
        for (w, z) in s.weights.iter().zip(&qw) {
            assert!((w - z.re).abs() < 1e-12);
        }
    }

    #[test]
    fn outside_j_is_refused() {
        let r = sample_tree(&presets::cantor_like(), 8, 0).unwrap();
        let j = interval_j(r.model());
        let q = j.q_upper() + 1.0;
        assert!(matches!(sample_mu_q(&r, q, 4, 2, 1, 0), Err(Error::OutsideJ { .. })));
        assert!(sample_mu_q(&r, 1.0, 4, 2, 1, 0).is_ok());
    }

    #[test]
    fn additivity_defect_decreases_with_truncation() {
        let model = presets::beta_bell();
        let ks = [0, 1, 2, 3, 4, 5, 6];
        let reals: Vec<_> = (0..64).map(|s| sample_tree(&model, 14, 300 + s).unwrap()).collect();
        for q in [0.5, 2.0] {
            let per: Vec<Vec<f64>> = reals
                .iter()
                .map(|r| additivity_residual(r, q, 6, &ks).unwrap().into_iter().map(|(_, v)| v).collect())
                .collect();
            let med: Vec<f64> = (0..ks.len()).map(|k| median(&per.iter().map(|v| v[k]).collect::<Vec<_>>())).collect();
            for k in 1..med.len() {
                assert!(med[k] <= med[k - 1], "q={q}: {med:?}");
            }
        }
    }

    #[test]
    fn csv_lists_every_cylinder() {
        let r = sample_tree(&presets::beta_bell(), 6, 5).unwrap();
        let s = sample_mu_q(&r, 1.0, 3, 2, 1, 1).unwrap();
        let csv = s.to_csv();
        assert_eq!(csv.lines().count(), 9);
        assert!(csv.starts_with("addr,weight\n000,"));
    }
}
