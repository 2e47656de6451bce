//! Partition functions of sampled cascades and the estimators built on
//! them: per-level roots `t_n(q)`, the extrapolated `τ̂`, coarse spectra and
//! `μ_q` sampling.

mod balls;
mod coarse;
mod muq;

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use balls::{ball_partition, BallPartition};
pub use coarse::{coarse_spectrum, CoarseBin, CoarseSpectrum};
pub use muq::{additivity_residual, sample_mu_q, MuQSample};

use crate::analytic::{CurveSource, SpectrumCurve};
use crate::cascade::{CascadeRealization, ComposedSamples};
use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, median, ols, solve_increasing};
use crate::oscillation::{osc, osc_level_factored, OscQuery};

/// Smallest `q` accepted by the estimators, and only when `W` has no zero
/// coordinates.
pub const Q_MIN: f64 = -2.0;

/// Depth of the subtree approximants used for `Z(w)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubDepth {
    /// `N - n` at level `n`: every cylinder is resolved down to the tree depth.
    #[default]
    Remaining,
    Fixed(usize),
}

impl SubDepth {
    pub fn at(self, depth: usize, level: usize) -> usize {
        match self {
            SubDepth::Remaining => depth - level,
            SubDepth::Fixed(s) => s,
        }
    }
}

/// Per-cylinder oscillations and lengths at one level of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderStats {
    pub m: usize,
    pub level: usize,
    pub sub_depth: usize,
    /// `Osc^{(m)}_F(I^L_w) = |Q_W(w)| Z^{(m)}(w)`.
    pub osc: Vec<f64>,
    /// `|I^L_w| = Q_L(w) Z_L(w)`.
    pub len: Vec<f64>,
}

impl CylinderStats {
    pub fn compute(real: &CascadeRealization, m: usize, level: usize, sub_depth: usize) -> Result<Self> {
        let osc = osc_level_factored(real, level, m, sub_depth)?.osc();
        let ql = real.products_l(level)?;
        let rel = real.relative_products_l(level, sub_depth)?;
        let width = rel.len() / ql.len();
        let len = rel
            .par_chunks(width)
            .zip(ql.par_iter())
            .map(|(chunk, &q)| q * crate::numeric::sum_compensated(chunk.iter().copied()))
            .collect();
        Ok(Self { m, level, sub_depth, osc, len })
    }

    /// Cylinders read off sampled ordinates: cylinder `j` of `level` spans
    /// samples `j b^(N-level) ..= (j+1) b^(N-level)` of a level-`N` grid.
    pub fn from_samples(samples: &ComposedSamples, base: usize, m: usize, level: usize) -> Result<Self> {
        if level > samples.level {
            return Err(Error::LevelOutOfRange { level, depth: samples.level });
        }
        let sub_depth = samples.level - level;
        let width = base.pow(sub_depth as u32);
        let cells = base.pow(level as u32);
        let (osc, len): (Vec<f64>, Vec<f64>) = (0..cells)
            .into_par_iter()
            .map(|j| {
                let (a, b) = (j * width, (j + 1) * width);
                let (x, y) = (&samples.x[a..=b], &samples.y[a..=b]);
                let o = osc(x, y, &OscQuery::new(m, x[0], x[width]))?;
                Ok((o, x[width] - x[0]))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip();
        Ok(Self { m, level, sub_depth, osc, len })
    }

    pub fn all_zero(&self) -> bool {
        self.osc.iter().all(|&o| o == 0.0)
    }

    /// `ln θ_n(q, t)` with `0^q = 0` for every `q`; `-inf` when every
    /// oscillation vanishes.
    pub fn log_theta(&self, q: f64, t: f64) -> f64 {
        let terms: Vec<f64> = self
            .osc
            .iter()
            .zip(&self.len)
            .filter(|(o, _)| **o > 0.0)
            .map(|(o, l)| q * o.ln() - t * l.ln())
            .collect();
        log_sum_exp(&terms)
    }

    pub fn theta(&self, q: f64, t: f64) -> f64 {
        self.log_theta(q, t).exp()
    }

    /// The root `t_n(q)` of `θ_n(q, t) = 1`; `None` for an all-zero partition.
    pub fn root(&self, q: f64) -> Option<f64> {
        let pairs: Vec<(f64, f64)> = self
            .osc
            .iter()
            .zip(&self.len)
            .filter(|(o, _)| **o > 0.0)
            .map(|(o, l)| (q * o.ln(), -l.ln()))
            .collect();
        if pairs.is_empty() {
            return None;
        }
        solve_increasing(
            |t| {
                let terms: Vec<f64> = pairs.iter().map(|&(a, nl)| a + t * nl).collect();
                let lse = log_sum_exp(&terms);
                // derivative of ln θ: weighted mean of -ln|I|
                let d = pairs.iter().zip(&terms).map(|(&(_, nl), &x)| nl * (x - lse).exp()).sum::<f64>();
                (lse, d)
            },
            0.0,
            1e-14,
        )
    }
}

/// `θ^{(m)}_{F,n}(q, t)` on one realization.
pub fn partition_theta(real: &CascadeRealization, m: usize, n: usize, q: f64, t: f64, sub_depth: usize) -> Result<f64> {
    Ok(CylinderStats::compute(real, m, n, sub_depth)?.theta(q, t))
}

/// Empirical `τ̂` with the per-level medians it was extrapolated from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCurve {
    pub m: usize,
    pub q: Vec<f64>,
    pub t_hat: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_levels: Vec<usize>,
    /// RMS residual of the `1/n` fit.
    pub misfit: Vec<f64>,
    pub levels: Vec<usize>,
    /// `median_n[k][i]`: median of `t_n(q_i)` over replicas at `levels[k]`.
    pub median_n: Vec<Vec<Option<f64>>>,
    /// `(level, q)` pairs with an all-zero partition on some replica.
    pub skipped: Vec<(usize, f64)>,
    pub replicas: usize,
}

impl EmpiricalCurve {
    /// As a spectrum curve, `τ'` by finite differences on the grid.
    pub fn to_spectrum_curve(&self) -> SpectrumCurve {
        SpectrumCurve::from_values(&self.q, &self.t_hat, CurveSource::Empirical)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,t_hat,stderr,n_levels\n");
        for i in 0..self.q.len() {
            let _ = writeln!(out, "{},{},{},{}", self.q[i], self.t_hat[i], self.stderr[i], self.n_levels[i]);
        }
        out
    }
}

/// Roots `t_n(q)` for every level and `q` of one realization.
pub fn level_roots(
    real: &CascadeRealization,
    m: usize,
    qs: &[f64],
    levels: &[usize],
    sub_depth: SubDepth,
) -> Result<Vec<Vec<Option<f64>>>> {
    levels
        .iter()
        .map(|&n| {
            let sub = sub_depth.at(real.depth(), n);
            let stats = CylinderStats::compute(real, m, n, sub)?;
            Ok(qs.iter().map(|&q| stats.root(q)).collect())
        })
        .collect()
}

/// Roots `t_n(q)` computed from sampled ordinates, for functions that are
/// not cascades themselves (such as `F + f`).
pub fn sample_level_roots(
    samples: &ComposedSamples,
    base: usize,
    m: usize,
    qs: &[f64],
    levels: &[usize],
) -> Result<Vec<Vec<Option<f64>>>> {
    levels
        .iter()
        .map(|&n| {
            let stats = CylinderStats::from_samples(samples, base, m, n)?;
            Ok(qs.iter().map(|&q| stats.root(q)).collect())
        })
        .collect()
}

/// Median across replicas of `t_n(q)` per level, then ordinary least
/// squares of the medians against `1/n`; the intercept is `τ̂(q)`.
pub fn empirical_tau(
    reals: &[CascadeRealization],
    m: usize,
    qs: &[f64],
    levels: &[usize],
    sub_depth: SubDepth,
) -> Result<EmpiricalCurve> {
    let first = reals.first().ok_or_else(|| Error::Config("no realizations".into()))?;
    for &q in qs {
        if q < Q_MIN || (q < 0.0 && first.model().w_has_zero()) {
            return Err(Error::Config(format!("q = {q} is below the admissible range for this model")));
        }
    }
    for r in reals {
        for &n in levels {
            if n > r.depth() || n + sub_depth.at(r.depth(), n) > r.depth() {
                return Err(Error::LevelOutOfRange { level: n, depth: r.depth() });
            }
        }
    }
    let per_real: Vec<Vec<Vec<Option<f64>>>> =
        reals.par_iter().map(|r| level_roots(r, m, qs, levels, sub_depth)).collect::<Result<_>>()?;
    Ok(aggregate(m, qs, levels, &per_real))
}

/// Combine per-replica roots `roots[r][k][i]` (replica, level, q).
pub fn aggregate(m: usize, qs: &[f64], levels: &[usize], roots: &[Vec<Vec<Option<f64>>>]) -> EmpiricalCurve {
    let mut skipped = Vec::new();
    let mut median_n = vec![vec![None; qs.len()]; levels.len()];
    for (k, &n) in levels.iter().enumerate() {
        for (i, &q) in qs.iter().enumerate() {
            let vals: Vec<f64> = roots.iter().filter_map(|r| r[k][i]).collect();
            if vals.len() < roots.len() {
                skipped.push((n, q));
            }
            if !vals.is_empty() {
                median_n[k][i] = Some(median(&vals));
            }
        }
    }
    let mut t_hat = Vec::with_capacity(qs.len());
    let mut stderr = Vec::with_capacity(qs.len());
    let mut n_levels = Vec::with_capacity(qs.len());
    let mut misfit = Vec::with_capacity(qs.len());
    for i in 0..qs.len() {
        let (x, y): (Vec<f64>, Vec<f64>) = levels
            .iter()
            .enumerate()
            .filter_map(|(k, &n)| median_n[k][i].map(|v| (1.0 / n as f64, v)))
            .unzip();
        n_levels.push(x.len());
        match (x.len(), ols(&x, &y)) {
            (_, Some(fit)) => {
                t_hat.push(fit.intercept);
                stderr.push(fit.intercept_stderr);
                misfit.push(fit.residual);
            }
            (1, None) => {
                t_hat.push(y[0]);
                stderr.push(f64::NAN);
                misfit.push(f64::NAN);
            }
            _ => {
                t_hat.push(f64::NAN);
                stderr.push(f64::NAN);
                misfit.push(f64::NAN);
            }
        }
    }
    EmpiricalCurve {
        m,
        q: qs.to_vec(),
        t_hat,
        stderr,
        n_levels,
        misfit,
        levels: levels.to_vec(),
        median_n,
        skipped,
        replicas: roots.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{phi, tau};
    use crate::cascade::sample_tree;
    use crate::weights::{presets, WeightModel};

    #[test]
    fn sampled_cylinders_match_factored() {
        use crate::cascade::{compose, evaluate_grid};
        let model = presets::beta_bell();
        let r = sample_tree(&model, 10, 8).unwrap();
        let fw = evaluate_grid(&r, crate::weights::Side::W, 10).unwrap();
        let fl = evaluate_grid(&r, crate::weights::Side::L, 10).unwrap();
        let s = compose(&fw, &fl).unwrap();
        for n in [3, 6] {
            let a = CylinderStats::compute(&r, 1, n, 10 - n).unwrap();
            let b = CylinderStats::from_samples(&s, 2, 1, n).unwrap();
            for j in 0..a.osc.len() {
                assert!((a.osc[j] - b.osc[j]).abs() < 1e-12);
                assert!((a.len[j] - b.len[j]).abs() < 1e-12);
            }
        }
        let roots = sample_level_roots(&s, 2, 1, &[1.0, 2.0], &[4, 5]).unwrap();
        assert_eq!(roots.len(), 2);
        assert!(roots.iter().flatten().all(|v| v.is_some()));
    }

    #[test]
    fn theta_examples() {
        let m = presets::beta_bell();
        let r = sample_tree(&m, 8, 1).unwrap();
        for n in 1..=6 {
            let v = partition_theta(&r, 1, n, 0.0, 0.0, 2).unwrap();
            assert!((v - 2f64.powi(n as i32)).abs() < 1e-9);
        }
        let b = presets::deterministic_binomial();
        let r = sample_tree(&b, 10, 0).unwrap();
        for n in 1..=8 {
            assert!((partition_theta(&r, 1, n, 1.0, 0.0, 2).unwrap() - 1.0).abs() < 1e-12);
            for &(q, t) in &[(2.0, 0.3), (-1.5, 1.0), (0.5, -0.2)] {
                let expect = phi(&b, q, t).unwrap().powi(n as i32);
                let got = partition_theta(&r, 1, n, q, t, 10 - n).unwrap();
                assert!((got / expect - 1.0).abs() < 1e-12, "n={n} q={q} t={t}");
            }
        }
    }

    #[test]
    fn deterministic_roots_are_exact() {
        let models = [
            presets::deterministic_binomial(),
            presets::monofractal_half(),
            WeightModel::deterministic(&[0.5, -0.2, 0.7], &[0.2, 0.3, 0.5], "ternary"),
        ];
        for model in models {
            let r = sample_tree(&model, 7, 0).unwrap();
            for n in 1..=7 {
                let stats = CylinderStats::compute(&r, 1, n, 0).unwrap();
                for q in [-2.0, -0.5, 0.0, 1.0, 2.5, 4.0] {
                    let t = stats.root(q).unwrap();
                    assert!((t - tau(&model, q).unwrap()).abs() < 1e-10, "{} n={n} q={q}", model.label);
                    assert!(stats.theta(q, t - 0.1) < 1.0 && stats.theta(q, t + 0.1) > 1.0);
                }
            }
        }
    }

    #[test]
    fn all_zero_partition_is_skipped() {
        let m = presets::beta_bell();
        let reals: Vec<_> = (0..3).map(|s| sample_tree(&m, 6, s).unwrap()).collect();
        let c = empirical_tau(&reals, 2, &[1.0], &[4, 5, 6], SubDepth::Remaining).unwrap();
        assert!(c.skipped.contains(&(6, 1.0)));
        assert_eq!(c.n_levels[0], 2);
        assert!(c.t_hat[0].is_finite());
    }

    #[test]
    fn binomial_extrapolation_is_exact() {
        let m = presets::deterministic_binomial();
        let reals = vec![sample_tree(&m, 10, 0).unwrap()];
        let qs = [0.0, 1.0, 2.0, 3.0];
        let c = empirical_tau(&reals, 1, &qs, &[4, 6, 8, 10], SubDepth::Remaining).unwrap();
        for (i, &q) in qs.iter().enumerate() {
            assert!((c.t_hat[i] - tau(&m, q).unwrap()).abs() < 1e-10);
            assert!(c.misfit[i] < 1e-10);
        }
        let csv = c.to_csv();
        assert!(csv.starts_with("q,t_hat,stderr,n_levels\n0,"));
    }

    #[test]
    fn rejects_negative_q_with_zero_weights() {
        let reals = vec![sample_tree(&presets::cantor_like(), 6, 0).unwrap()];
        assert!(empirical_tau(&reals, 1, &[-1.0], &[3, 4], SubDepth::Remaining).is_err());
        let reals = vec![sample_tree(&presets::beta_bell(), 6, 0).unwrap()];
        assert!(empirical_tau(&reals, 1, &[-3.0], &[3, 4], SubDepth::Remaining).is_err());
    }

    #[test]
    fn higher_order_dominates_first_order() {
        let m = presets::beta_bell();
        let reals: Vec<_> = (0..16).map(|s| sample_tree(&m, 10, 100 + s).unwrap()).collect();
        let qs = [0.5, 1.0, 2.0, 3.0];
        let levels = [4, 5, 6, 7, 8];
        let c1 = empirical_tau(&reals, 1, &qs, &levels, SubDepth::Remaining).unwrap();
        let c2 = empirical_tau(&reals, 2, &qs, &levels, SubDepth::Remaining).unwrap();
        for i in 0..qs.len() {
            assert!(c2.t_hat[i] >= c1.t_hat[i] - c1.stderr[i] - c2.stderr[i], "q={}", qs[i]);
        }
    }
}
