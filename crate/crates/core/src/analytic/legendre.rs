use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::SpectrumCurve;

/// `τ*(h) = inf_q (hq - τ(q))` on an `h` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegendrePair {
    pub h: Vec<f64>,
    pub tau_star: Vec<f64>,
    /// Smallest and largest `h` with `τ*(h) >= 0`.
    pub support: Option<(f64, f64)>,
}

impl LegendrePair {
    fn new(h: Vec<f64>, tau_star: Vec<f64>) -> Self {
        let mut support: Option<(f64, f64)> = None;
        for (&x, &v) in h.iter().zip(&tau_star) {
            if v >= 0.0 {
                support = Some(match support {
                    None => (x, x),
                    Some((a, b)) => (a.min(x), b.max(x)),
                });
            }
        }
        Self { h, tau_star, support }
    }

    pub fn max(&self) -> Option<(f64, f64)> {
        self.h
            .iter()
            .zip(&self.tau_star)
            .map(|(&h, &v)| (h, v))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,tau_star\n");
        for (h, v) in self.h.iter().zip(&self.tau_star) {
            let _ = writeln!(out, "{},{}", h, v);
        }
        out
    }
}

/// Discrete infimum over the grid of the curve.
pub fn legendre(curve: &SpectrumCurve, hs: &[f64]) -> LegendrePair {
    let tau_star = hs
        .iter()
        .map(|&h| {
            curve
                .q
                .iter()
                .zip(&curve.tau)
                .map(|(&q, &t)| h * q - t)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    LegendrePair::new(hs.to_vec(), tau_star)
}

/// `(τ'(q), qτ'(q) - τ(q))` over the points of the curve inside `J`,
/// sorted by `h`.
pub fn legendre_parametric(curve: &SpectrumCurve) -> LegendrePair {
    let mut pts: Vec<(f64, f64)> = (0..curve.q.len())
        .filter(|&k| curve.in_j[k] && curve.tau_prime[k].is_finite())
        .map(|k| (curve.tau_prime[k], curve.q[k] * curve.tau_prime[k] - curve.tau[k]))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    LegendrePair::new(pts.iter().map(|p| p.0).collect(), pts.iter().map(|p| p.1).collect())
}
