use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{osc, OscQuery};
use crate::cascade::ComposedSamples;
use crate::error::{Error, Result};
use crate::numeric::ols;

/// Geometric radius ladder `r_k = r0 · 2^{-k}`, `k = 0..rungs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusLadder {
    /// Defaults to a quarter of the sample range, shrunk to the distance from
    /// `x` to the nearer end when `x` is interior.
    pub r0: Option<f64>,
    pub rungs: usize,
    /// Rungs whose ball holds fewer samples are below the grid resolution
    /// and left out of the fit.
    pub min_samples: usize,
}

impl Default for RadiusLadder {
    fn default() -> Self {
        Self { r0: None, rungs: 10, min_samples: 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentEstimate {
    pub x: f64,
    pub m: usize,
    /// `+inf` when at least half the resolved radii see no oscillation.
    pub h_hat: f64,
    pub infinite: bool,
    pub radii: Vec<f64>,
    /// `NaN` for rungs below the grid resolution.
    pub oscillations: Vec<f64>,
    pub residual: f64,
    pub n_used: usize,
}

/// Slope of `log Osc^{(m)}(B(x, r))` against `log r`; balls are clipped to
/// the sample range.
pub fn pointwise_exponent(samples: &ComposedSamples, x: f64, m: usize, ladder: &RadiusLadder) -> Result<ExponentEstimate> {
    let (min, max) = samples.range();
    if !(x >= min && x <= max) {
        return Err(Error::OutOfRange { lo: x, hi: x, min, max });
    }
    let r0 = ladder.r0.unwrap_or_else(|| {
        let quarter = (max - min) / 4.0;
        let room = (x - min).min(max - x);
        if room > 0.0 { quarter.min(room) } else { quarter }
    });
    let radii: Vec<f64> = (0..ladder.rungs).map(|k| r0 * 0.5f64.powi(k as i32)).collect();
    let mut oscillations = Vec::with_capacity(radii.len());
    let mut lr = Vec::new();
    let mut lo = Vec::new();
    let mut resolved = 0;
    for &r in &radii {
        let (a, b) = ((x - r).max(min), (x + r).min(max));
        let inside = samples.x.partition_point(|&v| v <= b) - samples.x.partition_point(|&v| v < a);
        if inside < ladder.min_samples {
            oscillations.push(f64::NAN);
            continue;
        }
        resolved += 1;
        let q = OscQuery::new(m, a, b);
        let v = osc(&samples.x, &samples.y, &q)?;
        oscillations.push(v);
        if v > 0.0 {
            lr.push(r.ln());
            lo.push(v.ln());
        }
    }
    let n_used = lr.len();
    if resolved > 0 && 2 * (resolved - n_used) >= resolved {
        return Ok(ExponentEstimate {
            x,
            m,
            h_hat: f64::INFINITY,
            infinite: true,
            radii,
            oscillations,
            residual: 0.0,
            n_used,
        });
    }
    if n_used < 4 {
        return Err(Error::TooFewRadii { used: n_used });
    }
    let fit = ols(&lr, &lo).ok_or(Error::TooFewRadii { used: n_used })?;
    Ok(ExponentEstimate { x, m, h_hat: fit.slope, infinite: false, radii, oscillations, residual: fit.residual, n_used })
}

pub fn estimates_to_csv(estimates: &[ExponentEstimate]) -> String {
    let mut out = String::from("x,m,h_hat,residual,n_used\n");
    for e in estimates {
        let _ = writeln!(out, "{},{},{},{},{}", e.x, e.m, e.h_hat, e.residual, e.n_used);
    }
    out
}
