//! Finite differences and m-th order oscillations of sampled functions.

mod factored;
mod hull;
mod pointwise;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use factored::{osc_interval_factored, osc_level_factored, LevelOscillations};
pub use hull::diameter;
pub use pointwise::{estimates_to_csv, pointwise_exponent, ExponentEstimate, RadiusLadder};

use crate::cascade::interpolate_sorted;
use crate::error::{Error, Result};

/// Largest grid (in cells) scanned exhaustively over every lag for `m >= 2`.
pub const EXHAUSTIVE_LIMIT: usize = 1 << 12;
const RESAMPLE_LIMIT: usize = 1 << 16;

/// How the lags `h` are explored for `m >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LagPolicy {
    /// Every admissible grid lag.
    Exhaustive,
    /// Lags `h_max, h_max/2, h_max/4, …`.
    Geometric,
    /// Exhaustive up to [`EXHAUSTIVE_LIMIT`] cells, geometric beyond.
    #[default]
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscQuery {
    pub m: usize,
    pub a: f64,
    pub b: f64,
    pub policy: LagPolicy,
}

impl OscQuery {
    pub fn new(m: usize, a: f64, b: f64) -> Self {
        Self { m, a, b, policy: LagPolicy::Auto }
    }
}

/// `Δ_s^m` applied to a sequence with integer lag `s`.
pub fn finite_difference(values: &[Complex64], m: usize, step: usize) -> Result<Vec<Complex64>> {
    let span = m * step;
    if step == 0 || values.len() <= span {
        return Err(Error::LengthUnderflow { len: values.len(), order: m, step });
    }
    let mut cur = values.to_vec();
    for _ in 0..m {
        cur = (0..cur.len() - step).map(|j| cur[j + step] - cur[j]).collect();
    }
    Ok(cur)
}

fn binomials(m: usize) -> Vec<f64> {
    let mut c = vec![1.0; m + 1];
    for k in 1..m {
        c[k] = c[k - 1] * (m - k + 1) as f64 / k as f64;
    }
    c
}

/// `max_t |Δ_s^m f(t)|` at one lag.
fn max_difference(values: &[Complex64], m: usize, s: usize, coef: &[f64]) -> f64 {
    let span = m * s;
    let mut best: f64 = 0.0;
    for t in 0..values.len() - span {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &c) in coef.iter().enumerate() {
            let sign = if (m - k).is_multiple_of(2) { 1.0 } else { -1.0 };
            acc += values[t + k * s] * (sign * c);
        }
        best = best.max(acc.norm());
    }
    best
}

/// Oscillation of order `m` of a uniformly sampled function over the whole
/// sample range. Translates and lags are restricted to grid multiples.
pub fn osc_uniform(values: &[Complex64], m: usize, policy: LagPolicy) -> f64 {
    if m == 1 {
        return diameter(values);
    }
    if values.len() < m + 1 {
        return 0.0;
    }
    let cells = values.len() - 1;
    let max_step = cells / m;
    let coef = binomials(m);
    let exhaustive = match policy {
        LagPolicy::Exhaustive => true,
        LagPolicy::Geometric => false,
        LagPolicy::Auto => cells <= EXHAUSTIVE_LIMIT,
    };
    let mut best: f64 = 0.0;
    if exhaustive {
        for s in 1..=max_step {
            best = best.max(max_difference(values, m, s, &coef));
        }
    } else {
        let mut s = max_step;
        while s >= 1 {
            best = best.max(max_difference(values, m, s, &coef));
            s /= 2;
        }
    }
    best
}

/// Indices `[lo, hi)` of the abscissae inside `[a, b]`.
fn inner_range(x: &[f64], a: f64, b: f64) -> (usize, usize) {
    (x.partition_point(|&v| v < a), x.partition_point(|&v| v <= b))
}

fn is_uniform(x: &[f64]) -> bool {
    if x.len() < 3 {
        return true;
    }
    let h = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
    x.windows(2).all(|p| ((p[1] - p[0]) - h).abs() <= 1e-9 * h)
}

/// `Osc^{(m)}` over `[a, b]` of the piecewise-linear function through the
/// samples `(x_j, y_j)` (`x` strictly increasing).
///
/// For `m = 1` the value is exact. For `m >= 2` the translates and lags
/// run over the sample grid when it is uniform and `a`, `b` are sample
/// points; otherwise the function is first resampled on a uniform grid of
/// `[a, b]` with as many cells as samples fall inside.
pub fn osc(x: &[f64], y: &[Complex64], query: &OscQuery) -> Result<f64> {
    let (a, b) = (query.a, query.b);
    let (min, max) = (x[0], x[x.len() - 1]);
    let tol = 1e-12 * (max - min).abs().max(1.0);
    if !(a < b) || a < min - tol || b > max + tol || query.m == 0 {
        return Err(Error::OutOfRange { lo: a, hi: b, min, max });
    }
    let (a, b) = (a.max(min), b.min(max));
    let (lo, hi) = inner_range(x, a, b);
    if query.m == 1 {
        let mut vals = Vec::with_capacity(hi - lo + 2);
        vals.push(interpolate_sorted(x, y, a));
        vals.extend_from_slice(&y[lo..hi]);
        vals.push(interpolate_sorted(x, y, b));
        return Ok(diameter(&vals));
    }
    let on_grid = hi > lo && x[lo] == a && x[hi - 1] == b;
    if on_grid && is_uniform(&x[lo..hi]) {
        return Ok(osc_uniform(&y[lo..hi], query.m, query.policy));
    }
    let n = (hi - lo + 1).clamp(query.m, RESAMPLE_LIMIT);
    let h = (b - a) / n as f64;
    let vals: Vec<Complex64> =
        (0..=n).map(|j| interpolate_sorted(x, y, if j == n { b } else { a + j as f64 * h })).collect();
    Ok(osc_uniform(&vals, query.m, query.policy))
}
