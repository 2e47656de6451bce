//! The L^q-spectrum `τ` of a weight model, its derivative, the interval
//! `J` on which it is the spectrum of `F`, and Legendre transforms.

mod legendre;

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use legendre::{legendre, legendre_parametric, LegendrePair};

use crate::error::{Error, Result};
use crate::numeric::solve_increasing;
use crate::weights::WeightModel;

/// Half-width of the `q` range scanned for the endpoints of `J`.
pub const SCAN_LIMIT: f64 = 64.0;
/// Tolerance of the membership test `qτ'(q) - τ(q) >= -IN_J_TOL`.
pub const IN_J_TOL: f64 = 1e-12;

/// `Φ(q, t) = E(Σ 1{W_i≠0} |W_i|^q L_i^{-t})`.
pub fn phi(model: &WeightModel, q: f64, t: f64) -> Result<f64> {
    Ok(model.phi_parts(q, t)?.value)
}

/// `τ(q)` together with `τ'(q)`.
pub fn tau_and_prime(model: &WeightModel, q: f64) -> Result<(f64, f64)> {
    // solve ln Φ(q, t) = 0, increasing in t since 0 < L_i < 1
    let mut failure = None;
    let root = solve_increasing(
        |t| match model.phi_parts(q, t) {
            Ok(p) if p.value > 0.0 => (p.value.ln(), p.d_t / p.value),
            Ok(_) => (f64::NEG_INFINITY, 0.0),
            Err(e) => {
                failure = Some(e);
                (f64::NAN, f64::NAN)
            }
        },
        0.0,
        1e-15,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let t = root.ok_or_else(|| Error::NoBracket { what: format!("Φ({q}, t) = 1") })?;
    let p = model.phi_parts(q, t)?;
    let prime = -p.d_q / p.d_t;
    Ok((t, if prime.is_nan() { f64::INFINITY } else { prime }))
}

pub fn tau(model: &WeightModel, q: f64) -> Result<f64> {
    Ok(tau_and_prime(model, q)?.0)
}

/// `τ'(q) = -∂_qΦ / ∂_tΦ` at `(q, τ(q))`.
pub fn tau_prime(model: &WeightModel, q: f64) -> Result<f64> {
    Ok(tau_and_prime(model, q)?.1)
}

/// `g(q) = qτ'(q) - τ(q)`, `None` where `τ` is undefined.
fn g(model: &WeightModel, q: f64) -> Option<(f64, f64)> {
    let (t, tp) = tau_and_prime(model, q).ok()?;
    let v = if q == 0.0 { -t } else { q * tp - t };
    if v.is_nan() {
        return None;
    }
    Some((v, tp))
}

/// One endpoint of `J` with the derivative there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Endpoint {
    /// `±inf` when unbounded.
    pub q: f64,
    /// `τ'` at the endpoint, or at `±SCAN_LIMIT` when unbounded.
    pub slope: f64,
    /// `g` at the endpoint, or at `±SCAN_LIMIT` when unbounded.
    pub residual: f64,
    /// The endpoint is the edge of the domain of `τ` rather than a zero of `g`.
    pub domain_edge: bool,
}

/// `J = [q̲, q̄]` with `h̲ = τ'(q̄)` and `h̄ = τ'(q̲)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalJ {
    pub lower: Endpoint,
    pub upper: Endpoint,
}

impl IntervalJ {
    pub fn q_lower(&self) -> f64 {
        self.lower.q
    }

    pub fn q_upper(&self) -> f64 {
        self.upper.q
    }

    pub fn h_lower(&self) -> f64 {
        self.upper.slope
    }

    pub fn h_upper(&self) -> f64 {
        self.lower.slope
    }

    pub fn contains(&self, q: f64) -> bool {
        q >= self.lower.q && q <= self.upper.q
    }
}

/// `g` is monotone on each half-line (`g' = qτ''`), so each endpoint is
/// found by doubling `|q|` from 1 until `g < 0` or `τ` stops existing,
/// then bisecting.
pub fn interval_j(model: &WeightModel) -> IntervalJ {
    IntervalJ { lower: endpoint(model, -1.0), upper: endpoint(model, 1.0) }
}

fn endpoint(model: &WeightModel, dir: f64) -> Endpoint {
    let inside_j = |q: f64| g(model, q).filter(|(v, _)| *v >= -IN_J_TOL);
    let mut inside = 0.0;
    let mut q = dir;
    let outside = loop {
        if inside_j(q).is_some() {
            inside = q;
            if q.abs() >= SCAN_LIMIT {
                let (v, tp) = g(model, q).expect("checked above");
                return Endpoint { q: dir * f64::INFINITY, slope: tp, residual: v, domain_edge: false };
            }
            q = dir * (2.0 * q.abs()).min(SCAN_LIMIT);
        } else {
            break q;
        }
    };
    let mut lo = inside;
    let mut hi = outside;
    let mut undefined_beyond = g(model, outside).is_none();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        match g(model, mid) {
            Some((v, _)) if v >= -IN_J_TOL => lo = mid,
            Some(_) => {
                hi = mid;
                undefined_beyond = false;
            }
            None => hi = mid,
        }
    }
    let (v, tp) = g(model, lo).unwrap_or((f64::NAN, f64::NAN));
    Endpoint { q: lo, slope: tp, residual: v, domain_edge: undefined_beyond && v > IN_J_TOL }
}

/// The spectrum of `F` on all of ℝ: `τ` on `J`, linear with slope `h̲`
/// beyond `q̄` and `h̄` below `q̲`. The same for every order `m`.
pub fn full_tau_m(model: &WeightModel, j: &IntervalJ, q: f64) -> Result<f64> {
    if q > j.q_upper() {
        return Ok(j.h_lower() * q);
    }
    if q < j.q_lower() {
        return Ok(j.h_upper() * q);
    }
    tau(model, q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveSource {
    Analytic,
    Empirical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCurve {
    pub q: Vec<f64>,
    pub tau: Vec<f64>,
    pub tau_prime: Vec<f64>,
    pub in_j: Vec<bool>,
    pub q_lower: f64,
    pub q_upper: f64,
    pub source: CurveSource,
}

impl SpectrumCurve {
    /// Curve from sampled values: non-finite points are dropped, `τ'` comes
    /// from central differences (one-sided at the ends) and `J` from the
    /// sign of `qτ' - τ`.
    pub fn from_values(qs: &[f64], taus: &[f64], source: CurveSource) -> Self {
        let (q, tau): (Vec<f64>, Vec<f64>) =
            qs.iter().zip(taus).filter(|(_, t)| t.is_finite()).map(|(&q, &t)| (q, t)).unzip();
        let n = q.len();
        let tau_prime: Vec<f64> = (0..n)
            .map(|k| match n {
                0 | 1 => f64::NAN,
                _ if k == 0 => (tau[1] - tau[0]) / (q[1] - q[0]),
                _ if k == n - 1 => (tau[n - 1] - tau[n - 2]) / (q[n - 1] - q[n - 2]),
                _ => (tau[k + 1] - tau[k - 1]) / (q[k + 1] - q[k - 1]),
            })
            .collect();
        let in_j: Vec<bool> = (0..n).map(|k| q[k] * tau_prime[k] - tau[k] >= -IN_J_TOL).collect();
        let inside: Vec<f64> = (0..n).filter(|&k| in_j[k]).map(|k| q[k]).collect();
        Self {
            q_lower: inside.first().copied().unwrap_or(f64::NAN),
            q_upper: inside.last().copied().unwrap_or(f64::NAN),
            q,
            tau,
            tau_prime,
            in_j,
            source,
        }
    }

    /// Largest violation of midpoint concavity over consecutive triples.
    pub fn concavity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 1..self.q.len().saturating_sub(1) {
            let (a, b, c) = (self.q[k - 1], self.q[k], self.q[k + 1]);
            let interp = self.tau[k - 1] + (self.tau[k + 1] - self.tau[k - 1]) * (b - a) / (c - a);
            worst = worst.max(interp - self.tau[k]);
        }
        worst
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,tau,tau_prime,in_J\n");
        for k in 0..self.q.len() {
            let _ = writeln!(out, "{},{},{},{}", self.q[k], self.tau[k], self.tau_prime[k], self.in_j[k] as u8);
        }
        out
    }
}

/// `τ` and `τ'` over a grid; points where `τ` is undefined are dropped.
pub fn analytic_curve(model: &WeightModel, qs: &[f64]) -> SpectrumCurve {
    let j = interval_j(model);
    let points: Vec<(f64, f64, f64)> = qs
        .par_iter()
        .filter_map(|&q| tau_and_prime(model, q).ok().map(|(t, tp)| (q, t, tp)))
        .collect();
    SpectrumCurve {
        q: points.iter().map(|p| p.0).collect(),
        tau: points.iter().map(|p| p.1).collect(),
        tau_prime: points.iter().map(|p| p.2).collect(),
        in_j: points.iter().map(|&(q, t, tp)| (if q == 0.0 { -t } else { q * tp - t }) >= -IN_J_TOL).collect(),
        q_lower: j.q_lower(),
        q_upper: j.q_upper(),
        source: CurveSource::Analytic,
    }
}

/// `full_tau_m` over a grid, with the matching slopes.
pub fn full_curve(model: &WeightModel, qs: &[f64]) -> SpectrumCurve {
    let j = interval_j(model);
    let points: Vec<(f64, f64, f64, bool)> = qs
        .par_iter()
        .filter_map(|&q| {
            if q > j.q_upper() {
                Some((q, j.h_lower() * q, j.h_lower(), false))
            } else if q < j.q_lower() {
                Some((q, j.h_upper() * q, j.h_upper(), false))
            } else {
                tau_and_prime(model, q).ok().map(|(t, tp)| (q, t, tp, true))
            }
        })
        .collect();
    SpectrumCurve {
        q: points.iter().map(|p| p.0).collect(),
        tau: points.iter().map(|p| p.1).collect(),
        tau_prime: points.iter().map(|p| p.2).collect(),
        in_j: points.iter().map(|p| p.3).collect(),
        q_lower: j.q_lower(),
        q_upper: j.q_upper(),
        source: CurveSource::Analytic,
    }
}

/// Positive root `q_m` of `τ(q) = qm - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderRoot {
    pub m: usize,
    /// `None` when no sign change appears up to `SCAN_LIMIT`.
    pub q_m: Option<f64>,
    pub residual: f64,
}

pub fn order_root(model: &WeightModel, m: usize) -> Result<OrderRoot> {
    let mf = m as f64;
    let f = |q: f64| tau(model, q).map(|t| t - (q * mf - 1.0));
    let f0 = f(0.0)?;
    if f0.abs() <= 1e-12 && tau_prime(model, 0.0)? <= mf {
        return Ok(OrderRoot { m, q_m: Some(0.0), residual: f0 });
    }
    let mut lo = 0.0;
    let mut hi = None;
    let mut q = 1.0 / 64.0;
    while q <= SCAN_LIMIT {
        if f(q)? < 0.0 {
            hi = Some(q);
            break;
        }
        lo = q;
        q *= 2.0;
    }
    let Some(mut hi) = hi else {
        return Ok(OrderRoot { m, q_m: None, residual: f(SCAN_LIMIT)? });
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid)? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (flo, fhi) = (f(lo)?, f(hi)?);
    let (root, residual) = if flo.abs() <= fhi.abs() { (lo, flo) } else { (hi, fhi) };
    Ok(OrderRoot { m, q_m: Some(root), residual })
}

/// Predicted spectrum of `G = F + g` for `q >= 0`: `qm - 1` below `q_m`,
/// `τ(q)` above, i.e. `min(τ(q), qm - 1)`.
pub fn predicted_tau_g(model: &WeightModel, root: &OrderRoot, q: f64) -> Result<f64> {
    if q < 0.0 {
        return Err(Error::Config(format!("prediction needs q >= 0, got {q}")));
    }
    let t = tau(model, q)?;
    match root.q_m {
        Some(qm) if q < qm => Ok(q * root.m as f64 - 1.0),
        _ => Ok(t),
    }
}
