//! Named parametric weight laws.
//!
//! Each family keeps `L` deterministic so that `Φ(q, t)` factors into
//! per-coordinate moments of `|W_i|`, all of which have closed forms.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{Error, Result};
use crate::numeric::{exp_integral_e1, exp_integral_e2};

/// Moments of one coordinate: `E(1{W≠0}|W|^q)` and `E(1{W≠0}|W|^q ln|W|)`.
/// `value = +inf` encodes divergence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordMoment {
    pub value: f64,
    pub log_moment: f64,
}

impl CoordMoment {
    fn zero() -> Self {
        Self { value: 0.0, log_moment: 0.0 }
    }

    fn deterministic(w: f64, q: f64) -> Self {
        let a = w.abs();
        if a == 0.0 {
            return Self::zero();
        }
        let v = a.powf(q);
        Self { value: v, log_moment: v * a.ln() }
    }

    fn divergent() -> Self {
        Self { value: f64::INFINITY, log_moment: f64::NEG_INFINITY }
    }
}

/// Catalogue of continuous weight laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Generator {
    /// `b = 2`, `W_0 ~ Beta(alpha, beta)`, `W_1 = 1 - W_0`; `L` fixed.
    BetaSplit { alpha: f64, beta: f64, l: Vec<f64> },
    /// `W_i = mean_i + amplitude_i · e^{iΘ}` with one shared uniform phase
    /// `Θ`; conservative when the amplitudes sum to zero.
    UniformPhase { mean: Vec<f64>, amplitude: Vec<f64>, l: Vec<f64> },
    /// `W_0 = exp(-V)` with `V >= 1` of density `v^{-2}`, the other
    /// coordinates deterministic and equal, tuned so that `E(Σ W_i) = 1`.
    HeavyLog { l: Vec<f64> },
}

/// Probe used to certify the divergence of `τ'` at `0+` for the heavy-log
/// family: `τ'(q)` grows like `ln(1/q) / (2 ln 2)` for uniform binary `L`,
/// so the threshold is pinned at a point where that growth is measurable.
pub const HEAVY_LOG_PROBE: [(f64, f64); 2] = [(0.01, 3.0), (1e-9, 14.0)];

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::BetaSplit { .. } => "beta_split",
            Generator::UniformPhase { .. } => "uniform_phase",
            Generator::HeavyLog { .. } => "heavy_log",
        }
    }

    pub fn l(&self) -> &[f64] {
        match self {
            Generator::BetaSplit { l, .. } | Generator::UniformPhase { l, .. } | Generator::HeavyLog { l } => l,
        }
    }

    pub fn base(&self) -> usize {
        self.l().len()
    }

    pub(crate) fn check(&self) -> Result<()> {
        let b = self.base();
        if b < 2 {
            return Err(Error::InvalidModel(format!("{}: base must be >= 2", self.name())));
        }
        match self {
            Generator::BetaSplit { alpha, beta, .. } => {
                if b != 2 {
                    return Err(Error::InvalidModel("beta_split requires b = 2".into()));
                }
                if !(*alpha > 0.0 && *beta > 0.0) {
                    return Err(Error::InvalidModel("beta_split parameters must be positive".into()));
                }
            }
            Generator::UniformPhase { mean, amplitude, .. } => {
                if mean.len() != b || amplitude.len() != b {
                    return Err(Error::InvalidModel("uniform_phase vectors must have length b".into()));
                }
            }
            Generator::HeavyLog { .. } => {}
        }
        Ok(())
    }

    /// Deterministic value shared by coordinates `1..b` of the heavy-log law.
    pub fn heavy_log_rest(b: usize) -> f64 {
        (1.0 - exp_integral_e2(1.0)) / (b as f64 - 1.0)
    }

    /// `E(Σ W_i)` in closed form.
    pub fn expected_w_sum(&self) -> Complex64 {
        match self {
            Generator::BetaSplit { .. } => Complex64::new(1.0, 0.0),
            Generator::UniformPhase { mean, .. } => Complex64::new(mean.iter().sum(), 0.0),
            Generator::HeavyLog { l } => {
                let b = l.len();
                Complex64::new(exp_integral_e2(1.0) + (b - 1) as f64 * Self::heavy_log_rest(b), 0.0)
            }
        }
    }

    /// Whether `Σ W_i = 1` almost surely. `None` when undecidable.
    pub fn is_conservative(&self) -> Option<bool> {
        match self {
            Generator::BetaSplit { .. } => Some(true),
            Generator::UniformPhase { mean, amplitude, .. } => {
                let s: f64 = mean.iter().sum();
                let a: f64 = amplitude.iter().sum();
                Some((s - 1.0).abs() <= 1e-10 && a.abs() <= 1e-12)
            }
            Generator::HeavyLog { .. } => Some(false),
        }
    }

    /// Whether `W` is almost surely constant.
    pub fn is_degenerate(&self) -> bool {
        match self {
            Generator::UniformPhase { amplitude, .. } => amplitude.iter().all(|&a| a == 0.0),
            _ => false,
        }
    }

    /// Number of coordinates that are not almost surely zero.
    pub fn nonzero_coordinates(&self) -> usize {
        match self {
            Generator::UniformPhase { mean, amplitude, .. } => {
                mean.iter().zip(amplitude).filter(|(&m, &a)| m != 0.0 || a != 0.0).count()
            }
            _ => self.base(),
        }
    }

    pub fn coordinate_moment(&self, i: usize, q: f64) -> Result<CoordMoment> {
        match self {
            Generator::BetaSplit { alpha, beta, .. } => {
                let (a, b) = if i == 0 { (*alpha, *beta) } else { (*beta, *alpha) };
                Ok(beta_moment(a, b, q))
            }
            Generator::UniformPhase { mean, amplitude, .. } => uniform_phase_moment(mean[i], amplitude[i], q),
            Generator::HeavyLog { l } => {
                if i == 0 {
                    if q < 0.0 {
                        return Ok(CoordMoment::divergent());
                    }
                    // E e^{-qV} = E2(q), E(e^{-qV} · (-V)) = -E1(q)
                    Ok(CoordMoment { value: exp_integral_e2(q), log_moment: -exp_integral_e1(q) })
                } else {
                    Ok(CoordMoment::deterministic(Self::heavy_log_rest(l.len()), q))
                }
            }
        }
    }

    /// Whether `E(Σ 1{W_i≠0} L_i log|W_i|) = -∞`.
    pub fn is_left_sided(&self) -> bool {
        matches!(self, Generator::HeavyLog { .. })
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, w: &mut [Complex64], l_out: &mut [f64]) {
        l_out.copy_from_slice(self.l());
        match self {
            Generator::BetaSplit { alpha, beta, .. } => {
                let dist = Beta::new(*alpha, *beta).expect("validated beta parameters");
                let x: f64 = dist.sample(rng);
                w[0] = Complex64::new(x, 0.0);
                w[1] = Complex64::new(1.0 - x, 0.0);
            }
            Generator::UniformPhase { mean, amplitude, .. } => {
                let theta = rng.random::<f64>() * std::f64::consts::TAU;
                let e = Complex64::from_polar(1.0, theta);
                for (k, slot) in w.iter_mut().enumerate() {
                    *slot = Complex64::new(mean[k], 0.0) + e * amplitude[k];
                }
            }
            Generator::HeavyLog { l } => {
                // V = 1/U has tail P(V > v) = 1/v on [1, ∞)
                let u: f64 = 1.0 - rng.random::<f64>();
                w[0] = Complex64::new((-1.0 / u).exp(), 0.0);
                let rest = Self::heavy_log_rest(l.len());
                for slot in w.iter_mut().skip(1) {
                    *slot = Complex64::new(rest, 0.0);
                }
            }
        }
    }
}

fn beta_moment(a: f64, b: f64, q: f64) -> CoordMoment {
    if a + q <= 0.0 {
        return CoordMoment::divergent();
    }
    let ln_m = ln_gamma(a + q) + ln_gamma(a + b) - ln_gamma(a) - ln_gamma(a + b + q);
    let value = ln_m.exp();
    CoordMoment { value, log_moment: value * (digamma(a + q) - digamma(a + b + q)) }
}

fn uniform_phase_moment(a: f64, c: f64, q: f64) -> Result<CoordMoment> {
    if c == 0.0 {
        return Ok(CoordMoment::deterministic(a, q));
    }
    let (ra, rc) = (a.abs(), c.abs());
    let gap = (ra - rc).abs();
    if gap <= 1e-12 * ra.max(rc) {
        // |a| = |c|: E|1 + e^{iΘ}|^q = Γ(q+1)/Γ(q/2+1)², finite iff q > -1
        if q <= -1.0 {
            return Ok(CoordMoment::divergent());
        }
        let ln_c = ln_gamma(q + 1.0) - 2.0 * ln_gamma(q / 2.0 + 1.0);
        let value = (q * ra.ln() + ln_c).exp();
        let dlog = ra.ln() + digamma(q + 1.0) - digamma(q / 2.0 + 1.0);
        return Ok(CoordMoment { value, log_moment: value * dlog });
    }
    if q < 0.0 && gap < 1e-6 * ra.max(rc) {
        return Err(Error::UndefinedForGenerator { family: "uniform_phase", q });
    }
    // periodic analytic integrand: the trapezoid rule converges geometrically
    let k = 4096;
    let mut value = 0.0;
    let mut log_moment = 0.0;
    for j in 0..k {
        let th = std::f64::consts::TAU * j as f64 / k as f64;
        let m2 = a * a + c * c + 2.0 * a * c * th.cos();
        let ln_m = 0.5 * m2.ln();
        let v = (q * ln_m).exp();
        value += v;
        log_moment += v * ln_m;
    }
    Ok(CoordMoment { value: value / k as f64, log_moment: log_moment / k as f64 })
}
