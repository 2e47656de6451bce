//! Small numerical building blocks: compensated sums, log-sum-exp,
//! monotone root finding, ordinary least squares and the exponential
//! integrals used by the heavy-log weight family.

use num_complex::Complex64;

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated accumulator over complex values (componentwise).
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexCompensatedSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexCompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Compensated prefix sums `[0, x0, x0+x1, ...]` (length `xs.len() + 1`).
pub fn prefix_sums_complex(xs: &[Complex64]) -> Vec<Complex64> {
    let mut acc = ComplexCompensatedSum::new();
    let mut out = Vec::with_capacity(xs.len() + 1);
    out.push(Complex64::new(0.0, 0.0));
    for &x in xs {
        acc.add(x);
        out.push(acc.value());
    }
    out
}

pub fn sum_compensated<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// `ln Σ exp(a_i)`, returning `-inf` for an empty or all-`-inf` input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let s = sum_compensated(values.iter().map(|&v| (v - max).exp()));
    max + s.ln()
}

/// Root of a continuous non-decreasing function on `[lo, hi]` with
/// `f(lo) <= 0 <= f(hi)`, by plain bisection for `iters` halvings.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Root of a strictly increasing function given value and derivative.
///
/// The bracket is grown geometrically from `guess` until the sign changes,
/// then Newton steps are taken and replaced by bisection whenever they
/// leave the bracket. Stops when `|f| <= ftol` or the bracket collapses.
pub fn solve_increasing<F>(mut f: F, guess: f64, ftol: f64) -> Option<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (f0, _) = f(guess);
    if !f0.is_finite() && !f0.is_nan() {
        // +inf or -inf at the guess: still expand
    } else if f0.is_nan() {
        return None;
    }
    if f0 == 0.0 {
        return Some(guess);
    }
    let (mut lo, mut hi);
    let mut step = 1.0;
    if f0 < 0.0 {
        lo = guess;
        hi = guess + step;
        loop {
            let (v, _) = f(hi);
            if v.is_nan() {
                return None;
            }
            if v >= 0.0 {
                break;
            }
            lo = hi;
            step *= 2.0;
            hi = guess + step;
            if step > 1e6 {
                return None;
            }
        }
    } else {
        hi = guess;
        lo = guess - step;
        loop {
            let (v, _) = f(lo);
            if v.is_nan() {
                return None;
            }
            if v <= 0.0 {
                break;
            }
            hi = lo;
            step *= 2.0;
            lo = guess - step;
            if step > 1e6 {
                return None;
            }
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (v, d) = f(x);
        if v.is_nan() {
            return None;
        }
        if v.abs() <= ftol {
            return Some(x);
        }
        if v < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = if d.is_finite() && d > 0.0 && v.is_finite() { x - v / d } else { f64::NAN };
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if next == x || hi - lo <= f64::EPSILON * hi.abs().max(lo.abs()).max(1.0) {
            return Some(next);
        }
        x = next;
    }
    Some(x)
}

/// Result of a simple linear regression `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub intercept_stderr: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

/// Ordinary least squares. Needs at least two distinct abscissae.
pub fn ols(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|&v| (v - mx) * (v - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    let (slope_stderr, intercept_stderr) = if n > 2 {
        let s2 = rss / (nf - 2.0);
        let se_slope = (s2 / sxx).sqrt();
        let se_int = (s2 * (1.0 / nf + mx * mx / sxx)).sqrt();
        (se_slope, se_int)
    } else {
        (0.0, 0.0)
    };
    Some(LinearFit {
        slope,
        intercept,
        slope_stderr,
        intercept_stderr,
        residual: (rss / nf).sqrt(),
    })
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Exponential integral `E1(x) = ∫_1^∞ e^{-xt}/t dt` for `x >= 0`.
pub fn exp_integral_e1(x: f64) -> f64 {
    if x <= 0.0 {
        return f64::INFINITY;
    }
    if x <= 1.0 {
        // power series
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        -EULER_GAMMA - x.ln() - sum
    } else {
        // modified Lentz continued fraction
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// `E2(x) = ∫_1^∞ e^{-xt}/t² dt`, with `E2(0) = 1`.
pub fn exp_integral_e2(x: f64) -> f64 {
    if x <= 0.0 {
        return if x == 0.0 { 1.0 } else { f64::INFINITY };
    }
    (-x).exp() - x * exp_integral_e1(x)
}
