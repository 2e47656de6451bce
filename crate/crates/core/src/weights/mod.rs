//! Weight laws `(W, L)` driving the cascade.
//!
//! A model is either a finite mixture of deterministic atoms or one of the
//! named [`Generator`] families. Atom models make every expectation an
//! exact finite sum.

mod family;
pub mod presets;
mod validate;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use family::{CoordMoment, Generator, HEAVY_LOG_PROBE};
pub use validate::{validate, validate_with_seed, Case, PhiCheck, ValidationReport};

use crate::error::{Error, Result};
use crate::rng::seeded_rng;

/// Which of the two weight vectors an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    W,
    L,
}

/// One deterministic outcome of `(W, L)` with its probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub p: f64,
    #[serde(rename = "W", with = "complex_pairs")]
    pub w: Vec<Complex64>,
    #[serde(rename = "L")]
    pub l: Vec<f64>,
}

impl Atom {
    pub fn real(p: f64, w: &[f64], l: &[f64]) -> Self {
        Self { p, w: w.iter().map(|&x| Complex64::new(x, 0.0)).collect(), l: l.to_vec() }
    }
}

/// Joint law of the weight pair `(W, L)` on a `b`-ary tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightModel {
    pub base: usize,
    #[serde(default)]
    pub atoms: Vec<Atom>,
    #[serde(default)]
    pub generators: Option<Generator>,
    #[serde(default)]
    pub label: String,
}

/// `Φ(q, t)` together with its partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiParts {
    pub value: f64,
    pub d_q: f64,
    pub d_t: f64,
}

mod complex_pairs {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

impl WeightModel {
    pub fn from_atoms(base: usize, atoms: Vec<Atom>, label: impl Into<String>) -> Self {
        Self { base, atoms, generators: None, label: label.into() }
    }

    pub fn from_generator(generator: Generator, label: impl Into<String>) -> Self {
        Self { base: generator.base(), atoms: Vec::new(), generators: Some(generator), label: label.into() }
    }

    /// Single-atom model with real weights.
    pub fn deterministic(w: &[f64], l: &[f64], label: impl Into<String>) -> Self {
        Self::from_atoms(w.len(), vec![Atom::real(1.0, w, l)], label)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn is_atomic(&self) -> bool {
        self.generators.is_none()
    }

    /// True when every node carries the same weights.
    pub fn is_deterministic(&self) -> bool {
        match &self.generators {
            None => self.atoms.len() == 1,
            Some(g) => g.is_degenerate(),
        }
    }

    /// Structural checks shared by every operation: shapes, probability
    /// normalization, mean-one sums and `0 < L_i < 1`.
    pub fn check_structure(&self) -> Result<()> {
        let b = self.base;
        if b < 2 {
            return Err(Error::InvalidModel("base must be at least 2".into()));
        }
        match &self.generators {
            Some(g) => {
                if !self.atoms.is_empty() {
                    return Err(Error::InvalidModel("a model carries either atoms or a generator, not both".into()));
                }
                g.check()?;
                if g.base() != b {
                    return Err(Error::InvalidModel("generator dimension differs from base".into()));
                }
                check_l(g.l())?;
                if (g.l().iter().sum::<f64>() - 1.0).abs() > 1e-10 {
                    return Err(Error::InvalidModel("E(Σ L_i) != 1".into()));
                }
                let s = g.expected_w_sum();
                if (s - 1.0).norm() > 1e-10 {
                    return Err(Error::InvalidModel(format!("E(Σ W_i) = {s} != 1")));
                }
            }
            None => {
                if self.atoms.is_empty() {
                    return Err(Error::InvalidModel("no atoms".into()));
                }
                let mut total = 0.0;
                let mut sw = Complex64::new(0.0, 0.0);
                let mut sl = 0.0;
                for (k, a) in self.atoms.iter().enumerate() {
                    if a.w.len() != b || a.l.len() != b {
                        return Err(Error::InvalidModel(format!("atom {k} has wrong dimension")));
                    }
                    if !(a.p > 0.0 && a.p <= 1.0) {
                        return Err(Error::InvalidModel(format!("atom {k} probability {} not in (0,1]", a.p)));
                    }
                    if a.w.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                        return Err(Error::InvalidModel(format!("atom {k} has non-finite W")));
                    }
                    check_l(&a.l)?;
                    total += a.p;
                    sw += a.w.iter().sum::<Complex64>() * a.p;
                    sl += a.p * a.l.iter().sum::<f64>();
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidModel(format!("probabilities sum to {total}")));
                }
                if (sw - 1.0).norm() > 1e-10 {
                    return Err(Error::InvalidModel(format!("E(Σ W_i) = {sw} != 1")));
                }
                if (sl - 1.0).abs() > 1e-10 {
                    return Err(Error::InvalidModel(format!("E(Σ L_i) = {sl} != 1")));
                }
            }
        }
        Ok(())
    }

    /// Whether the laws of `W` and `L` coincide.
    pub fn w_equals_l(&self) -> bool {
        match &self.generators {
            Some(Generator::UniformPhase { mean, amplitude, l }) => {
                amplitude.iter().all(|&a| a == 0.0) && mean.iter().zip(l).all(|(m, l)| (m - l).abs() <= 1e-12)
            }
            Some(_) => false,
            None => {
                // compare the two marginal laws as weighted point sets
                let w_law = marginal(self.atoms.iter().map(|a| (a.p, a.w.clone())));
                let l_law = marginal(
                    self.atoms.iter().map(|a| (a.p, a.l.iter().map(|&x| Complex64::new(x, 0.0)).collect())),
                );
                w_law.len() == l_law.len()
                    && w_law.iter().all(|(p, v)| {
                        l_law.iter().any(|(p2, v2)| (p - p2).abs() <= 1e-12 && close_vec(v, v2, 1e-12))
                    })
            }
        }
    }

    /// Whether `Σ W_i = 1` almost surely.
    pub fn w_conservative(&self) -> Option<bool> {
        match &self.generators {
            Some(g) => g.is_conservative(),
            None => Some(self.atoms.iter().all(|a| (a.w.iter().sum::<Complex64>() - 1.0).norm() <= 1e-10)),
        }
    }

    pub fn l_conservative(&self) -> bool {
        match &self.generators {
            Some(g) => (g.l().iter().sum::<f64>() - 1.0).abs() <= 1e-10,
            None => self.atoms.iter().all(|a| (a.l.iter().sum::<f64>() - 1.0).abs() <= 1e-10),
        }
    }

    /// `P(#{i: W_i ≠ 0} ≥ 2) = 1`.
    pub fn two_nonzero(&self) -> bool {
        match &self.generators {
            Some(g) => g.nonzero_coordinates() >= 2,
            None => self.atoms.iter().all(|a| a.w.iter().filter(|z| z.norm() > 0.0).count() >= 2),
        }
    }

    /// Whether some coordinate of `W` vanishes with positive probability.
    pub fn w_has_zero(&self) -> bool {
        match &self.generators {
            Some(g) => g.nonzero_coordinates() < self.base,
            None => self.atoms.iter().any(|a| a.w.iter().any(|z| z.norm() == 0.0)),
        }
    }

    /// `E(Σ 1{U_i≠0} |U_i|^q)`, `+inf` when divergent.
    pub fn moment_sum(&self, side: Side, q: f64) -> Result<f64> {
        match (&self.generators, side) {
            (Some(g), Side::L) => Ok(g.l().iter().map(|&l| l.powf(q)).sum()),
            (Some(g), Side::W) => {
                let mut s = 0.0;
                for i in 0..self.base {
                    s += g.coordinate_moment(i, q)?.value;
                }
                Ok(s)
            }
            (None, Side::W) => Ok(self
                .atoms
                .iter()
                .map(|a| a.p * a.w.iter().filter(|z| z.norm() > 0.0).map(|z| z.norm().powf(q)).sum::<f64>())
                .sum()),
            (None, Side::L) => Ok(self.atoms.iter().map(|a| a.p * a.l.iter().map(|&l| l.powf(q)).sum::<f64>()).sum()),
        }
    }

    /// `φ_U(q) = -log_b E(Σ 1{U_i≠0} |U_i|^q)`; `-inf` when the expectation
    /// diverges.
    pub fn phi(&self, side: Side, q: f64) -> Result<f64> {
        let m = self.moment_sum(side, q)?;
        if m == f64::INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        if m <= 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok(-m.ln() / (self.base as f64).ln())
    }

    /// `Φ(q, t) = E(Σ 1{W_i≠0} |W_i|^q L_i^{-t})` with both partials.
    pub fn phi_parts(&self, q: f64, t: f64) -> Result<PhiParts> {
        let mut value = 0.0;
        let mut d_q = 0.0;
        let mut d_t = 0.0;
        match &self.generators {
            Some(g) => {
                for (i, &l) in g.l().iter().enumerate() {
                    let m = g.coordinate_moment(i, q)?;
                    if m.value == 0.0 {
                        continue;
                    }
                    if m.value == f64::INFINITY {
                        return Err(Error::Divergent { q, t });
                    }
                    let lt = l.powf(-t);
                    value += m.value * lt;
                    d_q += m.log_moment * lt;
                    d_t -= m.value * lt * l.ln();
                }
            }
            None => {
                for a in &self.atoms {
                    for (z, &l) in a.w.iter().zip(&a.l) {
                        let r = z.norm();
                        if r == 0.0 {
                            continue;
                        }
                        let term = a.p * (q * r.ln() - t * l.ln()).exp();
                        value += term;
                        d_q += term * r.ln();
                        d_t -= term * l.ln();
                    }
                }
            }
        }
        Ok(PhiParts { value, d_q, d_t })
    }

    /// Draw one `(W, L)` pair into the given buffers.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, w: &mut [Complex64], l: &mut [f64]) {
        match &self.generators {
            Some(g) => g.sample_into(rng, w, l),
            None => {
                let atom = if self.atoms.len() == 1 {
                    &self.atoms[0]
                } else {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    let mut pick = self.atoms.last().expect("non-empty atoms");
                    for a in &self.atoms {
                        acc += a.p;
                        if u < acc {
                            pick = a;
                            break;
                        }
                    }
                    pick
                };
                w.copy_from_slice(&atom.w);
                l.copy_from_slice(&atom.l);
            }
        }
    }

    /// Monte Carlo estimate of `E(Σ 1{U_i≠0}|U_i|^q)` with its standard
    /// error. Serves as an independent check of the closed forms.
    pub fn moment_sum_monte_carlo(&self, side: Side, q: f64, samples: usize, seed: u64) -> (f64, f64) {
        let mut rng = seeded_rng(seed);
        let b = self.base;
        let mut w = vec![Complex64::new(0.0, 0.0); b];
        let mut l = vec![0.0; b];
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for _ in 0..samples {
            self.sample_into(&mut rng, &mut w, &mut l);
            let v: f64 = match side {
                Side::W => w.iter().filter(|z| z.norm() > 0.0).map(|z| z.norm().powf(q)).sum(),
                Side::L => l.iter().map(|&x| x.powf(q)).sum(),
            };
            acc += v;
            acc2 += v * v;
        }
        let n = samples as f64;
        let mean = acc / n;
        let var = (acc2 / n - mean * mean).max(0.0);
        (mean, (var / n).sqrt())
    }

    /// Monte Carlo estimate of `E(Σ W_i)` with standard error per component.
    pub fn w_sum_monte_carlo(&self, samples: usize, seed: u64) -> (Complex64, f64) {
        let mut rng = seeded_rng(seed);
        let b = self.base;
        let mut w = vec![Complex64::new(0.0, 0.0); b];
        let mut l = vec![0.0; b];
        let mut acc = Complex64::new(0.0, 0.0);
        let mut acc2 = 0.0;
        for _ in 0..samples {
            self.sample_into(&mut rng, &mut w, &mut l);
            let s: Complex64 = w.iter().sum();
            acc += s;
            acc2 += s.norm_sqr();
        }
        let n = samples as f64;
        let mean = acc / n;
        let var = (acc2 / n - mean.norm_sqr()).max(0.0);
        (mean, (var / n).sqrt())
    }
}

fn check_l(l: &[f64]) -> Result<()> {
    if l.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
        return Err(Error::InvalidModel("every L_i must lie in (0, 1)".into()));
    }
    Ok(())
}

fn close_vec(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
}

fn marginal(items: impl Iterator<Item = (f64, Vec<Complex64>)>) -> Vec<(f64, Vec<Complex64>)> {
    let mut out: Vec<(f64, Vec<Complex64>)> = Vec::new();
    for (p, v) in items {
        if let Some(slot) = out.iter_mut().find(|(_, u)| close_vec(u, &v, 1e-12)) {
            slot.0 += p;
        } else {
            out.push((p, v));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial() -> WeightModel {
        WeightModel::deterministic(&[0.3, 0.7], &[0.5, 0.5], "binomial")
    }

    #[test]
    fn phi_examples() {
        let m = binomial();
        assert!(m.phi(Side::W, 1.0).unwrap().abs() < 1e-15);
        let expected = -(0.58f64).log2();
        assert!((m.phi(Side::W, 2.0).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 0.78588).abs() < 1e-5);
        assert!((m.phi(Side::L, 0.0).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn phi_divergence_is_negative_infinity() {
        let m = presets::heavy_log();
        assert_eq!(m.phi(Side::W, -0.5).unwrap(), f64::NEG_INFINITY);
        assert!(m.phi(Side::W, 0.5).unwrap().is_finite());
    }

    #[test]
    fn json_layout_uses_pairs_for_complex() {
        let m = presets::monofractal_half();
        let text = m.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["atoms"][0]["W"][0], serde_json::json!([0.5, 0.5]));
        assert_eq!(v["base"], 2);
        let back = WeightModel::from_json(&text).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn generator_json_is_tagged() {
        let m = presets::beta_bell();
        let v: serde_json::Value = serde_json::from_str(&m.to_json().unwrap()).unwrap();
        assert_eq!(v["generators"]["family"], "beta_split");
        assert_eq!(WeightModel::from_json(&m.to_json().unwrap()).unwrap(), m);
    }

    #[test]
    fn structure_rejects_bad_l() {
        let m = WeightModel::deterministic(&[0.3, 0.7], &[1.0, 0.0], "bad");
        assert!(m.check_structure().is_err());
    }

    #[test]
    fn structure_rejects_bad_probabilities() {
        let m = WeightModel::from_atoms(
            2,
            vec![Atom::real(0.5, &[0.3, 0.7], &[0.5, 0.5]), Atom::real(0.4, &[0.3, 0.7], &[0.5, 0.5])],
            "bad",
        );
        assert!(m.check_structure().is_err());
    }

    #[test]
    fn w_equals_l_detects_mixture_permutations() {
        let m = WeightModel::from_atoms(
            2,
            vec![Atom::real(0.5, &[0.3, 0.7], &[0.7, 0.3]), Atom::real(0.5, &[0.7, 0.3], &[0.3, 0.7])],
            "same law",
        );
        assert!(m.w_equals_l());
        assert!(!binomial().w_equals_l());
    }

    #[test]
    fn phi_parts_matches_difference_quotients() {
        let m = presets::critical_ternary();
        let (q, t, h) = (1.3, 0.4, 1e-6);
        let p = m.phi_parts(q, t).unwrap();
        let dq = (m.phi_parts(q + h, t).unwrap().value - m.phi_parts(q - h, t).unwrap().value) / (2.0 * h);
        let dt = (m.phi_parts(q, t + h).unwrap().value - m.phi_parts(q, t - h).unwrap().value) / (2.0 * h);
        assert!((p.d_q - dq).abs() < 1e-8);
        assert!((p.d_t - dt).abs() < 1e-8);
    }

    #[test]
    fn generator_moment_sums_agree_with_monte_carlo() {
        for m in [presets::beta_bell(), presets::heavy_log(), presets::uniform_phase()] {
            for &q in &[0.5, 1.0, 2.0] {
                let exact = m.moment_sum(Side::W, q).unwrap();
                let (mc, se) = m.moment_sum_monte_carlo(Side::W, q, 100_000, 5);
                assert!((mc - exact).abs() <= 3.0 * se + 1e-12, "{} q={q}: {mc} vs {exact} (se {se})", m.label);
            }
        }
    }
}
