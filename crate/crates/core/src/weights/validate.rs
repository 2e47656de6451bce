use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Side, WeightModel};

/// Convergence regime of the cascade built from `W`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    NonConservativeA,
    ConservativeB1,
    CriticalB2,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiCheck {
    pub q: f64,
    /// `None` encodes `φ_W(q) = -∞`.
    pub phi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub case: Case,
    pub phi_checks: Vec<PhiCheck>,
    pub has_p_gt1_positive: bool,
    pub witness_p: Option<f64>,
    pub critical_condition: bool,
    pub gamma: Option<f64>,
    pub monofractal: Option<f64>,
    pub left_sided: bool,
    pub two_nonzero: bool,
    pub conservative: Option<bool>,
    pub messages: Vec<String>,
}

const PHI_CHECK_POINTS: [f64; 9] = [-2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 10.0, 50.0, 100.0];
const MC_SAMPLES: usize = 100_000;
const DEFAULT_SEED: u64 = 0x5EED;
const UNIT_TOL: f64 = 1e-10;

/// Classify a model with the default Monte Carlo seed.
pub fn validate(model: &WeightModel) -> ValidationReport {
    validate_with_seed(model, DEFAULT_SEED)
}

pub fn validate_with_seed(model: &WeightModel, seed: u64) -> ValidationReport {
    let mut report = ValidationReport {
        case: Case::Rejected,
        phi_checks: Vec::new(),
        has_p_gt1_positive: false,
        witness_p: None,
        critical_condition: false,
        gamma: None,
        monofractal: None,
        left_sided: false,
        two_nonzero: false,
        conservative: None,
        messages: Vec::new(),
    };
    if let Err(e) = model.check_structure() {
        report.messages.push(e.to_string());
        return report;
    }
    if model.w_equals_l() {
        report.messages.push("W equals L".into());
        return report;
    }
    if !model.is_atomic() {
        let (mean, se) = model.w_sum_monte_carlo(MC_SAMPLES, seed);
        report.messages.push(format!("Monte Carlo E(Σ W_i) = {:.6}{:+.6}i ± {:.2e}", mean.re, mean.im, se));
        if (mean - Complex64::new(1.0, 0.0)).norm() > 3.0 * se + 1e-12 {
            report.messages.push("sampled mean of Σ W_i is more than 3 standard errors from 1".into());
            return report;
        }
    }

    report.phi_checks = PHI_CHECK_POINTS
        .iter()
        .map(|&q| {
            let v = model.phi(Side::W, q).ok().filter(|v| v.is_finite());
            PhiCheck { q, phi: v }
        })
        .collect();
    report.two_nonzero = model.two_nonzero();
    report.left_sided = model.generators.as_ref().map(|g| g.is_left_sided()).unwrap_or(false);
    report.monofractal = detect_monofractal(model);
    report.conservative = model.w_conservative();

    let witness = find_witness(model, Side::W);
    report.has_p_gt1_positive = witness.is_some();
    report.witness_p = witness;
    let phi2 = model.phi(Side::W, 2.0).unwrap_or(f64::NEG_INFINITY);

    report.case = match report.conservative {
        None => {
            report.messages.push("cannot certify whether Σ W_i = 1 almost surely".into());
            Case::Rejected
        }
        Some(true) => {
            if witness.is_some() {
                Case::ConservativeB1
            } else {
                match critical_gamma(model) {
                    Ok(gamma) => {
                        report.critical_condition = true;
                        report.gamma = Some(gamma);
                        Case::CriticalB2
                    }
                    Err(msg) => {
                        report.messages.push(format!("conservative but neither φ_W(p) > 0 for p > 1 nor critical: {msg}"));
                        Case::Rejected
                    }
                }
            }
        }
        Some(false) => match witness {
            Some(p) if p <= 2.0 || phi2 > 0.0 => Case::NonConservativeA,
            Some(p) => {
                report.messages.push(format!("witness p = {p} > 2 while φ_W(2) <= 0"));
                Case::Rejected
            }
            None => {
                report.messages.push("no p > 1 with φ_W(p) > 0".into());
                Case::Rejected
            }
        },
    };

    if report.case != Case::Rejected && !model.l_conservative() {
        let ok = match find_witness(model, Side::L) {
            Some(p) => p <= 2.0 || model.phi(Side::L, 2.0).unwrap_or(f64::NEG_INFINITY) > 0.0,
            None => false,
        };
        if !ok {
            report.messages.push("L falls outside the convergence regime".into());
            report.case = Case::Rejected;
        }
    }
    report
}

/// Witness `p > 1` with `φ_U(p) > 0`: `p = 2` when it qualifies, otherwise
/// the smallest point of a `1/64` grid on `(1, 64]` refined by 60
/// bisection steps towards the zero crossing.
fn find_witness(model: &WeightModel, side: Side) -> Option<f64> {
    let phi = |p: f64| model.phi(side, p).unwrap_or(f64::NEG_INFINITY);
    if phi(2.0) > 0.0 {
        return Some(2.0);
    }
    let mut prev = 1.0;
    for k in 1..=(63 * 64) {
        let p = 1.0 + k as f64 / 64.0;
        if phi(p) > 0.0 {
            let mut lo = prev;
            let mut hi = p;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if phi(mid) > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Some(hi);
        }
        prev = p;
    }
    None
}

/// Checks the structural description of the critical case on atom models
/// and returns the contraction bound `γ`, chosen as the smallest
/// `1 - 2^{-k}` dominating every non-unit modulus.
fn critical_gamma(model: &WeightModel) -> Result<f64, String> {
    if !model.is_atomic() {
        return Err("critical case is only certified for atom models".into());
    }
    let mut unit_mass = 0.0;
    let mut single_unit_mass = 0.0;
    let mut max_small: f64 = 0.0;
    for (k, a) in model.atoms.iter().enumerate() {
        let mut units = 0;
        let mut partial = Complex64::new(0.0, 0.0);
        for (i, z) in a.w.iter().enumerate() {
            let r = z.norm();
            let before = partial;
            partial += z;
            if r > 1.0 + UNIT_TOL {
                return Err(format!("atom {k} has |W_{i}| = {r} > 1"));
            }
            if (r - 1.0).abs() <= UNIT_TOL {
                units += 1;
                let pair_ok = |x: Complex64, y: Complex64| (x.norm() <= UNIT_TOL) && ((y - 1.0).norm() <= UNIT_TOL);
                if !(pair_ok(before, partial) || pair_ok(partial, before)) {
                    return Err(format!("atom {k}: unit coordinate {i} violates the partial-sum condition"));
                }
            } else {
                max_small = max_small.max(r);
            }
        }
        unit_mass += a.p * units as f64;
        if units == 1 {
            single_unit_mass += a.p;
        }
    }
    if (unit_mass - 1.0).abs() > UNIT_TOL {
        return Err(format!("Σ_i P(|W_i| = 1) = {unit_mass} != 1"));
    }
    if single_unit_mass >= 1.0 - 1e-12 {
        return Err("exactly one unit coordinate almost surely".into());
    }
    for k in 1..=52 {
        let gamma = 1.0 - (0.5f64).powi(k);
        if max_small <= gamma {
            return Ok(gamma);
        }
    }
    Err("non-unit moduli accumulate at 1".into())
}

/// `H` such that `|W_i| = L_i^H` for every nonzero coordinate of every atom.
fn detect_monofractal(model: &WeightModel) -> Option<f64> {
    if !model.is_atomic() {
        return None;
    }
    let mut h: Option<f64> = None;
    for a in &model.atoms {
        for (z, &l) in a.w.iter().zip(&a.l) {
            let r = z.norm();
            if r == 0.0 {
                continue;
            }
            match h {
                None => h = Some(r.ln() / l.ln()),
                Some(hv) => {
                    if (r - l.powf(hv)).abs() > 1e-10 {
                        return None;
                    }
                }
            }
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{presets, Atom};

    #[test]
    fn w_equal_l_rejected() {
        let m = WeightModel::deterministic(&[0.5, 0.5], &[0.5, 0.5], "id");
        let r = validate(&m);
        assert_eq!(r.case, Case::Rejected);
        assert!(r.messages.iter().any(|s| s.contains("W equals L")));
    }

    #[test]
    fn binomial_is_b1_with_witness_two() {
        let r = validate(&presets::deterministic_binomial());
        assert_eq!(r.case, Case::ConservativeB1);
        assert_eq!(r.witness_p, Some(2.0));
        assert_eq!(r.monofractal, None);
        assert!(r.two_nonzero);
        assert!(!r.left_sided);
    }

    #[test]
    fn critical_mixture_classified() {
        let r = validate(&presets::critical_ternary());
        assert_eq!(r.case, Case::CriticalB2, "{:?}", r.messages);
        assert_eq!(r.gamma, Some(0.5));
        assert!(r.critical_condition);
        assert!(!r.has_p_gt1_positive);
    }

    #[test]
    fn monofractal_detected() {
        let r = validate(&presets::monofractal_half());
        assert_eq!(r.case, Case::ConservativeB1);
        assert!((r.monofractal.unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn generators_classified() {
        assert_eq!(validate(&presets::beta_bell()).case, Case::ConservativeB1);
        let hl = validate(&presets::heavy_log());
        assert_eq!(hl.case, Case::NonConservativeA, "{:?}", hl.messages);
        assert!(hl.left_sided);
        assert_eq!(validate(&presets::uniform_phase()).case, Case::ConservativeB1);
    }

    #[test]
    fn witness_below_two_found_by_grid() {
        // E(Σ W) = 1 but φ_W(2) < 0; φ_W is positive just above 1
        let m = WeightModel::from_atoms(
            2,
            vec![Atom::real(0.5, &[0.05, 0.05], &[0.5, 0.5]), Atom::real(0.5, &[1.5, 0.4], &[0.5, 0.5])],
            "witness below two",
        );
        assert!(m.phi(Side::W, 2.0).unwrap() < 0.0);
        let r = validate(&m);
        let p = r.witness_p.expect("witness");
        assert!(p > 1.0 && p <= 1.0 + 1.0 / 64.0, "p = {p}");
        assert!(m.phi(Side::W, p).unwrap() > 0.0);
        assert_eq!(r.case, Case::NonConservativeA);
    }

    #[test]
    fn critical_requires_partial_sum_pattern() {
        // unit weights in the wrong order: partial sums (0,-1)
        let third = 1.0 / 3.0;
        let m = WeightModel::from_atoms(
            3,
            vec![
                Atom::real(third, &[-1.0, 1.0, 1.0], &[third; 3]),
                Atom::real(1.0 - third, &[0.4, 0.4, 0.2], &[third; 3]),
            ],
            "bad order",
        );
        assert_eq!(validate(&m).case, Case::Rejected);
    }

    #[test]
    fn non_conservative_atoms_case_a() {
        let m = WeightModel::from_atoms(
            2,
            vec![Atom::real(0.5, &[0.2, 0.6], &[0.5, 0.5]), Atom::real(0.5, &[0.6, 0.6], &[0.5, 0.5])],
            "nc",
        );
        let r = validate(&m);
        assert_eq!(r.case, Case::NonConservativeA, "{:?}", r.messages);
        assert_eq!(r.conservative, Some(false));
    }
}
