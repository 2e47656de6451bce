//! Reference models used by the scenarios and tests.

use num_complex::Complex64;

use super::{Atom, Generator, WeightModel};

/// Deterministic binomial `W = (0.3, 0.7)`, `L = (0.5, 0.5)`.
pub fn deterministic_binomial() -> WeightModel {
    WeightModel::deterministic(&[0.3, 0.7], &[0.5, 0.5], "binomial(0.3,0.7)/uniform")
}

/// `W = ((1+i)/2, (1-i)/2)`, `L = (1/2, 1/2)`: monofractal with `H = 1/2`.
pub fn monofractal_half() -> WeightModel {
    WeightModel::from_atoms(
        2,
        vec![Atom {
            p: 1.0,
            w: vec![Complex64::new(0.5, 0.5), Complex64::new(0.5, -0.5)],
            l: vec![0.5, 0.5],
        }],
        "monofractal H=1/2",
    )
}

/// `W_0 ~ Beta(2, 2)`, `W_1 = 1 - W_0`, uniform `L`.
pub fn beta_bell() -> WeightModel {
    WeightModel::from_generator(Generator::BetaSplit { alpha: 2.0, beta: 2.0, l: vec![0.5, 0.5] }, "beta(2,2) split")
}

/// Critical ternary mixture: `(1, -1, 1)` with probability 1/3, otherwise
/// `(0.4, 0.4, 0.2)`; uniform `L`.
pub fn critical_ternary() -> WeightModel {
    let third = 1.0 / 3.0;
    WeightModel::from_atoms(
        3,
        vec![
            Atom::real(third, &[1.0, -1.0, 1.0], &[third; 3]),
            Atom::real(1.0 - third, &[0.4, 0.4, 0.2], &[third; 3]),
        ],
        "critical ternary",
    )
}

/// Heavy-log family on `b = 2` with uniform `L` (left-sided spectrum).
pub fn heavy_log() -> WeightModel {
    WeightModel::from_generator(Generator::HeavyLog { l: vec![0.5, 0.5] }, "heavy-log")
}

/// Conservative complex family with a shared uniform phase.
pub fn uniform_phase() -> WeightModel {
    WeightModel::from_generator(
        Generator::UniformPhase { mean: vec![0.5, 0.5], amplitude: vec![0.3, -0.3], l: vec![0.4, 0.6] },
        "uniform phase",
    )
}

/// `W_0 = 0` with probability 1/2: finite right endpoint of `J`.
pub fn cantor_like() -> WeightModel {
    WeightModel::from_atoms(
        2,
        vec![Atom::real(0.5, &[0.0, 1.0], &[0.5, 0.5]), Atom::real(0.5, &[0.5, 0.5], &[0.5, 0.5])],
        "one-sided cantor-like",
    )
}

/// Every catalogue model, for sweeps over the whole catalogue.
pub fn catalogue() -> Vec<WeightModel> {
    vec![
        deterministic_binomial(),
        monofractal_half(),
        beta_bell(),
        critical_ternary(),
        heavy_log(),
        uniform_phase(),
        cantor_like(),
    ]
}

pub fn by_name(name: &str) -> Option<WeightModel> {
    Some(match name {
        "binomial" => deterministic_binomial(),
        "monofractal" => monofractal_half(),
        "bell" | "beta" => beta_bell(),
        "critical" | "bell-critical" => critical_ternary(),
        "heavy-log" | "left-sided" => heavy_log(),
        "uniform-phase" => uniform_phase(),
        "cantor" => cantor_like(),
        _ => return None,
    })
}
