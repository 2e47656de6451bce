use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate_grid, sample_tree};
use crate::error::{Error, Result};
use crate::oscillation::{osc_uniform, LagPolicy};
use crate::rng::derive_seed;
use crate::weights::{Side, WeightModel};

/// Monte Carlo moments and Laplace transform of `Z^{(m)} = Osc^{(m)}` of the
/// depth-limited approximant on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub m: usize,
    pub q: f64,
    pub depth: usize,
    pub replicas: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub sample_variance: f64,
    /// `(t, ψ̂(t))` pairs.
    pub laplace: Vec<(f64, f64)>,
    pub heavy_tail_warning: bool,
    pub z: Vec<f64>,
}

pub fn estimate_moments(
    model: &WeightModel,
    m: usize,
    q: f64,
    t_list: &[f64],
    replicas: usize,
    depth: usize,
    seed: u64,
) -> Result<MomentReport> {
    if replicas < 2 {
        return Err(Error::Config("at least two replicas are required".into()));
    }
    if m == 0 {
        return Err(Error::Config("oscillation order must be at least 1".into()));
    }
    let z = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let real = sample_tree(model, depth, derive_seed(seed, r as u64))?;
            let g = evaluate_grid(&real, Side::W, depth)?;
            Ok(osc_uniform(&g.values, m, LagPolicy::Auto))
        })
        .collect::<Result<Vec<f64>>>()?;

    let n = replicas as f64;
    let powers: Vec<f64> = z.iter().map(|&v| v.powf(q)).collect();
    let mean = powers.iter().sum::<f64>() / n;
    let var = powers.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let total: f64 = powers.iter().sum();
    let top = powers.iter().copied().fold(0.0, f64::max);
    let laplace = t_list
        .iter()
        .map(|&t| (t, z.iter().map(|&v| (-t * v).exp()).sum::<f64>() / n))
        .collect();
    Ok(MomentReport {
        m,
        q,
        depth,
        replicas,
        estimate: mean,
        std_error: (var / n).sqrt(),
        sample_variance: var,
        laplace,
        heavy_tail_warning: total > 0.0 && top > 0.5 * total,
        z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::presets;

    #[test]
    fn laplace_at_zero_is_one() {
        let r = estimate_moments(&presets::beta_bell(), 1, 1.0, &[0.0, 1.0], 8, 6, 1).unwrap();
        assert_eq!(r.laplace[0], (0.0, 1.0));
        assert!(r.laplace[1].1 < 1.0);
    }

    #[test]
    fn deterministic_model_has_zero_variance() {
        for m in 1..=3 {
            let r = estimate_moments(&presets::deterministic_binomial(), m, 2.0, &[], 5, 8, 9).unwrap();
            assert_eq!(r.sample_variance, 0.0);
        }
    }

    #[test]
    fn non_negative_conservative_first_moment_is_one() {
        let r = estimate_moments(&presets::beta_bell(), 1, 1.0, &[], 64, 8, 3).unwrap();
        assert!((r.estimate - 1.0).abs() <= 3.0 * r.std_error + 1e-12);
    }

    #[test]
    fn non_conservative_mean_within_three_se() {
        let m = crate::weights::WeightModel::from_atoms(
            2,
            vec![
                crate::weights::Atom::real(0.5, &[0.2, 0.6], &[0.5, 0.5]),
                crate::weights::Atom::real(0.5, &[0.6, 0.6], &[0.5, 0.5]),
            ],
            "nc",
        );
        // Z^{(1)} = F_{W,n}(1) for non-negative weights; E F_{W,n}(1) = 1
        let r = estimate_moments(&m, 1, 1.0, &[], 400, 8, 5).unwrap();
        assert!((r.estimate - 1.0).abs() <= 3.0 * r.std_error, "{} ± {}", r.estimate, r.std_error);
    }

    #[test]
    fn too_few_replicas() {
        assert!(estimate_moments(&presets::beta_bell(), 1, 1.0, &[], 1, 4, 0).is_err());
    }
}
