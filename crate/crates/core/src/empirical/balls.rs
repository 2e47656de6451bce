use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oscillation::{osc, OscQuery};

/// Largest `Σ Osc^(m)(B)^q` found over greedy packings by disjoint closed
/// intervals of radius `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallPartition {
    pub m: usize,
    pub r: f64,
    pub q: f64,
    pub sum: f64,
    /// Left end of the first interval of the best packing.
    pub offset: f64,
    pub balls: usize,
    pub offsets_tried: usize,
}

fn packing_sum(x: &[f64], y: &[Complex64], m: usize, r: f64, q: f64, start: f64) -> Result<(f64, usize)> {
    let hi = x[x.len() - 1];
    let mut sum = 0.0;
    let mut count = 0;
    let mut k = 0usize;
    loop {
        let a = start + 2.0 * r * k as f64;
        let b = a + 2.0 * r;
        if b > hi * (1.0 + 4.0 * f64::EPSILON) {
            break;
        }
        let o = osc(x, y, &OscQuery::new(m, a, b.min(hi)))?;
        if o > 0.0 {
            sum += o.powf(q);
        }
        count += 1;
        k += 1;
    }
    Ok((sum, count))
}

/// Tries every sample abscissa in `[x_0, x_0 + 2r)` as the left end of a
/// chain of abutting intervals and keeps the largest sum. Zero oscillations
/// contribute nothing for any `q`. Meant for small grids.
pub fn ball_partition(x: &[f64], y: &[Complex64], m: usize, r: f64, q: f64) -> Result<BallPartition> {
    if x.len() < 2 || !(r > 0.0) {
        return Err(Error::Config(format!("ball packing needs at least two samples and r > 0, got r = {r}")));
    }
    let lo = x[0];
    let starts: Vec<f64> = x.iter().copied().take_while(|&s| s < lo + 2.0 * r).collect();
    let results: Vec<(f64, f64, usize)> = starts
        .par_iter()
        .map(|&s| packing_sum(x, y, m, r, q, s).map(|(sum, n)| (s, sum, n)))
        .collect::<Result<_>>()?;
    let (offset, sum, balls) = results
        .into_iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one start");
    Ok(BallPartition { m, r, q, sum, offset, balls, offsets_tried: starts.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::{evaluate_grid, sample_tree};
    use crate::weights::Side;
    use crate::empirical::partition_theta;
    use crate::weights::presets;

    #[test]
    fn monotone_measure_mass_is_recovered() {
        let r = sample_tree(&presets::deterministic_binomial(), 10, 0).unwrap();
        let g = evaluate_grid(&r, Side::W, 10).unwrap();
        let x = g.abscissae();
        let p = ball_partition(&x, &g.values, 1, 1.0 / 32.0, 1.0).unwrap();
        assert!((p.sum - 1.0).abs() < 1e-12);
        assert_eq!(p.balls, 16);
        assert_eq!(p.offsets_tried, 64);
    }

    #[test]
    fn dominates_grid_partition_at_matching_scale() {
        let r = sample_tree(&presets::beta_bell(), 10, 4).unwrap();
        let g = evaluate_grid(&r, Side::W, 10).unwrap();
        let x = g.abscissae();
        for q in [0.5, 1.0, 2.0] {
            let p = ball_partition(&x, &g.values, 1, 1.0 / 64.0, q).unwrap();
            let grid = partition_theta(&r, 1, 5, q, 0.0, 5).unwrap();
            assert!(p.sum >= grid * (1.0 - 1e-9), "q={q}: {} < {grid}", p.sum);
        }
    }

    #[test]
    fn rejects_bad_radius() {
        assert!(ball_partition(&[0.0, 1.0], &[Complex64::new(0.0, 0.0); 2], 1, 0.0, 1.0).is_err());
    }
}
