use num_complex::Complex64;
use rayon::prelude::*;

use super::{osc_uniform, LagPolicy};
use crate::cascade::{CascadeRealization, NodeAddress};
use crate::error::{Error, Result};
use crate::numeric::prefix_sums_complex;
use crate::weights::Side;

/// `Osc^{(m)}_F(I^L_w) = |Q_W(w)| · Z^{(m)}(w)`, with `Z^{(m)}(w)` the
/// oscillation of the subtree approximant `F^{[w]}_{W, sub_depth}` on `[0, 1]`.
pub fn osc_interval_factored(real: &CascadeRealization, w: &NodeAddress, m: usize, sub_depth: usize) -> Result<f64> {
    let total = w.level() + sub_depth;
    if total > real.depth() {
        return Err(Error::LevelOutOfRange { level: total, depth: real.depth() });
    }
    let q = real.q(Side::W, w).norm();
    if q == 0.0 {
        return Ok(0.0);
    }
    let g = real.subtree_grid(Side::W, w, sub_depth)?;
    Ok(q * osc_uniform(&g.values, m, LagPolicy::Auto))
}

/// Factored oscillations of every cylinder at one level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelOscillations {
    pub level: usize,
    pub sub_depth: usize,
    /// `|Q_W(w)|`.
    pub q_abs: Vec<f64>,
    /// `Z^{(m)}(w)`; zero where `Q_W(w) = 0`.
    pub z: Vec<f64>,
}

impl LevelOscillations {
    pub fn osc(&self) -> Vec<f64> {
        self.q_abs.iter().zip(&self.z).map(|(q, z)| q * z).collect()
    }
}

pub fn osc_level_factored(real: &CascadeRealization, level: usize, m: usize, sub_depth: usize) -> Result<LevelOscillations> {
    let q = real.products_w(level)?;
    let rel = real.relative_products_w(level, sub_depth)?;
    let width = rel.len() / q.len();
    let q_abs: Vec<f64> = q.iter().map(|z| z.norm()).collect();
    let z = rel
        .par_chunks(width)
        .zip(q_abs.par_iter())
        .map(|(chunk, &qa)| {
            if qa == 0.0 {
                return 0.0;
            }
            let values: Vec<Complex64> = prefix_sums_complex(chunk);
            osc_uniform(&values, m, LagPolicy::Auto)
        })
        .collect();
    Ok(LevelOscillations { level, sub_depth, q_abs, z })
}
