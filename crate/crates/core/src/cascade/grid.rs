use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{cells, CascadeRealization, NodeAddress};
use crate::error::{Error, Result};
use crate::numeric::prefix_sums_complex;
use crate::weights::Side;

/// Values of `F_{U,n}` at the `b^n + 1` points `j b^{-n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub base: usize,
    pub level: usize,
    pub values: Vec<Complex64>,
}

impl GridFunction {
    /// Prefix sums of the per-cell increments.
    pub fn from_increments(base: usize, level: usize, increments: &[Complex64]) -> Self {
        Self { base, level, values: prefix_sums_complex(increments) }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn abscissa(&self, j: usize) -> f64 {
        j as f64 / cells(self.base, self.level) as f64
    }

    pub fn abscissae(&self) -> Vec<f64> {
        (0..self.values.len()).map(|j| self.abscissa(j)).collect()
    }

    pub fn last(&self) -> Complex64 {
        *self.values.last().expect("grid has at least two points")
    }

    /// Values on the closed cell `I_w` (both endpoints included).
    pub fn restrict(&self, w: &NodeAddress) -> &[Complex64] {
        let span = cells(self.base, self.level - w.level()) as usize;
        let s = w.index() as usize * span;
        &self.values[s..=s + span]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,re,im\n");
        for (j, z) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", self.abscissa(j), z.re, z.im);
        }
        out
    }
}

/// `F = F_W ∘ F_L^{-1}` sampled on the image grid `x_j = F_{L,n}(t_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComposedSamples {
    pub level: usize,
    pub x: Vec<f64>,
    pub y: Vec<Complex64>,
}

impl ComposedSamples {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    /// Piecewise-linear interpolation; `None` outside the sample range.
    pub fn interpolate(&self, x: f64) -> Option<Complex64> {
        let (lo, hi) = self.range();
        if !(x >= lo && x <= hi) {
            return None;
        }
        Some(interpolate_sorted(&self.x, &self.y, x))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,re,im\n");
        for (x, z) in self.x.iter().zip(&self.y) {
            let _ = writeln!(out, "{},{},{}", x, z.re, z.im);
        }
        out
    }
}

/// Linear interpolation on sorted abscissae; `x` must lie in range.
pub(crate) fn interpolate_sorted(xs: &[f64], ys: &[Complex64], x: f64) -> Complex64 {
    let k = xs.partition_point(|&v| v <= x);
    if k == 0 {
        return ys[0];
    }
    if k >= xs.len() {
        return ys[xs.len() - 1];
    }
    let (x0, x1) = (xs[k - 1], xs[k]);
    if x == x0 {
        return ys[k - 1];
    }
    let s = (x - x0) / (x1 - x0);
    ys[k - 1] + (ys[k] - ys[k - 1]) * s
}

/// `F_{U,n}` on the level-`n` grid: compensated prefix sums of `Q_U`.
pub fn evaluate_grid(real: &CascadeRealization, side: Side, n: usize) -> Result<GridFunction> {
    let increments: Vec<Complex64> = match side {
        Side::W => real.products_w(n)?,
        Side::L => real.products_l(n)?.into_iter().map(|x| Complex64::new(x, 0.0)).collect(),
    };
    Ok(GridFunction::from_increments(real.base(), n, &increments))
}

/// Pair the two grids into samples of `F` on the image of `F_{L,n}`.
pub fn compose(fw: &GridFunction, fl: &GridFunction) -> Result<ComposedSamples> {
    if fw.level != fl.level || fw.base != fl.base {
        return Err(Error::LevelMismatch(fw.level, fl.level));
    }
    let x: Vec<f64> = fl.values.iter().map(|z| z.re).collect();
    for j in 1..x.len() {
        if !(x[j] > x[j - 1]) {
            return Err(Error::NonMonotone { index: j });
        }
    }
    Ok(ComposedSamples { level: fw.level, x, y: fw.values.clone() })
}

/// Largest deviation from `F_{W,n}(t) = F_{W,n}(i/b) + W_i F^{[i]}_{W,n-1}(b t - i)`
/// on the level-`n` grid, with each `F^{[i]}` rebuilt from regenerated
/// node draws and the left side taken from the stored tree.
pub fn check_self_similarity(real: &CascadeRealization, n: usize) -> Result<f64> {
    if n < 2 || n > real.depth() {
        return Err(Error::LevelOutOfRange { level: n, depth: real.depth() });
    }
    let b = real.base();
    let global = evaluate_grid(real, Side::W, n)?;
    let (root_w, _) = real.node_weights(0, 0);
    let span = cells(b, n - 1) as usize;
    let mut worst: f64 = 0.0;
    for (i, &wi) in root_w.iter().enumerate() {
        // regenerate the subtree rooted at child i, level by level
        let mut cur = vec![Complex64::new(1.0, 0.0)];
        for k in 1..n {
            let first = i as u64 * cells(b, k - 1) as u64;
            let mut next = Vec::with_capacity(cur.len() * b);
            for (j, &c) in cur.iter().enumerate() {
                let (w, _) = real.regenerate_node(k, first + j as u64);
                next.extend(w.iter().map(|&x| c * x));
            }
            cur = next;
        }
        let sub = GridFunction::from_increments(b, n - 1, &cur);
        let base_val = global.values[i * span];
        for (j, s) in sub.values.iter().enumerate() {
            let r = (global.values[i * span + j] - base_val - wi * s).norm();
            worst = worst.max(r);
        }
    }
    Ok(worst)
}
