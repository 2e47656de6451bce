//! b-adic coding space, weight trees and grid evaluation of the cascade
//! approximants `F_{W,n}`, `F_{L,n}` and their composition.

mod address;
mod dump;
mod grid;
mod moments;

use num_complex::Complex64;
use rayon::prelude::*;

pub use address::NodeAddress;
pub use dump::{read_dump, write_dump, DUMP_MAGIC, DUMP_VERSION};
pub(crate) use grid::interpolate_sorted;
pub use grid::{check_self_similarity, compose, evaluate_grid, ComposedSamples, GridFunction};
pub use moments::{estimate_moments, MomentReport};

use crate::error::{Error, Result};
use crate::rng::node_rng;
use crate::weights::{Side, WeightModel};

/// Default cap on `b^N`, the number of grid cells of the deepest level.
pub const DEFAULT_NODE_BUDGET: u64 = 1 << 24;

/// One sampled weight tree of depth `N`.
///
/// `w[k]` and `l[k]` hold the child weights of every node at level `k`:
/// entry `j·b + i` is `(W_i, L_i)` of node `j`, which is also the
/// lexicographic index of the child at level `k + 1`.
#[derive(Debug, Clone)]
pub struct CascadeRealization {
    model: WeightModel,
    depth: usize,
    seed: u64,
    w: Vec<Vec<Complex64>>,
    l: Vec<Vec<f64>>,
}

/// `b^n` as a checked count.
pub(crate) fn cells(base: usize, n: usize) -> u128 {
    (base as u128).pow(n as u32)
}

/// Sample a tree with the default node budget.
pub fn sample_tree(model: &WeightModel, depth: usize, master_seed: u64) -> Result<CascadeRealization> {
    sample_tree_with_budget(model, depth, master_seed, DEFAULT_NODE_BUDGET)
}

pub fn sample_tree_with_budget(
    model: &WeightModel,
    depth: usize,
    master_seed: u64,
    budget: u64,
) -> Result<CascadeRealization> {
    model.check_structure()?;
    if depth == 0 {
        return Err(Error::InvalidModel("depth must be at least 1".into()));
    }
    let b = model.base;
    let total = cells(b, depth);
    if total > budget as u128 {
        return Err(Error::DepthOverflow { nodes: total, budget });
    }
    let mut w = Vec::with_capacity(depth);
    let mut l = Vec::with_capacity(depth);
    for level in 0..depth {
        let n = (cells(b, level + 1)) as usize;
        let mut wl = vec![Complex64::new(0.0, 0.0); n];
        let mut ll = vec![0.0; n];
        if model.is_deterministic() && model.is_atomic() {
            for (wc, lc) in wl.chunks_mut(b).zip(ll.chunks_mut(b)) {
                wc.copy_from_slice(&model.atoms[0].w);
                lc.copy_from_slice(&model.atoms[0].l);
            }
        } else {
            wl.par_chunks_mut(b).zip(ll.par_chunks_mut(b)).enumerate().for_each(|(j, (wc, lc))| {
                let mut rng = node_rng(master_seed, level, j as u64);
                model.sample_into(&mut rng, wc, lc);
            });
        }
        w.push(wl);
        l.push(ll);
    }
    Ok(CascadeRealization { model: model.clone(), depth, seed: master_seed, w, l })
}

impl CascadeRealization {
    /// Assemble a realization from explicit per-level weight arrays.
    pub fn from_parts(
        model: WeightModel,
        seed: u64,
        w: Vec<Vec<Complex64>>,
        l: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let b = model.base;
        let depth = w.len();
        if depth == 0 || l.len() != depth {
            return Err(Error::InvalidModel("weight arrays must cover at least one level".into()));
        }
        for k in 0..depth {
            let n = cells(b, k + 1) as usize;
            if w[k].len() != n || l[k].len() != n {
                return Err(Error::InvalidModel(format!("level {k} has the wrong number of weights")));
            }
        }
        Ok(Self { model, depth, seed, w, l })
    }

    pub fn model(&self) -> &WeightModel {
        &self.model
    }

    pub fn base(&self) -> usize {
        self.model.base
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stored child weights `(W(w), L(w))` of the node at `level` with
    /// lexicographic `index`.
    pub fn node_weights(&self, level: usize, index: u64) -> (&[Complex64], &[f64]) {
        let b = self.base();
        let s = index as usize * b;
        (&self.w[level][s..s + b], &self.l[level][s..s + b])
    }

    /// Redraw the weights of a node from its address-derived generator.
    pub fn regenerate_node(&self, level: usize, index: u64) -> (Vec<Complex64>, Vec<f64>) {
        let b = self.base();
        let mut w = vec![Complex64::new(0.0, 0.0); b];
        let mut l = vec![0.0; b];
        let mut rng = node_rng(self.seed, level, index);
        self.model.sample_into(&mut rng, &mut w, &mut l);
        (w, l)
    }

    /// Overwrite one stored weight. Used to build corrupted fixtures and to
    /// load external trees.
    pub fn set_weight(&mut self, level: usize, index: u64, child: usize, w: Complex64, l: f64) {
        let k = index as usize * self.base() + child;
        self.w[level][k] = w;
        self.l[level][k] = l;
    }

    #[cfg(test)]
    pub(crate) fn level_w(&self, level: usize) -> &[Complex64] {
        &self.w[level]
    }

    #[cfg(test)]
    pub(crate) fn level_l(&self, level: usize) -> &[f64] {
        &self.l[level]
    }

    fn check_level(&self, level: usize) -> Result<()> {
        if level > self.depth {
            return Err(Error::LevelOutOfRange { level, depth: self.depth });
        }
        Ok(())
    }

    /// `Q_W(v)` for every `v` of length `n`, lexicographic order.
    pub fn products_w(&self, n: usize) -> Result<Vec<Complex64>> {
        self.relative_products_w(0, n)
    }

    /// `Q_L(v)` for every `v` of length `n`.
    pub fn products_l(&self, n: usize) -> Result<Vec<f64>> {
        self.relative_products_l(0, n)
    }

    /// Products of the `W` weights strictly below level `from` down to level
    /// `from + sub`: entry `j` is `Q_W(v)/Q_W(v|_from)` for the `j`-th word
    /// `v` of length `from + sub`, i.e. `Q_{W(u)}(s)` for `v = u·s`.
    pub fn relative_products_w(&self, from: usize, sub: usize) -> Result<Vec<Complex64>> {
        self.check_level(from + sub)?;
        let b = self.base();
        let mut cur = vec![Complex64::new(1.0, 0.0); cells(b, from) as usize];
        for k in from..from + sub {
            let weights = &self.w[k];
            cur = weights.par_iter().enumerate().map(|(j, &x)| cur[j / b] * x).collect();
        }
        Ok(cur)
    }

    pub fn relative_products_l(&self, from: usize, sub: usize) -> Result<Vec<f64>> {
        self.check_level(from + sub)?;
        let b = self.base();
        let mut cur = vec![1.0; cells(b, from) as usize];
        for k in from..from + sub {
            let weights = &self.l[k];
            cur = weights.par_iter().enumerate().map(|(j, &x)| cur[j / b] * x).collect();
        }
        Ok(cur)
    }

    /// `Q_U(w)` for a single address.
    pub fn q(&self, side: Side, w: &NodeAddress) -> Complex64 {
        let b = self.base() as u64;
        let mut idx = 0u64;
        let mut acc = Complex64::new(1.0, 0.0);
        for (k, &d) in w.digits().iter().enumerate() {
            let pos = (idx * b + d as u64) as usize;
            acc *= match side {
                Side::W => self.w[k][pos],
                Side::L => Complex64::new(self.l[k][pos], 0.0),
            };
            idx = idx * b + d as u64;
        }
        acc
    }

    /// Grid of the subtree approximant `F^{[w]}_{U, sub}` on `[0, 1]`.
    pub fn subtree_grid(&self, side: Side, w: &NodeAddress, sub: usize) -> Result<GridFunction> {
        let from = w.level();
        self.check_level(from + sub)?;
        let b = self.base();
        let width = cells(b, sub) as usize;
        let start = w.index() as usize;
        let mut cur = vec![Complex64::new(1.0, 0.0)];
        for k in from..from + sub {
            let span = cells(b, k + 1 - from) as usize;
            let offset = start * span;
            cur = (0..span)
                .map(|j| {
                    let x = match side {
                        Side::W => self.w[k][offset + j],
                        Side::L => Complex64::new(self.l[k][offset + j], 0.0),
                    };
                    cur[j / b] * x
                })
                .collect();
        }
        debug_assert_eq!(cur.len(), width);
        Ok(GridFunction::from_increments(b, sub, &cur))
    }
}
