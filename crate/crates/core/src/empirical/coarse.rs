use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::CylinderStats;
use crate::cascade::CascadeRealization;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseBin {
    /// Bin center.
    pub h: f64,
    pub d_hat: f64,
    pub count: usize,
}

/// Histogram of per-cylinder exponents `e(w) = log Osc(I^L_w) / log |I^L_w|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseSpectrum {
    pub m: usize,
    pub level: usize,
    pub sub_depth: usize,
    pub bin_width: f64,
    pub bins: Vec<CoarseBin>,
    /// Cylinders with zero oscillation.
    pub void_count: usize,
    /// Geometric mean of the cylinder lengths.
    pub r_bar: f64,
    pub exponents: Vec<f64>,
}

impl CoarseSpectrum {
    pub fn min_exponent(&self) -> Option<f64> {
        self.exponents.iter().copied().reduce(f64::min)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,D_hat,count\n");
        for b in &self.bins {
            let _ = writeln!(out, "{},{},{}", b.h, b.d_hat, b.count);
        }
        out
    }
}

pub fn coarse_spectrum(real: &CascadeRealization, m: usize, n: usize, sub_depth: usize, eps: f64) -> Result<CoarseSpectrum> {
    let stats = CylinderStats::compute(real, m, n, sub_depth)?;
    Ok(from_stats(&stats, eps))
}

pub(crate) fn from_stats(stats: &CylinderStats, eps: f64) -> CoarseSpectrum {
    let log_r_bar = stats.len.iter().map(|l| l.ln()).sum::<f64>() / stats.len.len() as f64;
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    let mut exponents = Vec::new();
    let mut void_count = 0;
    for (&o, &l) in stats.osc.iter().zip(&stats.len) {
        if o == 0.0 {
            void_count += 1;
            continue;
        }
        let e = o.ln() / l.ln();
        exponents.push(e);
        *counts.entry((e / eps).floor() as i64).or_default() += 1;
    }
    let bins = counts
        .into_iter()
        .map(|(k, count)| CoarseBin { h: (k as f64 + 0.5) * eps, d_hat: (count as f64).ln() / -log_r_bar, count })
        .collect();
    CoarseSpectrum {
        m: stats.m,
        level: stats.level,
        sub_depth: stats.sub_depth,
        bin_width: eps,
        bins,
        void_count,
        r_bar: log_r_bar.exp(),
        exponents,
    }
}
