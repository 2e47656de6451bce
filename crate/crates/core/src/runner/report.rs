use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{Addend, Scenario};
use crate::analytic::LegendrePair;
use crate::empirical::{CoarseSpectrum, EmpiricalCurve};
use crate::error::{Error, Result};
use crate::oscillation::{estimates_to_csv, ExponentEstimate};
use crate::weights::{Case, WeightModel};

pub const REPORT_FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub format: u32,
    pub crate_version: String,
    pub scenario: Scenario,
    pub seed: u64,
    pub depth: usize,
    pub levels: Vec<usize>,
    pub sub_depth: usize,
    pub replicas: usize,
    pub m: Vec<usize>,
    pub q: Vec<f64>,
    pub model: WeightModel,
    pub addend: Option<Addend>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub q: f64,
    pub analytic: f64,
    pub empirical: f64,
    pub gap: f64,
    pub stderr: f64,
    pub in_j: bool,
}

/// Analytic against empirical exponents for one function and one order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumComparison {
    /// `F`, or `G = F + f` in the corollary scenario.
    pub function: String,
    pub m: usize,
    pub rows: Vec<ComparisonRow>,
    /// Largest gap over grid points inside `J`; `NaN` if none is usable.
    pub sup_gap_j: f64,
    pub empirical: EmpiricalCurve,
    pub legendre_analytic: LegendrePair,
    pub legendre_empirical: LegendrePair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `None` for informational entries.
    pub threshold: Option<f64>,
    pub passed: bool,
}

impl Check {
    pub(crate) fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold: Some(threshold), passed: value <= threshold }
    }

    pub(crate) fn flag(name: &str, ok: bool) -> Self {
        Self { name: name.into(), value: ok as u8 as f64, threshold: Some(1.0), passed: ok }
    }

    pub(crate) fn info(name: &str, value: f64) -> Self {
        Self { name: name.into(), value, threshold: None, passed: true }
    }
}

/// Median over replicas of the smallest cylinder exponent at one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendPoint {
    pub level: usize,
    pub median_min_exponent: f64,
    pub per_replica: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KinkEstimate {
    pub m: usize,
    pub estimate: f64,
    pub predicted: f64,
    pub separation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub provenance: Provenance,
    pub model_label: String,
    pub case: Case,
    pub j_lower: f64,
    pub j_upper: f64,
    pub spectra: Vec<SpectrumComparison>,
    pub coarse: Option<CoarseSpectrum>,
    pub pointwise: Vec<ExponentEstimate>,
    pub min_exponent_trend: Vec<TrendPoint>,
    pub kink: Option<KinkEstimate>,
    pub checks: Vec<Check>,
    pub passed: bool,
    /// Some estimate is missing at a grid point or level.
    pub partial: bool,
    pub warnings: Vec<String>,
}

impl ComparisonReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn spectrum(&self, function: &str, m: usize) -> Option<&SpectrumComparison> {
        self.spectra.iter().find(|s| s.function == function && s.m == m)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Rejects report documents without a complete provenance block.
pub fn check_report_json(text: &str) -> Result<()> {
    let v: serde_json::Value = serde_json::from_str(text)?;
    let p = v.get("provenance").ok_or_else(|| Error::Config("report has no provenance block".into()))?;
    for key in ["format", "crate_version", "scenario", "seed", "depth", "levels", "replicas", "model"] {
        if p.get(key).is_none_or(|x| x.is_null()) {
            return Err(Error::Config(format!("provenance lacks `{key}`")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub role: String,
    pub axes: Vec<String>,
}

fn comparison_csv(s: &SpectrumComparison) -> String {
    let mut out = String::from("q,analytic,empirical,gap,stderr,in_J\n");
    for r in &s.rows {
        let _ = writeln!(out, "{},{},{},{},{},{}", r.q, r.analytic, r.empirical, r.gap, r.stderr, r.in_j as u8);
    }
    out
}

fn trend_csv(trend: &[TrendPoint]) -> String {
    let mut out = String::from("level,median_min_exponent\n");
    for t in trend {
        let _ = writeln!(out, "{},{}", t.level, t.median_min_exponent);
    }
    out
}

/// Writes one CSV per curve, `report.json` and `manifest.json` into
/// `dir`. Identical reports give identical bytes.
pub fn emit_plot_data(report: &ComparisonReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut files: Vec<(String, String, Vec<&str>, String)> = Vec::new();
    for s in &report.spectra {
        let tag = format!("{}_m{}", s.function, s.m);
        files.push((format!("tau_{tag}.csv"), format!("tau comparison {tag}"), vec!["q", "tau"], comparison_csv(s)));
        files.push((format!("empirical_{tag}.csv"), format!("empirical tau {tag}"), vec!["q", "t_hat"], s.empirical.to_csv()));
        files.push((
            format!("legendre_analytic_{tag}.csv"),
            format!("analytic singularity spectrum {tag}"),
            vec!["h", "tau_star"],
            s.legendre_analytic.to_csv(),
        ));
        files.push((
            format!("legendre_empirical_{tag}.csv"),
            format!("empirical singularity spectrum {tag}"),
            vec!["h", "tau_star"],
            s.legendre_empirical.to_csv(),
        ));
    }
    if let Some(c) = &report.coarse {
        files.push(("coarse.csv".into(), "coarse spectrum".into(), vec!["h", "D_hat"], c.to_csv()));
    }
    if !report.pointwise.is_empty() {
        files.push(("pointwise.csv".into(), "pointwise exponents".into(), vec!["x", "h_hat"], estimates_to_csv(&report.pointwise)));
    }
    if !report.min_exponent_trend.is_empty() {
        files.push((
            "min_exponent.csv".into(),
            "minimum cylinder exponent by level".into(),
            vec!["level", "median_min_exponent"],
            trend_csv(&report.min_exponent_trend),
        ));
    }
    files.push(("report.json".into(), "comparison report".into(), vec![], report.to_json()?));

    let mut written = Vec::with_capacity(files.len() + 1);
    let mut manifest = Vec::with_capacity(files.len());
    for (name, role, axes, body) in files {
        let path = dir.join(&name);
        fs::write(&path, body)?;
        written.push(path);
        manifest.push(ManifestEntry { file: name, role, axes: axes.into_iter().map(String::from).collect() });
    }
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
    written.push(path);
    Ok(written)
}

/// Creates a fresh `<scenario>-seed<seed>-<k>` directory under `root`.
pub fn unique_run_dir(root: &Path, scenario: Scenario, seed: u64) -> Result<PathBuf> {
    fs::create_dir_all(root)?;
    for k in 0.. {
        let dir = root.join(format!("{}-seed{}-{}", scenario, seed, k));
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e.into()),
        }
    }
    unreachable!("unbounded search")
}
