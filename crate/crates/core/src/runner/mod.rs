//! Scenario presets, replica orchestration and analytic-versus-empirical
//! reports.

mod config;
mod report;

pub use config::{Addend, ModelSpec, Plan, QGrid, RunConfig, Scenario};
pub use report::{
    check_report_json, emit_plot_data, unique_run_dir, Check, ComparisonReport, ComparisonRow, KinkEstimate, ManifestEntry,
    Provenance, SpectrumComparison, TrendPoint, REPORT_FORMAT,
};

use num_complex::Complex64;
use rand::Rng;

use crate::analytic::{
    analytic_curve, full_tau_m, interval_j, legendre_parametric, order_root, predicted_tau_g, tau_prime, CurveSource,
    IntervalJ, SpectrumCurve,
};
use crate::cascade::{compose, evaluate_grid, sample_tree, CascadeRealization, ComposedSamples};
use crate::empirical::{aggregate, coarse_spectrum, level_roots, sample_level_roots, EmpiricalCurve, SubDepth};
use crate::error::{Error, Result};
use crate::numeric::median;
use crate::oscillation::{pointwise_exponent, RadiusLadder};
use crate::rng::{derive_seed, seeded_rng};
use crate::weights::{validate, Case, Side, WeightModel};

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "CASCADEMF_THREADS";

/// Random abscissae probed by the monofractal scenario.
pub const POINTWISE_POINTS: usize = 32;
/// Levels of the minimum-exponent trend in the critical scenario.
pub const TREND_LEVELS: [usize; 3] = [8, 10, 12];
/// Bin width of the coarse spectrum.
pub const COARSE_BIN: f64 = 0.05;
/// `τ̂_G` counts as following `qm - 1` while it stays this close.
pub const KINK_SEPARATION: f64 = 0.005;
/// Allowed distance between the estimated and predicted kink.
pub const KINK_TOLERANCE: f64 = 0.2;

const POINTWISE_STREAM: u64 = 0x9017;

/// Sizes the global rayon pool from `CASCADEMF_THREADS` when it is set.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
    if n == 0 {
        return Err(Error::Config(format!("{THREADS_ENV} must be positive")));
    }
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn composed(real: &CascadeRealization) -> Result<ComposedSamples> {
    let n = real.depth();
    compose(&evaluate_grid(real, Side::W, n)?, &evaluate_grid(real, Side::L, n)?)
}

/// Per-replica outputs kept after the tree is dropped.
#[derive(Default)]
struct Collected {
    /// `[m][replica][level][q]`.
    f_roots: Vec<Vec<Vec<Vec<Option<f64>>>>>,
    g_roots: Vec<Vec<Vec<Vec<Option<f64>>>>>,
    /// `[level][replica]`.
    trend: Vec<Vec<f64>>,
}

fn collect(plan: &Plan, warnings: &mut Vec<String>) -> Result<(Collected, Option<CascadeRealization>)> {
    let mut c = Collected {
        f_roots: vec![Vec::with_capacity(plan.replicas); plan.ms.len()],
        g_roots: vec![Vec::with_capacity(plan.replicas); plan.ms.len()],
        trend: vec![Vec::with_capacity(plan.replicas); TREND_LEVELS.len()],
    };
    let mut first = None;
    // one tree at a time: deep ternary trees take hundreds of megabytes
    for r in 0..plan.replicas {
        let real = sample_tree(&plan.model, plan.depth, derive_seed(plan.seed, r as u64))?;
        for (k, &m) in plan.ms.iter().enumerate() {
            c.f_roots[k].push(level_roots(&real, m, &plan.qs, &plan.levels, SubDepth::Fixed(plan.sub_depth))?);
        }
        if plan.scenario == Scenario::CorollaryCw {
            let mut g = composed(&real)?;
            for (x, y) in g.x.iter().zip(g.y.iter_mut()) {
                *y += Complex64::new(plan.addend.eval(*x), 0.0);
            }
            for (k, &m) in plan.ms.iter().enumerate() {
                c.g_roots[k].push(sample_level_roots(&g, plan.model.base, m, &plan.qs, &plan.levels)?);
            }
        }
        if plan.scenario == Scenario::BellCritical {
            for (k, &n) in TREND_LEVELS.iter().enumerate() {
                if n > plan.depth {
                    continue;
                }
                let cs = coarse_spectrum(&real, 1, n, plan.depth - n, COARSE_BIN)?;
                match cs.min_exponent() {
                    Some(e) => c.trend[k].push(e),
                    None => warnings.push(format!("replica {r}: every cylinder at level {n} has zero oscillation")),
                }
            }
        }
        if r == 0 {
            first = Some(real);
        }
    }
    Ok((c, first))
}

fn compare(
    function: &str,
    m: usize,
    curve: EmpiricalCurve,
    analytic: &[f64],
    in_j: &[bool],
    legendre_analytic: crate::analytic::LegendrePair,
) -> SpectrumComparison {
    let rows: Vec<ComparisonRow> = (0..curve.q.len())
        .map(|i| ComparisonRow {
            q: curve.q[i],
            analytic: analytic[i],
            empirical: curve.t_hat[i],
            gap: (curve.t_hat[i] - analytic[i]).abs(),
            stderr: curve.stderr[i],
            in_j: in_j[i],
        })
        .collect();
    let gaps: Vec<f64> = rows.iter().filter(|r| r.in_j).map(|r| r.gap).collect();
    let sup_gap_j = if gaps.is_empty() || gaps.iter().any(|g| g.is_nan()) {
        f64::NAN
    } else {
        gaps.into_iter().fold(0.0, f64::max)
    };
    let legendre_empirical = legendre_parametric(&curve.to_spectrum_curve());
    SpectrumComparison { function: function.into(), m, rows, sup_gap_j, empirical: curve, legendre_analytic, legendre_empirical }
}

fn analytic_tau(model: &WeightModel, j: &IntervalJ, qs: &[f64]) -> Vec<f64> {
    qs.iter().map(|&q| full_tau_m(model, j, q).unwrap_or(f64::NAN)).collect()
}

/// Largest grid `q` up to which `τ̂_G` stays within [`KINK_SEPARATION`] of
/// `qm - 1`.
pub fn kink_location(qs: &[f64], t_hat: &[f64], m: usize) -> Option<f64> {
    let mut last = None;
    for (&q, &t) in qs.iter().zip(t_hat) {
        if !((t - (q * m as f64 - 1.0)).abs() <= KINK_SEPARATION) {
            break;
        }
        last = Some(q);
    }
    last
}

fn pointwise_probe(
    plan: &Plan,
    real: &CascadeRealization,
    warnings: &mut Vec<String>,
) -> Result<Vec<crate::oscillation::ExponentEstimate>> {
    let samples = composed(real)?;
    let (lo, hi) = samples.range();
    let mut rng = seeded_rng(derive_seed(plan.seed, POINTWISE_STREAM));
    let mut out = Vec::with_capacity(POINTWISE_POINTS);
    for _ in 0..POINTWISE_POINTS {
        let x = lo + (hi - lo) * rng.random::<f64>();
        match pointwise_exponent(&samples, x, 1, &RadiusLadder::default()) {
            Ok(e) => out.push(e),
            Err(e) => warnings.push(format!("pointwise estimate at x = {x}: {e}")),
        }
    }
    Ok(out)
}

/// validate, sample every replica, estimate, compare with the analytic
/// curves and score the scenario's checks.
pub fn run_scenario(config: &RunConfig) -> Result<ComparisonReport> {
    let plan = config.resolve()?;
    run_plan(&plan)
}

pub fn run_plan(plan: &Plan) -> Result<ComparisonReport> {
    let model = &plan.model;
    let validation = validate(model);
    if validation.case == Case::Rejected {
        return Err(Error::InvalidModel(validation.messages.join("; ")));
    }
    if plan.scenario == Scenario::BellCritical && validation.case != Case::CriticalB2 {
        return Err(Error::Config(format!("bell-critical needs a critical model, `{}` is {:?}", model.label, validation.case)));
    }
    let mut warnings = Vec::new();
    let mut checks = Vec::new();
    let j = interval_j(model);
    let (collected, first) = collect(plan, &mut warnings)?;
    let first = first.expect("at least one replica");

    let exact = analytic_curve(model, &plan.qs);
    let legendre_f = legendre_parametric(&exact);
    let in_j: Vec<bool> = plan.qs.iter().map(|&q| j.contains(q)).collect();
    let tau_f = analytic_tau(model, &j, &plan.qs);
    let mut spectra = Vec::new();
    for (k, &m) in plan.ms.iter().enumerate() {
        let curve = aggregate(m, &plan.qs, &plan.levels, &collected.f_roots[k]);
        spectra.push(compare("F", m, curve, &tau_f, &in_j, legendre_f.clone()));
    }

    let mut kink = None;
    if plan.scenario == Scenario::CorollaryCw {
        for (k, &m) in plan.ms.iter().enumerate() {
            let root = order_root(model, m)?;
            let predicted: Vec<f64> =
                plan.qs.iter().map(|&q| predicted_tau_g(model, &root, q).unwrap_or(f64::NAN)).collect();
            let legendre_g = legendre_parametric(&SpectrumCurve::from_values(&plan.qs, &predicted, CurveSource::Analytic));
            let curve = aggregate(m, &plan.qs, &plan.levels, &collected.g_roots[k]);
            let estimate = kink_location(&curve.q, &curve.t_hat, m);
            let cmp = compare("G", m, curve, &predicted, &vec![true; plan.qs.len()], legendre_g);
            if let Some(t) = plan.threshold {
                checks.push(Check::at_most(&format!("G m={m} sup gap"), cmp.sup_gap_j, t));
            }
            if let (Some(q1), Some(est)) = (root.q_m, estimate) {
                checks.push(Check::at_most(&format!("G m={m} kink distance"), (est - q1).abs(), KINK_TOLERANCE));
                if kink.is_none() {
                    kink = Some(KinkEstimate { m, estimate: est, predicted: q1, separation: KINK_SEPARATION });
                }
            } else {
                warnings.push(format!("m={m}: no kink located"));
            }
            spectra.push(cmp);
        }
    }

    for s in spectra.iter().filter(|s| s.function == "F") {
        let name = format!("F m={} sup gap", s.m);
        match plan.threshold {
            Some(t) if plan.scenario != Scenario::CorollaryCw => checks.push(Check::at_most(&name, s.sup_gap_j, t)),
            _ => checks.push(Check::info(&name, s.sup_gap_j)),
        }
    }

    if plan.scenario == Scenario::LeftSided {
        let slope = tau_prime(model, 0.0)?;
        checks.push(Check::flag("tau'(0) infinite", slope.is_infinite()));
        if let Some(s) = spectra.iter().find(|s| s.function == "F") {
            let c = s.empirical.to_spectrum_curve();
            if let Some(k) = c.q.iter().position(|&q| q == 0.0) {
                checks.push(Check::info("empirical tau'(0)", c.tau_prime[k]));
            }
        }
    }

    let mut coarse = None;
    let mut pointwise = Vec::new();
    if plan.scenario == Scenario::Monofractal {
        let n = *plan.levels.iter().max().expect("nonempty");
        let cs = coarse_spectrum(&first, 1, n, plan.sub_depth, COARSE_BIN)?;
        checks.push(Check::flag("coarse spectrum single bin", cs.bins.len() == 1));
        coarse = Some(cs);
        pointwise = pointwise_probe(plan, &first, &mut warnings)?;
        let finite: Vec<f64> = pointwise.iter().filter(|e| !e.infinite).map(|e| e.h_hat).collect();
        let h = tau_prime(model, 0.0)?;
        let dev = if 2 * finite.len() >= POINTWISE_POINTS { (median(&finite) - h).abs() } else { f64::NAN };
        if let Some(t) = plan.threshold {
            checks.push(Check::at_most("pointwise median deviation", dev, t));
        }
    }

    let mut trend = Vec::new();
    if plan.scenario == Scenario::BellCritical {
        for (k, &n) in TREND_LEVELS.iter().enumerate() {
            let vals = &collected.trend[k];
            if !vals.is_empty() {
                trend.push(TrendPoint { level: n, median_min_exponent: median(vals), per_replica: vals.clone() });
            }
        }
        let decreasing = trend.len() >= 2 && trend.windows(2).all(|w| w[1].median_min_exponent < w[0].median_min_exponent);
        checks.push(Check::flag("minimum exponent strictly decreasing", decreasing));
    }

    let mut partial = false;
    for s in &spectra {
        if !s.empirical.skipped.is_empty() {
            partial = true;
            warnings.push(format!("{} m={}: {} (level, q) pairs had an all-zero partition", s.function, s.m, s.empirical.skipped.len()));
        }
        if s.empirical.t_hat.iter().any(|v| v.is_nan()) {
            partial = true;
            warnings.push(format!("{} m={}: no estimate at some q", s.function, s.m));
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(ComparisonReport {
        provenance: Provenance {
            format: REPORT_FORMAT,
            crate_version: env!("CARGO_PKG_VERSION").into(),
            scenario: plan.scenario,
            seed: plan.seed,
            depth: plan.depth,
            levels: plan.levels.clone(),
            sub_depth: plan.sub_depth,
            replicas: plan.replicas,
            m: plan.ms.clone(),
            q: plan.qs.clone(),
            model: model.clone(),
            addend: (plan.scenario == Scenario::CorollaryCw).then_some(plan.addend),
        },
        model_label: model.label.clone(),
        case: validation.case,
        j_lower: j.q_lower(),
        j_upper: j.q_upper(),
        spectra,
        coarse,
        pointwise,
        min_exponent_trend: trend,
        kink,
        checks,
        passed,
        partial,
        warnings,
    })
}
