//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. A substring argument restricts the run to the
//! matching criteria.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::Rng;

use cascademf::analytic::{tau, tau_prime};
use cascademf::cascade::{
    check_self_similarity, compose, estimate_moments, evaluate_grid, sample_tree, CascadeRealization,
};
use cascademf::empirical::{sample_mu_q, CylinderStats};
use cascademf::numeric::median;
use cascademf::oscillation::{finite_difference, osc, osc_uniform, pointwise_exponent, LagPolicy, OscQuery, RadiusLadder};
use cascademf::rng::{derive_seed, seeded_rng};
use cascademf::runner::{run_scenario, ComparisonReport, RunConfig, Scenario};
use cascademf::weights::{presets, Side};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn log2(x: f64) -> f64 {
    x.ln() / std::f64::consts::LN_2
}

fn binomial_tau(q: f64) -> f64 {
    -log2(0.3f64.powf(q) + 0.7f64.powf(q))
}

fn beta_tau(q: f64) -> f64 {
    -log2(12.0 / ((2.0 + q) * (3.0 + q)))
}

fn beta_tau_prime(q: f64) -> f64 {
    (1.0 / (2.0 + q) + 1.0 / (3.0 + q)) / std::f64::consts::LN_2
}

fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| start + k as f64 * step).collect()
}

fn scenario(s: Scenario) -> ComparisonReport {
    run_scenario(&RunConfig::for_scenario(s)).expect("scenario runs")
}

fn sup_against(report: &ComparisonReport, function: &str, oracle: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let s = report.spectrum(function, 1).expect("order 1 spectrum");
    s.rows
        .iter()
        .filter(|r| r.q >= lo - 1e-12 && r.q <= hi + 1e-12)
        .map(|r| (r.empirical - oracle(r.q)).abs())
        .fold(0.0, |a, g| if g.is_nan() { f64::NAN } else { a.max(g) })
}

fn within(elapsed: Duration, secs: u64) -> bool {
    elapsed < Duration::from_secs(secs)
}

fn c1_tau_oracle() -> Outcome {
    let model = presets::deterministic_binomial();
    let t0 = Instant::now();
    let worst = grid(-4.0, 4.0, 0.1)
        .into_iter()
        .map(|q| (tau(&model, q).unwrap() - binomial_tau(q)).abs())
        .fold(0.0, f64::max);
    let dt = t0.elapsed();
    outcome(worst <= 1e-10 && within(dt, 1), format!("max |tau - closed form| = {worst:.2e}, {dt:.2?}"))
}

fn c2_partition_exactness() -> Outcome {
    let model = presets::deterministic_binomial();
    let t0 = Instant::now();
    let real = sample_tree(&model, 10, 0).unwrap();
    let qs = grid(-4.0, 4.0, 0.25);
    let mut worst: f64 = 0.0;
    for n in 1..=10 {
        let stats = CylinderStats::compute(&real, 1, n, 0).unwrap();
        for &q in &qs {
            worst = worst.max((stats.root(q).unwrap() - binomial_tau(q)).abs());
        }
    }
    let dt = t0.elapsed();
    outcome(worst <= 1e-10 && within(dt, 10), format!("max |t_n - tau| over n <= 10 = {worst:.2e}, {dt:.2?}"))
}

fn c3_monofractal() -> Outcome {
    let t0 = Instant::now();
    let report = scenario(Scenario::Monofractal);
    let dt = t0.elapsed();
    let gap = sup_against(&report, "F", |q| q / 2.0 - 1.0, 0.0, 3.0);
    let h: Vec<f64> = report.pointwise.iter().filter(|e| !e.infinite).map(|e| e.h_hat).collect();
    let h_med = median(&h);
    let single = report.coarse.as_ref().is_some_and(|c| c.bins.len() == 1);
    let ok = gap <= 0.05 && (h_med - 0.5).abs() <= 0.05 && h.len() * 2 >= 32 && single && within(dt, 300);
    outcome(
        ok,
        format!("sup gap {gap:.4}, median h over {} points {h_med:.4}, single coarse bin {single}, {dt:.2?}", h.len()),
    )
}

fn c4_bell() -> Outcome {
    let t0 = Instant::now();
    let report = scenario(Scenario::Bell);
    let dt = t0.elapsed();
    let gap = sup_against(&report, "F", beta_tau, 0.0, 3.0);
    let p = &report.provenance;
    let ok = gap <= 0.05 && p.replicas == 64 && p.depth == 12 && within(dt, 600);
    outcome(ok, format!("sup gap {gap:.4} ({} replicas, depth {}), {dt:.2?}", p.replicas, p.depth))
}

fn c5_derivative_consistency() -> Outcome {
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for model in presets::catalogue() {
        for q in grid(-2.0, 4.0, 0.25) {
            let (Ok(tp), Ok(a), Ok(b)) = (tau_prime(&model, q), tau(&model, q + h), tau(&model, q - h)) else {
                continue;
            };
            if !tp.is_finite() || tau(&model, q - 2.0 * h).is_err() {
                continue;
            }
            worst = worst.max((tp - (a - b) / (2.0 * h)).abs());
            checked += 1;
        }
    }
    outcome(worst <= 1e-6, format!("max |tau' - central difference| = {worst:.2e} over {checked} points"))
}

fn c6_oscillation_inequalities() -> Outcome {
    let mut rng = seeded_rng(606);
    let mut violations = 0;
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(16..200);
        let v: Vec<Complex64> =
            (0..=n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let x: Vec<f64> = (0..=n).map(|j| j as f64 / n as f64).collect();
        let o1 = osc_uniform(&v, 1, LagPolicy::Exhaustive);
        for m in 2..=4 {
            let om = osc_uniform(&v, m, LagPolicy::Exhaustive);
            let bound = 2f64.powi(m as i32 - 1) * o1;
            worst_ratio = worst_ratio.max(om / bound);
            if om > bound * (1.0 + 1e-12) {
                violations += 1;
            }
            // a polynomial of degree m - 1 on the same grid
            let coef: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let p: Vec<Complex64> = x
                .iter()
                .map(|&t| Complex64::new(coef.iter().rev().fold(0.0, |acc, c| acc * t + c), 0.0))
                .collect();
            for step in [1, 2, 5] {
                if let Ok(d) = finite_difference(&p, m, step) {
                    if d.iter().any(|z| z.norm() > 1e-12) {
                        violations += 1;
                    }
                }
            }
            // nested intervals on grid points
            let i0 = rng.random_range(0..n / 2);
            let i1 = rng.random_range(n / 2 + 1..=n);
            let j0 = rng.random_range(i0..n / 2);
            let j1 = rng.random_range(n / 2 + 1..=i1);
            if j1 - j0 >= m {
                let outer = osc(&x, &v, &OscQuery::new(m, x[i0], x[i1])).unwrap();
                let inner = osc(&x, &v, &OscQuery::new(m, x[j0], x[j1])).unwrap();
                if inner > outer * (1.0 + 1e-12) {
                    violations += 1;
                }
            }
        }
    }
    outcome(violations == 0, format!("{violations} violations, largest Osc^(m) / (2^(m-1) Osc^(1)) = {worst_ratio:.4}"))
}

fn c7_self_similarity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for model in presets::catalogue() {
        for seed in 0..4 {
            let real = sample_tree(&model, 8, 700 + seed).unwrap();
            worst = worst.max(check_self_similarity(&real, 4).unwrap());
            count += 1;
        }
    }
    outcome(worst <= 1e-12, format!("max residual at n = 4 over {count} realizations = {worst:.2e}"))
}

fn c8_martingale_mean() -> Outcome {
    let model = presets::beta_bell();
    let vals: Vec<f64> = (0..256u64)
        .map(|r| evaluate_grid(&sample_tree(&model, 10, derive_seed(808, r)).unwrap(), Side::W, 10).unwrap().last().re)
        .collect();
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    let dev = (mean - 1.0).abs();
    outcome(dev <= 3.0 * se, format!("|mean F_W,10(1) - 1| = {dev:.3e}, 3 stderr = {:.3e}", 3.0 * se))
}

fn c9_corollary() -> Outcome {
    let t0 = Instant::now();
    let report = scenario(Scenario::CorollaryCw);
    let dt = t0.elapsed();
    // tau(1) = 0 = 1 - 1 for the binomial, so q_1 = 1
    let q1 = 1.0;
    let gap = sup_against(&report, "G", |q| (q - 1.0).min(binomial_tau(q)), 0.0, q1 + 2.0);
    let kink = report.kink.as_ref().map(|k| k.estimate).unwrap_or(f64::NAN);
    let ok = gap <= 0.1 && (kink - q1).abs() <= 0.2 && within(dt, 600);
    outcome(ok, format!("sup gap {gap:.4}, kink {kink:.3} vs {q1}, {dt:.2?}"))
}

fn cylinder_midpoints(real: &CascadeRealization, level: usize) -> Vec<f64> {
    let fl = evaluate_grid(real, Side::L, level).unwrap();
    fl.values.windows(2).map(|w| 0.5 * (w[0].re + w[1].re)).collect()
}

fn c10_mu_q_targeting() -> Outcome {
    let (depth, target, trunc) = (18, 12, 6);
    let model = presets::beta_bell();
    let real = sample_tree(&model, depth, 1010).unwrap();
    let samples = compose(&evaluate_grid(&real, Side::W, depth).unwrap(), &evaluate_grid(&real, Side::L, depth).unwrap()).unwrap();
    let mids = cylinder_midpoints(&real, target);
    let mut ok = true;
    let mut parts = Vec::new();
    for q in [0.5, 1.0, 2.0] {
        let mu = sample_mu_q(&real, q, target, trunc, 64, 10).unwrap();
        let h: Vec<f64> = mu
            .draws
            .iter()
            .filter_map(|a| pointwise_exponent(&samples, mids[a.index() as usize], 1, &RadiusLadder::default()).ok())
            .filter(|e| !e.infinite)
            .map(|e| e.h_hat)
            .collect();
        let med = median(&h);
        let expected = beta_tau_prime(q);
        ok &= (med - expected).abs() <= 0.1 && h.len() * 2 >= 64;
        parts.push(format!("q={q}: median {med:.3} vs {expected:.3} ({} pts)", h.len()));
    }
    outcome(ok, parts.join("; "))
}

fn c11_critical_trend() -> Outcome {
    let report = scenario(Scenario::BellCritical);
    let trend = &report.min_exponent_trend;
    let levels: Vec<usize> = trend.iter().map(|t| t.level).collect();
    let meds: Vec<f64> = trend.iter().map(|t| median(&t.per_replica)).collect();
    let replicas = trend.iter().map(|t| t.per_replica.len()).min().unwrap_or(0);
    let decreasing = meds.windows(2).all(|w| w[1] < w[0]);
    let ok = levels == [8, 10, 12] && replicas == 16 && decreasing;
    outcome(ok, format!("median min exponent at levels {levels:?}: {meds:.4?} ({replicas} replicas)"))
}

fn c12_moments() -> Outcome {
    let model = presets::beta_bell();
    let ts = [10.0, 100.0, 1000.0, 10000.0];
    let p = 0.5;
    let mut reports = Vec::new();
    for depth in [8, 10, 12] {
        reports.push(estimate_moments(&model, 1, 2.0, &ts, 256, depth, 1212).unwrap());
    }
    let scaled: Vec<f64> = reports[2].laplace.iter().map(|&(t, psi)| psi * t.powf(p)).collect();
    let bounded = scaled.iter().all(|&v| v <= 2.0 * scaled[0]);
    let (a, b) = (&reports[0], &reports[2]);
    let drift = (a.estimate - b.estimate).abs();
    let spread = 3.0 * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    let ok = bounded && drift <= spread;
    let scaled: Vec<String> = scaled.iter().map(|v| format!("{v:.3e}")).collect();
    outcome(
        ok,
        format!(
            "psi(t) t^0.5 = [{}]; E Z^2 depth 8 -> 12: {:.6} -> {:.6}, drift {drift:.2e} vs 3 stderr {spread:.2e}",
            scaled.join(", "),
            a.estimate, b.estimate
        ),
    )
}

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("01 analytic tau oracle", c1_tau_oracle),
        ("02 deterministic partition exactness", c2_partition_exactness),
        ("03 monofractal collapse", c3_monofractal),
        ("04 random bell spectrum", c4_bell),
        ("05 derivative consistency", c5_derivative_consistency),
        ("06 oscillation inequalities", c6_oscillation_inequalities),
        ("07 self-similarity residual", c7_self_similarity),
        ("08 martingale mean", c8_martingale_mean),
        ("09 smooth addend kink", c9_corollary),
        ("10 mu_q targeting", c10_mu_q_targeting),
        ("11 critical minimum exponent trend", c11_critical_trend),
        ("12 moments and Laplace transform", c12_moments),
    ];
    let mut failed = 0;
    let mut ran = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|s| name.contains(s.as_str())) {
            continue;
        }
        ran += 1;
        let t0 = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f));
        let dt = t0.elapsed();
        let (passed, detail) = match result {
            Ok(o) => (o.passed, o.detail),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        if !passed {
            failed += 1;
        }
        println!("criterion {name}: {} [{dt:.1?}] {detail}", if passed { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
