use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use cascademf::analytic::{full_curve, interval_j};
use cascademf::cascade::{compose, estimate_moments, evaluate_grid, sample_tree, write_dump};
use cascademf::empirical::{coarse_spectrum, empirical_tau, SubDepth};
use cascademf::oscillation::{estimates_to_csv, pointwise_exponent, RadiusLadder};
use cascademf::runner::{configure_threads, emit_plot_data, run_scenario, unique_run_dir, ModelSpec, QGrid, RunConfig, Scenario};
use cascademf::weights::{validate, Case, Side, WeightModel};

#[derive(Parser)]
#[command(name = "cascademf", version, about = "Multifractal analysis of complex random cascade functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a weight law and check its assumptions.
    Validate(ModelArg),
    /// Sample one realization and write its binary dump.
    Simulate(SimulateArgs),
    /// Analytic τ, τ' and J on a q grid.
    Tau(TauArgs),
    /// Empirical τ̂ from replicas, or a coarse spectrum with --coarse-level.
    Spectrum(SpectrumArgs),
    /// Pointwise oscillation exponents of one realization.
    Pointwise(PointwiseArgs),
    /// Moments and Laplace transform of Z^(m).
    Moments(MomentArgs),
    /// Run a scenario and write its report and plot data.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct ModelArg {
    /// Preset name or path to a JSON weight model.
    #[arg(long, default_value = "bell")]
    model: String,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArg,
    #[arg(long, default_value_t = 12)]
    depth: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Binary dump of the weight tree.
    #[arg(long)]
    out: PathBuf,
    /// Also write the composed samples `x,re,im` here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct QArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    q_start: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    q_stop: f64,
    #[arg(long, default_value_t = 0.25)]
    q_step: f64,
}

impl QArgs {
    fn values(&self) -> Result<Vec<f64>> {
        Ok(QGrid { start: self.q_start, stop: self.q_stop, step: self.q_step }.values()?)
    }
}

#[derive(Args)]
struct TauArgs {
    #[command(flatten)]
    model: ModelArg,
    #[command(flatten)]
    q: QArgs,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    model: ModelArg,
    #[command(flatten)]
    q: QArgs,
    #[arg(long, default_value_t = 12)]
    depth: usize,
    /// Comma-separated levels; defaults to 6..=depth.
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0)]
    sub_depth: usize,
    #[arg(long, default_value_t = 16)]
    replicas: usize,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Print the coarse spectrum of one realization at this level instead.
    #[arg(long)]
    coarse_level: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    bin_width: f64,
}

#[derive(Args)]
struct PointwiseArgs {
    #[command(flatten)]
    model: ModelArg,
    #[arg(long, default_value_t = 12)]
    depth: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Comma-separated abscissae.
    #[arg(long, value_delimiter = ',', required = true)]
    x: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    m: usize,
}

#[derive(Args)]
struct MomentArgs {
    #[command(flatten)]
    model: ModelArg,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    #[arg(long, default_value_t = 10)]
    depth: usize,
    #[arg(long, default_value_t = 256)]
    replicas: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Comma-separated Laplace arguments.
    #[arg(long, value_delimiter = ',', default_value = "10,100,1000,10000")]
    t: Vec<f64>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON run configuration; flags below override its top-level keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<Scenario>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    /// Root directory; each run gets its own subdirectory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_model(spec: &str) -> Result<WeightModel> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {spec}"))?;
        return WeightModel::from_json(&text).with_context(|| format!("parsing {spec}"));
    }
    Ok(ModelSpec::Preset(spec.into()).resolve()?)
}

fn model_spec(spec: &str) -> Result<ModelSpec> {
    Ok(if Path::new(spec).is_file() { ModelSpec::Inline(load_model(spec)?) } else { ModelSpec::Preset(spec.into()) })
}

fn validate_cmd(a: &ModelArg) -> Result<ExitCode> {
    let report = validate(&load_model(&a.model)?);
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if report.case == Case::Rejected { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn simulate(a: &SimulateArgs) -> Result<ExitCode> {
    let model = load_model(&a.model.model)?;
    let real = sample_tree(&model, a.depth, a.seed)?;
    let mut w = BufWriter::new(File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?);
    write_dump(&real, &mut w)?;
    w.flush()?;
    if let Some(p) = &a.csv {
        let s = compose(&evaluate_grid(&real, Side::W, a.depth)?, &evaluate_grid(&real, Side::L, a.depth)?)?;
        std::fs::write(p, s.to_csv())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn tau_cmd(a: &TauArgs) -> Result<ExitCode> {
    let model = load_model(&a.model.model)?;
    let j = interval_j(&model);
    eprintln!("J = [{}, {}]", j.q_lower(), j.q_upper());
    print!("{}", full_curve(&model, &a.q.values()?).to_csv());
    Ok(ExitCode::SUCCESS)
}

fn spectrum(a: &SpectrumArgs) -> Result<ExitCode> {
    let model = load_model(&a.model.model)?;
    if let Some(n) = a.coarse_level {
        let real = sample_tree(&model, a.depth, a.seed)?;
        if n + a.sub_depth > a.depth {
            bail!("coarse level {n} plus sub-depth {} exceeds depth {}", a.sub_depth, a.depth);
        }
        print!("{}", coarse_spectrum(&real, a.m, n, a.sub_depth, a.bin_width)?.to_csv());
        return Ok(ExitCode::SUCCESS);
    }
    let levels = a.levels.clone().unwrap_or_else(|| (6.min(a.depth)..=a.depth - a.sub_depth).collect());
    let reals = (0..a.replicas)
        .map(|r| sample_tree(&model, a.depth, cascademf::rng::derive_seed(a.seed, r as u64)))
        .collect::<cascademf::Result<Vec<_>>>()?;
    let curve = empirical_tau(&reals, a.m, &a.q.values()?, &levels, SubDepth::Fixed(a.sub_depth))?;
    print!("{}", curve.to_csv());
    Ok(ExitCode::SUCCESS)
}

fn pointwise(a: &PointwiseArgs) -> Result<ExitCode> {
    let model = load_model(&a.model.model)?;
    let real = sample_tree(&model, a.depth, a.seed)?;
    let s = compose(&evaluate_grid(&real, Side::W, a.depth)?, &evaluate_grid(&real, Side::L, a.depth)?)?;
    let est = a
        .x
        .iter()
        .map(|&x| pointwise_exponent(&s, x, a.m, &RadiusLadder::default()))
        .collect::<cascademf::Result<Vec<_>>>()?;
    print!("{}", estimates_to_csv(&est));
    Ok(ExitCode::SUCCESS)
}

fn moments(a: &MomentArgs) -> Result<ExitCode> {
    let model = load_model(&a.model.model)?;
    let r = estimate_moments(&model, a.m, a.q, &a.t, a.replicas, a.depth, a.seed)?;
    if r.heavy_tail_warning {
        eprintln!("warning: one replica dominates the moment estimate");
    }
    println!("{}", serde_json::to_string_pretty(&r)?);
    Ok(ExitCode::SUCCESS)
}

fn experiment(a: &ExperimentArgs) -> Result<ExitCode> {
    let mut config = match &a.config {
        Some(p) => RunConfig::from_json(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
        None => RunConfig::default(),
    };
    if let Some(s) = a.scenario {
        config.scenario = s;
    }
    if let Some(m) = &a.model {
        config.model = Some(model_spec(m)?);
    }
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if a.depth.is_some() {
        config.depth = a.depth;
    }
    if a.replicas.is_some() {
        config.replicas = a.replicas;
    }
    if a.threshold.is_some() {
        config.threshold = a.threshold;
    }
    if a.out.is_some() {
        config.out = a.out.clone();
    }
    let report = run_scenario(&config).context("running scenario")?;
    let root = config.out.clone().unwrap_or_else(|| PathBuf::from("runs"));
    let dir = unique_run_dir(&root, config.scenario, config.seed)?;
    emit_plot_data(&report, &dir)?;
    for c in &report.checks {
        let verdict = match (c.threshold, c.passed) {
            (None, _) => "info",
            (Some(_), true) => "pass",
            (Some(_), false) => "FAIL",
        };
        match c.threshold {
            Some(t) => println!("{verdict:4}  {}: {:.6} (threshold {t})", c.name, c.value),
            None => println!("{verdict:4}  {}: {:.6}", c.name, c.value),
        }
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    println!("{} -> {}", if report.passed { "PASS" } else { "FAIL" }, dir.display());
    Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().map_err(anyhow::Error::from).and_then(|()| match &cli.command {
        Command::Validate(a) => validate_cmd(a),
        Command::Simulate(a) => simulate(a),
        Command::Tau(a) => tau_cmd(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Pointwise(a) => pointwise(a),
        Command::Moments(a) => moments(a),
        Command::Experiment(a) => experiment(a),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
