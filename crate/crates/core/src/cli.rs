//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on domain or numerical errors (one line
//! `error: <Kind>: <message>` on stderr), 2 on usage errors. Data goes to
//! stdout or to the files named by flags; diagnostics go to stderr.
//!
//! `--config FILE` reads flat `key = value` lines (`#` starts a comment).
//! Each key is the long name of a flag of the chosen subcommand; flags given
//! on the command line win. `key = true` sets a switch.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use crate::data::{ConstraintSet, FunctionSpec, Sample, WeightMethod};
use crate::error::{Error, Result};
use crate::feasibility::{augmented_rank, feasibility_report, DEFAULT_RANK_REL_TOL};
use crate::io;
use crate::measure::InformedMeasure;
use crate::montecarlo::{self, Distribution, ExperimentKind, ExperimentSpec};
use crate::solvers::{compute_weights, SolverConfig};

#[derive(Debug, Clone, Parser)]
#[command(name = "auxinfo", version, about = "Empirical measures informed by known expectations")]
pub struct CliConfig {
    /// Read default flag values from a key=value file.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Check the rank condition and convex-hull membership; prints a JSON report.
    Feasibility(FeasibilityArgs),
    /// Compute weights and write them as CSV.
    Weights(WeightsArgs),
    /// Classical and informed ECDFs over a grid, as CSV.
    Ecdf(EcdfArgs),
    /// Informed alpha-quantile, as JSON.
    Quantile(QuantileArgs),
    /// Seeded Monte Carlo experiments.
    Simulate {
        #[command(subcommand)]
        experiment: Experiment,
    },
}

/// A comma-separated list of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct RealList(pub Vec<f64>);

/// A comma-separated list of functions over `{x^k, ind(x<=c)}`.
#[derive(Debug, Clone)]
pub struct FunctionList(pub Vec<FunctionSpec>);

fn parse_real_list(s: &str) -> std::result::Result<RealList, String> {
    let v = io::parse_f64_list(s).map_err(|e| e.to_string())?;
    if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
        return Err("expected a non-empty list of finite numbers".into());
    }
    Ok(RealList(v))
}

fn parse_function_list(s: &str) -> std::result::Result<FunctionList, String> {
    FunctionSpec::parse_list(s).map(FunctionList).map_err(|e| e.to_string())
}

fn parse_function(s: &str) -> std::result::Result<FunctionSpec, String> {
    s.trim().parse::<FunctionSpec>().map_err(|e| e.to_string())
}

fn parse_distribution(s: &str) -> std::result::Result<Distribution, String> {
    s.parse::<Distribution>().map_err(|e| e.to_string())
}

fn parse_alpha(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(a) if a > 0.0 && a < 1.0 => Ok(a),
        _ => Err("alpha must be a number in (0, 1)".into()),
    }
}

fn parse_positive(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err("expected a positive number".into()),
    }
}

fn parse_finite(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err("expected a finite number".into()),
    }
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Sample file, one value per line.
    #[arg(long, value_name = "FILE")]
    pub sample: Option<PathBuf>,

    /// Constraint functions, e.g. "x,x^2,ind(x<=0)".
    #[arg(long, value_name = "LIST", value_parser = parse_function_list, conflicts_with = "constraints")]
    pub g: Option<FunctionList>,

    /// Precomputed constraint matrix as CSV with a header.
    #[arg(long, value_name = "FILE")]
    pub constraints: Option<PathBuf>,

    /// Known expectations, one per constraint.
    #[arg(long, value_name = "LIST", value_parser = parse_real_list, allow_hyphen_values = true)]
    pub target: Option<RealList>,

    /// Reference law: std_normal, uniform01 or exponential1. Supplies the
    /// target when --target is absent.
    #[arg(long, value_name = "NAME", value_parser = parse_distribution)]
    pub dist: Option<Distribution>,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Newton stopping tolerance on the gradient norm.
    #[arg(long, default_value_t = 1e-10, value_parser = parse_positive)]
    pub grad_tol: f64,

    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_iter: u64,

    /// Relative singular-value threshold for rank decisions.
    #[arg(long, default_value_t = DEFAULT_RANK_REL_TOL, value_parser = parse_positive)]
    pub rank_tol: f64,
}

impl SolverArgs {
    pub fn to_config(&self) -> SolverConfig {
        SolverConfig {
            grad_tol: self.grad_tol,
            max_iter: self.max_iter as usize,
            rank_rel_tol: self.rank_tol,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct FeasibilityArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[arg(long, default_value_t = DEFAULT_RANK_REL_TOL, value_parser = parse_positive)]
    pub rank_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodChoice {
    El,
    Tilt,
    Closed,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SingleMethod {
    El,
    Tilt,
    Closed,
}

impl SingleMethod {
    fn method(self) -> WeightMethod {
        match self {
            SingleMethod::El => WeightMethod::EmpiricalLikelihood,
            SingleMethod::Tilt => WeightMethod::ExponentialTilt,
            SingleMethod::Closed => WeightMethod::ClosedForm,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct WeightsArgs {
    #[arg(long, value_enum)]
    pub method: MethodChoice,

    #[command(flatten)]
    pub input: InputArgs,

    #[command(flatten)]
    pub solver: SolverArgs,

    /// Output CSV; stdout when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EcdfArgs {
    #[arg(long, value_enum, default_value = "closed")]
    pub method: SingleMethod,

    #[command(flatten)]
    pub input: InputArgs,

    #[command(flatten)]
    pub solver: SolverArgs,

    /// Grid start; defaults to the sample minimum minus 5% of the range.
    #[arg(long, value_parser = parse_finite, allow_hyphen_values = true)]
    pub t_min: Option<f64>,

    /// Grid end; defaults to the sample maximum plus 5% of the range.
    #[arg(long, value_parser = parse_finite, allow_hyphen_values = true)]
    pub t_max: Option<f64>,

    #[arg(long, default_value_t = 201, value_parser = clap::value_parser!(u64).range(1..=1_000_000))]
    pub points: u64,

    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct QuantileArgs {
    #[arg(long, value_parser = parse_alpha)]
    pub alpha: f64,

    #[arg(long, value_enum, default_value = "closed")]
    pub method: SingleMethod,

    #[command(flatten)]
    pub input: InputArgs,

    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Sample sizes, e.g. "100,1000,10000".
    #[arg(long, value_delimiter = ',', required = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: Vec<u64>,

    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,

    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    #[arg(long, default_value = "std_normal", value_parser = parse_distribution)]
    pub dist: Distribution,

    #[arg(long, default_value = "x,x^2", value_parser = parse_function_list)]
    pub g: FunctionList,

    /// Test function.
    #[arg(long, default_value = "ind(x<=0)", value_parser = parse_function)]
    pub f: FunctionSpec,

    /// Draw samples as x, -x pairs.
    #[arg(long)]
    pub symmetric: bool,

    /// Per-replicate CSV; stdout when absent.
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,

    /// Per-n JSON summary.
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,

    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Experiment {
    /// Multiplier expansions of the EL and tilt solutions.
    Lambda(SimulateArgs),
    /// Scaled distance between the projection weights and the closed form.
    Closeness(SimulateArgs),
    /// Variance of the informed and classical estimators of Pf.
    Variance(SimulateArgs),
    /// Tail frequencies of the informed and classical empirical processes.
    Concentration {
        #[command(flatten)]
        common: SimulateArgs,
        #[arg(long, default_value_t = 0.5, value_parser = parse_positive)]
        threshold: f64,
    },
    /// Variance of informed and classical quantiles.
    Quantile {
        #[command(flatten)]
        common: SimulateArgs,
        #[arg(long, default_value_t = 0.5, value_parser = parse_alpha)]
        alpha: f64,
    },
    /// Frequency of all closed-form weights being positive.
    Positivity(SimulateArgs),
    /// Quantile estimates along the prefixes of one seeded sample path.
    MedianPath(MedianPathArgs),
}

#[derive(Debug, Clone, Args)]
pub struct MedianPathArgs {
    /// Path length.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(2..=u32::MAX as u64))]
    pub n: u64,

    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    #[arg(long, default_value = "std_normal", value_parser = parse_distribution)]
    pub dist: Distribution,

    #[arg(long, default_value = "x,x^2", value_parser = parse_function_list)]
    pub g: FunctionList,

    /// Known expectations; closed-form moments of --dist when absent.
    #[arg(long, value_parser = parse_real_list, allow_hyphen_values = true)]
    pub target: Option<RealList>,

    #[arg(long, default_value_t = 0.5, value_parser = parse_alpha)]
    pub alpha: f64,

    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
}

fn usage(kind: ErrorKind, msg: impl std::fmt::Display) -> clap::Error {
    clap::Error::raw(kind, format!("{msg}\n")).format(&mut CliConfig::command())
}

/// Removes `--config FILE` from `argv` and appends the file's entries as
/// flags, skipping keys already present on the command line.
fn merge_config_file(argv: Vec<String>) -> std::result::Result<Vec<String>, clap::Error> {
    let mut args = Vec::with_capacity(argv.len());
    let mut path = None;
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            match it.next() {
                Some(p) => path = Some(p),
                None => return Err(usage(ErrorKind::InvalidValue, "--config needs a file")),
            }
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            args.push(a);
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| usage(ErrorKind::Io, format!("cannot read config file '{path}': {e}")))?;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(usage(ErrorKind::InvalidValue, format!("{path}:{}: expected key = value", lineno + 1)));
        };
        let flag = format!("--{}", key.trim().replace('_', "-"));
        let given = args.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if given {
            continue;
        }
        match value.trim() {
            "true" => args.push(flag),
            "false" => {}
            v => args.push(format!("{flag}={v}")),
        }
    }
    Ok(args)
}

fn check_input(input: &InputArgs, need_sample: bool) -> std::result::Result<(), clap::Error> {
    if input.g.is_none() && input.constraints.is_none() {
        return Err(usage(ErrorKind::MissingRequiredArgument, "one of --g or --constraints is required"));
    }
    if input.g.is_some() && input.sample.is_none() {
        return Err(usage(ErrorKind::MissingRequiredArgument, "--g needs --sample"));
    }
    if need_sample && input.sample.is_none() {
        return Err(usage(ErrorKind::MissingRequiredArgument, "--sample is required"));
    }
    if input.target.is_none() && (input.dist.is_none() || input.g.is_none()) {
        return Err(usage(
            ErrorKind::MissingRequiredArgument,
            "--target is required unless --dist and --g are both given",
        ));
    }
    Ok(())
}

/// Parses and validates the command line (program name first).
pub fn parse_args<I, T>(argv: I) -> std::result::Result<CliConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let argv = merge_config_file(argv.into_iter().map(Into::into).collect())?;
    let config = CliConfig::try_parse_from(argv)?;
    match &config.command {
        Command::Feasibility(a) => check_input(&a.input, false)?,
        Command::Weights(a) => check_input(&a.input, false)?,
        Command::Ecdf(a) => {
            check_input(&a.input, true)?;
            if let (Some(lo), Some(hi)) = (a.t_min, a.t_max) {
                if lo > hi {
                    return Err(usage(ErrorKind::InvalidValue, "--t-min exceeds --t-max"));
                }
            }
        }
        Command::Quantile(a) => check_input(&a.input, true)?,
        Command::Simulate { experiment: Experiment::MedianPath(a) } => {
            if let Some(t) = &a.target {
                if t.0.len() != a.g.0.len() {
                    return Err(usage(ErrorKind::InvalidValue, "--target length differs from --g"));
                }
            }
        }
        Command::Simulate { .. } => {}
    }
    Ok(config)
}

/// Runs a validated configuration and returns the process exit code.
pub fn dispatch(config: CliConfig) -> i32 {
    match run(&config.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}: {}", e.kind(), e);
            1
        }
    }
}

fn run(command: &Command) -> Result<()> {
    match command {
        Command::Feasibility(a) => run_feasibility(a),
        Command::Weights(a) => run_weights(a),
        Command::Ecdf(a) => run_ecdf(a),
        Command::Quantile(a) => run_quantile(a),
        Command::Simulate { experiment } => run_simulation(experiment),
    }
}

fn analytic_target(dist: Distribution, g: &[FunctionSpec]) -> Result<Vec<f64>> {
    g.iter()
        .map(|gj| dist.mean_of(gj))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::InvalidInput("no closed-form expectation for this function".into()))
}

fn load_input(input: &InputArgs) -> Result<(Option<Sample>, ConstraintSet)> {
    let sample = input.sample.as_deref().map(io::read_sample).transpose()?;
    let target = match (&input.target, input.dist, &input.g) {
        (Some(t), _, _) => t.0.clone(),
        (None, Some(d), Some(g)) => analytic_target(d, &g.0)?,
        _ => return Err(Error::InvalidInput("no target".into())),
    };
    let cs = if let Some(path) = &input.constraints {
        let (_, cs) = io::read_constraint_csv(path, &target)?;
        if let Some(s) = &sample {
            if s.len() != cs.n() {
                return Err(Error::InvalidInput(format!(
                    "sample has {} values but the constraint file has {} rows",
                    s.len(),
                    cs.n()
                )));
            }
        }
        cs
    } else {
        let g = input.g.as_ref().ok_or_else(|| Error::InvalidInput("no constraint functions".into()))?;
        let s = sample.as_ref().ok_or_else(|| Error::InvalidInput("no sample".into()))?;
        if g.0.len() != target.len() {
            return Err(Error::InvalidInput(format!(
                "{} constraint functions but {} target values",
                g.0.len(),
                target.len()
            )));
        }
        ConstraintSet::evaluate(s, &g.0, &target)?
    };
    Ok((sample, cs))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn run_feasibility(a: &FeasibilityArgs) -> Result<()> {
    let (_, cs) = load_input(&a.input)?;
    let report = feasibility_report(&cs, a.rank_tol)?;
    println!("{}", serde_json::to_string(&report)?);
    let m = cs.m();
    let rank = augmented_rank(&cs.to_centered(), &(0..m).collect::<Vec<_>>(), a.rank_tol);
    if rank != m + 1 {
        return Err(Error::RankDeficient { rank, expected: m + 1 });
    }
    if !report.hull_member {
        return Err(Error::InfeasibleConstraints);
    }
    Ok(())
}

fn run_weights(a: &WeightsArgs) -> Result<()> {
    let (sample, cs) = load_input(&a.input)?;
    let config = a.solver.to_config();
    let methods: &[(&str, WeightMethod)] = match a.method {
        MethodChoice::El => &[("w_el", WeightMethod::EmpiricalLikelihood)],
        MethodChoice::Tilt => &[("w_tilt", WeightMethod::ExponentialTilt)],
        MethodChoice::Closed => &[("w_closed", WeightMethod::ClosedForm)],
        MethodChoice::All => &[
            ("w_el", WeightMethod::EmpiricalLikelihood),
            ("w_tilt", WeightMethod::ExponentialTilt),
            ("w_closed", WeightMethod::ClosedForm),
        ],
    };
    let mut computed = Vec::with_capacity(methods.len());
    for &(name, method) in methods {
        computed.push((name, compute_weights(&cs, method, &config)?.into_inner()));
    }
    let columns: Vec<(&str, &[f64])> = computed.iter().map(|(n, w)| (*n, w.as_slice())).collect();
    let mut out = output(a.out.as_deref())?;
    io::write_weights_csv(&mut out, sample.as_ref().map(Sample::values), &columns)?;
    out.flush()?;
    Ok(())
}

fn informed_measure(input: &InputArgs, method: SingleMethod, solver: &SolverArgs) -> Result<InformedMeasure> {
    let (sample, cs) = load_input(input)?;
    let sample = sample.ok_or_else(|| Error::InvalidInput("no sample".into()))?;
    let weights = compute_weights(&cs, method.method(), &solver.to_config())?;
    InformedMeasure::new(sample, weights)
}

fn run_ecdf(a: &EcdfArgs) -> Result<()> {
    let measure = informed_measure(&a.input, a.method, &a.solver)?;
    let values = measure.sample().values();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 1.0 };
    let t_min = a.t_min.unwrap_or(lo - pad);
    let t_max = a.t_max.unwrap_or(hi + pad).max(t_min);
    let grid = io::linear_grid(t_min, t_max, a.points as usize);
    let mut out = output(a.out.as_deref())?;
    io::write_ecdf_csv(&mut out, &grid, &measure, a.input.dist)?;
    out.flush()?;
    Ok(())
}

fn run_quantile(a: &QuantileArgs) -> Result<()> {
    let measure = informed_measure(&a.input, a.method, &a.solver)?;
    let q = measure.quantile(a.alpha)?;
    println!("{}", serde_json::to_string(&q)?);
    Ok(())
}

fn experiment_spec(a: &SimulateArgs) -> ExperimentSpec {
    ExperimentSpec {
        distribution: a.dist,
        g: a.g.0.clone(),
        test_function: a.f.clone(),
        n_grid: a.n.iter().map(|&n| n as usize).collect(),
        replicates: a.reps as usize,
        seed: a.seed,
        solver: a.solver.to_config(),
        symmetric: a.symmetric,
        moments: None,
    }
}

fn run_simulation(experiment: &Experiment) -> Result<()> {
    let (common, kind) = match experiment {
        Experiment::Lambda(c) => (c, ExperimentKind::Lambda),
        Experiment::Closeness(c) => (c, ExperimentKind::Closeness),
        Experiment::Variance(c) => (c, ExperimentKind::Variance),
        Experiment::Concentration { common, threshold } => {
            (common, ExperimentKind::Concentration { threshold: *threshold })
        }
        Experiment::Quantile { common, alpha } => (common, ExperimentKind::Quantile { alpha: *alpha }),
        Experiment::Positivity(c) => (c, ExperimentKind::Positivity),
        Experiment::MedianPath(a) => return run_median_path(a),
    };
    let spec = experiment_spec(common);
    spec.validate()?;
    let result = montecarlo::run_experiment(&spec, kind)?;
    let mut out = output(common.csv.as_deref())?;
    result.write_csv(&mut out)?;
    out.flush()?;
    if let Some(path) = &common.json {
        let mut w = BufWriter::new(File::create(path)?);
        result.write_json(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn run_median_path(a: &MedianPathArgs) -> Result<()> {
    let target = match &a.target {
        Some(t) => t.0.clone(),
        None => analytic_target(a.dist, &a.g.0)?,
    };
    let rows = montecarlo::median_path(a.dist, &a.g.0, &target, a.seed, a.n as usize, a.alpha)?;
    let mut out = output(a.csv.as_deref())?;
    io::write_median_path_csv(&mut out, &rows)?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> std::result::Result<CliConfig, clap::Error> {
        parse_args(std::iter::once("auxinfo").chain(args.iter().copied()))
    }

    #[test]
    fn weights_command() {
        let c = parse(&["weights", "--method", "all", "--sample", "s.txt", "--g", "x,x^2", "--target", "0,1"]).unwrap();
        let Command::Weights(w) = c.command else { panic!() };
        assert_eq!(w.method, MethodChoice::All);
        assert_eq!(w.input.target, Some(RealList(vec![0.0, 1.0])));
        assert_eq!(w.input.g.unwrap().0.len(), 2);
    }

    #[test]
    fn quantile_command() {
        let c = parse(&["quantile", "--alpha", "0.5", "--sample", "s.txt", "--g", "x", "--target", "0"]).unwrap();
        let Command::Quantile(q) = c.command else { panic!() };
        assert_eq!(q.alpha, 0.5);
        assert_eq!(q.method, SingleMethod::Closed);
    }

    #[test]
    fn simulate_command() {
        let c = parse(&["simulate", "quantile", "--n", "100,1000", "--reps", "10000", "--seed", "42"]).unwrap();
        let Command::Simulate { experiment: Experiment::Quantile { common, alpha } } = c.command else { panic!() };
        assert_eq!(common.n, vec![100, 1000]);
        assert_eq!(common.reps, 10_000);
        assert_eq!(common.seed, 42);
        assert_eq!(alpha, 0.5);
    }

    #[test]
    fn negative_targets_parse() {
        let c = parse(&["weights", "--method", "el", "--sample", "s", "--g", "x", "--target", "-1.5"]).unwrap();
        let Command::Weights(w) = c.command else { panic!() };
        assert_eq!(w.input.target, Some(RealList(vec![-1.5])));
    }

    #[test]
    fn usage_errors() {
        for args in [
            &["weights", "--method", "bogus", "--sample", "s", "--g", "x", "--target", "0"][..],
            &["weights", "--method", "all", "--sample", "s", "--g", "x", "--target", "0", "--frobnicate"],
            &["weights", "--method", "all", "--sample", "s", "--g", "x"],
            &["weights", "--method", "all", "--g", "x", "--target", "0"],
            &["weights", "--method", "all", "--sample", "s", "--g", "sin(x)", "--target", "0"],
            &["quantile", "--alpha", "1.5", "--sample", "s", "--g", "x", "--target", "0"],
            &["simulate", "lambda", "--reps", "10"],
            &["simulate", "lambda", "--n", "100", "--reps", "0"],
        ] {
            let e = parse(args).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{args:?}");
        }
    }

    #[test]
    fn config_file_supplies_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "# experiment\nn = 100,200\nreps = 7\nseed = 3\nsymmetric = true\n").unwrap();
        let c = parse(&["simulate", "variance", "--config", path.to_str().unwrap(), "--seed", "9"]).unwrap();
        let Command::Simulate { experiment: Experiment::Variance(a) } = c.command else { panic!() };
        assert_eq!(a.n, vec![100, 200]);
        assert_eq!(a.reps, 7);
        assert_eq!(a.seed, 9);
        assert!(a.symmetric);
    }

    #[test]
    fn config_file_unknown_key_is_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.conf");
        std::fs::write(&path, "colour = blue\n").unwrap();
        let e = parse(&["simulate", "variance", "--n", "10", "--config", path.to_str().unwrap()]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
