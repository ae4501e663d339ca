//! Seeded simulation harness for the large-sample behaviour of the informed
//! weights.
//!
//! Each experiment draws `replicates` samples for every `n` in the grid,
//! computes a few per-replicate statistics and summarises them per `n`.
//! Replicate `k` at size `n` always reads the Philox stream with counter
//! `(·, k, n, 0)`, so results do not depend on thread scheduling; replicates
//! run in parallel and are reduced in index order.

mod distribution;
mod experiments;
pub mod rng;

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::data::FunctionSpec;
use crate::error::{Error, Result};
use crate::solvers::SolverConfig;

pub use distribution::{Distribution, PopulationMoments, Term};
pub use experiments::{
    median_path, run_concentration, run_experiment, run_lambda_expansion, run_positivity, run_quantile_experiment,
    run_variance_reduction, run_weight_closeness, ExperimentKind, MedianPathRow,
};
use rng::Stream;

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSpec {
    pub distribution: Distribution,
    pub g: Vec<FunctionSpec>,
    pub test_function: FunctionSpec,
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
    pub solver: SolverConfig,
    /// Build each sample as `x_1, −x_1, x_2, −x_2, …` so that odd
    /// constraint functions have an exactly zero sample mean.
    pub symmetric: bool,
    /// Population moments; required when `g` or `test_function` is a
    /// callback, otherwise derived in closed form.
    pub moments: Option<PopulationMoments>,
}

impl ExperimentSpec {
    /// `g = (x, x²)` under the standard normal with `f = 1{x ≤ 0}`.
    pub fn standard_normal(n_grid: Vec<usize>, replicates: usize, seed: u64) -> Self {
        Self {
            distribution: Distribution::StdNormal,
            g: vec![FunctionSpec::Monomial(1), FunctionSpec::Monomial(2)],
            test_function: FunctionSpec::Indicator(0.0),
            n_grid,
            replicates,
            seed,
            solver: SolverConfig::default(),
            symmetric: false,
            moments: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidInput("replicates must be at least 1".into()));
        }
        if self.g.is_empty() {
            return Err(Error::InvalidInput("need at least one constraint function".into()));
        }
        if self.n_grid.is_empty() {
            return Err(Error::InvalidInput("n_grid is empty".into()));
        }
        let min_n = self.g.len() + 2;
        if let Some(&n) = self.n_grid.iter().find(|&&n| n < min_n) {
            return Err(Error::InvalidInput(format!("sample size {n} below m + 2 = {min_n}")));
        }
        if self.n_grid.iter().any(|&n| n > u32::MAX as usize) || self.replicates > u32::MAX as usize {
            return Err(Error::InvalidInput("sizes must fit in 32 bits".into()));
        }
        self.solver.validate()?;
        self.population_moments().map(|_| ())
    }

    pub fn population_moments(&self) -> Result<PopulationMoments> {
        if let Some(m) = &self.moments {
            return Ok(m.clone());
        }
        PopulationMoments::analytic(self.distribution, &self.g, &self.test_function).ok_or_else(|| {
            Error::InvalidInput("callback functions need explicit population moments".into())
        })
    }

    /// Sample for replicate `k` at size `n`.
    pub fn draw(&self, n: usize, replicate: usize) -> Vec<f64> {
        let mut stream = Stream::new(self.seed, replicate as u32, n as u32, 0);
        if self.symmetric {
            let mut out = Vec::with_capacity(n);
            while out.len() + 1 < n {
                let x = self.distribution.draw(&mut stream);
                out.push(x);
                out.push(-x);
            }
            if out.len() < n {
                out.push(0.0);
            }
            out
        } else {
            self.distribution.sample(&mut stream, n)
        }
    }
}

/// Distribution of one statistic across successful replicates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatSummary {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub median: f64,
    pub q05: f64,
    pub q25: f64,
    pub q75: f64,
    pub q95: f64,
}

impl StatSummary {
    pub fn from_values(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return Self {
                count,
                mean: f64::NAN,
                variance: f64::NAN,
                median: f64::NAN,
                q05: f64::NAN,
                q25: f64::NAN,
                q75: f64::NAN,
                q95: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let variance = if count > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let q = |p: f64| interpolated_quantile(&sorted, p);
        Self { count, mean, variance, median: q(0.5), q05: q(0.05), q25: q(0.25), q75: q(0.75), q95: q(0.95) }
    }
}

/// Linear interpolation between order statistics (Hyndman-Fan type 7).
fn interpolated_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Serialize)]
pub struct SizeSummary {
    pub n: usize,
    pub replicates: usize,
    pub failures: usize,
    pub failure_rate: f64,
    /// Failure counts by error kind.
    pub failure_kinds: BTreeMap<String, usize>,
    pub stats: BTreeMap<String, StatSummary>,
    /// Experiment-specific aggregates and analytic reference values.
    pub extras: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateRecord {
    pub n: usize,
    pub replicate: usize,
    pub outcome: std::result::Result<Vec<f64>, String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub experiment: String,
    pub spec: ExperimentSpec,
    pub parameters: BTreeMap<String, f64>,
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub stat_names: Vec<String>,
    pub per_n: Vec<SizeSummary>,
    #[serde(skip)]
    pub replicates: Vec<ReplicateRecord>,
    pub metadata: Metadata,
}

impl ExperimentResult {
    pub fn at(&self, n: usize) -> Option<&SizeSummary> {
        self.per_n.iter().find(|s| s.n == n)
    }

    pub fn stat(&self, n: usize, name: &str) -> Option<&StatSummary> {
        self.at(n)?.stats.get(name)
    }

    pub fn extra(&self, n: usize, name: &str) -> Option<f64> {
        self.at(n)?.extras.get(name).copied()
    }

    /// Successful replicate values of one statistic at size `n`, in replicate
    /// order.
    pub fn values(&self, n: usize, name: &str) -> Vec<f64> {
        let Some(col) = self.stat_names.iter().position(|s| s == name) else {
            return Vec::new();
        };
        self.replicates
            .iter()
            .filter(|r| r.n == n)
            .filter_map(|r| r.outcome.as_ref().ok().map(|v| v[col]))
            .collect()
    }

    /// One row per `(n, replicate)`: `n,replicate,status,<stats…>`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let mut header = vec!["n".to_string(), "replicate".into(), "status".into()];
        header.extend(self.stat_names.iter().cloned());
        w.write_record(&header)?;
        for rec in &self.replicates {
            let mut row = vec![rec.n.to_string(), rec.replicate.to_string()];
            match &rec.outcome {
                Ok(values) => {
                    row.push("ok".into());
                    row.extend(values.iter().map(|v| v.to_string()));
                }
                Err(kind) => {
                    row.push(kind.clone());
                    row.extend(self.stat_names.iter().map(|_| String::new()));
                }
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }
}

type Extras = BTreeMap<String, f64>;

/// Runs `replicate` for every `(n, k)` and summarises.
///
/// `aggregate` receives the successful replicate rows for one `n` and adds
/// experiment-specific entries to `extras`.
fn run_replicates<R, A>(
    spec: &ExperimentSpec,
    experiment: &str,
    parameters: BTreeMap<String, f64>,
    stat_names: &[&str],
    replicate: R,
    aggregate: A,
) -> Result<ExperimentResult>
where
    R: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
    A: Fn(usize, &[&Vec<f64>], &mut Extras) -> Result<()>,
{
    spec.validate()?;
    let start = std::time::Instant::now();
    let mut per_n = Vec::with_capacity(spec.n_grid.len());
    let mut records = Vec::with_capacity(spec.n_grid.len() * spec.replicates);

    for &n in &spec.n_grid {
        let outcomes: Vec<Result<Vec<f64>>> = (0..spec.replicates)
            .into_par_iter()
            .map(|k| replicate(&spec.draw(n, k)))
            .collect();

        let mut failure_kinds = BTreeMap::new();
        let mut ok_rows = Vec::new();
        for (k, outcome) in outcomes.into_iter().enumerate() {
            let outcome = match outcome {
                Ok(v) => Ok(v),
                Err(e) => {
                    *failure_kinds.entry(e.kind().to_string()).or_insert(0) += 1;
                    Err(e.kind().to_string())
                }
            };
            records.push(ReplicateRecord { n, replicate: k, outcome });
        }
        for rec in records.iter().filter(|r| r.n == n) {
            if let Ok(v) = &rec.outcome {
                ok_rows.push(v);
            }
        }

        let stats = stat_names
            .iter()
            .enumerate()
            .map(|(j, name)| {
                let column: Vec<f64> = ok_rows.iter().map(|r| r[j]).collect();
                (name.to_string(), StatSummary::from_values(&column))
            })
            .collect();
        let mut extras = Extras::new();
        aggregate(n, &ok_rows, &mut extras)?;
        let failures = spec.replicates - ok_rows.len();
        per_n.push(SizeSummary {
            n,
            replicates: spec.replicates,
            failures,
            failure_rate: failures as f64 / spec.replicates as f64,
            failure_kinds,
            stats,
            extras,
        });
    }

    Ok(ExperimentResult {
        stat_names: stat_names.iter().map(|s| s.to_string()).collect(),
        per_n,
        replicates: records,
        metadata: Metadata {
            experiment: experiment.to_string(),
            spec: spec.clone(),
            parameters,
            wall_time_secs: start.elapsed().as_secs_f64(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_of_small_sample() {
        let s = StatSummary::from_values(&[3.0, 1.0, 2.0, 4.0]);
        assert_eq!(s.count, 4);
        assert_eq!(s.mean, 2.5);
        assert!((s.variance - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.median, 2.5);
        assert_eq!(s.q25, 1.75);
    }

    #[test]
    fn spec_validation() {
        let mut spec = ExperimentSpec::standard_normal(vec![3], 10, 1);
        assert!(spec.validate().is_err());
        spec.n_grid = vec![4];
        assert!(spec.validate().is_ok());
        spec.replicates = 0;
        assert!(spec.validate().is_err());
        let mut cb = ExperimentSpec::standard_normal(vec![10], 10, 1);
        cb.test_function = FunctionSpec::callback("cos", f64::cos);
        assert!(cb.validate().is_err());
    }

    #[test]
    fn symmetric_samples_balance() {
        let mut spec = ExperimentSpec::standard_normal(vec![7], 1, 9);
        spec.symmetric = true;
        let x = spec.draw(7, 0);
        assert_eq!(x.len(), 7);
        assert_eq!(x.iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn draws_depend_only_on_coordinates() {
        let spec = ExperimentSpec::standard_normal(vec![50], 5, 1234);
        assert_eq!(spec.draw(50, 3), spec.draw(50, 3));
        assert_ne!(spec.draw(50, 3), spec.draw(50, 4));
    }
}
