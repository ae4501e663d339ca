use std::collections::BTreeMap;

use serde::Serialize;

use super::{run_replicates, Distribution, ExperimentResult, ExperimentSpec, Extras, PopulationMoments};
use crate::data::{ConstraintSet, FunctionSpec, Sample, WeightVector};
use crate::error::{Error, Result};
use crate::linalg::{norm2, spd_solve};
use crate::measure::{limit_variance, quantile_limit_variance, InformedMeasure};
use crate::montecarlo::rng::Stream;
use crate::solvers::{informed_weights_with_tol, solve_empirical_likelihood, solve_exponential_tilt};

/// Selector for [`run_experiment`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ExperimentKind {
    Lambda,
    Closeness,
    Variance,
    Concentration { threshold: f64 },
    Quantile { alpha: f64 },
    Positivity,
}

pub fn run_experiment(spec: &ExperimentSpec, kind: ExperimentKind) -> Result<ExperimentResult> {
    match kind {
        ExperimentKind::Lambda => run_lambda_expansion(spec),
        ExperimentKind::Closeness => run_weight_closeness(spec),
        ExperimentKind::Variance => run_variance_reduction(spec),
        ExperimentKind::Concentration { threshold } => run_concentration(spec, threshold),
        ExperimentKind::Quantile { alpha } => run_quantile_experiment(spec, alpha),
        ExperimentKind::Positivity => run_positivity(spec),
    }
}

fn centered_constraints(spec: &ExperimentSpec, target: &[f64], x: &[f64]) -> Result<ConstraintSet> {
    let sample = Sample::new(x.to_vec())?;
    ConstraintSet::evaluate(&sample, &spec.g, target)?.center()
}

fn closed_form(spec: &ExperimentSpec, cs: &ConstraintSet) -> Result<WeightVector> {
    informed_weights_with_tol(cs, spec.solver.rank_rel_tol)
}

fn inverse(sigma: &[f64], m: usize) -> Result<Vec<f64>> {
    let mut inv = vec![0.0; m * m];
    for j in 0..m {
        let mut e = vec![0.0; m];
        e[j] = 1.0;
        let col = spd_solve(sigma, &e)?;
        for i in 0..m {
            inv[i * m + j] = col[i];
        }
    }
    Ok(inv)
}

/// Sample covariance (unbiased) of the given columns across rows.
fn column_covariance(rows: &[&Vec<f64>], cols: &[usize]) -> Vec<f64> {
    let k = cols.len();
    let count = rows.len() as f64;
    let means: Vec<f64> = cols.iter().map(|&c| rows.iter().map(|r| r[c]).sum::<f64>() / count).collect();
    let mut cov = vec![0.0; k * k];
    for r in rows {
        for a in 0..k {
            for b in 0..k {
                cov[a * k + b] += (r[cols[a]] - means[a]) * (r[cols[b]] - means[b]);
            }
        }
    }
    cov.iter_mut().for_each(|v| *v /= count - 1.0);
    cov
}

fn frequency(rows: &[&Vec<f64>], pred: impl Fn(&Vec<f64>) -> bool) -> f64 {
    if rows.is_empty() {
        return f64::NAN;
    }
    rows.iter().filter(|r| pred(r)).count() as f64 / rows.len() as f64
}

/// `√n (λ̂_EL − S_n⁻¹ P_n g)` and `√n (λ̂_tilt + S_n⁻¹ P_n g)`, with
/// `S_n = P_n g gᵀ`, plus the scaled multipliers themselves.
///
/// Statistics: `el_dev`, `tilt_dev`, `sum_dev = √n ‖λ̂_EL + λ̂_tilt‖`, then
/// `el_sqrt_n_lambda_j` and `tilt_sqrt_n_lambda_j` for each constraint.
/// Extras hold the empirical covariance of `√n λ̂` (`el_cov_a_b`,
/// `tilt_cov_a_b`) and its limit `Σ⁻¹` (`target_cov_a_b`).
pub fn run_lambda_expansion(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let moments = spec.population_moments()?;
    let m = spec.g.len();
    let sigma_inv = inverse(&moments.sigma, m)?;

    let mut names: Vec<String> = vec!["el_dev".into(), "tilt_dev".into(), "sum_dev".into()];
    names.extend((0..m).map(|j| format!("el_sqrt_n_lambda_{j}")));
    names.extend((0..m).map(|j| format!("tilt_sqrt_n_lambda_{j}")));
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();

    run_replicates(
        spec,
        "lambda",
        BTreeMap::new(),
        &name_refs,
        |x| {
            let cs = centered_constraints(spec, &moments.target, x)?;
            let n = cs.n() as f64;
            let (_, el) = solve_empirical_likelihood(&cs, &spec.solver)?;
            let (_, tilt) = solve_exponential_tilt(&cs, &spec.solver)?;
            let mut second = vec![0.0; m * m];
            for r in cs.rows() {
                for a in 0..m {
                    for b in 0..m {
                        second[a * m + b] += r[a] * r[b];
                    }
                }
            }
            second.iter_mut().for_each(|v| *v /= n);
            let lead = spd_solve(&second, &cs.column_means())?;
            let rn = n.sqrt();
            let el_dev: Vec<f64> = el.lambda.iter().zip(&lead).map(|(l, s)| rn * (l - s)).collect();
            let tilt_dev: Vec<f64> = tilt.lambda.iter().zip(&lead).map(|(l, s)| rn * (l + s)).collect();
            let sum: Vec<f64> = el.lambda.iter().zip(&tilt.lambda).map(|(a, b)| rn * (a + b)).collect();
            let mut out = vec![norm2(&el_dev), norm2(&tilt_dev), norm2(&sum)];
            out.extend(el.lambda.iter().map(|l| rn * l));
            out.extend(tilt.lambda.iter().map(|l| rn * l));
            Ok(out)
        },
        |_, rows, extras| {
            for a in 0..m {
                for b in 0..m {
                    extras.insert(format!("target_cov_{a}_{b}"), sigma_inv[a * m + b]);
                }
            }
            if rows.len() > 1 {
                let el_cov = column_covariance(rows, &(3..3 + m).collect::<Vec<_>>());
                let tilt_cov = column_covariance(rows, &(3 + m..3 + 2 * m).collect::<Vec<_>>());
                for a in 0..m {
                    for b in 0..m {
                        extras.insert(format!("el_cov_{a}_{b}"), el_cov[a * m + b]);
                        extras.insert(format!("tilt_cov_{a}_{b}"), tilt_cov[a * m + b]);
                    }
                }
            }
            Ok(())
        },
    )
}

/// `n · max_i |q_i − p_i|` for the empirical-likelihood (`el_gap`) and
/// tilting (`tilt_gap`) weights against the closed-form weights.
pub fn run_weight_closeness(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let moments = spec.population_moments()?;
    run_replicates(
        spec,
        "closeness",
        BTreeMap::new(),
        &["el_gap", "tilt_gap"],
        |x| {
            let cs = centered_constraints(spec, &moments.target, x)?;
            let n = cs.n() as f64;
            let p = closed_form(spec, &cs)?;
            let (q1, _) = solve_empirical_likelihood(&cs, &spec.solver)?;
            let (q2, _) = solve_exponential_tilt(&cs, &spec.solver)?;
            let gap = |q: &WeightVector| {
                q.weights().iter().zip(p.weights()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) * n
            };
            Ok(vec![gap(&q1), gap(&q2)])
        },
        |_, _, _| Ok(()),
    )
}

fn scaled_deviations(spec: &ExperimentSpec, moments: &PopulationMoments, x: &[f64]) -> Result<Vec<f64>> {
    let cs = centered_constraints(spec, &moments.target, x)?;
    let n = x.len() as f64;
    let p = closed_form(spec, &cs)?;
    let sample = Sample::new(x.to_vec())?;
    let informed = InformedMeasure::new(sample.clone(), p)?.expectation(&spec.test_function)?;
    let classical = InformedMeasure::uniform(sample).expectation(&spec.test_function)?;
    Ok(vec![n.sqrt() * (informed - moments.f_mean), n.sqrt() * (classical - moments.f_mean)])
}

fn limit_variances(moments: &PopulationMoments, extras: &mut Extras) -> Result<()> {
    extras.insert("limit_variance_informed".into(), limit_variance(&moments.cov_gf, moments.f_variance, &moments.sigma)?);
    extras.insert("limit_variance_classical".into(), moments.f_variance);
    Ok(())
}

/// `√n (P_n^I f − P f)` (`informed`) and `√n (P_n f − P f)` (`classical`).
/// Extras carry the two limit variances.
pub fn run_variance_reduction(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let moments = spec.population_moments()?;
    run_replicates(
        spec,
        "variance",
        BTreeMap::new(),
        &["informed", "classical"],
        |x| scaled_deviations(spec, &moments, x),
        |_, _, extras| limit_variances(&moments, extras),
    )
}

/// Tail frequencies `P(|√n (P_n^I − P) f| > threshold)` and the classical
/// counterpart. Extras: `tail_informed`, `tail_classical`, `gap` and the
/// Gaussian-limit tails `normal_tail_informed`, `normal_tail_classical`.
pub fn run_concentration(spec: &ExperimentSpec, threshold: f64) -> Result<ExperimentResult> {
    if !(threshold >= 0.0) {
        return Err(Error::InvalidInput("threshold must be nonnegative".into()));
    }
    let moments = spec.population_moments()?;
    let params = BTreeMap::from([("threshold".to_string(), threshold)]);
    run_replicates(
        spec,
        "concentration",
        params,
        &["informed", "classical"],
        |x| scaled_deviations(spec, &moments, x),
        |_, rows, extras| {
            limit_variances(&moments, extras)?;
            let ti = frequency(rows, |r| r[0].abs() > threshold);
            let tc = frequency(rows, |r| r[1].abs() > threshold);
            extras.insert("tail_informed".into(), ti);
            extras.insert("tail_classical".into(), tc);
            extras.insert("gap".into(), tc - ti);
            let gauss_tail = |var: f64| {
                if var > 0.0 {
                    2.0 * (1.0 - Distribution::StdNormal.cdf(threshold / var.sqrt()))
                } else {
                    0.0
                }
            };
            extras.insert("normal_tail_informed".into(), gauss_tail(extras["limit_variance_informed"]));
            extras.insert("normal_tail_classical".into(), gauss_tail(moments.f_variance));
            Ok(())
        },
    )
}

/// Population pieces of the quantile limit law: `(q_α, f(q_α), Ĩ)`.
fn quantile_limits(spec: &ExperimentSpec, moments: &PopulationMoments, alpha: f64) -> Result<(f64, f64, f64)> {
    let dist = spec.distribution;
    let q = dist.quantile(alpha);
    let ind = FunctionSpec::Indicator(q);
    let cov = spec
        .g
        .iter()
        .map(|gj| dist.covariance(gj, &ind))
        .collect::<Option<Vec<f64>>>()
        .ok_or_else(|| Error::InvalidInput("quantile limits need closed-form constraint functions".into()))?;
    let bernoulli = alpha * (1.0 - alpha);
    let i_tilde = bernoulli - limit_variance(&cov, bernoulli, &moments.sigma)?;
    Ok((q, dist.pdf(q), i_tilde))
}

/// `√n (q^I_{n,α} − q_α)` (`informed`, closed-form weights) and
/// `√n (q_{n,α} − q_α)` (`classical`), plus `monotone` (1 when every weight
/// is nonnegative). Extras: `limit_variance_informed`,
/// `limit_variance_classical`, `i_tilde`, `monotone_fraction`.
pub fn run_quantile_experiment(spec: &ExperimentSpec, alpha: f64) -> Result<ExperimentResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let moments = spec.population_moments()?;
    let (q_alpha, density, i_tilde) = quantile_limits(spec, &moments, alpha)?;
    let params = BTreeMap::from([("alpha".to_string(), alpha)]);
    run_replicates(
        spec,
        "quantile",
        params,
        &["informed", "classical", "monotone"],
        |x| {
            let cs = centered_constraints(spec, &moments.target, x)?;
            let rn = (x.len() as f64).sqrt();
            let p = closed_form(spec, &cs)?;
            let sample = Sample::new(x.to_vec())?;
            let qi = InformedMeasure::new(sample.clone(), p)?.quantile(alpha)?;
            let qc = InformedMeasure::uniform(sample).quantile(alpha)?;
            Ok(vec![
                rn * (qi.value - q_alpha),
                rn * (qc.value - q_alpha),
                if qi.monotone_cdf { 1.0 } else { 0.0 },
            ])
        },
        |_, rows, extras| {
            extras.insert("limit_variance_informed".into(), quantile_limit_variance(alpha, density, i_tilde)?);
            extras.insert("limit_variance_classical".into(), quantile_limit_variance(alpha, density, 0.0)?);
            extras.insert("i_tilde".into(), i_tilde);
            extras.insert("monotone_fraction".into(), frequency(rows, |r| r[2] == 1.0));
            Ok(())
        },
    )
}

/// `n · min_i p_i` and whether the closed-form weights are all positive.
/// Extras: `positive_frequency` and its binomial `standard_error`.
pub fn run_positivity(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let moments = spec.population_moments()?;
    run_replicates(
        spec,
        "positivity",
        BTreeMap::new(),
        &["n_min_weight", "positive"],
        |x| {
            let cs = centered_constraints(spec, &moments.target, x)?;
            let p = closed_form(spec, &cs)?;
            let min = p.min();
            Ok(vec![min * x.len() as f64, if min > 0.0 { 1.0 } else { 0.0 }])
        },
        |_, rows, extras| {
            let f = frequency(rows, |r| r[1] == 1.0);
            extras.insert("positive_frequency".into(), f);
            extras.insert("standard_error".into(), (f * (1.0 - f) / rows.len() as f64).sqrt());
            Ok(())
        },
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MedianPathRow {
    pub n: usize,
    pub classical: f64,
    /// `None` while the empirical variance of `g` is still singular.
    pub informed: Option<f64>,
}

/// Sequential `alpha`-quantile estimates on the prefixes `X_1..X_n` of a
/// single seeded path, for `n = 2..=n_max`.
pub fn median_path(
    distribution: Distribution,
    g: &[FunctionSpec],
    target: &[f64],
    seed: u64,
    n_max: usize,
    alpha: f64,
) -> Result<Vec<MedianPathRow>> {
    if n_max < 2 || n_max > u32::MAX as usize {
        return Err(Error::InvalidInput("path length must be at least 2".into()));
    }
    let mut stream = Stream::new(seed, 0, n_max as u32, 1);
    let path = distribution.sample(&mut stream, n_max);
    let mut rows = Vec::with_capacity(n_max - 1);
    for n in 2..=n_max {
        let sample = Sample::new(path[..n].to_vec())?;
        let classical = InformedMeasure::uniform(sample.clone()).quantile(alpha)?.value;
        let informed = ConstraintSet::evaluate(&sample, g, target)
            .and_then(|cs| crate::solvers::informed_weights(&cs))
            .and_then(|p| InformedMeasure::new(sample, p))
            .and_then(|im| im.quantile(alpha))
            .map(|q| q.value)
            .ok();
        rows.push(MedianPathRow { n, classical, informed });
    }
    Ok(rows)
}
