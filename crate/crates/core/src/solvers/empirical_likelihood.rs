use crate::data::{ConstraintSet, SolveReport, WeightMethod, WeightVector};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm_inf, Cholesky};

use super::{prepare, sufficient_decrease, SolverConfig};

/// Fraction of the distance to the `1 + λᵀG_i ≥ 1/n` boundary a step may use.
const FRACTION_TO_BOUNDARY: f64 = 0.99;

struct Dual<'a> {
    cs: &'a ConstraintSet,
    floor: f64,
}

impl Dual<'_> {
    /// `1 + λᵀG_i` for every row.
    fn denominators(&self, lambda: &[f64]) -> Vec<f64> {
        self.cs.rows().map(|r| 1.0 + dot(lambda, r)).collect()
    }

    /// `−(1/n) Σ log(1 + λᵀG_i)`; infinite outside the domain.
    fn objective(&self, lambda: &[f64]) -> f64 {
        let n = self.cs.n() as f64;
        let mut acc = 0.0;
        for r in self.cs.rows() {
            let t = 1.0 + dot(lambda, r);
            if t <= 0.0 {
                return f64::INFINITY;
            }
            acc += t.ln();
        }
        -acc / n
    }

    fn gradient_and_hessian(&self, t: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let m = self.cs.m();
        let n = self.cs.n() as f64;
        let mut grad = vec![0.0; m];
        let mut hess = vec![0.0; m * m];
        for (r, &ti) in self.cs.rows().zip(t) {
            let inv = 1.0 / ti;
            let inv2 = inv * inv;
            for a in 0..m {
                grad[a] -= r[a] * inv;
                for b in 0..=a {
                    hess[a * m + b] += r[a] * r[b] * inv2;
                }
            }
        }
        for a in 0..m {
            grad[a] /= n;
            for b in 0..=a {
                hess[a * m + b] /= n;
                hess[b * m + a] = hess[a * m + b];
            }
        }
        (grad, hess)
    }

    fn weights(&self, t: &[f64]) -> Vec<f64> {
        let n = self.cs.n() as f64;
        let raw: Vec<f64> = t.iter().map(|ti| 1.0 / (n * ti)).collect();
        let sum: f64 = raw.iter().sum();
        raw.iter().map(|q| q / sum).collect()
    }

    /// Largest step along `dir` keeping every `1 + λᵀG_i ≥ 1/n`.
    fn max_step(&self, t: &[f64], dir: &[f64]) -> f64 {
        self.cs
            .rows()
            .zip(t)
            .filter_map(|(r, &ti)| {
                let rate = dot(dir, r);
                (rate < 0.0).then(|| ((ti - self.floor) / -rate).max(0.0))
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// `min_i (1 + λᵀG_i) − 1/n` for a centered set; nonnegative inside the
/// multiplier region.
pub fn el_region_margin(cs: &ConstraintSet, lambda: &[f64]) -> f64 {
    let floor = 1.0 / cs.n() as f64;
    cs.rows().map(|r| 1.0 + dot(lambda, r)).fold(f64::INFINITY, f64::min) - floor
}

/// Empirical-likelihood weights by damped Newton on the convex dual
/// `−(1/n) Σ log(1 + λᵀG_i)`, starting from `λ = 0` and never leaving
/// `{λ : 1 + λᵀG_i ≥ 1/n ∀i}`.
///
/// The gradient of the mean-scaled dual is minus the constraint residual of
/// the implied weights, so `grad_tol` bounds both.
pub fn solve_empirical_likelihood(cs: &ConstraintSet, config: &SolverConfig) -> Result<(WeightVector, SolveReport)> {
    let centered = prepare(cs, config)?;
    let m = centered.m();
    let floor = 1.0 / centered.n() as f64;
    let dual = Dual { cs: &centered, floor };

    let mut lambda = vec![0.0; m];
    let mut trace = config.record_trace.then(|| vec![lambda.clone()]);
    let mut iterations = 0;
    let mut stalled = false;

    loop {
        let t = dual.denominators(&lambda);
        let (grad, hess) = dual.gradient_and_hessian(&t);
        let grad_norm = norm_inf(&grad);
        let weights = dual.weights(&t);
        let residual = centered.residual(&weights);

        let converged = grad_norm <= config.grad_tol && residual <= config.residual_tol;
        if converged || stalled || iterations >= config.max_iter {
            let min_t = t.iter().copied().fold(f64::INFINITY, f64::min);
            let report = SolveReport {
                lambda,
                iterations,
                grad_norm,
                residual,
                converged,
                boundary: min_t <= floor + 1e-9,
                trace,
            };
            if !converged {
                return Err(Error::NoConvergence { report: Box::new(report) });
            }
            let w = WeightVector::new(weights, WeightMethod::EmpiricalLikelihood)?;
            return Ok((w, report));
        }

        let chol = match Cholesky::new(&hess, m) {
            Ok(c) => c,
            Err(_) => {
                stalled = true;
                continue;
            }
        };
        let dir: Vec<f64> = chol.solve(&grad).iter().map(|v| -v).collect();
        let slope = dot(&grad, &dir);
        let mut step = (FRACTION_TO_BOUNDARY * dual.max_step(&t, &dir)).min(1.0);
        let current = dual.objective(&lambda);
        loop {
            let trial: Vec<f64> = lambda.iter().zip(&dir).map(|(l, d)| l + step * d).collect();
            if sufficient_decrease(dual.objective(&trial), current, step, slope) {
                lambda = trial;
                break;
            }
            step *= config.backtrack_factor;
            if step < config.min_step {
                stalled = true;
                break;
            }
        }
        if !stalled {
            iterations += 1;
            if let Some(tr) = trace.as_mut() {
                tr.push(lambda.clone());
            }
        }
    }
}
