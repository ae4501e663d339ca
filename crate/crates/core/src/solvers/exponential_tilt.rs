use crate::data::{ConstraintSet, SolveReport, WeightMethod, WeightVector};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm_inf, Cholesky};

use super::{prepare, sufficient_decrease, SolverConfig};

/// Value, gradient and Hessian of `F(λ) = −log Σ_i exp(λᵀG_i)`, together
/// with the tilted weights `q_i(λ)`.
#[derive(Debug, Clone)]
pub struct TiltDual {
    pub value: f64,
    pub gradient: Vec<f64>,
    /// Row-major `m × m`; equals `−Var_{Q(λ)}(g)`.
    pub hessian: Vec<f64>,
    pub weights: Vec<f64>,
}

fn log_partition(cs: &ConstraintSet, lambda: &[f64]) -> (f64, Vec<f64>) {
    let z: Vec<f64> = cs.rows().map(|r| dot(lambda, r)).collect();
    let zmax = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|zi| (zi - zmax).exp()).collect();
    let s: f64 = e.iter().sum();
    let q = e.iter().map(|ei| ei / s).collect();
    (zmax + s.ln(), q)
}

/// Evaluates the tilting dual at `lambda` on a centered set.
pub fn tilt_dual(cs: &ConstraintSet, lambda: &[f64]) -> TiltDual {
    let m = cs.m();
    let (lse, weights) = log_partition(cs, lambda);
    let mut mean = vec![0.0; m];
    for (r, q) in cs.rows().zip(&weights) {
        for (a, v) in mean.iter_mut().zip(r) {
            *a += q * v;
        }
    }
    let mut hessian = vec![0.0; m * m];
    for (r, q) in cs.rows().zip(&weights) {
        for a in 0..m {
            let da = r[a] - mean[a];
            for b in 0..=a {
                hessian[a * m + b] -= q * da * (r[b] - mean[b]);
            }
        }
    }
    for a in 0..m {
        for b in 0..a {
            hessian[b * m + a] = hessian[a * m + b];
        }
    }
    TiltDual { value: -lse, gradient: mean.iter().map(|v| -v).collect(), hessian, weights }
}

/// Exponential-tilting weights by Newton ascent on the strictly concave dual
/// `F(λ) = −log Σ exp(λᵀG_i)`, with backtracking and max-shifted
/// exponentials.
pub fn solve_exponential_tilt(cs: &ConstraintSet, config: &SolverConfig) -> Result<(WeightVector, SolveReport)> {
    let centered = prepare(cs, config)?;
    let m = centered.m();

    let mut lambda = vec![0.0; m];
    let mut trace = config.record_trace.then(|| vec![lambda.clone()]);
    let mut iterations = 0;
    let mut stalled = false;

    loop {
        let dual = tilt_dual(&centered, &lambda);
        let grad_norm = norm_inf(&dual.gradient);
        let residual = centered.residual(&dual.weights);

        let converged = grad_norm <= config.grad_tol && residual <= config.residual_tol;
        if converged || stalled || iterations >= config.max_iter {
            let report = SolveReport {
                lambda,
                iterations,
                grad_norm,
                residual,
                converged,
                boundary: false,
                trace,
            };
            if !converged {
                return Err(Error::NoConvergence { report: Box::new(report) });
            }
            let w = WeightVector::new(dual.weights, WeightMethod::ExponentialTilt)?;
            return Ok((w, report));
        }

        // Minimise −F: gradient −∇F, Hessian Var_Q(g). Fall back to steepest
        // descent if the tilted variance is numerically singular.
        let neg_grad: Vec<f64> = dual.gradient.iter().map(|v| -v).collect();
        let var: Vec<f64> = dual.hessian.iter().map(|v| -v).collect();
        let dir: Vec<f64> = match Cholesky::new(&var, m) {
            Ok(chol) => chol.solve(&neg_grad).iter().map(|v| -v).collect(),
            Err(_) => dual.gradient.clone(),
        };
        let slope = dot(&neg_grad, &dir);
        let current = -dual.value;
        let mut step = 1.0;
        loop {
            let trial: Vec<f64> = lambda.iter().zip(&dir).map(|(l, d)| l + step * d).collect();
            let value = log_partition(&centered, &trial).0;
            if sufficient_decrease(value, current, step, slope) {
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
