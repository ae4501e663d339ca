use crate::data::{ConstraintSet, WeightMethod, WeightVector};
use crate::error::{Error, Result};
use crate::feasibility::DEFAULT_RANK_REL_TOL;
use crate::linalg::{dot, spd_solve, sym_eigen_range};

/// Column means and empirical (1/n) covariance of a constraint matrix.
#[derive(Debug, Clone)]
pub struct EmpiricalMoments {
    pub mean: Vec<f64>,
    /// Row-major `m × m`.
    pub covariance: Vec<f64>,
}

pub fn empirical_moments(cs: &ConstraintSet) -> EmpiricalMoments {
    let m = cs.m();
    let mean = cs.column_means();
    let mut cov = vec![0.0; m * m];
    for r in cs.rows() {
        for a in 0..m {
            let da = r[a] - mean[a];
            for b in 0..=a {
                cov[a * m + b] += da * (r[b] - mean[b]);
            }
        }
    }
    let n = cs.n() as f64;
    for a in 0..m {
        for b in 0..=a {
            cov[a * m + b] /= n;
            cov[b * m + a] = cov[a * m + b];
        }
    }
    EmpiricalMoments { mean, covariance: cov }
}

/// Closed-form informed weights with the default singularity threshold.
pub fn informed_weights(cs: &ConstraintSet) -> Result<WeightVector> {
    informed_weights_with_tol(cs, DEFAULT_RANK_REL_TOL)
}

/// `p_i = (1 − (G_i − Ḡ)ᵀ Σ_n⁻¹ Ḡ) / n` on the centered matrix, with `Σ_n`
/// the empirical variance. `Σ p_i = 1` and `Σ p_i G_i = 0` hold exactly in
/// exact arithmetic; the weights may be negative.
pub fn informed_weights_with_tol(cs: &ConstraintSet, rel_tol: f64) -> Result<WeightVector> {
    let centered = cs.to_centered();
    let m = centered.m();
    let moments = empirical_moments(&centered);
    let (min_eig, max_eig) = sym_eigen_range(&moments.covariance, m);
    if !(max_eig > 0.0) || min_eig < rel_tol * max_eig {
        return Err(Error::SingularVariance { min_eig, max_eig });
    }
    let shift = spd_solve(&moments.covariance, &moments.mean)?;
    let n = centered.n() as f64;
    let weights = centered
        .rows()
        .map(|r| {
            let centered_row: Vec<f64> = r.iter().zip(&moments.mean).map(|(v, mu)| v - mu).collect();
            (1.0 - dot(&centered_row, &shift)) / n
        })
        .collect();
    WeightVector::new(weights, WeightMethod::ClosedForm)
}
