//! The three informed weight constructions.
//!
//! * [`solve_empirical_likelihood`]: `q_i = 1 / (n (1 + λᵀG_i))`, the
//!   projection minimising `KL(P_n ‖ Q)`.
//! * [`solve_exponential_tilt`]: `q_i ∝ exp(λᵀG_i)`, the projection
//!   minimising `KL(Q ‖ P_n)`.
//! * [`informed_weights`]: the closed-form first-order approximation shared
//!   by both, `p_i = (1 − (G_i − Ḡ)ᵀ Σ_n⁻¹ Ḡ) / n`.
//!
//! All three accept an uncentered [`ConstraintSet`] and work on its centered
//! form, so the returned weights reproduce the original target.

mod closed_form;
mod empirical_likelihood;
mod exponential_tilt;

use serde::{Deserialize, Serialize};

use crate::data::{ConstraintSet, WeightMethod, WeightVector, RESIDUAL_TOL};
use crate::error::{Error, Result};
use crate::feasibility::{augmented_rank, check_hull_membership, DEFAULT_RANK_REL_TOL};

pub use closed_form::{empirical_moments, informed_weights, informed_weights_with_tol, EmpiricalMoments};
pub use empirical_likelihood::{el_region_margin, solve_empirical_likelihood};
pub use exponential_tilt::{solve_exponential_tilt, tilt_dual, TiltDual};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grad_tol: f64,
    pub max_iter: usize,
    pub backtrack_factor: f64,
    pub min_step: f64,
    pub rank_rel_tol: f64,
    pub residual_tol: f64,
    /// Run the rank and hull checks before solving.
    pub check_preconditions: bool,
    /// Keep every accepted iterate in [`SolveReport::trace`](crate::data::SolveReport).
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grad_tol: 1e-10,
            max_iter: 100,
            backtrack_factor: 0.5,
            min_step: 1e-14,
            rank_rel_tol: DEFAULT_RANK_REL_TOL,
            residual_tol: RESIDUAL_TOL,
            check_preconditions: true,
            record_trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) {
            return Err(Error::InvalidInput("grad_tol must be positive".into()));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(Error::InvalidInput("backtrack_factor must lie in (0, 1)".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidInput("max_iter must be at least 1".into()));
        }
        if !(self.min_step > 0.0) || !(self.rank_rel_tol > 0.0) || !(self.residual_tol > 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Centers `cs` and, when configured, verifies the rank and hull conditions.
fn prepare(cs: &ConstraintSet, config: &SolverConfig) -> Result<ConstraintSet> {
    config.validate()?;
    let centered = cs.to_centered();
    if config.check_preconditions {
        let m = centered.m();
        let rank = augmented_rank(&centered, &(0..m).collect::<Vec<_>>(), config.rank_rel_tol);
        if rank != m + 1 {
            return Err(Error::RankDeficient { rank, expected: m + 1 });
        }
        if !check_hull_membership(&centered)? {
            return Err(Error::InfeasibleConstraints);
        }
    }
    Ok(centered)
}

/// Weights of the requested kind, discarding the solver report.
pub fn compute_weights(cs: &ConstraintSet, method: WeightMethod, config: &SolverConfig) -> Result<WeightVector> {
    match method {
        WeightMethod::Uniform => Ok(WeightVector::uniform(cs.n())),
        WeightMethod::EmpiricalLikelihood => solve_empirical_likelihood(cs, config).map(|r| r.0),
        WeightMethod::ExponentialTilt => solve_exponential_tilt(cs, config).map(|r| r.0),
        WeightMethod::ClosedForm => informed_weights_with_tol(cs, config.rank_rel_tol),
    }
}

/// Armijo test with slack for round-off in the objective near the optimum.
fn sufficient_decrease(new: f64, old: f64, step: f64, slope: f64) -> bool {
    new <= old + 1e-4 * step * slope + 1e-13 * (1.0 + old.abs())
}
