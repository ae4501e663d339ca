//! Weighted empirical measures that honour known expectations.
//!
//! Given an i.i.d. sample `X_1..X_n` and functions `g = (g_1..g_m)` whose
//! population means `Pg` are known, the crate reweights the empirical measure
//! so that `Σ w_i g(X_i) = Pg` holds exactly. Three constructions are
//! provided: the empirical-likelihood projection, the exponential-tilting
//! projection and closed-form informed weights. On top of the weights sit
//! expectation, ECDF and quantile evaluation, limit-variance formulas and a
//! seeded Monte Carlo harness for the large-sample behaviour.
//!
//! ```
//! use auxinfo::{ConstraintSet, FunctionSpec, Sample, informed_weights};
//!
//! let sample = Sample::new(vec![-1.0, 0.0, 2.0]).unwrap();
//! let g = FunctionSpec::parse_list("x").unwrap();
//! let cs = ConstraintSet::evaluate(&sample, &g, &[0.0]).unwrap();
//! let p = informed_weights(&cs).unwrap();
//! assert!((p.weights()[0] - 3.0 / 7.0).abs() < 1e-12);
//! ```

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod data;
pub mod error;
pub mod feasibility;
pub mod io;
pub mod linalg;
pub mod measure;
pub mod montecarlo;
pub mod solvers;

pub use data::{ConstraintSet, FunctionSpec, Sample, SolveReport, WeightMethod, WeightVector};
pub use error::{Error, Result};
pub use feasibility::{check_hull_membership, check_rank_condition, deduplicate_constraints, feasibility_report, FeasibilityReport};
pub use measure::{InformedMeasure, QuantileResult};
pub use solvers::{
    compute_weights, informed_weights, solve_empirical_likelihood, solve_exponential_tilt, SolverConfig,
};
