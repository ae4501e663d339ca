//! Functionals of a weighted empirical measure: expectations, the weighted
//! ECDF and its generalized inverse, and the asymptotic variance formulas
//! for informed estimators.

use serde::Serialize;

use crate::data::{ConstraintSet, FunctionSpec, Sample, WeightVector, WEIGHT_SUM_TOL};
use crate::error::{Error, Result};
use crate::linalg::spd_solve;
use crate::solvers::empirical_moments;

/// Slack used when comparing cumulative weights to `alpha`, so that sums of
/// `1/n` that land on `alpha` in exact arithmetic still count as reaching it.
pub const CROSSING_EPS: f64 = 1e-12;

/// A sample paired index-by-index with weights.
#[derive(Debug, Clone, Serialize)]
pub struct InformedMeasure {
    sample: Sample,
    weights: WeightVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantileResult {
    pub alpha: f64,
    pub value: f64,
    /// Position, in the ascending sort of the sample, of the first
    /// observation equal to `value`.
    pub crossing_index: usize,
    /// All weights nonnegative, so the ECDF is nondecreasing.
    pub monotone_cdf: bool,
}

impl InformedMeasure {
    pub fn new(sample: Sample, weights: WeightVector) -> Result<Self> {
        if sample.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "sample has {} values but {} weights",
                sample.len(),
                weights.len()
            )));
        }
        let sum: f64 = weights.weights().iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidInput(format!("weights sum to {sum}")));
        }
        Ok(Self { sample, weights })
    }

    pub fn uniform(sample: Sample) -> Self {
        let weights = WeightVector::uniform(sample.len());
        Self { sample, weights }
    }

    pub fn sample(&self) -> &Sample {
        &self.sample
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.sample.values().iter().copied().zip(self.weights.weights().iter().copied())
    }

    /// `Σ_i w_i f(X_i)`.
    pub fn expectation(&self, f: &FunctionSpec) -> Result<f64> {
        let mut acc = 0.0;
        for (i, (x, w)) in self.pairs().enumerate() {
            let v = f.eval(x);
            if !v.is_finite() {
                return Err(Error::Evaluation { row: i, col: 0 });
            }
            acc += w * v;
        }
        Ok(acc)
    }

    /// `Σ_i w_i 1{X_i ≤ t}`.
    pub fn ecdf(&self, t: f64) -> f64 {
        self.pairs().filter(|&(x, _)| x <= t).map(|(_, w)| w).sum()
    }

    /// `inf { t : F(t) ≥ alpha }` over the weighted ECDF.
    ///
    /// Tied observations are merged before the scan. With negative weights
    /// the cumulative sum may be non-monotone; the first crossing is taken
    /// and `monotone_cdf` is false.
    pub fn quantile(&self, alpha: f64) -> Result<QuantileResult> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        let values = self.sample.values();
        let weights = self.weights.weights();
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

        let mut cum = 0.0;
        let mut pos = 0;
        while pos < order.len() {
            let x = values[order[pos]];
            let start = pos;
            while pos < order.len() && values[order[pos]] == x {
                cum += weights[order[pos]];
                pos += 1;
            }
            if cum >= alpha - CROSSING_EPS {
                return Ok(QuantileResult {
                    alpha,
                    value: x,
                    crossing_index: start,
                    monotone_cdf: self.weights.min() >= 0.0,
                });
            }
        }
        Err(Error::Numerical(format!("cumulative weight never reaches alpha = {alpha}")))
    }
}

/// `var_f − covᵀ Σ⁻¹ cov`, the variance of the informed limit process at `f`.
///
/// Tiny negative results from round-off are clamped to zero.
pub fn limit_variance(cov_gf: &[f64], var_f: f64, sigma: &[f64]) -> Result<f64> {
    let m = cov_gf.len();
    if sigma.len() != m * m {
        return Err(Error::InvalidInput(format!("sigma must be {m}x{m}")));
    }
    if !(var_f >= 0.0) {
        return Err(Error::Domain(format!("var_f must be nonnegative, got {var_f}")));
    }
    let x = spd_solve(sigma, cov_gf)?;
    let quad: f64 = x.iter().zip(cov_gf).map(|(a, b)| a * b).sum();
    let v = var_f - quad;
    if v >= 0.0 {
        Ok(v)
    } else if v >= -1e-12 {
        Ok(0.0)
    } else {
        Err(Error::Domain(format!("covariance inputs are inconsistent: var_f − covᵀΣ⁻¹cov = {v}")))
    }
}

/// Plug-in version of [`limit_variance`]: `Var_n f − cov_n(g,f)ᵀ Σ_n⁻¹ cov_n(g,f)`.
pub fn empirical_limit_variance(cs: &ConstraintSet, f_values: &[f64]) -> Result<f64> {
    if f_values.len() != cs.n() {
        return Err(Error::InvalidInput("f_values length mismatch".into()));
    }
    let n = cs.n() as f64;
    let m = cs.m();
    let moments = empirical_moments(cs);
    let f_mean = f_values.iter().sum::<f64>() / n;
    let var_f = f_values.iter().map(|v| (v - f_mean).powi(2)).sum::<f64>() / n;
    let mut cov = vec![0.0; m];
    for (r, fv) in cs.rows().zip(f_values) {
        for j in 0..m {
            cov[j] += (r[j] - moments.mean[j]) * (fv - f_mean);
        }
    }
    cov.iter_mut().for_each(|c| *c /= n);
    limit_variance(&cov, var_f, &moments.covariance)
}

/// `(α(1 − α) − Ĩ) / f(q_α)²`, the asymptotic variance of the informed
/// `α`-quantile.
pub fn quantile_limit_variance(alpha: f64, density_at_q: f64, i_tilde: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(density_at_q > 0.0) {
        return Err(Error::Domain(format!("density must be positive, got {density_at_q}")));
    }
    let bernoulli = alpha * (1.0 - alpha);
    if !(i_tilde >= -1e-15 && i_tilde <= bernoulli + 1e-12) {
        return Err(Error::Domain(format!("information term {i_tilde} outside [0, {bernoulli}]")));
    }
    Ok((bernoulli - i_tilde).max(0.0) / (density_at_q * density_at_q))
}
