//! Shared domain types: samples, constraint matrices, weight vectors and
//! solver reports.
//!
//! A [`ConstraintSet`] stores the evaluations `G[i, j] = g_j(X_i)` row-major
//! together with the known expectations `Pg`. Every solver works on the
//! centered form, where `Pg` has been subtracted column-wise and the target
//! is the zero vector.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|Σ w_i − 1|` for every weight vector.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Tolerance on `‖Σ w_i G_i − Pg‖∞` for the informed weight vectors.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// An i.i.d. sample of scalar observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("sample must contain at least one value".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("sample value {i} is not finite")));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Scalar function applied to sample values.
///
/// The closed vocabulary is what the CLI can express; `Callback` is for
/// library callers only.
#[derive(Clone)]
pub enum FunctionSpec {
    /// `x^k`, `k` in `1..=8`.
    Monomial(u32),
    /// `1{x <= c}`.
    Indicator(f64),
    Callback(Callback),
}

#[derive(Clone)]
pub struct Callback {
    name: String,
    func: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl FunctionSpec {
    pub const MAX_DEGREE: u32 = 8;

    pub fn monomial(k: u32) -> Result<Self> {
        if (1..=Self::MAX_DEGREE).contains(&k) {
            Ok(FunctionSpec::Monomial(k))
        } else {
            Err(Error::InvalidInput(format!("monomial degree {k} outside 1..={}", Self::MAX_DEGREE)))
        }
    }

    pub fn indicator(c: f64) -> Self {
        FunctionSpec::Indicator(c)
    }

    pub fn callback<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        FunctionSpec::Callback(Callback { name: name.into(), func: Arc::new(f) })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            FunctionSpec::Monomial(k) => x.powi(*k as i32),
            FunctionSpec::Indicator(c) => {
                if x <= *c {
                    1.0
                } else {
                    0.0
                }
            }
            FunctionSpec::Callback(cb) => (cb.func)(x),
        }
    }

    /// Parses a comma-separated list such as `x,x^2,ind(x<=0)`.
    pub fn parse_list(s: &str) -> Result<Vec<Self>> {
        let specs = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Self>>>()?;
        if specs.is_empty() {
            return Err(Error::Parse(format!("empty function list '{s}'")));
        }
        Ok(specs)
    }
}

impl FromStr for FunctionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t == "x" {
            return Ok(FunctionSpec::Monomial(1));
        }
        if let Some(k) = t.strip_prefix("x^") {
            let k: u32 = k.parse().map_err(|_| Error::Parse(format!("bad exponent in '{s}'")))?;
            return FunctionSpec::monomial(k);
        }
        if let Some(rest) = t.strip_prefix("ind(x<=").and_then(|r| r.strip_suffix(')')) {
            let c: f64 = rest.parse().map_err(|_| Error::Parse(format!("bad threshold in '{s}'")))?;
            if !c.is_finite() {
                return Err(Error::Parse(format!("threshold in '{s}' is not finite")));
            }
            return Ok(FunctionSpec::Indicator(c));
        }
        Err(Error::Parse(format!("unrecognised function term '{s}' (expected x, x^k or ind(x<=c))")))
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::Monomial(1) => write!(f, "x"),
            FunctionSpec::Monomial(k) => write!(f, "x^{k}"),
            FunctionSpec::Indicator(c) => write!(f, "ind(x<={c})"),
            FunctionSpec::Callback(cb) => write!(f, "{}", cb.name),
        }
    }
}

impl fmt::Debug for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FunctionSpec({self})")
    }
}

impl Serialize for FunctionSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Evaluations of the constraint functions on a sample, plus the known
/// target `Pg`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    n: usize,
    m: usize,
    /// Row-major `n × m`.
    data: Vec<f64>,
    target: Vec<f64>,
    centered: bool,
}

impl ConstraintSet {
    /// Builds an uncentered set from a row-major `n × m` matrix.
    pub fn new(n: usize, m: usize, data: Vec<f64>, target: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("need at least one constraint".into()));
        }
        if n < m + 1 {
            return Err(Error::InvalidInput(format!("need n >= m + 1 observations, got n={n}, m={m}")));
        }
        if data.len() != n * m {
            return Err(Error::InvalidInput(format!("matrix has {} entries, expected {}", data.len(), n * m)));
        }
        if target.len() != m {
            return Err(Error::InvalidInput(format!("target has length {}, expected {m}", target.len())));
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Evaluation { row: k / m, col: k % m });
        }
        if target.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("target contains non-finite values".into()));
        }
        Ok(Self { n, m, data, target, centered: false })
    }

    pub fn from_rows(rows: &[Vec<f64>], target: Vec<f64>) -> Result<Self> {
        let m = target.len();
        if let Some(i) = rows.iter().position(|r| r.len() != m) {
            return Err(Error::InvalidInput(format!("row {i} has {} columns, expected {m}", rows[i].len())));
        }
        Self::new(rows.len(), m, rows.concat(), target)
    }

    /// Single-constraint convenience constructor.
    pub fn from_column(column: &[f64], target: f64) -> Result<Self> {
        Self::new(column.len(), 1, column.to_vec(), vec![target])
    }

    /// Evaluates every function on every observation, preserving order.
    pub fn evaluate(sample: &Sample, specs: &[FunctionSpec], target: &[f64]) -> Result<Self> {
        let m = specs.len();
        let mut data = Vec::with_capacity(sample.len() * m);
        for (i, &x) in sample.values().iter().enumerate() {
            for (j, spec) in specs.iter().enumerate() {
                let v = spec.eval(x);
                if !v.is_finite() {
                    return Err(Error::Evaluation { row: i, col: j });
                }
                data.push(v);
            }
        }
        Self::new(sample.len(), m, data, target.to_vec())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.m)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.m + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// Subtracts the target from each column. Errors if already centered.
    pub fn center(&self) -> Result<Self> {
        if self.centered {
            return Err(Error::AlreadyCentered);
        }
        let mut data = self.data.clone();
        for row in data.chunks_exact_mut(self.m) {
            for (v, t) in row.iter_mut().zip(&self.target) {
                *v -= t;
            }
        }
        Ok(Self { n: self.n, m: self.m, data, target: vec![0.0; self.m], centered: true })
    }

    /// Centered form; a clone when already centered.
    pub fn to_centered(&self) -> Self {
        if self.centered {
            self.clone()
        } else {
            self.center().expect("uncentered set always centers")
        }
    }

    /// Restriction to the given columns, keeping the centering flag.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if cols.is_empty() {
            return Err(Error::InvalidInput("column selection is empty".into()));
        }
        if let Some(&j) = cols.iter().find(|&&j| j >= self.m) {
            return Err(Error::InvalidInput(format!("column {j} out of range")));
        }
        let data = self.rows().flat_map(|r| cols.iter().map(move |&j| r[j])).collect();
        let target = cols.iter().map(|&j| self.target[j]).collect();
        let mut out = Self::new(self.n, cols.len(), data, target)?;
        out.centered = self.centered;
        Ok(out)
    }

    /// Same constraints with rows reordered: row `k` of the result is row
    /// `perm[k]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::InvalidInput("permutation length mismatch".into()));
        }
        let data = perm.iter().flat_map(|&i| self.row(i).iter().copied()).collect();
        let mut out = Self::new(self.n, self.m, data, self.target.clone())?;
        out.centered = self.centered;
        Ok(out)
    }

    /// Column means `P_n g` of the stored (possibly centered) matrix.
    pub fn column_means(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.m];
        for row in self.rows() {
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        let n = self.n as f64;
        sums.iter().map(|s| s / n).collect()
    }

    /// `‖Σ_i w_i G_i − target‖∞`.
    pub fn residual(&self, weights: &[f64]) -> f64 {
        let mut acc = vec![0.0; self.m];
        for (row, w) in self.rows().zip(weights) {
            for (a, v) in acc.iter_mut().zip(row) {
                *a += w * v;
            }
        }
        acc.iter().zip(&self.target).map(|(a, t)| (a - t).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMethod {
    Uniform,
    EmpiricalLikelihood,
    ExponentialTilt,
    ClosedForm,
}

impl fmt::Display for WeightMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightMethod::Uniform => "uniform",
            WeightMethod::EmpiricalLikelihood => "empirical_likelihood",
            WeightMethod::ExponentialTilt => "exponential_tilt",
            WeightMethod::ClosedForm => "closed_form",
        })
    }
}

/// Probability weights over the sample, tagged with how they were built.
///
/// Closed-form weights form a signed measure and may be negative; the two
/// projection methods are always strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector {
    weights: Vec<f64>,
    method: WeightMethod,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>, method: WeightMethod) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidInput("weight vector is empty".into()));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Numerical(format!("{method} weights contain non-finite values")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Numerical(format!("{method} weights sum to {sum}, not 1")));
        }
        let strictly_positive =
            matches!(method, WeightMethod::EmpiricalLikelihood | WeightMethod::ExponentialTilt);
        if strictly_positive && weights.iter().any(|&w| w <= 0.0) {
            return Err(Error::Numerical(format!("{method} weights must be strictly positive")));
        }
        Ok(Self { weights, method })
    }

    pub fn uniform(n: usize) -> Self {
        Self { weights: vec![1.0 / n as f64; n], method: WeightMethod::Uniform }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn method(&self) -> WeightMethod {
        self.method
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.weights
    }
}

/// Outcome of a dual solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub lambda: Vec<f64>,
    pub iterations: usize,
    /// `‖∇‖∞` of the (mean-scaled) dual objective at `lambda`.
    pub grad_norm: f64,
    /// Constraint violation of the returned weights.
    pub residual: f64,
    pub converged: bool,
    /// Empirical likelihood only: some `1 + λᵀG_i` sits at the `1/n` floor.
    pub boundary: bool,
    /// Accepted iterates, starting with the initial point. Only kept when
    /// `SolverConfig::record_trace` is set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<Vec<f64>>>,
}
