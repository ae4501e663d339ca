//! Built-in sampling distributions and their closed-form moments.
//!
//! Every function in the CLI vocabulary is of the form `x^k · 1{x ≤ c}`
//! (with `k = 0` for indicators and `c = +∞` for monomials), and so is the
//! product of two of them. Expectations therefore reduce to partial moments
//! `E[X^k 1{X ≤ c}]`, which have closed forms for all three distributions.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use libm::erfc;

use super::rng::{normal_quantile, Stream};
use crate::data::FunctionSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    StdNormal,
    Uniform01,
    Exponential1,
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "std_normal" | "normal" => Ok(Distribution::StdNormal),
            "uniform01" | "uniform" => Ok(Distribution::Uniform01),
            "exponential1" | "exponential" => Ok(Distribution::Exponential1),
            other => Err(Error::Parse(format!("unknown distribution '{other}'"))),
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Distribution::StdNormal => "std_normal",
            Distribution::Uniform01 => "uniform01",
            Distribution::Exponential1 => "exponential1",
        })
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `x^power · 1{x ≤ cut}`; `cut = +∞` means no indicator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub power: u32,
    pub cut: f64,
}

impl Term {
    pub fn of(spec: &FunctionSpec) -> Option<Self> {
        match spec {
            FunctionSpec::Monomial(k) => Some(Term { power: *k, cut: f64::INFINITY }),
            FunctionSpec::Indicator(c) => Some(Term { power: 0, cut: *c }),
            FunctionSpec::Callback(_) => None,
        }
    }

    pub fn times(self, other: Term) -> Term {
        Term { power: self.power + other.power, cut: self.cut.min(other.cut) }
    }
}

impl Distribution {
    pub fn draw(&self, stream: &mut Stream) -> f64 {
        match self {
            Distribution::StdNormal => stream.next_std_normal(),
            Distribution::Uniform01 => stream.next_open01(),
            Distribution::Exponential1 => -(-stream.next_open01()).ln_1p(),
        }
    }

    pub fn sample(&self, stream: &mut Stream, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.draw(stream)).collect()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Distribution::StdNormal => std_normal_cdf(x),
            Distribution::Uniform01 => x.clamp(0.0, 1.0),
            Distribution::Exponential1 => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x).exp_m1()
                }
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Distribution::StdNormal => std_normal_pdf(x),
            Distribution::Uniform01 => {
                if (0.0..=1.0).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
            Distribution::Exponential1 => {
                if x < 0.0 {
                    0.0
                } else {
                    (-x).exp()
                }
            }
        }
    }

    pub fn quantile(&self, alpha: f64) -> f64 {
        match self {
            Distribution::StdNormal => normal_quantile(alpha),
            Distribution::Uniform01 => alpha,
            Distribution::Exponential1 => -(-alpha).ln_1p(),
        }
    }

    /// `E[X^k]`.
    pub fn raw_moment(&self, k: u32) -> f64 {
        match self {
            Distribution::StdNormal => {
                if k % 2 == 1 {
                    0.0
                } else {
                    (1..k).step_by(2).map(f64::from).product()
                }
            }
            Distribution::Uniform01 => 1.0 / f64::from(k + 1),
            Distribution::Exponential1 => factorial(k),
        }
    }

    /// `E[X^k 1{X ≤ c}]`.
    pub fn partial_moment(&self, k: u32, c: f64) -> f64 {
        if c == f64::INFINITY {
            return self.raw_moment(k);
        }
        match self {
            Distribution::StdNormal => {
                // M_k = −c^{k−1} φ(c) + (k − 1) M_{k−2}
                let phi = std_normal_pdf(c);
                let mut prev2 = std_normal_cdf(c);
                if k == 0 {
                    return prev2;
                }
                let mut prev1 = -phi;
                for j in 2..=k {
                    let next = -c.powi(j as i32 - 1) * phi + f64::from(j - 1) * prev2;
                    prev2 = prev1;
                    prev1 = next;
                }
                prev1
            }
            Distribution::Uniform01 => {
                let c = c.clamp(0.0, 1.0);
                c.powi(k as i32 + 1) / f64::from(k + 1)
            }
            Distribution::Exponential1 => {
                if c <= 0.0 {
                    return 0.0;
                }
                // k! (1 − e^{−c} Σ_{j≤k} c^j / j!)
                let mut term = 1.0;
                let mut series = 1.0;
                for j in 1..=k {
                    term *= c / f64::from(j);
                    series += term;
                }
                factorial(k) * (1.0 - (-c).exp() * series)
            }
        }
    }

    pub fn expect_term(&self, t: Term) -> f64 {
        self.partial_moment(t.power, t.cut)
    }

    /// `E[f(X)]` for closed-vocabulary functions.
    pub fn mean_of(&self, f: &FunctionSpec) -> Option<f64> {
        Term::of(f).map(|t| self.expect_term(t))
    }

    /// `Cov(f(X), h(X))` for closed-vocabulary functions.
    pub fn covariance(&self, f: &FunctionSpec, h: &FunctionSpec) -> Option<f64> {
        let (tf, th) = (Term::of(f)?, Term::of(h)?);
        Some(self.expect_term(tf.times(th)) - self.expect_term(tf) * self.expect_term(th))
    }
}

/// Population moments of the constraint vector and one test function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationMoments {
    /// `Pg`.
    pub target: Vec<f64>,
    /// `Var_P g`, row-major `m × m`.
    pub sigma: Vec<f64>,
    /// `P f`.
    pub f_mean: f64,
    pub f_variance: f64,
    /// `cov_P(g, f)`.
    pub cov_gf: Vec<f64>,
}

impl PopulationMoments {
    /// Closed-form moments, or `None` when a callback is involved.
    pub fn analytic(dist: Distribution, g: &[FunctionSpec], f: &FunctionSpec) -> Option<Self> {
        let target = g.iter().map(|gj| dist.mean_of(gj)).collect::<Option<Vec<_>>>()?;
        let m = g.len();
        let mut sigma = vec![0.0; m * m];
        for a in 0..m {
            for b in 0..m {
                sigma[a * m + b] = dist.covariance(&g[a], &g[b])?;
            }
        }
        Some(Self {
            target,
            sigma,
            f_mean: dist.mean_of(f)?,
            f_variance: dist.covariance(f, f)?,
            cov_gf: g.iter().map(|gj| dist.covariance(gj, f)).collect::<Option<Vec<_>>>()?,
        })
    }
}
