//! Small dense linear algebra: Cholesky solves for the `m × m` systems the
//! solvers produce, and rank / eigenvalue helpers backed by nalgebra.
//!
//! Matrices are plain row-major slices; `m` stays small (tens at most).

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    dim: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    /// Factors the row-major `dim × dim` matrix `a`. Only the lower triangle
    /// is read.
    pub fn new(a: &[f64], dim: usize) -> Result<Self> {
        if a.len() != dim * dim {
            return Err(Error::InvalidInput(format!("expected {dim}x{dim} matrix")));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("matrix contains non-finite values".into()));
        }
        let scale = (0..dim).map(|i| a[i * dim + i].abs()).fold(0.0, f64::max);
        let floor = scale * f64::EPSILON * dim as f64;
        let mut l = vec![0.0; dim * dim];
        for j in 0..dim {
            let mut d = a[j * dim + j];
            for k in 0..j {
                d -= l[j * dim + k] * l[j * dim + k];
            }
            if d <= floor || scale == 0.0 {
                return Err(Error::NotPositiveDefinite { pivot: j, value: d });
            }
            let d = d.sqrt();
            l[j * dim + j] = d;
            for i in j + 1..dim {
                let mut s = a[i * dim + j];
                for k in 0..j {
                    s -= l[i * dim + k] * l[j * dim + k];
                }
                l[i * dim + j] = s / d;
            }
        }
        Ok(Self { dim, lower: l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let l = &self.lower;
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                y[i] -= l[i * n + k] * y[k];
            }
            y[i] /= l[i * n + i];
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                y[i] -= l[k * n + i] * y[k];
            }
            y[i] /= l[i * n + i];
        }
        y
    }
}

/// Solves `A x = b` for symmetric positive-definite `A` (row-major), with one
/// step of iterative refinement.
pub fn spd_solve(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let dim = b.len();
    let chol = Cholesky::new(a, dim)?;
    let mut x = chol.solve(b);
    let r = residual(a, &x, b);
    let dx = chol.solve(&r);
    for (xi, d) in x.iter_mut().zip(dx) {
        *xi += d;
    }
    Ok(x)
}

/// `b − A x`.
pub fn residual(a: &[f64], x: &[f64], b: &[f64]) -> Vec<f64> {
    let dim = b.len();
    (0..dim)
        .map(|i| b[i] - (0..dim).map(|k| a[i * dim + k] * x[k]).sum::<f64>())
        .collect()
}

pub fn mat_vec(a: &[f64], x: &[f64]) -> Vec<f64> {
    let dim = x.len();
    (0..a.len() / dim).map(|i| (0..dim).map(|k| a[i * dim + k] * x[k]).sum()).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Smallest and largest eigenvalue of a symmetric row-major matrix.
pub fn sym_eigen_range(a: &[f64], dim: usize) -> (f64, f64) {
    let mat = DMatrix::from_row_slice(dim, dim, a);
    let eig = SymmetricEigen::new(mat);
    let vals = eig.eigenvalues;
    (vals.min(), vals.max())
}

/// Numerical rank of the `n × k` matrix whose columns are given.
///
/// Columns are scaled to unit norm first (rank is invariant to column
/// scaling); singular values at or below `rel_tol · σ_max` count as zero.
/// Zero columns are skipped outright.
pub fn column_rank(columns: &[Vec<f64>], rel_tol: f64) -> usize {
    let nonzero: Vec<Vec<f64>> = columns
        .iter()
        .filter_map(|c| {
            let nrm = norm2(c);
            (nrm > 0.0).then(|| c.iter().map(|v| v / nrm).collect())
        })
        .collect();
    if nonzero.is_empty() {
        return 0;
    }
    let n = nonzero[0].len();
    let k = nonzero.len();
    let mat = DMatrix::from_fn(n, k, |i, j| nonzero[j][i]);
    // Reduce to the k × k triangular factor before the SVD when n is large.
    let core = if n > k { mat.qr().r() } else { mat };
    let sv = core.singular_values();
    let smax = sv.max();
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_solve() {
        let x = spd_solve(&[1.0, 0.0, 0.0, 1.0], &[3.5, -2.0]).unwrap();
        assert_eq!(x, vec![3.5, -2.0]);
    }

    #[test]
    fn diagonal_solve() {
        let x = spd_solve(&[1.0, 0.0, 0.0, 2.0], &[1.0, 1.0]).unwrap();
        assert_eq!(x, vec![1.0, 0.5]);
    }

    #[test]
    fn two_by_two_solve() {
        // 2x + y = 3, x + 2y = 3  =>  x = y = 1
        let x = spd_solve(&[2.0, 1.0, 1.0, 2.0], &[3.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn residual_bound_on_ill_scaled_system() {
        let a = [1e4, 1.0, 0.5, 1.0, 2.0, 0.1, 0.5, 0.1, 1e-2];
        let b = [1.0, -2.0, 0.25];
        let x = spd_solve(&a, &b).unwrap();
        assert!(norm2(&residual(&a, &x, &b)) <= 1e-10 * norm2(&b));
    }

    #[test]
    fn indefinite_is_rejected() {
        assert!(matches!(
            spd_solve(&[1.0, 2.0, 2.0, 1.0], &[1.0, 1.0]),
            Err(Error::NotPositiveDefinite { pivot: 1, .. })
        ));
        assert!(matches!(spd_solve(&[0.0], &[1.0]), Err(Error::NotPositiveDefinite { pivot: 0, .. })));
    }

    #[test]
    fn rank_of_simple_matrices() {
        let ones = vec![1.0; 3];
        assert_eq!(column_rank(&[ones.clone(), vec![-1.0, 0.0, 2.0]], 1e-10), 2);
        assert_eq!(column_rank(&[ones.clone(), vec![1.0, 1.0, 1.0]], 1e-10), 1);
        assert_eq!(column_rank(&[ones, vec![0.0; 3]], 1e-10), 1);
    }

    #[test]
    fn eigen_range() {
        let (lo, hi) = sym_eigen_range(&[2.0, 1.0, 1.0, 2.0], 2);
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 3.0).abs() < 1e-12);
    }
}
