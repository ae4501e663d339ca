//! Dense phase-I simplex for `{q ≥ 0 : A q = b}` with `b ≥ 0`.
//!
//! Only feasibility is needed, so there is no phase II. Entering columns are
//! chosen by the most negative reduced cost, switching to Bland's rule after a
//! run of degenerate pivots so the method always terminates.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-12;
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseOneOutcome {
    /// Sum of artificial variables at the optimum.
    pub infeasibility: f64,
    pub pivots: usize,
}

/// Runs phase I on the row-major `rows × cols` system `A q = b`.
pub fn phase_one(a: &[f64], b: &[f64], rows: usize, cols: usize, max_pivots: usize) -> Result<PhaseOneOutcome> {
    debug_assert_eq!(a.len(), rows * cols);
    debug_assert!(b.iter().all(|&v| v >= 0.0));

    // Tableau columns: original variables, artificials, right-hand side.
    let width = cols + rows + 1;
    let rhs = width - 1;
    let mut t = vec![0.0; rows * width];
    for i in 0..rows {
        t[i * width..i * width + cols].copy_from_slice(&a[i * cols..(i + 1) * cols]);
        t[i * width + cols + i] = 1.0;
        t[i * width + rhs] = b[i];
    }
    let mut basis: Vec<usize> = (cols..cols + rows).collect();

    // Reduced costs of the phase-I objective; last entry holds −z.
    let mut cost = vec![0.0; width];
    for i in 0..rows {
        for j in 0..cols {
            cost[j] -= t[i * width + j];
        }
        cost[rhs] -= b[i];
    }

    let mut pivots = 0;
    let mut degenerate = 0;
    loop {
        let bland = degenerate >= DEGENERATE_RUN;
        let entering = if bland {
            (0..cols + rows).find(|&j| cost[j] < -COST_EPS)
        } else {
            let (j, c) = (0..cols + rows)
                .map(|j| (j, cost[j]))
                .fold((usize::MAX, -COST_EPS), |best, cur| if cur.1 < best.1 { cur } else { best });
            (c < -COST_EPS).then_some(j)
        };
        let Some(col) = entering else {
            return Ok(PhaseOneOutcome { infeasibility: (-cost[rhs]).max(0.0), pivots });
        };

        let mut leave: Option<(usize, f64)> = None;
        for i in 0..rows {
            let aij = t[i * width + col];
            if aij > PIVOT_EPS {
                let ratio = t[i * width + rhs] / aij;
                let better = match leave {
                    None => true,
                    Some((r, best)) => ratio < best - 1e-15 || (ratio <= best + 1e-15 && basis[i] < basis[r]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((row, ratio)) = leave else {
            // Phase-I objective is bounded below by zero; an unbounded ray
            // only shows up through round-off.
            return Err(Error::Numerical("phase-I simplex found an unbounded direction".into()));
        };

        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::Numerical(format!("phase-I simplex exceeded {max_pivots} pivots")));
        }
        degenerate = if ratio.abs() <= 1e-15 { degenerate + 1 } else { 0 };

        let p = t[row * width + col];
        for v in &mut t[row * width..(row + 1) * width] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = t[row * width..(row + 1) * width].to_vec();
        for i in 0..rows {
            if i == row {
                continue;
            }
            let f = t[i * width + col];
            if f != 0.0 {
                for (v, pv) in t[i * width..(i + 1) * width].iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        let f = cost[col];
        for (v, pv) in cost.iter_mut().zip(&pivot_row) {
            *v -= f * pv;
        }
        basis[row] = col;
    }
}
