//! Existence preconditions for the informed weights: the target must lie in
//! the convex hull of the rows `G_i`, and `[1 | G]` must have full column
//! rank. Redundant constraints can be dropped without changing the solution.

mod simplex;

use serde::Serialize;

use crate::data::ConstraintSet;
use crate::error::{Error, Result};
use crate::linalg::column_rank;

pub use simplex::{phase_one, PhaseOneOutcome};

/// Singular values at or below this fraction of the largest count as zero.
pub const DEFAULT_RANK_REL_TOL: f64 = 1e-10;
/// Phase-I optimum at or below this value means the target is in the hull.
pub const HULL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeasibilityReport {
    pub hull_member: bool,
    pub rank_condition: bool,
    pub effective_rank: usize,
    pub kept_columns: Vec<usize>,
}

/// Whether the target lies in the closed convex hull of the rows of `G`.
pub fn check_hull_membership(cs: &ConstraintSet) -> Result<bool> {
    let cs = cs.to_centered();
    let (n, m) = (cs.n(), cs.m());
    let rows = m + 1;
    let mut a = vec![0.0; rows * n];
    a[..n].fill(1.0);
    for j in 0..m {
        // Normalising each constraint row makes the decision independent of
        // the scale of g_j.
        let scale = cs.rows().fold(0.0_f64, |s, r| s.max(r[j].abs()));
        let row = &mut a[(j + 1) * n..(j + 2) * n];
        for (i, v) in row.iter_mut().enumerate() {
            *v = if scale > 0.0 { cs.get(i, j) / scale } else { 0.0 };
        }
    }
    let mut b = vec![0.0; rows];
    b[0] = 1.0;
    let cap = 20 * (n + rows) + 1000;
    let outcome = phase_one(&a, &b, rows, n, cap)?;
    Ok(outcome.infeasibility <= HULL_TOL)
}

/// Whether `rank([1 | G]) = m + 1`.
pub fn check_rank_condition(cs: &ConstraintSet, rel_tol: f64) -> bool {
    augmented_rank(cs, &(0..cs.m()).collect::<Vec<_>>(), rel_tol) == cs.m() + 1
}

/// Rank of `[1 | G_cols]`.
pub fn augmented_rank(cs: &ConstraintSet, cols: &[usize], rel_tol: f64) -> usize {
    let mut columns = Vec::with_capacity(cols.len() + 1);
    columns.push(vec![1.0; cs.n()]);
    columns.extend(cols.iter().map(|&j| cs.column(j)));
    column_rank(&columns, rel_tol)
}

/// Greedy selection of columns that are independent of the constant vector
/// and of the columns kept before them, scanning in column order.
pub fn independent_columns(cs: &ConstraintSet, rel_tol: f64) -> Vec<usize> {
    let mut kept = Vec::new();
    for j in 0..cs.m() {
        kept.push(j);
        if augmented_rank(cs, &kept, rel_tol) != kept.len() + 1 {
            kept.pop();
        }
    }
    kept
}

/// Restricts `cs` to a maximal set of columns satisfying the rank condition.
/// Dropped columns are linear combinations of the kept ones and the constant,
/// so weights matching the kept constraints match all of them.
pub fn deduplicate_constraints(cs: &ConstraintSet, rel_tol: f64) -> Result<(ConstraintSet, Vec<usize>)> {
    let kept = independent_columns(cs, rel_tol);
    if kept.is_empty() {
        return Err(Error::DegenerateConstraints);
    }
    Ok((cs.select_columns(&kept)?, kept))
}

pub fn feasibility_report(cs: &ConstraintSet, rel_tol: f64) -> Result<FeasibilityReport> {
    let kept = independent_columns(cs, rel_tol);
    Ok(FeasibilityReport {
        hull_member: check_hull_membership(cs)?,
        rank_condition: kept.len() == cs.m(),
        effective_rank: kept.len(),
        kept_columns: kept,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn col(v: &[f64]) -> ConstraintSet {
        ConstraintSet::from_column(v, 0.0).unwrap().center().unwrap()
    }

    /// Exhaustive search over the simplex grid with denominator `d`.
    fn grid_witness(x: &[f64; 3], d: usize) -> bool {
        (0..=d).any(|a| {
            (0..=d - a).any(|b| {
                let c = d - a - b;
                let q = [a as f64, b as f64, c as f64].map(|v| v / d as f64);
                (q[0] * x[0] + q[1] * x[1] + q[2] * x[2]).abs() < 1e-12
            })
        })
    }

    #[test]
    fn hull_contains_zero_for_mixed_signs() {
        assert!(grid_witness(&[-1.0, 0.0, 2.0], 18));
        assert!(check_hull_membership(&col(&[-1.0, 0.0, 2.0])).unwrap());
    }

    #[test]
    fn hull_excludes_zero_for_same_sign() {
        assert!(!grid_witness(&[1.0, 2.0, 3.0], 60));
        assert!(!check_hull_membership(&col(&[1.0, 2.0, 3.0])).unwrap());
    }

    #[test]
    fn zero_matrix_is_in_hull() {
        let cs = ConstraintSet::new(4, 2, vec![0.0; 8], vec![0.0, 0.0]).unwrap();
        assert!(check_hull_membership(&cs).unwrap());
    }

    #[test]
    fn hull_uses_target_when_uncentered() {
        let cs = ConstraintSet::from_column(&[1.0, 2.0, 3.0], 2.5).unwrap();
        assert!(check_hull_membership(&cs).unwrap());
        let cs = ConstraintSet::from_column(&[1.0, 2.0, 3.0], 3.5).unwrap();
        assert!(!check_hull_membership(&cs).unwrap());
    }

    #[test]
    fn hull_two_dimensional() {
        // Unit square corners contain the centre but not (2, 0).
        let rows = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        let inside = ConstraintSet::from_rows(&rows, vec![0.0, 0.0]).unwrap();
        assert!(check_hull_membership(&inside).unwrap());
        let outside = ConstraintSet::from_rows(&rows, vec![2.0, 0.0]).unwrap();
        assert!(!check_hull_membership(&outside).unwrap());
    }

    #[test]
    fn rank_condition_examples() {
        // det [[1, -1], [1, 0]] = 1 ≠ 0, so rank 2 = m + 1.
        assert!(check_rank_condition(&col(&[-1.0, 0.0, 2.0]), DEFAULT_RANK_REL_TOL));
        let ones = ConstraintSet::from_column(&[1.0, 1.0, 1.0], 0.0).unwrap();
        assert!(!check_rank_condition(&ones, DEFAULT_RANK_REL_TOL));
    }

    #[test]
    fn dedup_proportional_columns() {
        let x = [-1.0, 0.5, 2.0, -1.5];
        let rows: Vec<Vec<f64>> = x.iter().map(|&v| vec![v, 2.0 * v]).collect();
        let cs = ConstraintSet::from_rows(&rows, vec![0.0, 0.0]).unwrap().center().unwrap();
        let (reduced, kept) = deduplicate_constraints(&cs, DEFAULT_RANK_REL_TOL).unwrap();
        assert_eq!(kept, vec![0]);
        assert_eq!(reduced.m(), 1);
        assert!(reduced.is_centered());
    }

    #[test]
    fn dedup_independent_columns_unchanged() {
        // On {-1, 0, 1, 2}, [1 | x | x^2] has the nonzero 3x3 minor
        // det [[1,-1,1],[1,0,0],[1,1,1]] = 2.
        let x = [-1.0, 0.0, 1.0, 2.0];
        let rows: Vec<Vec<f64>> = x.iter().map(|&v| vec![v, v * v]).collect();
        let cs = ConstraintSet::from_rows(&rows, vec![0.5, 1.5]).unwrap().center().unwrap();
        let (reduced, kept) = deduplicate_constraints(&cs, DEFAULT_RANK_REL_TOL).unwrap();
        assert_eq!(kept, vec![0, 1]);
        assert_eq!(reduced, cs);
    }

    #[test]
    fn dedup_drops_zero_column() {
        let rows: Vec<Vec<f64>> = [-1.0, 0.0, 2.0].iter().map(|&v| vec![0.0, v]).collect();
        let cs = ConstraintSet::from_rows(&rows, vec![0.0, 0.0]).unwrap().center().unwrap();
        assert_eq!(deduplicate_constraints(&cs, DEFAULT_RANK_REL_TOL).unwrap().1, vec![1]);
    }

    #[test]
    fn dedup_all_zero_is_degenerate() {
        let cs = ConstraintSet::new(3, 2, vec![0.0; 6], vec![0.0, 0.0]).unwrap().center().unwrap();
        assert!(matches!(deduplicate_constraints(&cs, DEFAULT_RANK_REL_TOL), Err(Error::DegenerateConstraints)));
    }

    #[test]
    fn report_fields() {
        let rows: Vec<Vec<f64>> = [-1.0, 0.0, 2.0, 1.0].iter().map(|&v| vec![v, -3.0 * v]).collect();
        let cs = ConstraintSet::from_rows(&rows, vec![0.0, 0.0]).unwrap();
        let r = feasibility_report(&cs, DEFAULT_RANK_REL_TOL).unwrap();
        assert!(r.hull_member);
        assert!(!r.rank_condition);
        assert_eq!(r.effective_rank, 1);
        assert_eq!(r.kept_columns, vec![0]);
    }

    proptest! {
        #[test]
        fn hull_is_scale_invariant(
            xs in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..12),
            d0 in 1e-3f64..1e3,
            d1 in 1e-3f64..1e3,
        ) {
            let rows: Vec<Vec<f64>> = xs.iter().map(|&(a, b)| vec![a, b]).collect();
            let scaled: Vec<Vec<f64>> = xs.iter().map(|&(a, b)| vec![a * d0, b * d1]).collect();
            let g = ConstraintSet::from_rows(&rows, vec![0.0, 0.0]).unwrap();
            let gd = ConstraintSet::from_rows(&scaled, vec![0.0, 0.0]).unwrap();
            prop_assert_eq!(check_hull_membership(&g).unwrap(), check_hull_membership(&gd).unwrap());
        }

        #[test]
        fn dedup_restores_rank_condition(
            xs in proptest::collection::vec(-3.0f64..3.0, 5..20),
            a in -2.0f64..2.0,
        ) {
            // Third column is a combination of the first two plus a constant.
            let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x, x * x, a * x - x * x + 1.0]).collect();
            let cs = ConstraintSet::from_rows(&rows, vec![0.0, 0.0, 0.0]).unwrap();
            if let Ok((reduced, kept)) = deduplicate_constraints(&cs, DEFAULT_RANK_REL_TOL) {
                prop_assert!(check_rank_condition(&reduced, DEFAULT_RANK_REL_TOL));
                prop_assert!(kept.len() <= 2);
            }
        }
    }
}
