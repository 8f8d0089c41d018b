//! Dense primal simplex on the standard-form tableau.
//!
//! Solves `max c'x  s.t.  Ax <= b, x >= 0` with `b >= 0`, so the all-slack
//! basis is feasible and no phase-one is needed. Pivoting uses Bland's
//! smallest-index rule for both the entering column and ratio-test ties,
//! which guarantees termination under degeneracy and makes the returned
//! vertex a canonical function of the input.

use super::OfflineError;
use crate::scalar::Scalar;

pub(crate) struct SimplexResult<T> {
    /// Structural variable values at the optimal vertex.
    pub x: Vec<T>,
    pub objective: T,
    /// One dual multiplier per constraint row (nonnegative at optimality).
    pub duals: Vec<T>,
    /// Basic variable index per row (structural first, then slacks).
    pub basis: Vec<usize>,
    pub pivots: usize,
}

pub(crate) fn solve_simplex_max<T: Scalar>(
    costs: &[T],
    rows: &[Vec<T>],
    rhs: &[T],
    pivot_limit: usize,
) -> Result<SimplexResult<T>, OfflineError> {
    let nv = costs.len();
    let nrows = rows.len();
    assert_eq!(rhs.len(), nrows);
    let width = nv + nrows + 1;
    let rhs_col = width - 1;

    let mut tableau: Vec<Vec<T>> = Vec::with_capacity(nrows);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), nv);
        debug_assert!(rhs[i] >= T::zero(), "standard form requires rhs >= 0");
        let mut t_row = vec![T::zero(); width];
        t_row[..nv].clone_from_slice(row);
        t_row[nv + i] = T::one();
        t_row[rhs_col] = rhs[i].clone();
        tableau.push(t_row);
    }
    // Reduced-cost row; its rhs cell accumulates the negated objective.
    let mut zrow = vec![T::zero(); width];
    zrow[..nv].clone_from_slice(costs);
    let mut basis: Vec<usize> = (nv..nv + nrows).collect();

    let tol = T::tol();
    let mut pivots = 0usize;
    // Entering column: smallest index with positive reduced cost.
    while let Some(enter) = (0..width - 1).find(|&q| zrow[q] > tol) {
        // Ratio test with Bland tie-breaking on the leaving basic variable.
        let mut leave: Option<usize> = None;
        let mut best_ratio: Option<T> = None;
        for r in 0..nrows {
            if tableau[r][enter] > tol {
                let ratio = tableau[r][rhs_col].clone() / tableau[r][enter].clone();
                let better = match &best_ratio {
                    None => true,
                    Some(best) => {
                        ratio < *best
                            || (ratio == *best && basis[r] < basis[leave.expect("set with best")])
                    }
                };
                if better {
                    best_ratio = Some(ratio);
                    leave = Some(r);
                }
            }
        }
        let Some(r) = leave else {
            return Err(OfflineError::NumericalFailure(
                "unbounded LP; the assignment relaxation is always bounded".into(),
            ));
        };
        pivots += 1;
        if pivots > pivot_limit {
            return Err(OfflineError::NumericalFailure(format!(
                "pivot limit {pivot_limit} exceeded"
            )));
        }

        let pivot = tableau[r][enter].clone();
        for cell in tableau[r].iter_mut() {
            *cell = cell.clone() / pivot.clone();
        }
        tableau[r][enter] = T::one();
        let pivot_row = tableau[r].clone();
        for (k, row) in tableau.iter_mut().enumerate() {
            if k == r || row[enter].is_zero() {
                continue;
            }
            let factor = row[enter].clone();
            for (cell, pivot_cell) in row.iter_mut().zip(&pivot_row) {
                *cell = cell.clone() - factor.clone() * pivot_cell.clone();
            }
            row[enter] = T::zero();
        }
        if !zrow[enter].is_zero() {
            let factor = zrow[enter].clone();
            for (cell, pivot_cell) in zrow.iter_mut().zip(&pivot_row) {
                *cell = cell.clone() - factor.clone() * pivot_cell.clone();
            }
            zrow[enter] = T::zero();
        }
        basis[r] = enter;
    }

    let mut x = vec![T::zero(); nv];
    for r in 0..nrows {
        if basis[r] < nv {
            x[basis[r]] = tableau[r][rhs_col].clone();
        }
    }
    let duals = (0..nrows).map(|i| -zrow[nv + i].clone()).collect();
    Ok(SimplexResult {
        x,
        objective: -zrow[rhs_col].clone(),
        duals,
        basis,
        pivots,
    })
}
