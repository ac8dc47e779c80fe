//! Exact Gaussian elimination over the rational-function field. Used by
//! every closure property and by the telescoping solvers; pivoting is
//! deterministic so identical inputs produce identical kernels.

use crate::arith::RatFun;

/// Reduced row echelon form in place; returns the pivot column of each
/// reduced row in order.
fn rref(rows: &mut Vec<Vec<RatFun>>) -> Vec<usize> {
    let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(pr) = (row..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(row, pr);
        let inv = rows[row][col].recip().expect("pivot is nonzero");
        for c in col..ncols {
            rows[row][c] = &rows[row][c] * &inv;
        }
        for r in 0..rows.len() {
            if r != row && !rows[r][col].is_zero() {
                let factor = rows[r][col].clone();
                for c in col..ncols {
                    let delta = &factor * &rows[row][c];
                    rows[r][c] = &rows[r][c] - &delta;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == rows.len() {
            break;
        }
    }
    rows.truncate(row);
    pivots
}

/// Basis of the right kernel of the matrix (rows are equations, columns are
/// unknowns). Each basis vector sets one free column to 1 and the others to
/// 0; order follows column order.
pub fn nullspace(rows: Vec<Vec<RatFun>>, ncols: usize) -> Vec<Vec<RatFun>> {
    let mut rows = rows;
    for r in &rows {
        assert_eq!(r.len(), ncols);
    }
    let pivots = rref(&mut rows);
    let mut basis = Vec::new();
    let mut is_pivot = vec![false; ncols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    for free in 0..ncols {
        if is_pivot[free] {
            continue;
        }
        let mut v = vec![RatFun::zero(); ncols];
        v[free] = RatFun::one();
        for (r, &p) in pivots.iter().enumerate() {
            v[p] = -&rows[r][free];
        }
        basis.push(v);
    }
    basis
}

/// One solution of `rows * x = rhs` (free unknowns set to zero), or None if
/// the system is inconsistent.
pub fn solve(mut rows: Vec<Vec<RatFun>>, rhs: Vec<RatFun>, ncols: usize) -> Option<Vec<RatFun>> {
    assert_eq!(rows.len(), rhs.len());
    for (r, b) in rows.iter_mut().zip(rhs) {
        assert_eq!(r.len(), ncols);
        r.push(b);
    }
    let pivots = rref(&mut rows);
    // Inconsistent iff a pivot lands in the augmented column.
    if pivots.last().is_some_and(|&p| p == ncols) {
        return None;
    }
    let mut x = vec![RatFun::zero(); ncols];
    for (r, &p) in pivots.iter().enumerate() {
        x[p] = rows[r][ncols].clone();
    }
    Some(x)
}
