//! Exact dense linear assignment via shortest augmenting paths.
//!
//! O(m^3) potential-based augmentation (Jonker-Volgenant family). All scans
//! run in ascending index order with strict comparisons, so the returned
//! permutation is deterministic for a given cost matrix.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Returns the row-to-column assignment optimizing total cost.
pub fn lap_solve(cost: &DMatrix<f64>, maximize: bool) -> Result<Vec<usize>> {
    let m = cost.nrows();
    if m != cost.ncols() {
        return Err(Error::param(format!(
            "assignment cost must be square, got {}x{}",
            m,
            cost.ncols()
        )));
    }
    if m == 0 {
        return Ok(Vec::new());
    }
    for v in cost.iter() {
        if !v.is_finite() {
            return Err(Error::numerical("non-finite entry in assignment cost"));
        }
    }
    let sign = if maximize { -1.0 } else { 1.0 };
    let at = |i: usize, j: usize| sign * cost[(i, j)];

    // potentials u, v over rows and columns; p[j] = row matched to column j,
    // with column 0 as the virtual root (1-based indexing throughout)
    let mut u = vec![0.0f64; m + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for i in 1..=m {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = at(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; m];
    for j in 1..=m {
        assignment[p[j] - 1] = j - 1;
    }
    Ok(assignment)
}

/// Total cost of an assignment under a cost matrix.
pub fn assignment_value(cost: &DMatrix<f64>, assignment: &[usize]) -> f64 {
    assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[(i, j)])
        .sum()
}
