use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const EIGEN_FLOOR: f64 = 1e-12;
const RIDGE_SCALE: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SpdSolution {
    pub x: Vec<f64>,
    /// True when a ridge was added because `m` was (numerically) singular.
    pub regularized: bool,
}

/// Solves `m x = v` for a symmetric positive semi-definite `m` (row-major).
///
/// If the smallest eigenvalue falls below `1e-12 * trace / d`, the system
/// `(m + ridge I) x = v` with `ridge = 1e-10 * trace / d` is solved instead
/// and the result is flagged. An all-zero matrix uses an absolute ridge of
/// 1e-10.
pub fn solve_spd(m: &[Vec<f64>], v: &[f64]) -> Result<SpdSolution> {
    let d = v.len();
    if d == 0 || m.len() != d || m.iter().any(|row| row.len() != d) {
        return Err(Error::shape(format!("solve_spd: matrix is not {d}x{d}")));
    }
    let mut mat = DMatrix::from_fn(d, d, |i, j| m[i][j]);
    if mat.iter().chain(v.iter()).any(|x| !x.is_finite()) {
        return Err(Error::domain("solve_spd: non-finite input"));
    }
    let scale = mat.amax();
    for i in 0..d {
        for j in (i + 1)..d {
            if (mat[(i, j)] - mat[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(Error::shape(format!("solve_spd: matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    // symmetrize exactly so the eigen/Cholesky routines see one triangle's worth
    mat = (&mat + mat.transpose()) * 0.5;

    let mean_diag = mat.trace() / d as f64;
    let min_eig = mat.clone().symmetric_eigenvalues().min();
    let regularized = mean_diag <= 0.0 || min_eig < EIGEN_FLOOR * mean_diag;
    if regularized {
        let ridge = if mean_diag > 0.0 { RIDGE_SCALE * mean_diag } else { RIDGE_SCALE };
        for i in 0..d {
            mat[(i, i)] += ridge;
        }
    }
    let chol = mat
        .cholesky()
        .ok_or_else(|| Error::domain("solve_spd: matrix is not positive semi-definite"))?;
    let x = chol.solve(&DVector::from_column_slice(v));
    Ok(SpdSolution {
        x: x.iter().copied().collect(),
        regularized,
    })
}
