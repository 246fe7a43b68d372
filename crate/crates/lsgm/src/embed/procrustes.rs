//! Orthogonal Procrustes alignment of seed rows.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Orthogonal map fitted on seed rows, with its Frobenius fit residual.
#[derive(Debug, Clone)]
pub struct OrthogonalTransform {
    pub matrix: DMatrix<f64>,
    pub residual: f64,
}

/// Minimizes ‖xs·Q − ys‖_F over orthogonal Q via the singular value
/// decomposition of xsᵀys.
pub fn procrustes_align(xs: &DMatrix<f64>, ys: &DMatrix<f64>) -> Result<OrthogonalTransform> {
    if xs.shape() != ys.shape() {
        return Err(Error::param(format!(
            "anchor shapes differ: {:?} vs {:?}",
            xs.shape(),
            ys.shape()
        )));
    }
    if xs.nrows() == 0 {
        return Err(Error::param("Procrustes needs at least one anchor row"));
    }
    let m = xs.transpose() * ys;
    let svd = m
        .try_svd(true, true, 1e-14, 100_000)
        .ok_or_else(|| Error::numerical("SVD in Procrustes alignment did not converge"))?;
    let q = svd.u.unwrap() * svd.v_t.unwrap();
    let residual = (xs * &q - ys).norm();
    Ok(OrthogonalTransform { matrix: q, residual })
}
