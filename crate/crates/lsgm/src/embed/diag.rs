//! Embedding-regime diagnostics for block-model parameters.
//!
//! These quantify how well separated the model's latent positions are at a
//! given size: the normalized spectral gap of the expected adjacency, the
//! derived perturbation scale, and whether distinct latent rows clear the
//! separation threshold that guarantees cluster recovery asymptotically.
//! Nothing in the pipeline branches on them; they exist for reporting.

use crate::error::{Error, Result};
use crate::graph::SbmParams;
use nalgebra::{DMatrix, SymmetricEigen};

/// Minimum pairwise distance among the top d+1 eigenvalues of the expected
/// adjacency XXᵀ, divided by n. The nonzero spectrum of XXᵀ equals that of
/// Σ_b n_b x_bᵀx_b, so only a latent-dimension-sized solve is needed.
pub fn spectral_gap(params: &SbmParams, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::param("spectral gap needs d >= 1"));
    }
    let dim = params.latent().ncols();
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for b in 0..params.num_blocks() {
        let x = params.latent().row(b);
        let nb = params.block_sizes()[b] as f64;
        m += nb * x.transpose() * x;
    }
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 100_000)
        .ok_or_else(|| Error::numerical("eigensolver failed on the latent Gram matrix"))?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    vals.resize(vals.len().max(d + 1), 0.0);

    let n = params.n() as f64;
    let mut min_gap = f64::INFINITY;
    for i in 0..=d {
        for j in (i + 1)..=d {
            min_gap = min_gap.min((vals[i] - vals[j]).abs());
        }
    }
    Ok(min_gap / n)
}

/// Perturbation scale 260·d·ln(n) / (δ_d·√n).
pub fn perturbation_scale(n: usize, d: usize, delta: f64) -> f64 {
    let nf = n as f64;
    260.0 * d as f64 * nf.ln() / (delta * nf.sqrt())
}

/// Whether every pair of distinct latent rows is separated by more than
/// 6·n^{1/6} times the perturbation scale.
pub fn latent_rows_separated(params: &SbmParams, d: usize) -> Result<bool> {
    let delta = spectral_gap(params, d)?;
    if delta <= 0.0 {
        return Ok(false);
    }
    let n = params.n() as f64;
    let threshold = 6.0 * n.powf(1.0 / 6.0) * perturbation_scale(params.n(), d, delta);
    let latent = params.latent();
    for i in 0..latent.nrows() {
        for j in (i + 1)..latent.nrows() {
            let dist = (latent.row(i) - latent.row(j)).norm();
            if dist <= threshold {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
