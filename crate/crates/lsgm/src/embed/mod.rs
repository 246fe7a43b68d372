//! Adjacency spectral embedding and seed-anchored alignment.
//!
//! Each graph is embedded as the rows of U·S^{1/2} from its top-d adjacency
//! eigenpairs; the graph-1 embedding is then mapped onto graph-2's by the
//! orthogonal transform that best aligns the seed rows.

mod diag;
mod eigen;
mod procrustes;
mod scree;

pub use diag::{latent_rows_separated, perturbation_scale, spectral_gap};
pub use procrustes::{procrustes_align, OrthogonalTransform};
pub use scree::{estimate_dimension, DimensionEstimate};


use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use crate::seedsel::SeedSet;
use eigen::{top_eigenpairs, EigenPath, SymOp};
use nalgebra::{DMatrix, DVector};

/// Spectral embedding: row i is vertex i's position, coords = U·S^{1/2}.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub coords: DMatrix<f64>,
    pub eigenvalues: DVector<f64>,
}

impl Embedding {
    pub fn n(&self) -> usize {
        self.coords.nrows()
    }

    pub fn d(&self) -> usize {
        self.coords.ncols()
    }
}

/// Embeds a graph using its top-d adjacency eigenpairs. All d eigenvalues
/// must be positive for the square-root scaling to exist.
pub fn spectral_embed(g: &SparseGraph, d: usize) -> Result<Embedding> {
    let (values, vectors) = top_eigenpairs(&SymOp::Sparse(g), d, EigenPath::Auto)?;
    embedding_from_pairs(&values, &vectors, d)
}

/// Embeds an explicit symmetric matrix; used for expectation matrices and
/// anywhere the operator is not a graph.
pub fn embed_dense(mat: &DMatrix<f64>, d: usize) -> Result<Embedding> {
    if mat.nrows() != mat.ncols() {
        return Err(Error::param("embedding needs a square matrix"));
    }
    let asym = (mat - mat.transpose()).abs().max();
    if asym > 1e-12 {
        return Err(Error::param(format!(
            "embedding needs a symmetric matrix; max asymmetry {asym:e}"
        )));
    }
    let (values, vectors) = top_eigenpairs(&SymOp::Dense(mat), d, EigenPath::Auto)?;
    embedding_from_pairs(&values, &vectors, d)
}

/// Top-`count` eigenpairs of the adjacency with no positivity requirement;
/// the trial spectrum for dimension estimation.
pub(crate) fn graph_spectrum(
    g: &SparseGraph,
    count: usize,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    top_eigenpairs(&SymOp::Sparse(g), count, EigenPath::Auto)
}

/// Builds an embedding from the leading `d` of some already computed
/// eigenpairs, enforcing positivity of the used eigenvalues.
pub(crate) fn embedding_from_pairs(
    values: &DVector<f64>,
    vectors: &DMatrix<f64>,
    d: usize,
) -> Result<Embedding> {
    debug_assert!(d >= 1 && d <= values.len());
    let positive = values.iter().take_while(|&&v| v > 0.0).count();
    if positive < d {
        return Err(Error::EmbeddingRank {
            requested: d,
            max_valid: positive,
        });
    }
    let eigenvalues = DVector::from_iterator(d, values.iter().take(d).copied());
    let mut coords = vectors.columns(0, d).into_owned();
    for j in 0..d {
        let scale = eigenvalues[j].sqrt();
        coords.column_mut(j).scale_mut(scale);
    }
    Ok(Embedding { coords, eigenvalues })
}

/// Aligns the graph-1 embedding onto graph-2's by the Procrustes transform
/// fitted on the seed rows. Returns the aligned coordinates and the
/// transform (with its seed-row residual).
pub fn align_embeddings(
    xhat: &Embedding,
    yhat: &Embedding,
    seeds: &SeedSet,
) -> Result<(DMatrix<f64>, OrthogonalTransform)> {
    if seeds.is_empty() {
        return Err(Error::SeedlessAlignment);
    }
    if xhat.d() != yhat.d() {
        return Err(Error::param(format!(
            "embedding dimensions differ: {} vs {}",
            xhat.d(),
            yhat.d()
        )));
    }
    let d = xhat.d();
    let s = seeds.len();
    let mut xs = DMatrix::zeros(s, d);
    let mut ys = DMatrix::zeros(s, d);
    for (row, (u, v)) in seeds.iter().enumerate() {
        if u >= xhat.n() || v >= yhat.n() {
            return Err(Error::param(format!(
                "seed pair ({u}, {v}) outside embeddings of {} and {} rows",
                xhat.n(),
                yhat.n()
            )));
        }
        xs.row_mut(row).copy_from(&xhat.coords.row(u));
        ys.row_mut(row).copy_from(&yhat.coords.row(v));
    }
    let q = procrustes_align(&xs, &ys)?;
    let aligned = &xhat.coords * &q.matrix;
    Ok((aligned, q))
}

/// Writes coordinates as bare CSV, one vertex per row, at full f64
/// precision (17 significant digits).
pub fn write_embedding_csv<W: std::io::Write>(emb: &Embedding, mut w: W) -> std::io::Result<()> {
    for i in 0..emb.n() {
        for j in 0..emb.d() {
            if j > 0 {
                write!(w, ",")?;
            }
            write!(w, "{:.16e}", emb.coords[(i, j)])?;
        }
        writeln!(w)?;
    }
    Ok(())
}
