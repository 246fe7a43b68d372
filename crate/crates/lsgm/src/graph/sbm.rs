//! Correlated stochastic block model pair generation.
//!
//! Both graphs share one latent position matrix. Graph 1 is drawn edgewise
//! Bernoulli(D(u,v)) with D = X Xᵀ; graph 2 is drawn conditionally on graph 1
//! so that corresponding edge indicators have correlation rho. Vertex labels
//! line up across the pair, so the ground-truth alignment is the identity.

use crate::error::{Error, Result};
use crate::graph::{Permutation, SparseGraph};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Block-collapsed SBM parameters: K blocks with sizes n⃗ and a K×d latent
/// matrix whose rows are the distinct block positions.
#[derive(Debug, Clone)]
pub struct SbmParams {
    block_sizes: Vec<usize>,
    latent: DMatrix<f64>,
    block_start: Vec<usize>,
}

impl SbmParams {
    pub fn from_latent(block_sizes: Vec<usize>, latent: DMatrix<f64>) -> Result<Self> {
        if block_sizes.is_empty() || block_sizes.iter().any(|&s| s == 0) {
            return Err(Error::param("block sizes must be nonempty and positive"));
        }
        if latent.nrows() != block_sizes.len() {
            return Err(Error::param(format!(
                "latent has {} rows but there are {} blocks",
                latent.nrows(),
                block_sizes.len()
            )));
        }
        let k = block_sizes.len();
        for i in 0..k {
            for j in i..k {
                let p = latent.row(i).dot(&latent.row(j));
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::param(format!(
                        "latent rows {i},{j} give edge probability {p} outside [0,1]"
                    )));
                }
            }
            if (0..k).any(|j| j != i && (latent.row(i) - latent.row(j)).norm() == 0.0) {
                return Err(Error::param(format!("latent row {i} duplicated")));
            }
        }
        let mut block_start = Vec::with_capacity(k + 1);
        let mut acc = 0;
        for &s in &block_sizes {
            block_start.push(acc);
            acc += s;
        }
        block_start.push(acc);
        Ok(SbmParams {
            block_sizes,
            latent,
            block_start,
        })
    }

    /// Factors a symmetric PSD K×K block probability matrix into latent
    /// positions. Rejects matrices with meaningfully negative eigenvalues.
    pub fn from_probability_matrix(block_sizes: Vec<usize>, b: DMatrix<f64>) -> Result<Self> {
        let k = b.nrows();
        if b.ncols() != k {
            return Err(Error::param("probability matrix must be square"));
        }
        if (&b - b.transpose()).amax() > 1e-12 {
            return Err(Error::param("probability matrix must be symmetric"));
        }
        let eig = nalgebra::SymmetricEigen::new(b.clone());
        let lmax = eig.eigenvalues.amax().max(1.0);
        if eig.eigenvalues.iter().any(|&l| l < -1e-9 * lmax) {
            return Err(Error::param(
                "probability matrix is not positive semidefinite; no latent factorization exists",
            ));
        }
        let kept: Vec<usize> = (0..k).filter(|&i| eig.eigenvalues[i] > 1e-12 * lmax).collect();
        let mut latent = DMatrix::zeros(k, kept.len());
        for (c, &i) in kept.iter().enumerate() {
            let scale = eig.eigenvalues[i].sqrt();
            for r in 0..k {
                latent[(r, c)] = eig.eigenvectors[(r, i)] * scale;
            }
        }
        let params = Self::from_latent(block_sizes, latent)?;
        let err = (params.block_matrix() - &b).amax();
        if err > 1e-8 {
            return Err(Error::param(format!(
                "probability matrix factorization residual {err:.2e}"
            )));
        }
        Ok(params)
    }

    pub fn n(&self) -> usize {
        *self.block_start.last().unwrap()
    }

    pub fn num_blocks(&self) -> usize {
        self.block_sizes.len()
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn latent(&self) -> &DMatrix<f64> {
        &self.latent
    }

    pub fn block_of(&self, v: usize) -> usize {
        debug_assert!(v < self.n());
        match self.block_start[1..].binary_search(&(v + 1)) {
            Ok(i) => i,
            Err(i) => i,
        }
    }

    /// Vertices of one block, in natural order.
    pub fn block_vertices(&self, b: usize) -> std::ops::Range<usize> {
        self.block_start[b]..self.block_start[b + 1]
    }

    /// Edge probability for a vertex pair.
    pub fn prob(&self, u: usize, v: usize) -> f64 {
        self.latent
            .row(self.block_of(u))
            .dot(&self.latent.row(self.block_of(v)))
    }

    /// K×K matrix of block-to-block edge probabilities, X Xᵀ.
    pub fn block_matrix(&self) -> DMatrix<f64> {
        &self.latent * self.latent.transpose()
    }
}

/// A rho-correlated graph pair with identity ground-truth alignment.
#[derive(Debug, Clone)]
pub struct CorrelatedPair {
    pub g1: SparseGraph,
    pub g2: SparseGraph,
    pub rho: f64,
    pub truth: Permutation,
    pub params: SbmParams,
}

impl CorrelatedPair {
    pub fn block_of(&self, v: usize) -> usize {
        self.params.block_of(v)
    }
}

/// Draws the pair. Both graphs consume dedicated RNG streams in lexicographic
/// vertex-pair order, so results are reproducible for a given seed.
pub fn generate_correlated_sbm(params: &SbmParams, rho: f64, rng_seed: u64) -> Result<CorrelatedPair> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::param(format!("rho={rho} outside [0,1]")));
    }
    let n = params.n();
    let mut rng1 = ChaCha8Rng::seed_from_u64(rng_seed);
    rng1.set_stream(0);
    let mut rng2 = ChaCha8Rng::seed_from_u64(rng_seed);
    rng2.set_stream(1);

    let mut g1 = SparseGraph::new(n);
    for u in 0..n {
        for v in (u + 1)..n {
            if rng1.random::<f64>() < params.prob(u, v) {
                g1.add_edge(u, v);
            }
        }
    }
    let mut g2 = SparseGraph::new(n);
    for u in 0..n {
        for v in (u + 1)..n {
            let d = params.prob(u, v);
            let p = if g1.has_edge(u, v) {
                d + rho * (1.0 - d)
            } else {
                d * (1.0 - rho)
            };
            if rng2.random::<f64>() < p {
                g2.add_edge(u, v);
            }
        }
    }
    Ok(CorrelatedPair {
        g1,
        g2,
        rho,
        truth: Permutation::identity(n),
        params: params.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_block(n_per: usize) -> SbmParams {
        // within 0.6, across 0.3
        let b = DMatrix::from_row_slice(2, 2, &[0.6, 0.3, 0.3, 0.6]);
        SbmParams::from_probability_matrix(vec![n_per, n_per], b).unwrap()
    }

    #[test]
    fn probability_matrix_roundtrip() {
        let p = two_block(50);
        let d = p.block_matrix();
        assert!((d[(0, 0)] - 0.6).abs() < 1e-12);
        assert!((d[(0, 1)] - 0.3).abs() < 1e-12);
        assert_eq!(p.n(), 100);
        assert_eq!(p.block_of(49), 0);
        assert_eq!(p.block_of(50), 1);
    }

    #[test]
    fn indefinite_probability_matrix_rejected() {
        let b = DMatrix::from_row_slice(2, 2, &[0.1, 0.9, 0.9, 0.1]);
        assert!(SbmParams::from_probability_matrix(vec![5, 5], b).is_err());
    }

    #[test]
    fn out_of_range_latent_rejected() {
        let latent = DMatrix::from_row_slice(2, 1, &[0.9, 1.2]);
        assert!(SbmParams::from_latent(vec![3, 3], latent).is_err());
    }

    #[test]
    fn invalid_rho_rejected() {
        let p = two_block(5);
        assert!(generate_correlated_sbm(&p, 1.5, 0).is_err());
        assert!(generate_correlated_sbm(&p, -0.1, 0).is_err());
    }

    #[test]
    fn rho_one_copies_the_edge_set() {
        let p = two_block(30);
        let pair = generate_correlated_sbm(&p, 1.0, 42).unwrap();
        assert_eq!(pair.g1, pair.g2);
    }

    #[test]
    fn same_seed_reproduces_the_pair() {
        let p = two_block(20);
        let a = generate_correlated_sbm(&p, 0.6, 7).unwrap();
        let b = generate_correlated_sbm(&p, 0.6, 7).unwrap();
        assert_eq!(a.g1, b.g1);
        assert_eq!(a.g2, b.g2);
    }

    #[test]
    fn rho_zero_indicators_uncorrelated() {
        // fixed within-block pair (0,1), 4000 replicates; under independence
        // the sample correlation is within 3/sqrt(N) of zero
        let p = two_block(2);
        let n_rep = 4000;
        let (mut c1, mut c2, mut c12) = (0u32, 0u32, 0u32);
        for rep in 0..n_rep {
            let pair = generate_correlated_sbm(&p, 0.0, 10_000 + rep).unwrap();
            let e1 = pair.g1.has_edge(0, 1);
            let e2 = pair.g2.has_edge(0, 1);
            c1 += e1 as u32;
            c2 += e2 as u32;
            c12 += (e1 && e2) as u32;
        }
        let nf = n_rep as f64;
        let (p1, p2, p12) = (c1 as f64 / nf, c2 as f64 / nf, c12 as f64 / nf);
        let r = (p12 - p1 * p2) / (p1 * (1.0 - p1) * p2 * (1.0 - p2)).sqrt();
        assert!(r.abs() < 0.06, "sample correlation {r} too far from 0");
    }

    #[test]
    fn joint_edge_probability_matches_closed_form() {
        // within-block pair at rho 0.9: P(edge in both) = 0.6^2 + 0.9*0.6*0.4
        let p = two_block(50);
        let mut draws = 0u64;
        let mut both = 0u64;
        for rep in 0..41 {
            let pair = generate_correlated_sbm(&p, 0.9, 500 + rep).unwrap();
            for b in 0..2 {
                let r = p.block_vertices(b);
                for u in r.clone() {
                    for v in (u + 1)..r.end {
                        draws += 1;
                        both += (pair.g1.has_edge(u, v) && pair.g2.has_edge(u, v)) as u64;
                    }
                }
            }
        }
        assert!(draws >= 100_000);
        let expect = 0.6f64 * 0.6 + 0.9 * 0.6 * 0.4;
        let got = both as f64 / draws as f64;
        // 3 sigma for this sample size is under 0.005
        assert!(
            (got - expect).abs() < 0.005,
            "joint probability {got} vs {expect}"
        );
    }

    #[test]
    fn g2_marginal_density_matches_d() {
        // conditional construction must leave graph 2's marginal at D(u,v)
        let p = two_block(50);
        let (mut within, mut across, mut wdraws, mut adraws) = (0u64, 0u64, 0u64, 0u64);
        for rep in 0..41 {
            let pair = generate_correlated_sbm(&p, 0.7, 900 + rep).unwrap();
            for u in 0..p.n() {
                for v in (u + 1)..p.n() {
                    let e = pair.g2.has_edge(u, v) as u64;
                    if p.block_of(u) == p.block_of(v) {
                        within += e;
                        wdraws += 1;
                    } else {
                        across += e;
                        adraws += 1;
                    }
                }
            }
        }
        let pw = within as f64 / wdraws as f64;
        let pa = across as f64 / adraws as f64;
        assert!((pw - 0.6).abs() < 0.005, "within-block marginal {pw}");
        assert!((pa - 0.3).abs() < 0.005, "across-block marginal {pa}");
    }
}
