//! Simple undirected graphs stored as sorted adjacency lists, plus the
//! vertex permutations used to hide ground-truth alignments in experiments.

mod io;
mod sbm;

pub use io::{load_edge_list, load_pairs_tsv, save_edge_list, save_pairs_tsv};
pub use sbm::{generate_correlated_sbm, CorrelatedPair, SbmParams};

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Undirected simple graph; no self-loops, no multi-edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseGraph {
    n: usize,
    adj: Vec<Vec<u32>>,
}

impl SparseGraph {
    pub fn new(n: usize) -> Self {
        SparseGraph {
            n,
            adj: vec![Vec::new(); n],
        }
    }

    /// Builds from an edge iterator, collapsing duplicates and orientations.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = SparseGraph::new(n);
        for (u, v) in edges {
            if u == v {
                return Err(Error::param(format!("self-loop at vertex {u}")));
            }
            if u >= n || v >= n {
                return Err(Error::param(format!(
                    "edge ({u},{v}) out of range for n={n}"
                )));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }

    /// Inserts {u,v} keeping both adjacency lists sorted; ignores duplicates.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        debug_assert!(u != v && u < self.n && v < self.n);
        let (u32v, v32v) = (u as u32, v as u32);
        if let Err(pos) = self.adj[u].binary_search(&v32v) {
            self.adj[u].insert(pos, v32v);
            let pos2 = self.adj[v].binary_search(&u32v).unwrap_err();
            self.adj[v].insert(pos2, u32v);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn neighbors(&self, u: usize) -> &[u32] {
        &self.adj[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&(v as u32)).is_ok()
    }

    /// Edges as (u, v) with u < v, lexicographically ordered.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, nb)| {
            nb.iter()
                .filter(move |&&v| (v as usize) > u)
                .map(move |&v| (u, v as usize))
        })
    }

    /// Subgraph induced by `vertices`, relabeled to 0..vertices.len() in the
    /// given order. Repeated vertices are rejected.
    pub fn induced(&self, vertices: &[usize]) -> Result<SparseGraph> {
        let mut pos = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            if v >= self.n {
                return Err(Error::param(format!("vertex {v} out of range")));
            }
            if pos[v] != usize::MAX {
                return Err(Error::param(format!("vertex {v} listed twice")));
            }
            pos[v] = i;
        }
        let mut g = SparseGraph::new(vertices.len());
        for (i, &v) in vertices.iter().enumerate() {
            for &w in &self.adj[v] {
                let j = pos[w as usize];
                if j != usize::MAX && j > i {
                    g.add_edge(i, j);
                }
            }
        }
        Ok(g)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for u in 0..self.n {
            for &v in &self.adj[u] {
                m[(u, v as usize)] = 1.0;
            }
        }
        m
    }

    /// y = A x, the adjacency operator applied to a vector.
    pub fn matvec(&self, x: &DVector<f64>, y: &mut DVector<f64>) {
        debug_assert_eq!(x.len(), self.n);
        for u in 0..self.n {
            let mut acc = 0.0;
            for &v in &self.adj[u] {
                acc += x[v as usize];
            }
            y[u] = acc;
        }
    }
}

/// Bijection on [n]; validated at construction so downstream code never
/// re-checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &v in &map {
            if v >= n || seen[v] {
                return Err(Error::param("not a bijection".to_string()));
            }
            seen[v] = true;
        }
        Ok(Permutation { map })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            map: (0..n).collect(),
        }
    }

    pub fn random(n: usize, rng: &mut impl rand::Rng) -> Self {
        use rand::seq::SliceRandom;
        let mut map: Vec<usize> = (0..n).collect();
        map.shuffle(rng);
        Permutation { map }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn apply(&self, v: usize) -> usize {
        self.map[v]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.map.len()];
        for (i, &v) in self.map.iter().enumerate() {
            inv[v] = i;
        }
        Permutation { map: inv }
    }
}

/// Relabels every edge {u,v} to {perm(u), perm(v)}.
pub fn apply_permutation(g: &SparseGraph, perm: &Permutation) -> Result<SparseGraph> {
    if perm.len() != g.n() {
        return Err(Error::param(format!(
            "permutation on {} vertices applied to graph with n={}",
            perm.len(),
            g.n()
        )));
    }
    SparseGraph::from_edges(g.n(), g.edges().map(|(u, v)| (perm.apply(u), perm.apply(v))))
}
