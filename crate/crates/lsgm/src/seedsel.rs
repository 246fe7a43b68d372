//! Entropy-guided seed selection.
//!
//! When a cluster's matching budget allows fewer seeds than are known, seeds
//! are picked greedily to maximize the summed Shannon entropy of the two
//! seed-to-cluster adjacency blocks. High-entropy seed rows split the cluster
//! vertices into many distinct connectivity patterns, which is what the
//! within-cluster matcher can actually exploit.

use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use std::collections::HashMap;

/// Ordered list of (g1_vertex, g2_vertex) correspondences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedSet {
    pairs: Vec<(usize, usize)>,
}

impl SeedSet {
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut left = std::collections::HashSet::new();
        let mut right = std::collections::HashSet::new();
        for &(u, v) in &pairs {
            if !left.insert(u) {
                return Err(Error::param(format!("graph-1 vertex {u} seeded twice")));
            }
            if !right.insert(v) {
                return Err(Error::param(format!("graph-2 vertex {v} seeded twice")));
            }
        }
        Ok(SeedSet { pairs })
    }

    /// Seeds a list of vertices to themselves, the generation-side default.
    pub fn identity(vertices: impl IntoIterator<Item = usize>) -> Self {
        SeedSet {
            pairs: vertices.into_iter().map(|v| (v, v)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }
}

/// Shannon entropy (base 2) of the empirical distribution of the columns of a
/// binary matrix, each column read as one word. No rows means one empty word
/// per column, hence zero entropy.
pub fn column_entropy(rows: &[Vec<bool>]) -> f64 {
    let m = match rows.first() {
        Some(r) => r.len(),
        None => return 0.0,
    };
    if m == 0 {
        return 0.0;
    }
    debug_assert!(rows.iter().all(|r| r.len() == m));
    let mut counts: HashMap<Vec<u64>, usize> = HashMap::new();
    for j in 0..m {
        let mut word = vec![0u64; rows.len().div_ceil(64)];
        for (i, row) in rows.iter().enumerate() {
            if row[j] {
                word[i / 64] |= 1 << (i % 64);
            }
        }
        *counts.entry(word).or_insert(0) += 1;
    }
    let mf = m as f64;
    -counts
        .values()
        .map(|&c| {
            let p = c as f64 / mf;
            p * p.log2()
        })
        .sum::<f64>()
}

/// One greedy step: the chosen seed index, every index that achieved the
/// maximal score (ties included), and the score itself.
#[derive(Debug, Clone)]
pub struct SelectionStep {
    pub chosen: usize,
    pub tied: Vec<usize>,
    pub score: f64,
}

/// Greedy selection result; `selected` preserves choice order and step
/// records keep the tie structure for diagnostics.
#[derive(Debug, Clone)]
pub struct SeedSelection {
    pub selected: SeedSet,
    pub steps: Vec<SelectionStep>,
}

/// Greedily picks `budget` seeds maximizing the summed column entropy of the
/// seed-to-cluster adjacency blocks in both graphs. Ties break toward the
/// lowest seed index.
pub fn select_seeds(
    a: &SparseGraph,
    b: &SparseGraph,
    all_seeds: &SeedSet,
    cluster1: &[usize],
    cluster2: &[usize],
    budget: usize,
) -> Result<SeedSelection> {
    if budget > all_seeds.len() {
        return Err(Error::param(format!(
            "budget {budget} exceeds available seeds {}",
            all_seeds.len()
        )));
    }
    if cluster1.is_empty() || cluster2.is_empty() {
        return Err(Error::param("cannot select seeds against an empty cluster"));
    }
    let rows1: Vec<Vec<bool>> = all_seeds
        .iter()
        .map(|(u, _)| cluster1.iter().map(|&c| a.has_edge(u, c)).collect())
        .collect();
    let rows2: Vec<Vec<bool>> = all_seeds
        .iter()
        .map(|(_, v)| cluster2.iter().map(|&c| b.has_edge(v, c)).collect())
        .collect();

    let mut chosen: Vec<usize> = Vec::with_capacity(budget);
    let mut steps = Vec::with_capacity(budget);
    while chosen.len() < budget {
        let mut best: Option<(f64, usize)> = None;
        let mut scores: Vec<(usize, f64)> = Vec::new();
        for j in 0..all_seeds.len() {
            if chosen.contains(&j) {
                continue;
            }
            let block1: Vec<Vec<bool>> = chosen
                .iter()
                .chain(std::iter::once(&j))
                .map(|&i| rows1[i].clone())
                .collect();
            let block2: Vec<Vec<bool>> = chosen
                .iter()
                .chain(std::iter::once(&j))
                .map(|&i| rows2[i].clone())
                .collect();
            let score = column_entropy(&block1) + column_entropy(&block2);
            scores.push((j, score));
            if best.is_none_or(|(s, _)| score > s) {
                best = Some((score, j));
            }
        }
        let (best_score, best_j) = best.unwrap();
        let tied: Vec<usize> = scores
            .iter()
            .filter(|&&(_, s)| s == best_score)
            .map(|&(j, _)| j)
            .collect();
        chosen.push(best_j);
        steps.push(SelectionStep {
            chosen: best_j,
            tied,
            score: best_score,
        });
    }
    let selected = SeedSet {
        pairs: chosen.iter().map(|&i| all_seeds.pairs[i]).collect(),
    };
    Ok(SeedSelection { selected, steps })
}
