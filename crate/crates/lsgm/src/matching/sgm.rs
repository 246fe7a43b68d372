//! Seeded graph matching by Frank-Wolfe on the relaxed quadratic objective.
//!
//! With seed rows pinned to the identity block, the remaining permutation is
//! relaxed to a doubly stochastic matrix P and the quadratic
//! g(P) = tr(A22 P B22 Pᵀ) + 2 tr(A21 B21ᵀ Pᵀ) is ascended: linearize,
//! solve an assignment for the step direction, move by the closed-form
//! exact line step, and finally project onto permutations with one more
//! assignment solve. Adjacency blocks stay sparse throughout; the only
//! dense m×m objects are P and the seed-agreement matrix K = A21 B21ᵀ.

use super::lap::lap_solve;
use super::{edge_disagreements, Matching};
use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use crate::seedsel::SeedSet;
use nalgebra::DMatrix;

pub const DEFAULT_MAX_ITERS: usize = 30;

const STEP_TOL: f64 = 1e-9;
const REL_TOL: f64 = 1e-9;
const DS_TOL: f64 = 1e-7;

/// Frank-Wolfe iterate over the Birkhoff polytope.
#[derive(Debug, Clone)]
pub struct DoublyStochastic {
    pub p: DMatrix<f64>,
}

impl DoublyStochastic {
    /// Noninformative start: every entry 1/m.
    pub fn barycenter(m: usize) -> Self {
        DoublyStochastic {
            p: DMatrix::from_element(m, m, 1.0 / m as f64),
        }
    }

    /// Worst violation of nonnegativity or unit row/column sums.
    pub fn max_deviation(&self) -> f64 {
        let m = self.p.nrows();
        let mut worst = 0.0f64;
        for i in 0..m {
            worst = worst.max((self.p.row(i).sum() - 1.0).abs());
            worst = worst.max((self.p.column(i).sum() - 1.0).abs());
        }
        for &v in self.p.iter() {
            worst = worst.max(-v);
        }
        worst
    }
}

/// A solved within-cluster matching plus solver diagnostics.
#[derive(Debug, Clone)]
pub struct SgmSolve {
    pub matching: Matching,
    /// Frank-Wolfe iterations performed.
    pub iterations: usize,
    /// Relaxed objective at the start of each iteration, then after the
    /// final step; non-decreasing.
    pub relaxed_history: Vec<f64>,
    /// Largest doubly-stochastic violation seen across all iterates.
    pub stochasticity_error: f64,
}

/// Seed-respecting unseeded index split: vertices of each graph not pinned
/// by a seed, ascending.
pub(crate) fn split_unseeded(
    a: &SparseGraph,
    b: &SparseGraph,
    seeds: &SeedSet,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if a.n() != b.n() {
        return Err(Error::param(format!(
            "seeded matching needs equal orders, got {} and {}",
            a.n(),
            b.n()
        )));
    }
    let n = a.n();
    let mut seeded1 = vec![false; n];
    let mut seeded2 = vec![false; n];
    for (u, v) in seeds.iter() {
        if u >= n || v >= n {
            return Err(Error::param(format!(
                "seed pair ({u}, {v}) outside graphs of order {n}"
            )));
        }
        seeded1[u] = true;
        seeded2[v] = true;
    }
    let unseeded1 = (0..n).filter(|&v| !seeded1[v]).collect();
    let unseeded2 = (0..n).filter(|&v| !seeded2[v]).collect();
    Ok((unseeded1, unseeded2))
}

/// Sparse blocks of the seeded problem in local unseeded indexing.
pub(crate) struct SgmBlocks {
    pub(crate) m: usize,
    a22: Vec<Vec<u32>>,
    b22: Vec<Vec<u32>>,
    /// K[i][j] = number of seeds adjacent to unseeded i in graph 1 and to
    /// unseeded j in graph 2.
    k: DMatrix<f64>,
}

impl SgmBlocks {
    pub(crate) fn build(
        a: &SparseGraph,
        b: &SparseGraph,
        seeds: &SeedSet,
        unseeded1: &[usize],
        unseeded2: &[usize],
    ) -> Self {
        let m = unseeded1.len();
        let n = a.n();
        let mut local1 = vec![usize::MAX; n];
        let mut local2 = vec![usize::MAX; n];
        for (i, &v) in unseeded1.iter().enumerate() {
            local1[v] = i;
        }
        for (i, &v) in unseeded2.iter().enumerate() {
            local2[v] = i;
        }
        let block = |g: &SparseGraph, members: &[usize], local: &[usize]| {
            members
                .iter()
                .map(|&v| {
                    g.neighbors(v)
                        .iter()
                        .filter_map(|&w| {
                            let l = local[w as usize];
                            (l != usize::MAX).then_some(l as u32)
                        })
                        .collect()
                })
                .collect::<Vec<Vec<u32>>>()
        };
        let a22 = block(a, unseeded1, &local1);
        let b22 = block(b, unseeded2, &local2);

        let mut k = DMatrix::<f64>::zeros(m, m);
        for (u, v) in seeds.iter() {
            let from1: Vec<usize> = a
                .neighbors(u)
                .iter()
                .filter_map(|&w| {
                    let l = local1[w as usize];
                    (l != usize::MAX).then_some(l)
                })
                .collect();
            let into2: Vec<usize> = b
                .neighbors(v)
                .iter()
                .filter_map(|&w| {
                    let l = local2[w as usize];
                    (l != usize::MAX).then_some(l)
                })
                .collect();
            for &i in &from1 {
                for &j in &into2 {
                    k[(i, j)] += 1.0;
                }
            }
        }
        SgmBlocks { m, a22, b22, k }
    }

    /// A22 · X for dense X.
    fn premultiply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let m = self.m;
        let mut out = DMatrix::<f64>::zeros(m, x.ncols());
        for i in 0..m {
            for &u in &self.a22[i] {
                let u = u as usize;
                for c in 0..x.ncols() {
                    out[(i, c)] += x[(u, c)];
                }
            }
        }
        out
    }

    /// X · B22 for dense X.
    fn postmultiply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let m = self.m;
        let mut out = DMatrix::<f64>::zeros(x.nrows(), m);
        for c in 0..m {
            for &j in &self.b22[c] {
                let j = j as usize;
                for r in 0..x.nrows() {
                    out[(r, c)] += x[(r, j)];
                }
            }
        }
        out
    }

    /// A22 · P · B22 as a dense matrix.
    fn apb(&self, p: &DMatrix<f64>) -> DMatrix<f64> {
        self.premultiply(&self.postmultiply(p))
    }

    /// A22 · Q · B22 for a permutation direction Q.
    fn aqb(&self, q: &[usize]) -> DMatrix<f64> {
        let m = self.m;
        let mut qb = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            for &c in &self.b22[q[i]] {
                qb[(i, c as usize)] = 1.0;
            }
        }
        self.premultiply(&qb)
    }

    /// Relaxed objective g(P).
    pub(crate) fn objective(&self, p: &DMatrix<f64>) -> f64 {
        frob_dot(&self.apb(p), p) + 2.0 * frob_dot(&self.k, p)
    }

    /// Analytic gradient 2·A22·P·B22 + 2·K.
    pub(crate) fn gradient(&self, p: &DMatrix<f64>) -> DMatrix<f64> {
        let mut g = self.apb(p);
        g.scale_mut(2.0);
        g += self.k.scale(2.0);
        g
    }
}

fn frob_dot(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b).sum()
}

fn perm_dot(x: &DMatrix<f64>, q: &[usize]) -> f64 {
    q.iter().enumerate().map(|(i, &j)| x[(i, j)]).sum()
}

/// Step maximizing aα² + bα over [0, 1].
fn optimal_step(a: f64, b: f64) -> f64 {
    if a < 0.0 {
        (-b / (2.0 * a)).clamp(0.0, 1.0)
    } else if a > 0.0 || b > 0.0 {
        if a + b > 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        0.0
    }
}

/// Matches the unseeded vertices of two equal-order graphs, holding the
/// seed correspondence fixed. `max_iters` caps Frank-Wolfe iterations.
pub fn sgm_match(
    a: &SparseGraph,
    b: &SparseGraph,
    seeds: &SeedSet,
    max_iters: usize,
) -> Result<SgmSolve> {
    let (unseeded1, unseeded2) = split_unseeded(a, b, seeds)?;
    let m = unseeded1.len();
    if m == 0 {
        let mut alignment = vec![usize::MAX; a.n()];
        for (u, v) in seeds.iter() {
            alignment[u] = v;
        }
        let objective = edge_disagreements(a, b, &alignment)?;
        return Ok(SgmSolve {
            matching: Matching {
                pairs: Vec::new(),
                unmatched1: Vec::new(),
                unmatched2: Vec::new(),
                objective,
            },
            iterations: 0,
            relaxed_history: Vec::new(),
            stochasticity_error: 0.0,
        });
    }

    let blocks = SgmBlocks::build(a, b, seeds, &unseeded1, &unseeded2);
    let mut p = DoublyStochastic::barycenter(m);
    let mut history = Vec::new();
    let mut ds_err = p.max_deviation();
    let mut iterations = 0;

    for _ in 0..max_iters {
        let g_mat = blocks.apb(&p.p);
        let g_p = frob_dot(&g_mat, &p.p);
        let k_p = frob_dot(&blocks.k, &p.p);
        history.push(g_p + 2.0 * k_p);

        let dir_cost = &g_mat + &blocks.k;
        let q = lap_solve(&dir_cost, true)?;
        let h_mat = blocks.aqb(&q);

        let h_p = frob_dot(&h_mat, &p.p);
        let g_q = perm_dot(&g_mat, &q);
        let h_q = perm_dot(&h_mat, &q);
        let k_q = perm_dot(&blocks.k, &q);
        let a_quad = h_q - g_q - h_p + g_p;
        let b_lin = 2.0 * (h_p - g_p) + 2.0 * (k_q - k_p);

        let alpha = optimal_step(a_quad, b_lin);
        iterations += 1;
        if alpha <= 0.0 {
            break;
        }
        p.p.scale_mut(1.0 - alpha);
        for i in 0..m {
            p.p[(i, q[i])] += alpha;
        }
        ds_err = ds_err.max(p.max_deviation());
        debug_assert!(p.max_deviation() <= DS_TOL, "iterate left the polytope");

        let gain = alpha * b_lin + alpha * alpha * a_quad;
        debug_assert!(gain >= -1e-9, "line search must not decrease g");
        let scale = history.last().unwrap().abs().max(1.0);
        if alpha < STEP_TOL || gain <= REL_TOL * scale {
            break;
        }
    }
    history.push(blocks.objective(&p.p));

    let proj = lap_solve(&p.p, true)?;
    let mut alignment = vec![usize::MAX; a.n()];
    for (u, v) in seeds.iter() {
        alignment[u] = v;
    }
    let mut pairs = Vec::with_capacity(m);
    for (i, &u) in unseeded1.iter().enumerate() {
        let v = unseeded2[proj[i]];
        alignment[u] = v;
        pairs.push((u, v));
    }
    let objective = edge_disagreements(a, b, &alignment)?;
    Ok(SgmSolve {
        matching: Matching {
            pairs,
            unmatched1: Vec::new(),
            unmatched2: Vec::new(),
            objective,
        },
        iterations,
        relaxed_history: history,
        stochasticity_error: ds_err,
    })
}
