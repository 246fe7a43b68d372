//! Within-cluster seeded matching: an exact assignment solver, a
//! Frank-Wolfe relaxation matcher, an exhaustive oracle, and the shared
//! disagreement objective.

mod brute;
mod lap;
mod sgm;

pub use brute::{brute_force_match, BRUTE_FORCE_LIMIT};
pub use lap::{assignment_value, lap_solve};
pub use sgm::{sgm_match, DoublyStochastic, SgmSolve, DEFAULT_MAX_ITERS};

/// Test support: the relaxed objective and its analytic gradient at an
/// arbitrary point of the assignment polytope.
#[doc(hidden)]
pub fn relaxed_objective_gradient(
    a: &SparseGraph,
    b: &SparseGraph,
    seeds: &SeedSet,
    p: &nalgebra::DMatrix<f64>,
) -> Result<(f64, nalgebra::DMatrix<f64>)> {
    let (unseeded1, unseeded2) = sgm::split_unseeded(a, b, seeds)?;
    let blocks = sgm::SgmBlocks::build(a, b, seeds, &unseeded1, &unseeded2);
    Ok((blocks.objective(p), blocks.gradient(p)))
}

use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use crate::seedsel::SeedSet;
use std::io::Write;

/// Correspondence between the unseeded vertices of two graphs. Vertices
/// only present because of padding are reported unmatched instead of
/// paired.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    /// Matched (graph-1, graph-2) vertex pairs, ascending in the graph-1
    /// vertex.
    pub pairs: Vec<(usize, usize)>,
    /// Graph-1 vertices left without a real partner, ascending.
    pub unmatched1: Vec<usize>,
    /// Graph-2 vertices left without a real partner, ascending.
    pub unmatched2: Vec<usize>,
    /// Edge disagreements of the full alignment this matching came from.
    pub objective: usize,
}

impl Matching {
    /// Total alignment over graphs of order `n`: seed pairs plus matched
    /// pairs. Fails unless that covers every vertex exactly once.
    pub fn full_alignment(&self, seeds: &SeedSet, n: usize) -> Result<Vec<usize>> {
        let mut alignment = vec![usize::MAX; n];
        for (u, v) in seeds.iter().chain(self.pairs.iter().copied()) {
            if u >= n || v >= n {
                return Err(Error::param(format!(
                    "pair ({u}, {v}) outside graphs of order {n}"
                )));
            }
            if alignment[u] != usize::MAX {
                return Err(Error::param(format!("vertex {u} matched twice")));
            }
            alignment[u] = v;
        }
        if alignment.contains(&usize::MAX) {
            return Err(Error::param("matching does not cover every vertex"));
        }
        Ok(alignment)
    }
}

/// Edges of either graph not preserved by the alignment:
/// |E1| + |E2| - 2 · (edges mapped onto edges). `alignment[u]` is the
/// graph-2 partner of graph-1 vertex `u`; it must be a total bijection
/// between equal-order graphs.
pub fn edge_disagreements(a: &SparseGraph, b: &SparseGraph, alignment: &[usize]) -> Result<usize> {
    if a.n() != b.n() {
        return Err(Error::param(format!(
            "disagreement count needs equal orders, got {} and {}",
            a.n(),
            b.n()
        )));
    }
    if alignment.len() != a.n() {
        return Err(Error::param(format!(
            "alignment has {} entries for graphs of order {}",
            alignment.len(),
            a.n()
        )));
    }
    let mut hit = vec![false; b.n()];
    for &v in alignment {
        if v >= b.n() {
            return Err(Error::param(format!("alignment target {v} out of range")));
        }
        if hit[v] {
            return Err(Error::param(format!("alignment maps twice onto {v}")));
        }
        hit[v] = true;
    }
    let preserved = a
        .edges()
        .filter(|&(u, v)| b.has_edge(alignment[u], alignment[v]))
        .count();
    Ok(a.num_edges() + b.num_edges() - 2 * preserved)
}

/// Matches graphs of unequal order by padding the smaller with isolated
/// vertices. Pairs that touch a padded vertex come back as unmatched
/// entries for the real side; the objective is that of the padded
/// problem.
pub fn pad_and_match(a: &SparseGraph, b: &SparseGraph, seeds: &SeedSet) -> Result<SgmSolve> {
    let n = a.n().max(b.n());
    let pad = |g: &SparseGraph| {
        let mut padded = SparseGraph::new(n);
        for (u, v) in g.edges() {
            padded.add_edge(u, v);
        }
        padded
    };
    let ap = pad(a);
    let bp = pad(b);
    let mut solve = sgm_match(&ap, &bp, seeds, DEFAULT_MAX_ITERS)?;

    let mut pairs = Vec::new();
    let mut unmatched1 = Vec::new();
    let mut unmatched2 = Vec::new();
    for &(u, v) in &solve.matching.pairs {
        match (u < a.n(), v < b.n()) {
            (true, true) => pairs.push((u, v)),
            (true, false) => unmatched1.push(u),
            (false, true) => unmatched2.push(v),
            (false, false) => {}
        }
    }
    unmatched1.sort_unstable();
    unmatched2.sort_unstable();
    solve.matching.pairs = pairs;
    solve.matching.unmatched1 = unmatched1;
    solve.matching.unmatched2 = unmatched2;
    Ok(solve)
}

/// Writes a matching as TSV with columns g1_vertex, g2_vertex, status.
/// Rows: seeds and matched pairs ascending in the graph-1 vertex, then
/// unmatched graph-1 vertices, then unmatched graph-2 vertices; a missing
/// side is "-".
pub fn write_matching_tsv<W: Write>(
    matching: &Matching,
    seeds: &SeedSet,
    mut out: W,
) -> Result<()> {
    writeln!(out, "g1_vertex\tg2_vertex\tstatus")?;
    let mut rows: Vec<(usize, usize, &str)> = seeds.iter().map(|(u, v)| (u, v, "seed")).collect();
    rows.extend(matching.pairs.iter().map(|&(u, v)| (u, v, "matched")));
    rows.sort_unstable();
    for (u, v, status) in rows {
        writeln!(out, "{u}\t{v}\t{status}")?;
    }
    for &u in &matching.unmatched1 {
        writeln!(out, "{u}\t-\tunmatched")?;
    }
    for &v in &matching.unmatched2 {
        writeln!(out, "-\t{v}\tunmatched")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{apply_permutation, Permutation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn er_graph(n: usize, p: f64, rng: &mut ChaCha8Rng) -> SparseGraph {
        let mut g = SparseGraph::new(n);
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.random::<f64>() < p {
                    g.add_edge(u, v);
                }
            }
        }
        g
    }

    #[test]
    fn identity_alignment_on_identical_graphs_has_zero_disagreements() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = er_graph(12, 0.4, &mut rng);
        let identity: Vec<usize> = (0..12).collect();
        assert_eq!(edge_disagreements(&g, &g, &identity).unwrap(), 0);
    }

    #[test]
    fn single_edge_against_empty_graph_counts_once() {
        let mut a = SparseGraph::new(2);
        a.add_edge(0, 1);
        let b = SparseGraph::new(2);
        assert_eq!(edge_disagreements(&a, &b, &[0, 1]).unwrap(), 1);
    }

    #[test]
    fn disagreements_match_the_frobenius_form() {
        // |E1| + |E2| - 2·preserved equals ||A - P B Pᵀ||² / 2 on 0/1
        // adjacency matrices
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let a = er_graph(8, 0.5, &mut rng);
            let b = er_graph(8, 0.5, &mut rng);
            let perm = Permutation::random(8, &mut rng);
            let alignment: Vec<usize> = (0..8).map(|u| perm.apply(u)).collect();
            let fast = edge_disagreements(&a, &b, &alignment).unwrap();
            let mut frob = 0.0;
            for u in 0..8 {
                for v in 0..8 {
                    let au = if a.has_edge(u, v) { 1.0 } else { 0.0 };
                    let bv = if b.has_edge(alignment[u], alignment[v]) {
                        1.0
                    } else {
                        0.0
                    };
                    frob += (au - bv) * (au - bv);
                }
            }
            assert_eq!(fast as f64, frob / 2.0);
        }
    }

    #[test]
    fn partial_or_repeating_alignments_rejected() {
        let g = SparseGraph::new(3);
        assert!(edge_disagreements(&g, &g, &[0, 1]).is_err());
        assert!(edge_disagreements(&g, &g, &[0, 0, 1]).is_err());
        assert!(edge_disagreements(&g, &g, &[0, 1, 3]).is_err());
        let h = SparseGraph::new(4);
        assert!(edge_disagreements(&g, &h, &[0, 1, 2]).is_err());
    }

    #[test]
    fn padding_matches_the_real_part_and_reports_the_rest() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = er_graph(12, 0.5, &mut rng);
        let perm = Permutation::random(12, &mut rng);
        let b12 = apply_permutation(&a, &perm).unwrap();
        // graph 2 grows three isolated vertices
        let mut b = SparseGraph::new(15);
        for (u, v) in b12.edges() {
            b.add_edge(u, v);
        }
        let seeds = SeedSet::new((0..3).map(|u| (u, perm.apply(u))).collect()).unwrap();
        let solve = pad_and_match(&a, &b, &seeds).unwrap();
        for &(u, v) in &solve.matching.pairs {
            assert!(u < 12 && v < 15);
            assert_eq!(v, perm.apply(u));
        }
        assert_eq!(solve.matching.pairs.len(), 9);
        assert!(solve.matching.unmatched1.is_empty());
        assert_eq!(solve.matching.unmatched2.len(), 3);
        assert!(solve.matching.unmatched2.iter().all(|&v| v >= 12));
    }

    #[test]
    fn padding_never_fabricates_a_pair_for_the_lone_vertex() {
        let a = SparseGraph::new(1);
        let mut b = SparseGraph::new(2);
        b.add_edge(0, 1);
        let seeds = SeedSet::new(vec![]).unwrap();
        let solve = pad_and_match(&a, &b, &seeds).unwrap();
        let real_pairs = solve.matching.pairs.len();
        assert!(real_pairs <= 1);
        assert_eq!(
            real_pairs + solve.matching.unmatched2.len(),
            2,
            "every graph-2 vertex accounted for"
        );
    }

    #[test]
    fn equal_orders_make_padding_a_no_op() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = er_graph(10, 0.4, &mut rng);
        let b = er_graph(10, 0.4, &mut rng);
        let seeds = SeedSet::new(vec![(0, 0), (1, 1)]).unwrap();
        let direct = sgm_match(&a, &b, &seeds, DEFAULT_MAX_ITERS).unwrap();
        let padded = pad_and_match(&a, &b, &seeds).unwrap();
        assert_eq!(direct.matching, padded.matching);
    }

    #[test]
    fn full_alignment_requires_total_coverage() {
        let matching = Matching {
            pairs: vec![(1, 2), (2, 1)],
            unmatched1: vec![],
            unmatched2: vec![],
            objective: 0,
        };
        let seeds = SeedSet::new(vec![(0, 0)]).unwrap();
        assert_eq!(matching.full_alignment(&seeds, 3).unwrap(), vec![0, 2, 1]);
        assert!(matching.full_alignment(&seeds, 4).is_err());
    }

    #[test]
    fn tsv_layout_is_stable() {
        let matching = Matching {
            pairs: vec![(1, 3), (4, 0)],
            unmatched1: vec![5],
            unmatched2: vec![6],
            objective: 2,
        };
        let seeds = SeedSet::new(vec![(2, 2)]).unwrap();
        let mut buf = Vec::new();
        write_matching_tsv(&matching, &seeds, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "g1_vertex\tg2_vertex\tstatus\n\
             1\t3\tmatched\n\
             2\t2\tseed\n\
             4\t0\tmatched\n\
             5\t-\tunmatched\n\
             -\t6\tunmatched\n"
        );
    }
}
