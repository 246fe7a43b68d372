//! Exhaustive seeded matching for small instances, used as a test oracle.

use super::sgm::split_unseeded;
use super::{edge_disagreements, Matching};
use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use crate::seedsel::SeedSet;
use itertools::Itertools;

/// Largest unseeded count the exhaustive search accepts.
pub const BRUTE_FORCE_LIMIT: usize = 9;

/// Tries every unseeded bijection and keeps the first minimizer of the
/// edge-disagreement count in lexicographic enumeration order.
pub fn brute_force_match(a: &SparseGraph, b: &SparseGraph, seeds: &SeedSet) -> Result<Matching> {
    let (unseeded1, unseeded2) = split_unseeded(a, b, seeds)?;
    let m = unseeded1.len();
    if m > BRUTE_FORCE_LIMIT {
        return Err(Error::param(format!(
            "exhaustive matching over {m} unseeded vertices exceeds the {BRUTE_FORCE_LIMIT} limit"
        )));
    }

    let mut base = vec![usize::MAX; a.n()];
    for (u, v) in seeds.iter() {
        base[u] = v;
    }
    if m == 0 {
        let objective = edge_disagreements(a, b, &base)?;
        return Ok(Matching {
            pairs: Vec::new(),
            unmatched1: Vec::new(),
            unmatched2: Vec::new(),
            objective,
        });
    }

    let mut best: Option<(usize, Vec<usize>)> = None;
    for perm in (0..m).permutations(m) {
        let mut alignment = base.clone();
        for (i, &j) in perm.iter().enumerate() {
            alignment[unseeded1[i]] = unseeded2[j];
        }
        let objective = edge_disagreements(a, b, &alignment)?;
        if best.as_ref().is_none_or(|(cur, _)| objective < *cur) {
            best = Some((objective, perm));
        }
    }
    let (objective, perm) = best.expect("m >= 1 enumerates at least one bijection");
    let pairs = perm
        .iter()
        .enumerate()
        .map(|(i, &j)| (unseeded1[i], unseeded2[j]))
        .collect();
    Ok(Matching {
        pairs,
        unmatched1: Vec::new(),
        unmatched2: Vec::new(),
        objective,
    })
}
