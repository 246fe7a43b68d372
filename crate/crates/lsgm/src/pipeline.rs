//! End-to-end divide-and-conquer matching: embed both graphs, align the
//! embeddings on the seeds, jointly cluster the stacked points, balance
//! cluster sizes, re-cluster anything oversized on its seed-bordered
//! submatrices, match each cluster in parallel, and direct-sum the
//! per-cluster matchings into one alignment.

use crate::cluster::{kmeans, resolve_cluster_sizes, ClusterAssignment};
use crate::embed::{
    align_embeddings, embedding_from_pairs, estimate_dimension, graph_spectrum, spectral_embed,
    Embedding,
};
use crate::error::{Error, Result};
use crate::graph::{Permutation, SparseGraph};
use crate::matching::{
    brute_force_match, edge_disagreements, pad_and_match, sgm_match, Matching, DEFAULT_MAX_ITERS,
};
use crate::seedsel::{select_seeds, SeedSet};
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::time::Instant;

/// Within-cluster matching backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Matcher {
    #[default]
    Sgm,
    /// Exhaustive search; only viable when every cluster has at most
    /// 9 unseeded vertices.
    BruteForce,
}

/// Per-cluster seed budget policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeedBudget {
    /// min(total seeds, max_cluster_size / 4), keeping the bordered QAP
    /// size bounded.
    #[default]
    Auto,
    All,
    Count(usize),
}

#[derive(Debug, Clone)]
pub struct LsgmConfig {
    /// Embedding dimension; None estimates it from the spectrum.
    pub d: Option<usize>,
    /// Initial cluster count; None uses ceil(n / max_cluster_size).
    pub k: Option<usize>,
    /// Largest per-graph cluster size matched without re-clustering.
    pub max_cluster_size: usize,
    /// L2-normalize embedding rows before clustering.
    pub spherical: bool,
    pub seed_budget: SeedBudget,
    pub matcher: Matcher,
    /// Parallel matching workers.
    pub workers: usize,
    /// How many times an oversized cluster may be re-embedded and split.
    pub recluster_depth: usize,
    /// Seed for clustering initialization; everything else is
    /// deterministic.
    pub rng_seed: u64,
    /// Require equal orders and produce a total bijection. When false,
    /// clusters are matched after padding and padded partners are
    /// reported unmatched.
    pub bijective: bool,
}

impl Default for LsgmConfig {
    fn default() -> Self {
        LsgmConfig {
            d: None,
            k: None,
            max_cluster_size: 800,
            spherical: false,
            seed_budget: SeedBudget::Auto,
            matcher: Matcher::Sgm,
            workers: 1,
            recluster_depth: 2,
            rng_seed: 0,
            bijective: true,
        }
    }
}

impl LsgmConfig {
    fn validate(&self) -> Result<()> {
        if self.max_cluster_size < 2 {
            return Err(Error::param(format!(
                "max_cluster_size {} < 2",
                self.max_cluster_size
            )));
        }
        if self.workers == 0 {
            return Err(Error::param("workers must be at least 1"));
        }
        if self.d == Some(0) {
            return Err(Error::param("embedding dimension must be at least 1"));
        }
        if self.k == Some(0) {
            return Err(Error::param("cluster count must be at least 1"));
        }
        Ok(())
    }

    fn effective_budget(&self, total_seeds: usize) -> usize {
        match self.seed_budget {
            SeedBudget::Auto => total_seeds.min(self.max_cluster_size / 4),
            SeedBudget::All => total_seeds,
            SeedBudget::Count(c) => c.min(total_seeds),
        }
    }
}

/// Wall time per stage in seconds. Re-embedding during recursive
/// re-clustering is attributed to the cluster stage.
#[derive(Debug, Clone, Copy, Default)]
pub struct StageTimes {
    pub embed: f64,
    pub procrustes: f64,
    pub cluster: f64,
    pub matching: f64,
}

/// One matched cluster: its unseeded members per graph (original vertex
/// ids), the seeds its matcher used, and matcher diagnostics.
#[derive(Debug, Clone)]
pub struct ClusterRecord {
    pub members1: Vec<usize>,
    pub members2: Vec<usize>,
    /// Re-clustering depth at which this cluster was matched.
    pub depth: usize,
    pub seeds_used: Vec<(usize, usize)>,
    pub iterations: usize,
    pub disagreements: usize,
    pub match_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct LsgmResult {
    pub matching: Matching,
    pub clusters: Vec<ClusterRecord>,
    pub times: StageTimes,
    /// Embedding dimension actually used (0 when the run short-circuits
    /// on a fully seeded instance).
    pub d: usize,
    /// Initial cluster count actually used (0 when short-circuited).
    pub k: usize,
    pub warnings: Vec<String>,
    /// Fraction of unseeded graph-1 vertices matched to their true
    /// partner; present when a truth bijection was supplied.
    pub accuracy: Option<f64>,
}

impl LsgmResult {
    pub fn total_iterations(&self) -> usize {
        self.clusters.iter().map(|c| c.iterations).sum()
    }
}

/// Fraction of unseeded graph-1 vertices whose matched partner agrees
/// with `truth`. Unmatched vertices count as incorrect; no unseeded
/// vertices means 1.0.
pub fn accuracy(matching: &Matching, truth: &Permutation, seeds: &SeedSet) -> f64 {
    let n = truth.len();
    let mut seeded = vec![false; n];
    for (u, _) in seeds.iter() {
        if u < n {
            seeded[u] = true;
        }
    }
    let unseeded = seeded.iter().filter(|&&s| !s).count();
    if unseeded == 0 {
        return 1.0;
    }
    let correct = matching
        .pairs
        .iter()
        .filter(|&&(u, v)| u < n && !seeded[u] && truth.apply(u) == v)
        .count();
    correct as f64 / unseeded as f64
}

pub fn lsgm(
    a: &SparseGraph,
    b: &SparseGraph,
    seeds: &SeedSet,
    config: &LsgmConfig,
) -> Result<LsgmResult> {
    run(a, b, seeds, config, None)
}

/// As `lsgm`, additionally scoring the matching against a known truth
/// bijection.
pub fn lsgm_scored(
    a: &SparseGraph,
    b: &SparseGraph,
    seeds: &SeedSet,
    config: &LsgmConfig,
    truth: &Permutation,
) -> Result<LsgmResult> {
    run(a, b, seeds, config, Some(truth))
}

/// Unseeded cluster members in original vertex ids.
struct RawCluster {
    members1: Vec<usize>,
    members2: Vec<usize>,
    depth: usize,
}

struct TaskOutcome {
    record: ClusterRecord,
    pairs: Vec<(usize, usize)>,
    unmatched1: Vec<usize>,
    unmatched2: Vec<usize>,
}

fn run(
    a: &SparseGraph,
    b: &SparseGraph,
    seeds: &SeedSet,
    config: &LsgmConfig,
    truth: Option<&Permutation>,
) -> Result<LsgmResult> {
    config.validate()?;
    if config.bijective && a.n() != b.n() {
        return Err(Error::param(format!(
            "bijective matching needs equal orders, got {} and {}",
            a.n(),
            b.n()
        )));
    }
    if seeds.is_empty() {
        return Err(Error::SeedlessAlignment);
    }
    for (u, v) in seeds.iter() {
        if u >= a.n() || v >= b.n() {
            return Err(Error::param(format!(
                "seed pair ({u}, {v}) outside graphs of orders {} and {}",
                a.n(),
                b.n()
            )));
        }
    }
    if let Some(t) = truth {
        if t.len() != a.n() {
            return Err(Error::param(format!(
                "truth bijection covers {} vertices, graph 1 has {}",
                t.len(),
                a.n()
            )));
        }
    }

    let mut seeded1 = vec![false; a.n()];
    let mut seeded2 = vec![false; b.n()];
    for (u, v) in seeds.iter() {
        seeded1[u] = true;
        seeded2[v] = true;
    }
    let unseeded1: Vec<usize> = (0..a.n()).filter(|&v| !seeded1[v]).collect();
    let unseeded2: Vec<usize> = (0..b.n()).filter(|&v| !seeded2[v]).collect();
    if unseeded1.is_empty() && unseeded2.is_empty() {
        let matching = assemble(a, b, seeds, Vec::new(), config.bijective)?;
        let acc = truth.map(|t| accuracy(&matching, t, seeds));
        return Ok(LsgmResult {
            matching,
            clusters: Vec::new(),
            times: StageTimes::default(),
            d: 0,
            k: 0,
            warnings: Vec::new(),
            accuracy: acc,
        });
    }

    let mut warnings = Vec::new();

    let t = Instant::now();
    let (d, ea, eb) = resolve_embeddings(a, b, config, &mut warnings)?;
    let embed_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let (aligned, _transform) = align_embeddings(&ea, &eb, seeds)?;
    let procrustes_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let k = config
        .k
        .unwrap_or_else(|| a.n().max(b.n()).div_ceil(config.max_cluster_size))
        .max(1);
    let clusters = partition_from_embeddings(
        a,
        b,
        seeds,
        &aligned,
        &eb.coords,
        d,
        k,
        0,
        config,
        config.rng_seed,
        &mut warnings,
    )?;
    let cluster_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::numerical(format!("worker pool: {e}")))?;
    let outcomes: Result<Vec<TaskOutcome>> = pool.install(|| {
        clusters
            .par_iter()
            .enumerate()
            .map(|(i, c)| match_cluster(a, b, seeds, c, config).map_err(|e| e.in_cluster(i)))
            .collect()
    });
    let outcomes = outcomes?;
    let match_s = t.elapsed().as_secs_f64();

    let mut records = Vec::with_capacity(outcomes.len());
    let mut pairs = Vec::new();
    let mut unmatched1 = Vec::new();
    let mut unmatched2 = Vec::new();
    for o in outcomes {
        records.push(o.record);
        pairs.extend(o.pairs);
        unmatched1.extend(o.unmatched1);
        unmatched2.extend(o.unmatched2);
    }
    pairs.sort_unstable();
    unmatched1.sort_unstable();
    unmatched2.sort_unstable();

    let mut matching = assemble(a, b, seeds, pairs, config.bijective)?;
    matching.unmatched1 = unmatched1;
    matching.unmatched2 = unmatched2;
    let acc = truth.map(|t| accuracy(&matching, t, seeds));

    Ok(LsgmResult {
        matching,
        clusters: records,
        times: StageTimes {
            embed: embed_s,
            procrustes: procrustes_s,
            cluster: cluster_s,
            matching: match_s,
        },
        d,
        k,
        warnings,
        accuracy: acc,
    })
}

/// Builds the global matching and its objective from per-cluster pairs.
fn assemble(
    a: &SparseGraph,
    b: &SparseGraph,
    seeds: &SeedSet,
    pairs: Vec<(usize, usize)>,
    bijective: bool,
) -> Result<Matching> {
    let mut map = vec![usize::MAX; a.n()];
    for (u, v) in seeds.iter().chain(pairs.iter().copied()) {
        debug_assert_eq!(map[u], usize::MAX, "vertex {u} matched twice");
        map[u] = v;
    }
    let objective = if bijective {
        debug_assert!(!map.contains(&usize::MAX), "bijective matching not total");
        edge_disagreements(a, b, &map)?
    } else {
        let preserved = a
            .edges()
            .filter(|&(u, v)| {
                map[u] != usize::MAX && map[v] != usize::MAX && b.has_edge(map[u], map[v])
            })
            .count();
        a.num_edges() + b.num_edges() - 2 * preserved
    };
    Ok(Matching {
        pairs,
        unmatched1: Vec::new(),
        unmatched2: Vec::new(),
        objective,
    })
}

/// Embeds both graphs at the configured or estimated dimension.
fn resolve_embeddings(
    a: &SparseGraph,
    b: &SparseGraph,
    config: &LsgmConfig,
    warnings: &mut Vec<String>,
) -> Result<(usize, Embedding, Embedding)> {
    if let Some(d) = config.d {
        return Ok((d, spectral_embed(a, d)?, spectral_embed(b, d)?));
    }
    let n = a.n().min(b.n());
    let trial = ((a.n().max(b.n()) as f64).sqrt().ceil() as usize)
        .clamp(1, 50)
        .min(n);
    let (va, xa) = graph_spectrum(a, trial)?;
    let (vb, xb) = graph_spectrum(b, trial)?;
    let estimate = |values: &nalgebra::DVector<f64>| -> Result<usize> {
        if values.len() < 3 {
            return Ok(1);
        }
        let est = estimate_dimension(values.as_slice())?;
        Ok(est.d)
    };
    let d_hat = estimate(&va)?.min(estimate(&vb)?);
    let positives = |values: &nalgebra::DVector<f64>| values.iter().take_while(|&&x| x > 0.0).count();
    let d_use = d_hat.min(positives(&va)).min(positives(&vb));
    if d_use == 0 {
        return Err(Error::EmbeddingRank {
            requested: d_hat.max(1),
            max_valid: 0,
        });
    }
    if d_use < d_hat {
        warnings.push(format!(
            "estimated dimension {d_hat} lowered to {d_use} by the positive spectrum"
        ));
    }
    Ok((
        d_use,
        embedding_from_pairs(&va, &xa, d_use)?,
        embedding_from_pairs(&vb, &xb, d_use)?,
    ))
}

/// Embeds a subproblem pair at dimension `d`, lowering `d` if the
/// positive spectra cannot support it. None when no valid dimension
/// exists.
fn embed_pair_capped(
    a: &SparseGraph,
    b: &SparseGraph,
    d: usize,
    warnings: &mut Vec<String>,
) -> Result<Option<(usize, Embedding, Embedding)>> {
    let d_req = d.min(a.n()).min(b.n()).max(1);
    let (va, xa) = graph_spectrum(a, d_req)?;
    let (vb, xb) = graph_spectrum(b, d_req)?;
    let positives = |values: &nalgebra::DVector<f64>| values.iter().take_while(|&&x| x > 0.0).count();
    let d_use = d_req.min(positives(&va)).min(positives(&vb));
    if d_use == 0 {
        return Ok(None);
    }
    if d_use < d {
        warnings.push(format!(
            "re-clustering embedded at dimension {d_use} instead of {d}"
        ));
    }
    Ok(Some((
        d_use,
        embedding_from_pairs(&va, &xa, d_use)?,
        embedding_from_pairs(&vb, &xb, d_use)?,
    )))
}

fn branch_seed(seed: u64, rank: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(rank as u64 + 1)
}

/// Jointly clusters the aligned embeddings and recursively splits any
/// oversized cluster on its seed-bordered submatrices. Returned members
/// are in the ids of `a` and `b`.
#[allow(clippy::too_many_arguments)]
fn partition_from_embeddings(
    a: &SparseGraph,
    b: &SparseGraph,
    seeds: &SeedSet,
    aligned_x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    d: usize,
    k: usize,
    depth: usize,
    config: &LsgmConfig,
    rng_seed: u64,
    warnings: &mut Vec<String>,
) -> Result<Vec<RawCluster>> {
    let n1 = a.n();
    let n2 = b.n();
    let mut stacked = DMatrix::<f64>::zeros(n1 + n2, aligned_x.ncols());
    stacked.rows_mut(0, n1).copy_from(aligned_x);
    stacked.rows_mut(n1, n2).copy_from(y);

    let k_eff = k.clamp(1, n1 + n2);
    let assignment = kmeans(&stacked, k_eff, rng_seed, config.spherical)?;
    let mut labels = assignment.labels.clone();
    // a seed pair is one vertex in two graphs; force both copies into the
    // graph-2 copy's cluster
    for (u, v) in seeds.iter() {
        labels[u] = labels[n1 + v];
    }

    let mut seeded1 = vec![false; n1];
    let mut seeded2 = vec![false; n2];
    for (u, v) in seeds.iter() {
        seeded1[u] = true;
        seeded2[v] = true;
    }
    let unseeded1: Vec<usize> = (0..n1).filter(|&v| !seeded1[v]).collect();
    let unseeded2: Vec<usize> = (0..n2).filter(|&v| !seeded2[v]).collect();

    let groups: Vec<(Vec<usize>, Vec<usize>)> = if config.bijective {
        // balance per-graph sizes over the unseeded points only; seeds sit
        // in every matching subproblem regardless of their cluster
        let m = unseeded1.len();
        let mut reduced_labels = Vec::with_capacity(2 * m);
        let mut reduced_points = DMatrix::<f64>::zeros(2 * m, stacked.ncols());
        for (i, &u) in unseeded1.iter().enumerate() {
            reduced_labels.push(labels[u]);
            reduced_points.row_mut(i).copy_from(&stacked.row(u));
        }
        for (i, &v) in unseeded2.iter().enumerate() {
            reduced_labels.push(labels[n1 + v]);
            reduced_points
                .row_mut(m + i)
                .copy_from(&stacked.row(n1 + v));
        }
        let reduced = ClusterAssignment {
            labels: reduced_labels,
            centroids: assignment.centroids.clone(),
            objective: assignment.objective,
            objective_history: assignment.objective_history.clone(),
        };
        let resolved = resolve_cluster_sizes(&reduced, &reduced_points)?;
        resolved
            .clusters
            .iter()
            .map(|c| {
                (
                    c.members1.iter().map(|&l| unseeded1[l]).collect(),
                    c.members2.iter().map(|&l| unseeded2[l]).collect(),
                )
            })
            .collect()
    } else {
        (0..k_eff)
            .map(|label| {
                (
                    unseeded1
                        .iter()
                        .copied()
                        .filter(|&u| labels[u] == label)
                        .collect::<Vec<_>>(),
                    unseeded2
                        .iter()
                        .copied()
                        .filter(|&v| labels[n1 + v] == label)
                        .collect::<Vec<_>>(),
                )
            })
            .filter(|(m1, m2)| !m1.is_empty() || !m2.is_empty())
            .collect()
    };

    let s = seeds.len();
    let mut out = Vec::new();
    for (rank, (members1, members2)) in groups.into_iter().enumerate() {
        let size = members1.len().max(members2.len());
        if size > config.max_cluster_size && depth < config.recluster_depth {
            let order1: Vec<usize> = seeds
                .iter()
                .map(|(u, _)| u)
                .chain(members1.iter().copied())
                .collect();
            let order2: Vec<usize> = seeds
                .iter()
                .map(|(_, v)| v)
                .chain(members2.iter().copied())
                .collect();
            let sub_a = a.induced(&order1)?;
            let sub_b = b.induced(&order2)?;
            let sub_seeds = SeedSet::identity(0..s);
            let k_sub = size.div_ceil(config.max_cluster_size).max(2);
            let child = branch_seed(rng_seed, rank);
            let sub = partition_recursive(
                &sub_a, &sub_b, &sub_seeds, d, k_sub, depth + 1, config, child, warnings,
            )?;
            for c in sub {
                out.push(RawCluster {
                    members1: c.members1.iter().map(|&l| order1[l]).collect(),
                    members2: c.members2.iter().map(|&l| order2[l]).collect(),
                    depth: c.depth,
                });
            }
        } else {
            if size > config.max_cluster_size {
                warnings.push(format!(
                    "cluster of size {size} still exceeds {} at re-clustering depth {depth}; matching it whole",
                    config.max_cluster_size
                ));
            }
            out.push(RawCluster {
                members1,
                members2,
                depth,
            });
        }
    }
    Ok(out)
}

/// Re-embeds a seed-bordered subproblem and partitions it. Falls back to
/// a single unsplit cluster when the subproblem admits no embedding.
#[allow(clippy::too_many_arguments)]
fn partition_recursive(
    a: &SparseGraph,
    b: &SparseGraph,
    seeds: &SeedSet,
    d: usize,
    k: usize,
    depth: usize,
    config: &LsgmConfig,
    rng_seed: u64,
    warnings: &mut Vec<String>,
) -> Result<Vec<RawCluster>> {
    let s = seeds.len();
    match embed_pair_capped(a, b, d, warnings)? {
        Some((d_use, ea, eb)) => {
            let (aligned, _) = align_embeddings(&ea, &eb, seeds)?;
            partition_from_embeddings(
                a,
                b,
                seeds,
                &aligned,
                &eb.coords,
                d_use,
                k,
                depth,
                config,
                rng_seed,
                warnings,
            )
        }
        None => {
            warnings.push(format!(
                "oversized cluster has no positive spectrum to re-embed at depth {depth}; matching it whole"
            ));
            Ok(vec![RawCluster {
                members1: (s..a.n()).collect(),
                members2: (s..b.n()).collect(),
                depth,
            }])
        }
    }
}

/// Matches one cluster: select its seed subset, build the bordered
/// subgraphs, run the configured matcher, and map the result back to
/// original vertex ids.
fn match_cluster(
    a: &SparseGraph,
    b: &SparseGraph,
    all_seeds: &SeedSet,
    cluster: &RawCluster,
    config: &LsgmConfig,
) -> Result<TaskOutcome> {
    let start = Instant::now();
    let members1 = &cluster.members1;
    let members2 = &cluster.members2;

    if members1.is_empty() || members2.is_empty() {
        // nothing to pair against; only possible in non-bijective mode
        return Ok(TaskOutcome {
            record: ClusterRecord {
                members1: members1.clone(),
                members2: members2.clone(),
                depth: cluster.depth,
                seeds_used: Vec::new(),
                iterations: 0,
                disagreements: 0,
                match_seconds: start.elapsed().as_secs_f64(),
            },
            pairs: Vec::new(),
            unmatched1: members1.clone(),
            unmatched2: members2.clone(),
        });
    }

    let budget = config.effective_budget(all_seeds.len());
    let used: Vec<(usize, usize)> = if budget >= all_seeds.len() {
        all_seeds.iter().collect()
    } else {
        select_seeds(a, b, all_seeds, members1, members2, budget)?
            .selected
            .iter()
            .collect()
    };
    let s = used.len();

    let order1: Vec<usize> = used
        .iter()
        .map(|&(u, _)| u)
        .chain(members1.iter().copied())
        .collect();
    let order2: Vec<usize> = used
        .iter()
        .map(|&(_, v)| v)
        .chain(members2.iter().copied())
        .collect();
    let sub_a = a.induced(&order1)?;
    let sub_b = b.induced(&order2)?;
    let sub_seeds = SeedSet::identity(0..s);

    let (sub_matching, iterations) = match (config.matcher, config.bijective) {
        (Matcher::Sgm, true) => {
            let solve = sgm_match(&sub_a, &sub_b, &sub_seeds, DEFAULT_MAX_ITERS)?;
            (solve.matching, solve.iterations)
        }
        (Matcher::Sgm, false) => {
            let solve = pad_and_match(&sub_a, &sub_b, &sub_seeds)?;
            (solve.matching, solve.iterations)
        }
        (Matcher::BruteForce, true) => (brute_force_match(&sub_a, &sub_b, &sub_seeds)?, 0),
        (Matcher::BruteForce, false) => {
            let n = sub_a.n().max(sub_b.n());
            let pad = |g: &SparseGraph| {
                let mut p = SparseGraph::new(n);
                for (u, v) in g.edges() {
                    p.add_edge(u, v);
                }
                p
            };
            let padded = brute_force_match(&pad(&sub_a), &pad(&sub_b), &sub_seeds)?;
            let mut m = Matching {
                pairs: Vec::new(),
                unmatched1: Vec::new(),
                unmatched2: Vec::new(),
                objective: padded.objective,
            };
            for (u, v) in padded.pairs {
                match (u < sub_a.n(), v < sub_b.n()) {
                    (true, true) => m.pairs.push((u, v)),
                    (true, false) => m.unmatched1.push(u),
                    (false, true) => m.unmatched2.push(v),
                    (false, false) => {}
                }
            }
            (m, 0)
        }
    };

    let pairs: Vec<(usize, usize)> = sub_matching
        .pairs
        .iter()
        .map(|&(u, v)| (order1[u], order2[v]))
        .collect();
    let unmatched1: Vec<usize> = sub_matching.unmatched1.iter().map(|&u| order1[u]).collect();
    let unmatched2: Vec<usize> = sub_matching.unmatched2.iter().map(|&v| order2[v]).collect();

    Ok(TaskOutcome {
        record: ClusterRecord {
            members1: members1.clone(),
            members2: members2.clone(),
            depth: cluster.depth,
            seeds_used: used,
            iterations,
            disagreements: sub_matching.objective,
            match_seconds: start.elapsed().as_secs_f64(),
        },
        pairs,
        unmatched1,
        unmatched2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{apply_permutation, generate_correlated_sbm, SbmParams};
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

    fn identity_truth(n: usize) -> Permutation {
        Permutation::new((0..n).collect()).unwrap()
    }

    #[test]
    fn identical_graphs_recover_the_identity_in_every_replicate() {
        for rep in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + rep);
            let g = er_graph(60, 0.3, &mut rng);
            let seeds = SeedSet::identity(0..5);
            let config = LsgmConfig {
                k: Some(2),
                rng_seed: 7,
                ..LsgmConfig::default()
            };
            let result = lsgm_scored(&g, &g, &seeds, &config, &identity_truth(60)).unwrap();
            assert_eq!(result.accuracy, Some(1.0), "replicate {rep}");
            assert_eq!(result.matching.objective, 0, "replicate {rep}");
            assert!(result.times.embed >= 0.0 && result.times.matching >= 0.0);
        }
    }

    #[test]
    fn direct_sum_restriction_equals_each_cluster_matching() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let g = er_graph(80, 0.25, &mut rng);
        let seeds = SeedSet::identity(0..6);
        let config = LsgmConfig {
            k: Some(3),
            rng_seed: 11,
            ..LsgmConfig::default()
        };
        let result = lsgm(&g, &g, &seeds, &config).unwrap();
        assert!(!result.clusters.is_empty());
        let global: std::collections::HashMap<usize, usize> =
            result.matching.pairs.iter().copied().collect();
        for record in &result.clusters {
            // replay this cluster's matcher in isolation
            let order1: Vec<usize> = record
                .seeds_used
                .iter()
                .map(|&(u, _)| u)
                .chain(record.members1.iter().copied())
                .collect();
            let order2: Vec<usize> = record
                .seeds_used
                .iter()
                .map(|&(_, v)| v)
                .chain(record.members2.iter().copied())
                .collect();
            let sub_a = g.induced(&order1).unwrap();
            let sub_b = g.induced(&order2).unwrap();
            let sub_seeds = SeedSet::identity(0..record.seeds_used.len());
            let solve = sgm_match(&sub_a, &sub_b, &sub_seeds, DEFAULT_MAX_ITERS).unwrap();
            assert_eq!(solve.matching.objective, record.disagreements);
            for (u, v) in solve.matching.pairs {
                assert_eq!(global[&order1[u]], order2[v]);
            }
        }
    }

    #[test]
    fn worker_count_does_not_change_the_matching() {
        let params = SbmParams::from_probability_matrix(
            vec![50, 50],
            DMatrix::from_row_slice(2, 2, &[0.6, 0.2, 0.2, 0.6]),
        )
        .unwrap();
        let pair = generate_correlated_sbm(&params, 0.8, 99).unwrap();
        let seeds = SeedSet::identity(0..8);
        let mut outputs = Vec::new();
        for workers in [1, 2, 4] {
            let config = LsgmConfig {
                k: Some(2),
                workers,
                rng_seed: 5,
                ..LsgmConfig::default()
            };
            let result = lsgm(&pair.g1, &pair.g2, &seeds, &config).unwrap();
            let mut buf = Vec::new();
            crate::matching::write_matching_tsv(&result.matching, &seeds, &mut buf).unwrap();
            outputs.push((result.matching, buf));
        }
        assert_eq!(outputs[0].0, outputs[1].0);
        assert_eq!(outputs[0].0, outputs[2].0);
        assert_eq!(outputs[0].1, outputs[1].1, "TSV bytes differ");
        assert_eq!(outputs[0].1, outputs[2].1, "TSV bytes differ");
    }

    #[test]
    fn bijective_output_is_always_a_total_bijection() {
        let mut rng = ChaCha8Rng::seed_from_u64(7777);
        for case in 0..30 {
            let n = rng.random_range(20..80);
            let p = rng.random_range(0.1..0.5);
            let s = rng.random_range(1..6.min(n));
            let k = rng.random_range(1..4);
            let g1 = er_graph(n, p, &mut rng);
            let g2 = er_graph(n, p, &mut rng);
            let seeds = SeedSet::identity(0..s);
            let config = LsgmConfig {
                k: Some(k),
                rng_seed: case,
                seed_budget: if case % 3 == 0 {
                    SeedBudget::All
                } else {
                    SeedBudget::Auto
                },
                ..LsgmConfig::default()
            };
            let result = lsgm(&g1, &g2, &seeds, &config).unwrap();
            let alignment = result.matching.full_alignment(&seeds, n).unwrap();
            assert_eq!(alignment.len(), n, "case {case}");
            // every unseeded vertex sits in exactly one cluster
            let mut seen = vec![0usize; n];
            for record in &result.clusters {
                for &u in &record.members1 {
                    seen[u] += 1;
                }
            }
            for u in s..n {
                assert_eq!(seen[u], 1, "case {case}: vertex {u}");
            }
        }
    }

    #[test]
    fn oversized_clusters_are_split_by_reclustering() {
        let params = SbmParams::from_probability_matrix(
            vec![30, 30, 30, 30],
            DMatrix::from_row_slice(
                4,
                4,
                &[
                    0.6, 0.1, 0.1, 0.1, //
                    0.1, 0.6, 0.1, 0.1, //
                    0.1, 0.1, 0.6, 0.1, //
                    0.1, 0.1, 0.1, 0.6,
                ],
            ),
        )
        .unwrap();
        let pair = generate_correlated_sbm(&params, 1.0, 31).unwrap();
        let seeds = SeedSet::identity(0..8);
        let config = LsgmConfig {
            d: Some(4),
            k: Some(1),
            max_cluster_size: 40,
            rng_seed: 3,
            ..LsgmConfig::default()
        };
        let result =
            lsgm_scored(&pair.g1, &pair.g2, &seeds, &config, &identity_truth(120)).unwrap();
        assert!(
            result.clusters.iter().any(|c| c.depth >= 1),
            "no re-clustering happened"
        );
        for record in &result.clusters {
            assert!(
                record.members1.len() <= 40 || !result.warnings.is_empty(),
                "cluster of size {} left unsplit silently",
                record.members1.len()
            );
        }
        assert!(result.accuracy.unwrap() >= 0.95, "{:?}", result.accuracy);
    }

    #[test]
    fn depth_zero_matches_oversized_clusters_with_a_warning() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let g = er_graph(50, 0.3, &mut rng);
        let seeds = SeedSet::identity(0..4);
        let config = LsgmConfig {
            k: Some(1),
            max_cluster_size: 10,
            recluster_depth: 0,
            rng_seed: 1,
            ..LsgmConfig::default()
        };
        let result = lsgm(&g, &g, &seeds, &config).unwrap();
        assert_eq!(result.clusters.len(), 1);
        assert_eq!(result.clusters[0].depth, 0);
        assert!(result
            .warnings
            .iter()
            .any(|w| w.contains("still exceeds 10")));
    }

    #[test]
    fn accuracy_counts_only_unseeded_vertices() {
        let truth = identity_truth(10);
        let seeds = SeedSet::identity(0..2);
        let perfect = Matching {
            pairs: (2..10).map(|v| (v, v)).collect(),
            unmatched1: vec![],
            unmatched2: vec![],
            objective: 0,
        };
        assert_eq!(accuracy(&perfect, &truth, &seeds), 1.0);

        let mut swapped = perfect.clone();
        swapped.pairs[0] = (2, 3);
        swapped.pairs[1] = (3, 2);
        assert_eq!(accuracy(&swapped, &truth, &seeds), 6.0 / 8.0);

        let empty = Matching {
            pairs: vec![],
            unmatched1: (2..10).collect(),
            unmatched2: (2..10).collect(),
            objective: 0,
        };
        assert_eq!(accuracy(&empty, &truth, &seeds), 0.0);
    }

    #[test]
    fn random_bijections_score_near_chance() {
        let n = 50;
        let truth = identity_truth(n);
        let seeds = SeedSet::new(vec![]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        let reps = 2000;
        let mut total = 0.0;
        for _ in 0..reps {
            let perm = Permutation::random(n, &mut rng);
            let matching = Matching {
                pairs: (0..n).map(|u| (u, perm.apply(u))).collect(),
                unmatched1: vec![],
                unmatched2: vec![],
                objective: 0,
            };
            total += accuracy(&matching, &truth, &seeds);
        }
        let mean = total / reps as f64;
        let chance = 1.0 / n as f64;
        assert!(
            (mean - chance).abs() < chance,
            "mean {mean} not near chance {chance}"
        );
    }

    #[test]
    fn padding_mode_reports_surplus_vertices_unmatched() {
        let mut rng = ChaCha8Rng::seed_from_u64(808);
        let core = er_graph(30, 0.4, &mut rng);
        let mut b = SparseGraph::new(36);
        for (u, v) in core.edges() {
            b.add_edge(u, v);
        }
        let seeds = SeedSet::identity(0..3);
        let config = LsgmConfig {
            k: Some(1),
            bijective: false,
            rng_seed: 2,
            ..LsgmConfig::default()
        };
        let result = lsgm(&core, &b, &seeds, &config).unwrap();
        for &(u, v) in &result.matching.pairs {
            assert!(u < 30 && v < 36);
        }
        let matched2: std::collections::HashSet<usize> =
            result.matching.pairs.iter().map(|&(_, v)| v).collect();
        for &v in &result.matching.unmatched2 {
            assert!(!matched2.contains(&v));
        }
        assert_eq!(
            result.matching.pairs.len() + result.matching.unmatched2.len(),
            33,
            "all unseeded graph-2 vertices accounted round"
        );
    }

    #[test]
    fn auto_dimension_and_cluster_count_resolve_from_the_data() {
        let params = SbmParams::from_probability_matrix(
            vec![100, 100],
            DMatrix::from_row_slice(2, 2, &[0.6, 0.2, 0.2, 0.6]),
        )
        .unwrap();
        let pair = generate_correlated_sbm(&params, 0.9, 12).unwrap();
        let seeds = SeedSet::identity(0..6);
        let config = LsgmConfig {
            max_cluster_size: 50,
            rng_seed: 9,
            ..LsgmConfig::default()
        };
        let result = lsgm(&pair.g1, &pair.g2, &seeds, &config).unwrap();
        assert_eq!(result.d, 2, "two-block spectrum should give d = 2");
        assert_eq!(result.k, 4, "ceil(200 / 50)");
    }

    #[test]
    fn spherical_clustering_runs_end_to_end() {
        let mut rng = ChaCha8Rng::seed_from_u64(66);
        let g = er_graph(80, 0.5, &mut rng);
        let seeds = SeedSet::identity(0..5);
        let config = LsgmConfig {
            k: Some(2),
            spherical: true,
            rng_seed: 4,
            ..LsgmConfig::default()
        };
        let result = lsgm_scored(&g, &g, &seeds, &config, &identity_truth(80)).unwrap();
        assert_eq!(result.accuracy, Some(1.0));
    }

    #[test]
    fn fully_seeded_instance_short_circuits() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let g = er_graph(8, 0.5, &mut rng);
        let seeds = SeedSet::identity(0..8);
        let result = lsgm_scored(
            &g,
            &g,
            &seeds,
            &LsgmConfig::default(),
            &identity_truth(8),
        )
        .unwrap();
        assert!(result.matching.pairs.is_empty());
        assert_eq!(result.matching.objective, 0);
        assert_eq!(result.accuracy, Some(1.0));
        assert!(result.clusters.is_empty());
    }

    #[test]
    fn hidden_permutation_recovered_through_the_full_pipeline() {
        let mut rng = ChaCha8Rng::seed_from_u64(400);
        let a = er_graph(40, 0.3, &mut rng);
        let perm = Permutation::random(40, &mut rng);
        let b = apply_permutation(&a, &perm).unwrap();
        let seeds = SeedSet::new((0..3).map(|u| (u, perm.apply(u))).collect()).unwrap();
        let config = LsgmConfig {
            k: Some(1),
            rng_seed: 8,
            ..LsgmConfig::default()
        };
        let result = lsgm_scored(&a, &b, &seeds, &config, &perm).unwrap();
        assert_eq!(result.accuracy, Some(1.0));
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let g = SparseGraph::new(5);
        let h = SparseGraph::new(6);
        let seeds = SeedSet::identity(0..2);
        assert!(lsgm(&g, &h, &seeds, &LsgmConfig::default()).is_err());
        assert!(lsgm(&g, &g, &SeedSet::new(vec![]).unwrap(), &LsgmConfig::default()).is_err());
        let bad = LsgmConfig {
            max_cluster_size: 1,
            ..LsgmConfig::default()
        };
        assert!(lsgm(&g, &g, &seeds, &bad).is_err());
        let bad = LsgmConfig {
            workers: 0,
            ..LsgmConfig::default()
        };
        assert!(lsgm(&g, &g, &seeds, &bad).is_err());
    }
}
