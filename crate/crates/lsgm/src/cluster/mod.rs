//! Joint clustering of the aligned embeddings and bijective size resolution.

mod kmeans;
mod resolve;

pub use kmeans::{kmeans, ClusterAssignment};
pub use resolve::{resolve_cluster_sizes, ResolvedCluster, ResolvedClusters};

use crate::graph::Permutation;

/// Fraction of clustered graph-1 vertices whose true counterpart landed in
/// the same cluster. This caps the accuracy any within-cluster matcher can
/// reach. Vacuously 1 when nothing is clustered.
pub fn clustering_consistency(resolved: &ResolvedClusters, truth: &Permutation) -> f64 {
    let mut total = 0usize;
    let mut hits = 0usize;
    for cluster in &resolved.clusters {
        let targets: std::collections::HashSet<usize> =
            cluster.members2.iter().copied().collect();
        for &v in &cluster.members1 {
            total += 1;
            if targets.contains(&truth.apply(v)) {
                hits += 1;
            }
        }
    }
    if total == 0 {
        return 1.0;
    }
    hits as f64 / total as f64
}

/// Writes one `vertex_id,cluster_id` line per entry.
pub fn write_labels_csv<W: std::io::Write>(labels: &[usize], mut w: W) -> std::io::Result<()> {
    for (i, &l) in labels.iter().enumerate() {
        writeln!(w, "{i},{l}")?;
    }
    Ok(())
}
