//! Bijective cluster-size resolution.
//!
//! Joint clustering gives each cluster an arbitrary mix of graph-1 and
//! graph-2 points; within-cluster bijective matching needs equal halves.
//! Clusters are resized to even targets that sum to the full point count,
//! then refilled greedily by centroid distance.

use crate::error::{Error, Result};
use super::kmeans::ClusterAssignment;
use nalgebra::DMatrix;

/// One resolved cluster: equally many members from each graph. Members are
/// per-graph point indices in 0..n (graph-2 joint rows minus n), ascending.
#[derive(Debug, Clone)]
pub struct ResolvedCluster {
    /// Cluster id in the originating assignment.
    pub source: usize,
    pub members1: Vec<usize>,
    pub members2: Vec<usize>,
}

impl ResolvedCluster {
    /// Combined size across both graphs.
    pub fn size(&self) -> usize {
        self.members1.len() + self.members2.len()
    }
}

/// Clusters in nonincreasing order of their pre-resolution combined counts;
/// zero-size clusters are dropped.
#[derive(Debug, Clone)]
pub struct ResolvedClusters {
    pub clusters: Vec<ResolvedCluster>,
}

impl ResolvedClusters {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }
}

/// Resizes and refills the clusters of a joint assignment over 2n points
/// (graph-1 rows first). Target sizes are even, sum to 2n, and shave two
/// off the largest clusters when the ceiling halves overshoot n; each
/// cluster then takes its half-share of nearest unassigned points per graph.
pub fn resolve_cluster_sizes(
    assignment: &ClusterAssignment,
    points: &DMatrix<f64>,
) -> Result<ResolvedClusters> {
    let m = assignment.labels.len();
    if m != points.nrows() {
        return Err(Error::param(format!(
            "assignment covers {m} points but {} rows given",
            points.nrows()
        )));
    }
    if m % 2 != 0 {
        return Err(Error::param(format!(
            "joint point count {m} is odd; expected n rows per graph"
        )));
    }
    let n = m / 2;
    let k = assignment.k();

    let mut count1 = vec![0usize; k];
    let mut count2 = vec![0usize; k];
    for (i, &l) in assignment.labels.iter().enumerate() {
        if l >= k {
            return Err(Error::param(format!("label {l} out of range for k={k}")));
        }
        if i < n {
            count1[l] += 1;
        } else {
            count2[l] += 1;
        }
    }

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&j| (std::cmp::Reverse(count1[j] + count2[j]), j));
    let halves: Vec<usize> = order.iter().map(|&j| (count1[j] + count2[j]).div_ceil(2)).collect();
    let total: usize = halves.iter().sum();
    debug_assert!(total >= n);

    // rank i (1-based) loses two vertices iff total >= i + n
    let targets: Vec<usize> = halves
        .iter()
        .enumerate()
        .map(|(idx, &h)| {
            let trimmed = total >= (idx + 1) + n;
            2 * h - if trimmed { 2 } else { 0 }
        })
        .collect();
    debug_assert_eq!(targets.iter().sum::<usize>(), 2 * n);

    let mut taken1 = vec![false; n];
    let mut taken2 = vec![false; n];
    let mut clusters = Vec::new();
    for (idx, &j) in order.iter().enumerate() {
        let half = targets[idx] / 2;
        if half == 0 {
            continue;
        }
        let members1 = take_nearest(points, &assignment.centroids, j, &mut taken1, 0, half);
        let members2 = take_nearest(points, &assignment.centroids, j, &mut taken2, n, half);
        clusters.push(ResolvedCluster {
            source: j,
            members1,
            members2,
        });
    }
    debug_assert!(taken1.iter().all(|&t| t) && taken2.iter().all(|&t| t));
    Ok(ResolvedClusters { clusters })
}

/// Claims the `want` unassigned points (rows offset..offset+n) nearest the
/// centroid, ties toward the lower index, returning their per-graph indices
/// in ascending order.
fn take_nearest(
    points: &DMatrix<f64>,
    centroids: &DMatrix<f64>,
    cluster: usize,
    taken: &mut [bool],
    offset: usize,
    want: usize,
) -> Vec<usize> {
    let n = taken.len();
    let mut candidates: Vec<(f64, usize)> = (0..n)
        .filter(|&i| !taken[i])
        .map(|i| {
            let mut d = 0.0;
            for c in 0..points.ncols() {
                let diff = points[(offset + i, c)] - centroids[(cluster, c)];
                d += diff * diff;
            }
            (d, i)
        })
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut picked: Vec<usize> = candidates[..want].iter().map(|&(_, i)| i).collect();
    for &i in &picked {
        taken[i] = true;
    }
    picked.sort_unstable();
    picked
}
