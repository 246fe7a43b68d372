//! Lloyd k-means with distance-squared-weighted seeding and restarts.
//!
//! All stochastic and order-sensitive steps walk the points in a canonical
//! order (lexicographic by coordinates, then index), so relabeling the input
//! rows permutes the output labels and changes nothing else. That exactness
//! is what makes joint clustering reproducible across vertex orderings.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MAX_ITERS: usize = 300;
const RESTARTS: u64 = 5;

/// Hard assignment of points to clusters.
#[derive(Debug, Clone)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    /// k x d, row j is cluster j's centroid.
    pub centroids: DMatrix<f64>,
    /// Within-cluster sum of squared distances.
    pub objective: f64,
    /// Objective after each Lloyd iteration of the winning restart.
    pub objective_history: Vec<f64>,
}

impl ClusterAssignment {
    pub fn k(&self) -> usize {
        self.centroids.nrows()
    }
}

/// Clusters the rows of `points` into k groups. `spherical` normalizes rows
/// to unit length first and clusters in that space.
pub fn kmeans(
    points: &DMatrix<f64>,
    k: usize,
    init_seed: u64,
    spherical: bool,
) -> Result<ClusterAssignment> {
    let m = points.nrows();
    if k == 0 || k > m {
        return Err(Error::param(format!(
            "cluster count {k} out of range for {m} points"
        )));
    }
    let data = if spherical {
        let mut normed = points.clone();
        for i in 0..m {
            let norm = normed.row(i).norm();
            if norm == 0.0 {
                return Err(Error::degenerate(format!(
                    "row {i} has zero norm and cannot be projected to the sphere"
                )));
            }
            normed.row_mut(i).scale_mut(1.0 / norm);
        }
        normed
    } else {
        points.clone()
    };

    let canon = canonical_order(&data);
    let mut best: Option<ClusterAssignment> = None;
    for restart in 0..RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(init_seed);
        rng.set_stream(restart);
        let run = lloyd(&data, k, &canon, &mut rng);
        if best.as_ref().is_none_or(|b| run.objective < b.objective) {
            best = Some(run);
        }
    }
    Ok(best.unwrap())
}

/// Indices sorted lexicographically by row coordinates, ties by index.
fn canonical_order(data: &DMatrix<f64>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..data.nrows()).collect();
    order.sort_by(|&a, &b| {
        for j in 0..data.ncols() {
            let cmp = data[(a, j)].total_cmp(&data[(b, j)]);
            if cmp != std::cmp::Ordering::Equal {
                return cmp;
            }
        }
        a.cmp(&b)
    });
    order
}

fn dist2(data: &DMatrix<f64>, i: usize, centroids: &DMatrix<f64>, j: usize) -> f64 {
    let mut acc = 0.0;
    for c in 0..data.ncols() {
        let diff = data[(i, c)] - centroids[(j, c)];
        acc += diff * diff;
    }
    acc
}

fn lloyd(data: &DMatrix<f64>, k: usize, canon: &[usize], rng: &mut ChaCha8Rng) -> ClusterAssignment {
    let m = data.nrows();
    let d = data.ncols();
    let mut centroids = init_plus_plus(data, k, canon, rng);
    let mut labels = vec![usize::MAX; m];
    let mut history = Vec::new();

    for _ in 0..MAX_ITERS {
        let mut changed = false;
        for i in 0..m {
            let mut best_j = 0;
            let mut best_d = dist2(data, i, &centroids, 0);
            for j in 1..k {
                let dj = dist2(data, i, &centroids, j);
                if dj < best_d {
                    best_d = dj;
                    best_j = j;
                }
            }
            if labels[i] != best_j {
                labels[i] = best_j;
                changed = true;
            }
        }

        // an empty cluster grabs the point farthest from its own centroid
        let mut counts = vec![0usize; k];
        for &l in &labels {
            counts[l] += 1;
        }
        for j in 0..k {
            if counts[j] > 0 {
                continue;
            }
            let mut far_i = 0;
            let mut far_d = -1.0;
            for &i in canon {
                if counts[labels[i]] <= 1 {
                    continue;
                }
                let di = dist2(data, i, &centroids, labels[i]);
                if di > far_d {
                    far_d = di;
                    far_i = i;
                }
            }
            counts[labels[far_i]] -= 1;
            labels[far_i] = j;
            counts[j] = 1;
            for c in 0..d {
                centroids[(j, c)] = data[(far_i, c)];
            }
            changed = true;
        }

        // centroid sums walk the canonical order for bit-stable reductions
        let mut sums = DMatrix::<f64>::zeros(k, d);
        for &i in canon {
            let l = labels[i];
            for c in 0..d {
                sums[(l, c)] += data[(i, c)];
            }
        }
        for j in 0..k {
            for c in 0..d {
                centroids[(j, c)] = sums[(j, c)] / counts[j] as f64;
            }
        }

        let mut objective = 0.0;
        for &i in canon {
            objective += dist2(data, i, &centroids, labels[i]);
        }
        debug_assert!(
            history.last().is_none_or(|&prev| objective <= prev + 1e-9),
            "objective rose from {:?} to {objective}",
            history.last()
        );
        history.push(objective);
        if !changed {
            break;
        }
    }

    ClusterAssignment {
        labels,
        objective: *history.last().unwrap(),
        objective_history: history,
        centroids,
    }
}

/// Distance-squared-weighted seeding. The cumulative walk follows the
/// canonical order so the same rng draws pick the same geometric points for
/// any row ordering of the input.
fn init_plus_plus(
    data: &DMatrix<f64>,
    k: usize,
    canon: &[usize],
    rng: &mut ChaCha8Rng,
) -> DMatrix<f64> {
    let m = data.nrows();
    let d = data.ncols();
    let mut centroids = DMatrix::<f64>::zeros(k, d);
    let first = canon[rng.random_range(0..m)];
    centroids.row_mut(0).copy_from(&data.row(first));

    let mut d2 = vec![0.0f64; m];
    for i in 0..m {
        d2[i] = dist2(data, i, &centroids, 0);
    }
    for j in 1..k {
        let total: f64 = canon.iter().map(|&i| d2[i]).sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for &i in canon {
                if d2[i] == 0.0 {
                    continue;
                }
                acc += d2[i];
                if acc >= target {
                    chosen = Some(i);
                    break;
                }
            }
            // float accumulation can land just short of the last mass point
            chosen.unwrap_or_else(|| *canon.iter().filter(|&&i| d2[i] > 0.0).last().unwrap())
        } else {
            // every point coincides with a centroid; duplicates are fine
            canon[rng.random_range(0..m)]
        };
        centroids.row_mut(j).copy_from(&data.row(pick));
        for i in 0..m {
            d2[i] = d2[i].min(dist2(data, i, &centroids, j));
        }
    }
    centroids
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_rows(rows: &[&[f64]]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
    }

    #[test]
    fn duplicated_rows_cocluster_at_zero_objective() {
        let pts = from_rows(&[
            &[0.0, 0.0],
            &[5.0, 5.0],
            &[9.0, 1.0],
            &[0.0, 0.0],
            &[5.0, 5.0],
            &[9.0, 1.0],
        ]);
        let a = kmeans(&pts, 3, 7, false).unwrap();
        assert!(a.objective <= 1e-18);
        for i in 0..3 {
            assert_eq!(a.labels[i], a.labels[i + 3]);
        }
    }

    #[test]
    fn single_cluster_is_the_mean() {
        let pts = from_rows(&[&[1.0, 0.0], &[3.0, 2.0], &[5.0, 4.0]]);
        let a = kmeans(&pts, 1, 0, false).unwrap();
        assert!((a.centroids[(0, 0)] - 3.0).abs() <= 1e-12);
        assert!((a.centroids[(0, 1)] - 2.0).abs() <= 1e-12);
        let expect: f64 = [8.0, 0.0, 8.0].iter().sum();
        assert!((a.objective - expect).abs() <= 1e-12);
    }

    /// Smallest within-cluster sum of squares over every 2-partition.
    fn brute_force_two_partition(pts: &DMatrix<f64>) -> f64 {
        let m = pts.nrows();
        let mut best = f64::INFINITY;
        for mask in 1..(1u32 << m) - 1 {
            let mut obj = 0.0;
            for part in 0..2 {
                let members: Vec<usize> = (0..m)
                    .filter(|&i| ((mask >> i) & 1) as usize == part)
                    .collect();
                if members.is_empty() {
                    continue;
                }
                let mut mean = vec![0.0; pts.ncols()];
                for &i in &members {
                    for j in 0..pts.ncols() {
                        mean[j] += pts[(i, j)];
                    }
                }
                for v in &mut mean {
                    *v /= members.len() as f64;
                }
                for &i in &members {
                    for j in 0..pts.ncols() {
                        obj += (pts[(i, j)] - mean[j]).powi(2);
                    }
                }
            }
            best = best.min(obj);
        }
        best
    }

    #[test]
    fn long_rectangle_splits_along_its_long_axis() {
        let pts = from_rows(&[&[10.0, 1.0], &[10.0, -1.0], &[-10.0, 1.0], &[-10.0, -1.0]]);
        let a = kmeans(&pts, 2, 3, false).unwrap();
        assert!((a.objective - 4.0).abs() <= 1e-9);
        assert!((a.objective - brute_force_two_partition(&pts)).abs() <= 1e-9);
        assert_eq!(a.labels[0], a.labels[1]);
        assert_eq!(a.labels[2], a.labels[3]);
        assert_ne!(a.labels[0], a.labels[2]);
    }

    #[test]
    fn objective_history_never_increases() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let pts = DMatrix::from_fn(120, 3, |_, _| rng.random::<f64>() * 10.0);
        for seed in 0..5 {
            let a = kmeans(&pts, 6, seed, false).unwrap();
            for w in a.objective_history.windows(2) {
                assert!(w[1] <= w[0] + 1e-9);
            }
            assert_eq!(a.objective, *a.objective_history.last().unwrap());
        }
    }

    #[test]
    fn objective_matches_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let pts = DMatrix::from_fn(60, 2, |_, _| rng.random::<f64>());
        let a = kmeans(&pts, 4, 9, false).unwrap();
        let mut direct = 0.0;
        for i in 0..60 {
            direct += dist2(&pts, i, &a.centroids, a.labels[i]);
        }
        assert!((a.objective - direct).abs() <= 1e-9 * direct.max(1.0));
    }

    #[test]
    fn relabeled_points_get_identically_permuted_labels() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let pts = DMatrix::from_fn(50, 2, |_, _| rng.random::<f64>() * 4.0);
        let perm: Vec<usize> = (0..50).rev().collect();
        let permuted = DMatrix::from_fn(50, 2, |i, j| {
            let src = perm.iter().position(|&p| p == i).unwrap();
            pts[(src, j)]
        });
        let a1 = kmeans(&pts, 5, 11, false).unwrap();
        let a2 = kmeans(&permuted, 5, 11, false).unwrap();
        for i in 0..50 {
            assert_eq!(a1.labels[i], a2.labels[perm[i]]);
        }
        assert_eq!(a1.objective, a2.objective);
    }

    #[test]
    fn spherical_clusters_by_direction_not_magnitude() {
        let pts = from_rows(&[&[10.0, 0.0], &[0.1, 0.0], &[0.0, 5.0], &[0.0, 0.2]]);
        let a = kmeans(&pts, 2, 1, true).unwrap();
        assert_eq!(a.labels[0], a.labels[1]);
        assert_eq!(a.labels[2], a.labels[3]);
        assert_ne!(a.labels[0], a.labels[2]);
    }

    #[test]
    fn spherical_rejects_zero_rows() {
        let pts = from_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        match kmeans(&pts, 1, 0, true) {
            Err(Error::Degenerate(_)) => {}
            other => panic!("expected degenerate error, got {other:?}"),
        }
    }

    #[test]
    fn bad_cluster_counts_rejected() {
        let pts = from_rows(&[&[1.0], &[2.0]]);
        assert!(kmeans(&pts, 0, 0, false).is_err());
        assert!(kmeans(&pts, 3, 0, false).is_err());
    }

    #[test]
    fn same_seed_reproduces_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let pts = DMatrix::from_fn(80, 2, |_, _| rng.random::<f64>());
        let a1 = kmeans(&pts, 4, 77, false).unwrap();
        let a2 = kmeans(&pts, 4, 77, false).unwrap();
        assert_eq!(a1.labels, a2.labels);
        assert_eq!(a1.objective, a2.objective);
        assert_eq!(a1.centroids, a2.centroids);
    }
}
