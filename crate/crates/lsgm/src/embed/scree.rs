//! Profile-likelihood elbow detection on a partial eigenvalue scree.
//!
//! For each split point q the values are modeled as two Gaussian groups with
//! a pooled variance; the split maximizing the log likelihood is the
//! estimated dimension. A split with zero pooled variance fits exactly and
//! dominates every finite-likelihood split.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimensionEstimate {
    pub d: usize,
    /// No elbow exists (all splits tie); `d` fell back to 1.
    pub degenerate: bool,
}

pub fn estimate_dimension(spectrum: &[f64]) -> Result<DimensionEstimate> {
    let m = spectrum.len();
    if m < 3 {
        return Err(Error::param(format!(
            "dimension estimation needs at least 3 spectrum values, got {m}"
        )));
    }
    if spectrum.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::param("spectrum must be sorted nonincreasing"));
    }

    let logliks: Vec<f64> = (1..m).map(|q| split_loglik(spectrum, q)).collect();
    let mut best_q = 1;
    let mut best = logliks[0];
    for (i, &ll) in logliks.iter().enumerate().skip(1) {
        if ll > best {
            best = ll;
            best_q = i + 1;
        }
    }
    let degenerate = logliks.iter().all(|&ll| ll == best);
    Ok(DimensionEstimate {
        d: if degenerate { 1 } else { best_q },
        degenerate,
    })
}

/// Log likelihood of the two-group model at split q (group sizes q, m-q)
/// with variance pooled over m-2 degrees of freedom. Zero pooled variance
/// means an exact fit, reported as +inf.
fn split_loglik(values: &[f64], q: usize) -> f64 {
    let m = values.len();
    let (head, tail) = values.split_at(q);
    let ss = |group: &[f64]| -> f64 {
        let mean = group.iter().sum::<f64>() / group.len() as f64;
        group.iter().map(|v| (v - mean).powi(2)).sum()
    };
    let total_ss = ss(head) + if tail.is_empty() { 0.0 } else { ss(tail) };
    let sigma2 = total_ss / (m - 2) as f64;
    if sigma2 <= 0.0 {
        return f64::INFINITY;
    }
    let mf = m as f64;
    -0.5 * mf * (2.0 * std::f64::consts::PI * sigma2).ln() - total_ss / (2.0 * sigma2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_group_spectrum_splits_at_two() {
        let est = estimate_dimension(&[10.0, 9.5, 0.1, 0.09, 0.08]).unwrap();
        assert_eq!(est.d, 2);
        assert!(!est.degenerate);
        // the winning split separates the groups by orders of magnitude
        assert!(split_loglik(&[10.0, 9.5, 0.1, 0.09, 0.08], 2) > 1.0);
        assert!(split_loglik(&[10.0, 9.5, 0.1, 0.09, 0.08], 1) < -10.0);
        assert!(split_loglik(&[10.0, 9.5, 0.1, 0.09, 0.08], 3) < -10.0);
    }

    #[test]
    fn single_spike_splits_at_one() {
        let est = estimate_dimension(&[5.0, 0.1, 0.1]).unwrap();
        assert_eq!(est.d, 1);
        assert!(!est.degenerate);
    }

    #[test]
    fn constant_spectrum_is_degenerate() {
        let est = estimate_dimension(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(est.d, 1);
        assert!(est.degenerate);
    }

    #[test]
    fn exact_two_level_spectrum_prefers_the_zero_variance_split() {
        // only q=2 gives zero pooled variance, so it wins outright
        let est = estimate_dimension(&[7.0, 7.0, 2.0, 2.0, 2.0]).unwrap();
        assert_eq!(est.d, 2);
        assert!(!est.degenerate);
    }

    #[test]
    fn short_or_unsorted_input_rejected() {
        assert!(estimate_dimension(&[2.0, 1.0]).is_err());
        assert!(estimate_dimension(&[1.0, 2.0, 0.5]).is_err());
    }

    #[test]
    fn estimate_is_scale_invariant() {
        // rescaling shifts every log likelihood by the same constant
        let base = [10.0, 9.5, 0.1, 0.09, 0.08];
        for scale in [0.01, 3.0, 1e6] {
            let scaled: Vec<f64> = base.iter().map(|v| v * scale).collect();
            assert_eq!(estimate_dimension(&scaled).unwrap().d, 2, "scale {scale}");
        }
    }

    #[test]
    fn argmax_matches_direct_evaluation_on_random_spectra() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let m = rng.random_range(3..12);
            let mut vals: Vec<f64> = (0..m).map(|_| rng.random::<f64>() * 10.0).collect();
            vals.sort_by(|a, b| b.total_cmp(a));
            let est = estimate_dimension(&vals).unwrap();
            let best_direct = (1..m)
                .max_by(|&a, &b| {
                    split_loglik(&vals, a)
                        .total_cmp(&split_loglik(&vals, b))
                        .then(b.cmp(&a))
                })
                .unwrap();
            if !est.degenerate {
                assert_eq!(est.d, best_direct);
            }
        }
    }
}
