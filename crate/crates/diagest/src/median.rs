//! High-probability selection over independent estimates: run r candidate
//! estimators and keep the one whose distances to the others have the
//! smallest half-way order statistic. A multidimensional median trick —
//! a constant-probability estimator boosted to probability 1 − δ with
//! r = ⌈10 ln(1/δ)⌉ replicates.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::generalized_diagonal_replicate;
use crate::operator::LinearOperator;
use crate::probes::ProbeDistribution;

/// Minimum number of candidates: below 3 the ⌊r/2⌋-th order statistic is
/// degenerate.
pub const MIN_REPLICATES: usize = 3;

/// Guard subtracted before `ceil` so values that are integers up to f64
/// rounding do not get bumped to the next integer.
const CEIL_GUARD: f64 = 1e-9;

/// The outcome of a median selection run.
#[derive(Debug, Clone)]
pub struct MedianSelection {
    /// The r candidate estimates.
    pub candidates: Vec<Vec<f64>>,
    /// For each candidate, the ⌊r/2⌋-th smallest distance to the others.
    pub b_values: Vec<f64>,
    /// Index of the selected candidate (argmin of `b_values`, lowest index
    /// on ties).
    pub selected_index: usize,
    /// Number of candidates.
    pub r: usize,
}

impl MedianSelection {
    /// The selected estimate vector.
    pub fn selected(&self) -> &[f64] {
        &self.candidates[self.selected_index]
    }
}

/// Number of replicates for failure probability `delta`:
/// `max(3, ⌈10 ln(1/delta)⌉)` with the natural logarithm.
pub fn replication_count(delta: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&delta) || delta == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let raw = 10.0 * (1.0 / delta).ln();
    let r = (raw - CEIL_GUARD).ceil().max(0.0) as usize;
    Ok(r.max(MIN_REPLICATES))
}

/// Selects among candidate vectors by pairwise-distance order statistics.
///
/// For each candidate i the r−1 distances to the other candidates are sorted
/// ascending and `B_i` is the ⌊r/2⌋-th smallest (1-indexed). The candidate
/// with minimal `B_i` wins; ties break to the lowest index.
pub fn median_select(candidates: Vec<Vec<f64>>) -> Result<MedianSelection> {
    let r = candidates.len();
    if r < MIN_REPLICATES {
        return Err(Error::InvalidParameter(format!(
            "median selection needs at least {MIN_REPLICATES} candidates, got {r}"
        )));
    }
    let n = candidates[0].len();
    if candidates.iter().any(|c| c.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: candidates.iter().map(Vec::len).find(|&l| l != n).unwrap(),
        });
    }

    // Full symmetric distance matrix; r stays small (≈70 at delta = 1e-3).
    let mut dist = vec![0.0; r * r];
    for i in 0..r {
        for j in (i + 1)..r {
            let d = l2_distance(&candidates[i], &candidates[j]);
            dist[i * r + j] = d;
            dist[j * r + i] = d;
        }
    }

    let order_stat = r / 2; // 1-indexed ⌊r/2⌋-th smallest
    let mut b_values = Vec::with_capacity(r);
    let mut scratch = Vec::with_capacity(r - 1);
    for i in 0..r {
        scratch.clear();
        scratch.extend((0..r).filter(|&j| j != i).map(|j| dist[i * r + j]));
        scratch.sort_by(f64::total_cmp);
        b_values.push(scratch[order_stat - 1]);
    }

    let selected_index = b_values
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.total_cmp(b))
        .map(|(i, _)| i)
        .expect("r >= 3");

    Ok(MedianSelection {
        candidates,
        b_values,
        selected_index,
        r,
    })
}

fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Runs `r = max(3, ⌈10 ln(1/delta)⌉)` independent generalized estimators on
/// disjoint probe substreams and selects one via [`median_select`].
/// Total cost: r·m matvecs.
pub fn robust_diagonal(
    op: &(impl LinearOperator + ?Sized),
    m: usize,
    delta: f64,
    dist: &ProbeDistribution,
    seed: u64,
) -> Result<MedianSelection> {
    robust_diagonal_with_replicates(op, m, replication_count(delta)?, dist, seed)
}

/// As [`robust_diagonal`] but with an explicit replicate count, for callers
/// that derive r from a different rule.
pub fn robust_diagonal_with_replicates(
    op: &(impl LinearOperator + ?Sized),
    m: usize,
    r: usize,
    dist: &ProbeDistribution,
    seed: u64,
) -> Result<MedianSelection> {
    if r < MIN_REPLICATES {
        return Err(Error::InvalidParameter(format!(
            "replicate count must be >= {MIN_REPLICATES}, got {r}"
        )));
    }
    let candidates: Vec<Vec<f64>> = if op.concurrent_safe() && r > 1 {
        (0..r as u64)
            .into_par_iter()
            .map(|rep| generalized_diagonal_replicate(op, m, dist, seed, rep).map(|est| est.values))
            .collect::<Result<_>>()?
    } else {
        (0..r as u64)
            .map(|rep| generalized_diagonal_replicate(op, m, dist, seed, rep).map(|est| est.values))
            .collect::<Result<_>>()?
    };
    median_select(candidates)
}
