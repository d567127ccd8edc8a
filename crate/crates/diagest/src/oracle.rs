//! Exact enumeration over all 2^n Rademacher sign vectors.
//!
//! At small dimension the estimator distributions can be computed exactly:
//! every statistic becomes a finite average over sign assignments. These
//! oracles provide machine-precision ground truth for the estimators'
//! expectation identities without sharing any code path with them.
//!
//! Iteration follows the binary reflected Gray code, flipping one sign per
//! step and updating the cached product `Ag` with a single column add, so a
//! full sweep costs O(2^n · n) instead of O(2^n · n^2).

use crate::error::{Error, Result};
use crate::operator::DenseMatrix;

/// Default cap on the enumeration dimension (2^14 = 16384 sign vectors).
pub const MAX_ENUM_DIM: usize = 14;
/// Default cap on the probe count for the two-coordinate walk enumeration.
pub const MAX_ENUM_PROBES: usize = 20;

/// Visits every sign vector `g` in Gray-code order together with `Ag`.
///
/// The callback receives `(g, Ag)`. `cap` bounds the dimension; pass
/// [`MAX_ENUM_DIM`] unless a larger sweep is genuinely wanted.
pub fn for_each_sign_vector(
    a: &DenseMatrix,
    cap: usize,
    mut visit: impl FnMut(&[f64], &[f64]),
) -> Result<()> {
    let n = crate::operator::LinearOperator::dim(a);
    if n > cap {
        return Err(Error::EnumerationTooLarge { n, cap });
    }
    let mut g = vec![1.0; n];
    // Ag for the all-ones vector: row sums.
    let mut ag: Vec<f64> = (0..n).map(|i| a.row(i).iter().sum()).collect();
    visit(&g, &ag);

    let total: u64 = 1 << n;
    for k in 1..total {
        let j = k.trailing_zeros() as usize;
        g[j] = -g[j];
        // Flipping g_j changes it by 2 * (new value).
        let delta = 2.0 * g[j];
        for (i, agi) in ag.iter_mut().enumerate() {
            *agi += delta * a.get(i, j);
        }
        visit(&g, &ag);
    }
    Ok(())
}

/// Exact expectation of the single-probe diagonal estimate `g ⊙ Ag`.
///
/// Equals `diag(A)` for every matrix; the estimator is unbiased.
pub fn exact_expected_diag_estimate(a: &DenseMatrix) -> Result<Vec<f64>> {
    let n = crate::operator::LinearOperator::dim(a);
    let mut sum = vec![0.0; n];
    for_each_sign_vector(a, MAX_ENUM_DIM, |g, ag| {
        for i in 0..n {
            sum[i] += g[i] * ag[i];
        }
    })?;
    let count = (1u64 << n) as f64;
    for s in sum.iter_mut() {
        *s /= count;
    }
    Ok(sum)
}

/// Exact expectation of the squared single-probe error `‖g ⊙ Ag − diag(A)‖²`.
///
/// Equals the squared Frobenius norm of the off-diagonal part of `A`.
pub fn exact_expected_squared_error(a: &DenseMatrix) -> Result<f64> {
    let n = crate::operator::LinearOperator::dim(a);
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    let mut sum = 0.0;
    for_each_sign_vector(a, MAX_ENUM_DIM, |g, ag| {
        let mut sq = 0.0;
        for i in 0..n {
            let e = g[i] * ag[i] - diag[i];
            sq += e * e;
        }
        sum += sq;
    })?;
    Ok(sum / (1u64 << n) as f64)
}

/// Exact mean and variance of the quadratic form `gᵀBg` over sign vectors.
///
/// Two enumeration passes: the mean first, then centered squares, which
/// avoids the cancellation of the naive `E[t²] − E[t]²` route.
pub fn exact_trace_moments(b: &DenseMatrix) -> Result<(f64, f64)> {
    let n = crate::operator::LinearOperator::dim(b);
    let count = (1u64 << n) as f64;

    let mut sum = 0.0;
    for_each_sign_vector(b, MAX_ENUM_DIM, |g, bg| {
        sum += dot(g, bg);
    })?;
    let mean = sum / count;

    let mut centered_sq = 0.0;
    for_each_sign_vector(b, MAX_ENUM_DIM, |g, bg| {
        let d = dot(g, bg) - mean;
        centered_sq += d * d;
    })?;
    Ok((mean, centered_sq / count))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The exact distribution of the first coordinate of the m-probe estimate
/// for the worst-case matrix `[[0,1],[0,0]]`.
///
/// For that matrix the only random coordinate is `S/m`, where `S` sums m
/// independent ±1 products. The pmf lives on `{-m, -m+2, …, m}/m`.
#[derive(Debug, Clone)]
pub struct TightnessPmf {
    pub num_probes: usize,
    /// `probs[k]` is the probability of the support point `(2k - m) / m`.
    pub probs: Vec<f64>,
}

impl TightnessPmf {
    pub fn support(&self, k: usize) -> f64 {
        let m = self.num_probes as f64;
        (2.0 * k as f64 - m) / m
    }

    /// `Pr[|S/m| > eps]`, the probability that the estimate's first
    /// coordinate misses zero-centered accuracy `eps`.
    pub fn failure_probability(&self, eps: f64) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|(k, _)| self.support(*k).abs() > eps)
            .map(|(_, p)| p)
            .sum()
    }
}

/// Enumerates all 2^m sign-product sequences for `[[0,1],[0,0]]` and tallies
/// the exact pmf of the estimate's first coordinate.
pub fn exact_tightness_pmf(m: usize) -> Result<TightnessPmf> {
    if m == 0 {
        return Err(Error::InvalidParameter("probe count must be >= 1".into()));
    }
    if m > MAX_ENUM_PROBES {
        return Err(Error::EnumerationTooLarge {
            n: m,
            cap: MAX_ENUM_PROBES,
        });
    }
    // Per probe, the product g_1 g_2 is ±1 with equal probability; bit z of
    // the mask selects the sign of probe z. The support index is the count
    // of +1 probes.
    let mut counts = vec![0u64; m + 1];
    for mask in 0..(1u64 << m) {
        counts[mask.count_ones() as usize] += 1;
    }
    let total = (1u64 << m) as f64;
    Ok(TightnessPmf {
        num_probes: m,
        probs: counts.iter().map(|&c| c as f64 / total).collect(),
    })
}
