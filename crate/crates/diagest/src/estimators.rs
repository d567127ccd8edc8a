//! Stochastic diagonal and trace estimators.
//!
//! All estimators stream probe-by-probe with a running sum, so memory stays
//! O(n) no matter how many probes are requested, and each probe costs exactly
//! one matrix-vector product.
//!
//! Reduction order is fixed: probes are accumulated left-to-right inside
//! fixed-size chunks (a function of `m` alone) and chunk partials are added
//! in chunk order. When the operator is safe for concurrent use, chunks are
//! evaluated in parallel; because the association order never changes, the
//! result is bit-identical to a serial run for any worker count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operator::{exact_diagonal, matvec_into, LinearOperator};
use crate::probes::{ProbeDistribution, ProbeStream};

/// Relative threshold under which the normalized estimator's per-coordinate
/// denominator counts as degenerate.
pub const DEGENERATE_DENOMINATOR_REL: f64 = 1e-12;

/// An estimate of `diag(A)` with the provenance needed to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalEstimate {
    /// The n-vector estimate.
    pub values: Vec<f64>,
    /// Number of probes averaged (m).
    pub num_probes: usize,
    /// Name of the probe entry distribution.
    pub distribution: String,
    /// Master seed of the probe stream.
    pub master_seed: u64,
}

impl DiagonalEstimate {
    /// Euclidean distance from a reference diagonal.
    pub fn error_l2(&self, reference: &[f64]) -> Result<f64> {
        if reference.len() != self.values.len() {
            return Err(Error::DimensionMismatch {
                expected: self.values.len(),
                got: reference.len(),
            });
        }
        Ok(self
            .values
            .iter()
            .zip(reference)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }
}

/// The single-probe error vector `g ⊙ Ag − diag(A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorVector {
    pub values: Vec<f64>,
}

impl ErrorVector {
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }
}

/// Probes per accumulation chunk. Depends only on `m`, never on the worker
/// count, so the reduction tree is a pure function of the request.
fn chunk_size(m: usize) -> usize {
    64.max(m.div_ceil(1024))
}

struct ProbeSums {
    /// Σ_z g^z ⊙ A g^z
    gag: Vec<f64>,
    /// Σ_z g^z ⊙ g^z, when requested (normalized estimator).
    gg: Option<Vec<f64>>,
}

fn chunk_probe_sums(
    op: &(impl LinearOperator + ?Sized),
    dist: &ProbeDistribution,
    stream: &ProbeStream,
    replicate: u64,
    probes: std::ops::Range<u64>,
    with_gg: bool,
) -> Result<ProbeSums> {
    let n = op.dim();
    let mut g = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut gag = vec![0.0; n];
    let mut gg = if with_gg { Some(vec![0.0; n]) } else { None };
    for z in probes {
        let mut rng = stream.substream(replicate, z);
        dist.fill(&mut g, &mut rng);
        matvec_into(op, &g, &mut y)?;
        for i in 0..n {
            gag[i] += g[i] * y[i];
        }
        if let Some(gg) = gg.as_mut() {
            for i in 0..n {
                gg[i] += g[i] * g[i];
            }
        }
    }
    Ok(ProbeSums { gag, gg })
}

fn probe_sums(
    op: &(impl LinearOperator + ?Sized),
    m: usize,
    dist: &ProbeDistribution,
    stream: &ProbeStream,
    replicate: u64,
    with_gg: bool,
) -> Result<ProbeSums> {
    let chunk = chunk_size(m) as u64;
    let ranges: Vec<std::ops::Range<u64>> = (0..m as u64)
        .step_by(chunk as usize)
        .map(|start| start..(start + chunk).min(m as u64))
        .collect();

    let partials: Vec<ProbeSums> = if op.concurrent_safe() && ranges.len() > 1 {
        ranges
            .into_par_iter()
            .map(|r| chunk_probe_sums(op, dist, stream, replicate, r, with_gg))
            .collect::<Result<_>>()?
    } else {
        ranges
            .into_iter()
            .map(|r| chunk_probe_sums(op, dist, stream, replicate, r, with_gg))
            .collect::<Result<_>>()?
    };

    let n = op.dim();
    let mut total = ProbeSums {
        gag: vec![0.0; n],
        gg: if with_gg { Some(vec![0.0; n]) } else { None },
    };
    for p in partials {
        for i in 0..n {
            total.gag[i] += p.gag[i];
        }
        if let (Some(t), Some(p)) = (total.gg.as_mut(), p.gg.as_ref()) {
            for i in 0..n {
                t[i] += p[i];
            }
        }
    }
    Ok(total)
}

fn require_probes(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidParameter("probe count m must be >= 1".into()));
    }
    Ok(())
}

fn finish_estimate(
    values: Vec<f64>,
    m: usize,
    dist: &ProbeDistribution,
    seed: u64,
) -> Result<DiagonalEstimate> {
    if !values.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite {
            context: "diagonal estimate",
        });
    }
    Ok(DiagonalEstimate {
        values,
        num_probes: m,
        distribution: dist.name().to_string(),
        master_seed: seed,
    })
}

/// Hutchinson's diagonal estimator: `(1/m) Σ g^z ⊙ A g^z` with Rademacher
/// probes. Performs exactly m matvecs.
pub fn hutchinson_diagonal(
    op: &(impl LinearOperator + ?Sized),
    m: usize,
    seed: u64,
) -> Result<DiagonalEstimate> {
    // Same code path as the generalized estimator; the Rademacher case is a
    // specialization by definition, not by reimplementation.
    generalized_diagonal(op, m, &ProbeDistribution::Rademacher, seed)
}

/// The generalized diagonal estimator with probes from any mean-0,
/// variance-1 distribution.
pub fn generalized_diagonal(
    op: &(impl LinearOperator + ?Sized),
    m: usize,
    dist: &ProbeDistribution,
    seed: u64,
) -> Result<DiagonalEstimate> {
    generalized_diagonal_replicate(op, m, dist, seed, 0)
}

/// Replicate-indexed variant: replicate r draws probes from substreams
/// disjoint from every other replicate's. The median-of-means selector uses
/// this to run independent candidate estimators under one master seed.
pub fn generalized_diagonal_replicate(
    op: &(impl LinearOperator + ?Sized),
    m: usize,
    dist: &ProbeDistribution,
    seed: u64,
    replicate: u64,
) -> Result<DiagonalEstimate> {
    require_probes(m)?;
    let stream = ProbeStream::new(seed);
    let sums = probe_sums(op, m, dist, &stream, replicate, false)?;
    let inv = 1.0 / m as f64;
    let values = sums.gag.into_iter().map(|v| v * inv).collect();
    finish_estimate(values, m, dist, seed)
}

/// The normalized estimator: numerator and denominator accumulated over the
/// same probes, divided entrywise.
///
/// With Rademacher probes every denominator entry is exactly m, so the
/// result coincides with [`hutchinson_diagonal`]. For other distributions a
/// denominator entry can in principle come out near zero; that raises
/// [`Error::DegenerateDenominator`] instead of returning a blown-up value.
pub fn normalized_diagonal(
    op: &(impl LinearOperator + ?Sized),
    m: usize,
    dist: &ProbeDistribution,
    seed: u64,
) -> Result<DiagonalEstimate> {
    require_probes(m)?;
    let stream = ProbeStream::new(seed);
    let sums = probe_sums(op, m, dist, &stream, 0, true)?;
    let denominators = sums.gg.expect("requested denominator accumulation");
    let threshold = DEGENERATE_DENOMINATOR_REL * m as f64;
    let mut values = sums.gag;
    for (i, (v, d)) in values.iter_mut().zip(&denominators).enumerate() {
        if d.abs() < threshold {
            return Err(Error::DegenerateDenominator {
                coord: i,
                value: *d,
                threshold,
            });
        }
        *v /= d;
    }
    finish_estimate(values, m, dist, seed)
}

/// Hutchinson's trace estimator `(1/m) Σ (g^z)ᵀ B g^z` with Rademacher
/// probes.
pub fn hutchinson_trace(op: &(impl LinearOperator + ?Sized), m: usize, seed: u64) -> Result<f64> {
    require_probes(m)?;
    let dist = ProbeDistribution::Rademacher;
    let stream = ProbeStream::new(seed);
    // The quadratic form is the sum of the Hadamard accumulation, so the
    // diagonal machinery is reused with a final contraction.
    let sums = probe_sums(op, m, &dist, &stream, 0, false)?;
    let total: f64 = sums.gag.iter().sum();
    let value = total / m as f64;
    if !value.is_finite() {
        return Err(Error::NonFinite {
            context: "trace estimate",
        });
    }
    Ok(value)
}

/// The single-probe error vector `e = g ⊙ Ag − diag(A)`.
///
/// Requires explicit entries, since the true diagonal is subtracted.
pub fn single_probe_error(op: &(impl LinearOperator + ?Sized), g: &[f64]) -> Result<ErrorVector> {
    let diag = exact_diagonal(op)?;
    let mut y = vec![0.0; op.dim()];
    matvec_into(op, g, &mut y)?;
    let values = g
        .iter()
        .zip(&y)
        .zip(&diag)
        .map(|((gi, yi), di)| gi * yi - di)
        .collect();
    Ok(ErrorVector { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{matvec, CountingOperator, DenseMatrix};
    use crate::probes::sample_probe;

    fn tightness2() -> DenseMatrix {
        DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap()
    }

    #[test]
    fn diagonal_matrix_recovered_exactly() {
        // Off-diagonal part vanishes and (g_i)^2 = 1, so any m and seed give
        // the exact diagonal.
        let a = DenseMatrix::diagonal(&[2.0, -0.5, 7.25, 0.0]).unwrap();
        for (m, seed) in [(1, 0u64), (3, 42), (17, 9)] {
            let est = hutchinson_diagonal(&a, m, seed).unwrap();
            for (v, d) in est.values.iter().zip([2.0, -0.5, 7.25, 0.0]) {
                assert!((v - d).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tightness_single_probe_structure() {
        // For [[0,1],[0,0]] the one-probe estimate is [g_1 g_2, 0].
        let a = tightness2();
        for seed in 0..20 {
            let est = hutchinson_diagonal(&a, 1, seed).unwrap();
            let g = sample_probe(
                &ProbeDistribution::Rademacher,
                2,
                &ProbeStream::new(seed),
                0,
            );
            assert_eq!(est.values[0], g[0] * g[1]);
            assert_eq!(est.values[1], 0.0);
        }
        // With a probe of [1, 1] the estimate is exactly [1, 0].
        let seed = (0..1000)
            .find(|&s| {
                sample_probe(&ProbeDistribution::Rademacher, 2, &ProbeStream::new(s), 0)
                    == vec![1.0, 1.0]
            })
            .expect("some seed yields the all-ones probe");
        let est = hutchinson_diagonal(&a, 1, seed).unwrap();
        assert_eq!(est.values, vec![1.0, 0.0]);
    }

    #[test]
    fn exhaustive_probe_average_is_unbiased() {
        // Average the single-probe estimate over all 2^4 sign vectors of a
        // fixed 4x4 matrix; the result must be diag(A) to machine precision.
        let a = DenseMatrix::random_uniform(4, 31);
        let diag = crate::operator::exact_diagonal(&a).unwrap();
        let mut avg = [0.0; 4];
        for mask in 0..16u32 {
            let g: Vec<f64> = (0..4)
                .map(|i| if mask >> i & 1 == 0 { 1.0 } else { -1.0 })
                .collect();
            let e = single_probe_error(&a, &g).unwrap();
            for i in 0..4 {
                avg[i] += (e.values[i] + diag[i]) / 16.0;
            }
        }
        for i in 0..4 {
            assert!((avg[i] - diag[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn rademacher_generalized_equals_hutchinson() {
        let a = DenseMatrix::random_uniform(9, 5);
        let h = hutchinson_diagonal(&a, 13, 77).unwrap();
        let g = generalized_diagonal(&a, 13, &ProbeDistribution::Rademacher, 77).unwrap();
        assert_eq!(h.values, g.values);
    }

    #[test]
    fn gaussian_identity_estimate_is_mean_one() {
        // On the identity, each coordinate is (1/m) Σ (g_i^z)^2 with unit
        // expectation; check the Monte Carlo mean over many trials.
        let a = DenseMatrix::identity(8);
        let trials = 20_000;
        let m = 4;
        let mut sum = 0.0;
        for t in 0..trials {
            let est = generalized_diagonal(&a, m, &ProbeDistribution::Gaussian, t as u64).unwrap();
            sum += est.values.iter().sum::<f64>() / 8.0;
        }
        let mean = sum / trials as f64;
        // Var[(g^2 mean over 8m draws)] = 2 / (8m); 5 sigma band.
        let se = (2.0 / (8.0 * m as f64 * trials as f64)).sqrt();
        assert!(
            (mean - 1.0).abs() < 5.0 * se,
            "mean {mean}, tolerance {}",
            5.0 * se
        );
    }

    #[test]
    fn gaussian_single_probe_squared_error_matches_formula() {
        // Monte Carlo check of the c4-dependent expected squared error on a
        // fixed 8x8 matrix: E||e||^2 = ||A-bar||_F^2 + 2 ||diag||_2^2 for
        // Gaussian probes.
        let a = DenseMatrix::random_uniform(8, 0x88);
        let off = crate::operator::off_diagonal_frobenius(&a).unwrap();
        let diag_sq: f64 = crate::operator::exact_diagonal(&a)
            .unwrap()
            .iter()
            .map(|d| d * d)
            .sum();
        let predicted = off * off + 2.0 * diag_sq;

        let trials = 100_000;
        let stream = ProbeStream::new(0x88_88);
        let dist = ProbeDistribution::Gaussian;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for t in 0..trials {
            let g = sample_probe(&dist, 8, &stream, t as u64);
            let sq = single_probe_error(&a, &g).unwrap().norm_sq();
            sum += sq;
            sum_sq += sq * sq;
        }
        let nf = trials as f64;
        let mean = sum / nf;
        let var = (sum_sq / nf - mean * mean).max(0.0);
        let se = (var / nf).sqrt();
        assert!(
            (mean - predicted).abs() <= 5.0 * se,
            "MC mean {mean} vs predicted {predicted} (se {se})"
        );
    }

    #[test]
    fn normalized_equals_plain_for_rademacher() {
        let a = DenseMatrix::random_uniform(7, 2);
        for seed in [0u64, 1, 99] {
            let plain = hutchinson_diagonal(&a, 5, seed).unwrap();
            let norm = normalized_diagonal(&a, 5, &ProbeDistribution::Rademacher, seed).unwrap();
            for (p, n) in plain.values.iter().zip(&norm.values) {
                assert!((p - n).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn normalized_identity_gaussian_is_exactly_ones() {
        // Numerator and denominator coincide per coordinate on the identity.
        let a = DenseMatrix::identity(6);
        for m in [1, 2, 10] {
            let est = normalized_diagonal(&a, m, &ProbeDistribution::Gaussian, 3).unwrap();
            assert_eq!(est.values, vec![1.0; 6]);
        }
    }

    #[test]
    fn normalized_tracks_generalized_at_large_m() {
        // The denominator concentrates around m, so the two estimators agree
        // to a few percent of the diagonal scale at m = 10^4.
        let a = DenseMatrix::random_uniform(8, 11);
        let m = 10_000;
        let norm = normalized_diagonal(&a, m, &ProbeDistribution::Gaussian, 7).unwrap();
        let gen = generalized_diagonal(&a, m, &ProbeDistribution::Gaussian, 7).unwrap();
        let diff: f64 = norm
            .values
            .iter()
            .zip(&gen.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let diag_norm: f64 = crate::operator::exact_diagonal(&a)
            .unwrap()
            .iter()
            .map(|d| d * d)
            .sum::<f64>()
            .sqrt();
        assert!(
            diff <= 0.1 * diag_norm,
            "normalized deviates from generalized: {diff} vs 0.1 * {diag_norm}"
        );
    }

    #[test]
    fn degenerate_denominator_detected() {
        // A custom "distribution" that always returns 0 violates the
        // variance-1 contract and must trip the denominator guard.
        let zero =
            ProbeDistribution::Custom(std::sync::Arc::new(crate::probes::CustomDistribution {
                name: "zero".into(),
                fourth_moment: 1.0,
                subgauss_param: 1.0,
                symmetric: true,
                sampler: Box::new(|_| 0.0),
            }));
        let a = DenseMatrix::identity(3);
        match normalized_diagonal(&a, 2, &zero, 0) {
            Err(Error::DegenerateDenominator { coord: 0, .. }) => {}
            other => panic!("expected degenerate denominator, got {other:?}"),
        }
    }

    #[test]
    fn trace_identity_is_dimension() {
        for seed in 0..5 {
            let t = hutchinson_trace(&DenseMatrix::identity(3), 1, seed).unwrap();
            assert_eq!(t, 3.0);
        }
    }

    #[test]
    fn trace_outcomes_on_2x2() {
        // For B = [[1,2],[2,1]] the single-probe outcomes are ±: 6 when the
        // signs agree, -2 when they differ.
        let b = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        for seed in 0..20 {
            let t = hutchinson_trace(&b, 1, seed).unwrap();
            assert!(t == 6.0 || t == -2.0, "unexpected outcome {t}");
        }
    }

    #[test]
    fn single_probe_error_examples() {
        let d = DenseMatrix::diagonal(&[1.0, -2.0, 3.0]).unwrap();
        let e = single_probe_error(&d, &[1.0, -1.0, 1.0]).unwrap();
        assert_eq!(e.values, vec![0.0, 0.0, 0.0]);

        let a = tightness2();
        let e = single_probe_error(&a, &[1.0, -1.0]).unwrap();
        assert_eq!(e.values, vec![-1.0, 0.0]);
    }

    #[test]
    fn error_norm_matches_trace_identity() {
        // ‖e‖² = gᵀ(ĀᵀĀ)g = ‖Āg‖², computed through the off-diagonal matrix.
        let a = DenseMatrix::random_uniform(20, 17);
        let off = a.off_diagonal_part();
        let fro = crate::operator::frobenius_norm(&a).unwrap();
        let stream = ProbeStream::new(4);
        for z in 0..50 {
            let g = sample_probe(&ProbeDistribution::Rademacher, 20, &stream, z);
            let e = single_probe_error(&a, &g).unwrap();
            let og = matvec(&off, &g).unwrap();
            let rhs: f64 = og.iter().map(|v| v * v).sum();
            assert!((e.norm_sq() - rhs).abs() <= 1e-10 * fro * fro);
        }
    }

    #[test]
    fn estimator_is_linear_in_the_matrix() {
        let a = DenseMatrix::random_uniform(10, 1);
        let b = DenseMatrix::random_uniform(10, 2);
        let (alpha, beta) = (2.5, -0.75);
        let combined = DenseMatrix::linear_combination(alpha, &a, beta, &b).unwrap();

        let m = 7;
        let seed = 123;
        let est_combined = hutchinson_diagonal(&combined, m, seed).unwrap();
        let est_a = hutchinson_diagonal(&a, m, seed).unwrap();
        let est_b = hutchinson_diagonal(&b, m, seed).unwrap();
        for i in 0..10 {
            let expected = alpha * est_a.values[i] + beta * est_b.values[i];
            assert!((est_combined.values[i] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn exactly_m_matvecs() {
        let counting = CountingOperator::new(DenseMatrix::random_uniform(6, 8));
        hutchinson_diagonal(&counting, 23, 0).unwrap();
        assert_eq!(counting.matvec_count(), 23);

        counting.reset();
        normalized_diagonal(&counting, 9, &ProbeDistribution::Gaussian, 0).unwrap();
        assert_eq!(counting.matvec_count(), 9);

        counting.reset();
        hutchinson_trace(&counting, 5, 0).unwrap();
        assert_eq!(counting.matvec_count(), 5);
    }

    #[test]
    fn zero_probes_rejected() {
        let a = DenseMatrix::identity(2);
        assert!(hutchinson_diagonal(&a, 0, 0).is_err());
        assert!(normalized_diagonal(&a, 0, &ProbeDistribution::Gaussian, 0).is_err());
        assert!(hutchinson_trace(&a, 0, 0).is_err());
    }

    #[test]
    fn results_independent_of_worker_count() {
        let a = DenseMatrix::random_uniform(12, 3);
        let m = 500; // several chunks
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| generalized_diagonal(&a, m, &ProbeDistribution::Gaussian, 55).unwrap())
        };
        let one = run(1);
        let four = run(4);
        assert_eq!(one.values, four.values);

        // And a non-concurrent-safe wrapper forces the serial path, which
        // must still agree bit-for-bit.
        struct Serial<T>(T);
        impl<T: LinearOperator> LinearOperator for Serial<T> {
            fn dim(&self) -> usize {
                self.0.dim()
            }
            fn apply(&self, x: &[f64], y: &mut [f64]) {
                self.0.apply(x, y)
            }
            fn concurrent_safe(&self) -> bool {
                false
            }
        }
        let serial =
            generalized_diagonal(&Serial(&a), m, &ProbeDistribution::Gaussian, 55).unwrap();
        assert_eq!(serial.values, one.values);
    }

    #[test]
    fn estimate_provenance_recorded() {
        let a = DenseMatrix::identity(2);
        let est = generalized_diagonal(&a, 3, &ProbeDistribution::UniformSymmetric, 12).unwrap();
        assert_eq!(est.num_probes, 3);
        assert_eq!(est.distribution, "uniform");
        assert_eq!(est.master_seed, 12);
    }
}
