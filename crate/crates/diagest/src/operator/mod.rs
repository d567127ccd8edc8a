//! Matrix-free linear operators and the exact matrix quantities the
//! estimators, bounds, and oracles need.
//!
//! An operator is anything that can apply `x -> Ax`. Stored matrices
//! ([`DenseMatrix`], [`SparseMatrix`]) additionally expose their entries,
//! which unlocks the exact diagonal and the Frobenius-norm calculators.
//! Implicit operators (compositions, user-defined closures over a solver or
//! autodiff pass) only promise the product.

mod dense;
mod market;
mod sparse;

pub use dense::DenseMatrix;
pub use market::{parse_matrix_market, read_matrix_market, LoadedMatrix};
pub use sparse::SparseMatrix;

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::probes::{ProbeDistribution, ProbeStream};

/// An n×n real matrix exposed through matrix-vector products.
///
/// Implementations must be deterministic (identical `x` yields identical
/// `Ax`) and linear to numerical precision; [`check_linearity`] probes both.
/// `apply` may assume its preconditions — the checked entry point for
/// callers is [`matvec`] / [`matvec_into`].
pub trait LinearOperator: Send + Sync {
    fn dim(&self) -> usize;

    /// Writes `Ax` into `y`. Pre: `x.len() == y.len() == dim()`, `x` finite.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// Whether `apply` may be invoked from multiple workers simultaneously.
    fn concurrent_safe(&self) -> bool;

    /// Entry `A[i][j]` for operators backed by stored matrices, else `None`.
    /// Implementations answer all-or-nothing: either every in-range entry is
    /// available or none is.
    fn entry(&self, _i: usize, _j: usize) -> Option<f64> {
        None
    }

    fn has_explicit_entries(&self) -> bool {
        self.dim() > 0 && self.entry(0, 0).is_some()
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
    fn concurrent_safe(&self) -> bool {
        (**self).concurrent_safe()
    }
    fn entry(&self, i: usize, j: usize) -> Option<f64> {
        (**self).entry(i, j)
    }
}

impl LinearOperator for Box<dyn LinearOperator> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
    fn concurrent_safe(&self) -> bool {
        (**self).concurrent_safe()
    }
    fn entry(&self, i: usize, j: usize) -> Option<f64> {
        (**self).entry(i, j)
    }
}

fn check_vector(op: &(impl LinearOperator + ?Sized), x: &[f64]) -> Result<()> {
    if x.len() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: x.len(),
        });
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite {
            context: "matvec input",
        });
    }
    Ok(())
}

/// Computes `Ax`, validating dimension and finiteness first.
pub fn matvec(op: &(impl LinearOperator + ?Sized), x: &[f64]) -> Result<Vec<f64>> {
    let mut y = vec![0.0; op.dim()];
    matvec_into(op, x, &mut y)?;
    Ok(y)
}

/// Like [`matvec`] but writes into a caller-provided buffer.
pub fn matvec_into(op: &(impl LinearOperator + ?Sized), x: &[f64], y: &mut [f64]) -> Result<()> {
    check_vector(op, x)?;
    if y.len() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: y.len(),
        });
    }
    op.apply(x, y);
    Ok(())
}

/// Entrywise product of two equal-length vectors.
pub fn hadamard(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| x * y).collect())
}

/// The diagonal of an explicit operator, read off its stored entries.
pub fn exact_diagonal(op: &(impl LinearOperator + ?Sized)) -> Result<Vec<f64>> {
    (0..op.dim())
        .map(|i| op.entry(i, i).ok_or(Error::ImplicitOperator))
        .collect()
}

/// The diagonal of any operator, extracted with n basis-vector products.
///
/// Deliberately a separate entry point: it costs the n matvecs the
/// stochastic estimators exist to avoid, so callers opt in by name.
pub fn exact_diagonal_via_matvecs(op: &(impl LinearOperator + ?Sized)) -> Result<Vec<f64>> {
    let n = op.dim();
    let mut basis = vec![0.0; n];
    let mut column = vec![0.0; n];
    let mut diag = vec![0.0; n];
    for j in 0..n {
        basis[j] = 1.0;
        matvec_into(op, &basis, &mut column)?;
        diag[j] = column[j];
        basis[j] = 0.0;
    }
    Ok(diag)
}

/// Frobenius norm of an explicit operator.
pub fn frobenius_norm(op: &(impl LinearOperator + ?Sized)) -> Result<f64> {
    let n = op.dim();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            let a = op.entry(i, j).ok_or(Error::ImplicitOperator)?;
            sum += a * a;
        }
    }
    Ok(sum.sqrt())
}

/// Frobenius norm of the operator with its diagonal zeroed, summed directly
/// over the off-diagonal entries.
pub fn off_diagonal_frobenius(op: &(impl LinearOperator + ?Sized)) -> Result<f64> {
    let n = op.dim();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let a = op.entry(i, j).ok_or(Error::ImplicitOperator)?;
                sum += a * a;
            }
        }
    }
    Ok(sum.sqrt())
}

/// `alpha * A` as an implicit operator.
pub struct ScaledOperator<A> {
    alpha: f64,
    inner: A,
}

/// `A + B` as an implicit operator.
pub struct SumOperator<A, B> {
    a: A,
    b: B,
}

/// `A * B` (composition) as an implicit operator.
pub struct ProductOperator<A, B> {
    a: A,
    b: B,
}

pub fn scale<A: LinearOperator>(alpha: f64, inner: A) -> Result<ScaledOperator<A>> {
    if !alpha.is_finite() {
        return Err(Error::NonFinite {
            context: "operator scale factor",
        });
    }
    Ok(ScaledOperator { alpha, inner })
}

pub fn sum<A: LinearOperator, B: LinearOperator>(a: A, b: B) -> Result<SumOperator<A, B>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(SumOperator { a, b })
}

pub fn product<A: LinearOperator, B: LinearOperator>(a: A, b: B) -> Result<ProductOperator<A, B>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(ProductOperator { a, b })
}

impl<A: LinearOperator> LinearOperator for ScaledOperator<A> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.inner.apply(x, y);
        for v in y.iter_mut() {
            *v *= self.alpha;
        }
    }
    fn concurrent_safe(&self) -> bool {
        self.inner.concurrent_safe()
    }
}

impl<A: LinearOperator, B: LinearOperator> LinearOperator for SumOperator<A, B> {
    fn dim(&self) -> usize {
        self.a.dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut tmp = vec![0.0; self.b.dim()];
        self.a.apply(x, y);
        self.b.apply(x, &mut tmp);
        for (v, t) in y.iter_mut().zip(&tmp) {
            *v += t;
        }
    }
    fn concurrent_safe(&self) -> bool {
        self.a.concurrent_safe() && self.b.concurrent_safe()
    }
}

impl<A: LinearOperator, B: LinearOperator> LinearOperator for ProductOperator<A, B> {
    fn dim(&self) -> usize {
        self.a.dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut tmp = vec![0.0; self.b.dim()];
        self.b.apply(x, &mut tmp);
        self.a.apply(&tmp, y);
    }
    fn concurrent_safe(&self) -> bool {
        self.a.concurrent_safe() && self.b.concurrent_safe()
    }
}

/// Wraps an operator and counts `apply` invocations; used to verify the
/// estimators' matvec budgets.
pub struct CountingOperator<A> {
    inner: A,
    count: AtomicU64,
}

impl<A: LinearOperator> CountingOperator<A> {
    pub fn new(inner: A) -> Self {
        CountingOperator {
            inner,
            count: AtomicU64::new(0),
        }
    }

    pub fn matvec_count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.count.store(0, Ordering::Relaxed);
    }
}

impl<A: LinearOperator> LinearOperator for CountingOperator<A> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.inner.apply(x, y);
    }
    fn concurrent_safe(&self) -> bool {
        self.inner.concurrent_safe()
    }
    fn entry(&self, i: usize, j: usize) -> Option<f64> {
        self.inner.entry(i, j)
    }
}

/// Checks `A(alpha x + beta y) = alpha Ax + beta Ay` on random probes.
///
/// Returns the largest observed residual `|lhs - rhs| / scale`, where the
/// scale is `|alpha| |Ax| + |beta| |Ay|` per the linearity contract. Useful
/// when wiring in a custom implicit operator.
pub fn check_linearity(
    op: &(impl LinearOperator + ?Sized),
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let n = op.dim();
    let stream = ProbeStream::new(seed);
    let dist = ProbeDistribution::Gaussian;
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        let x = crate::probes::sample_probe(&dist, n, &stream, 2 * t as u64);
        let y = crate::probes::sample_probe(&dist, n, &stream, 2 * t as u64 + 1);
        let mut rng = stream.substream(1, t as u64);
        let alpha = 2.0 * rng.next_f64() - 1.0;
        let beta = 2.0 * rng.next_f64() - 1.0;

        let ax = matvec(op, &x)?;
        let ay = matvec(op, &y)?;
        let combined: Vec<f64> = x
            .iter()
            .zip(&y)
            .map(|(xi, yi)| alpha * xi + beta * yi)
            .collect();
        let a_combined = matvec(op, &combined)?;

        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let residual: Vec<f64> = a_combined
            .iter()
            .zip(ax.iter().zip(&ay))
            .map(|(c, (axi, ayi))| c - alpha * axi - beta * ayi)
            .collect();
        let scale = alpha.abs() * norm(&ax) + beta.abs() * norm(&ay);
        if scale > 0.0 {
            worst = worst.max(norm(&residual) / scale);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tightness2() -> DenseMatrix {
        DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap()
    }

    #[test]
    fn matvec_identity() {
        let id = DenseMatrix::identity(2);
        assert_eq!(matvec(&id, &[3.0, -1.0]).unwrap(), vec![3.0, -1.0]);
    }

    #[test]
    fn matvec_tightness_matrix() {
        // [[0,1],[0,0]] * [1,1] = [1,0]
        assert_eq!(matvec(&tightness2(), &[1.0, 1.0]).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn matvec_basis_vector_extracts_column() {
        let a = DenseMatrix::random_uniform(5, 42);
        for j in 0..5 {
            let mut e = vec![0.0; 5];
            e[j] = 1.0;
            let col = matvec(&a, &e).unwrap();
            for (i, &c) in col.iter().enumerate() {
                assert_eq!(c, a.entry(i, j).unwrap());
            }
        }
    }

    #[test]
    fn matvec_rejects_bad_input() {
        let a = DenseMatrix::identity(3);
        assert!(matches!(
            matvec(&a, &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            matvec(&a, &[1.0, f64::NAN, 0.0]),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn matvec_matches_row_dot_oracle() {
        let a = DenseMatrix::random_uniform(17, 3);
        let stream = ProbeStream::new(9);
        let x = crate::probes::sample_probe(&ProbeDistribution::Gaussian, 17, &stream, 0);
        let y = matvec(&a, &x).unwrap();
        for (i, &yi) in y.iter().enumerate() {
            let mut dot = 0.0;
            for (j, &xj) in x.iter().enumerate() {
                dot += a.entry(i, j).unwrap() * xj;
            }
            let scale = dot.abs().max(1.0);
            assert!((yi - dot).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn hadamard_examples() {
        assert_eq!(
            hadamard(&[1.0, -1.0], &[2.0, 3.0]).unwrap(),
            vec![2.0, -3.0]
        );
        assert_eq!(hadamard(&[0.0, 5.0], &[7.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        let g = [1.0, -1.0, -1.0, 1.0];
        assert_eq!(hadamard(&g, &g).unwrap(), vec![1.0; 4]);
        assert!(hadamard(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn exact_diagonal_examples() {
        let a = DenseMatrix::from_rows(&[vec![2.0, 9.0], vec![9.0, 3.0]]).unwrap();
        assert_eq!(exact_diagonal(&a).unwrap(), vec![2.0, 3.0]);
        assert_eq!(exact_diagonal(&tightness2()).unwrap(), vec![0.0, 0.0]);
        assert_eq!(
            exact_diagonal(&DenseMatrix::identity(4)).unwrap(),
            vec![1.0; 4]
        );
    }

    #[test]
    fn diagonal_via_matvecs_matches_entries() {
        let a = DenseMatrix::random_uniform(8, 5);
        assert_eq!(
            exact_diagonal(&a).unwrap(),
            exact_diagonal_via_matvecs(&a).unwrap()
        );
        let s = SparseMatrix::from_dense(&a, 0.3);
        assert_eq!(
            exact_diagonal(&s).unwrap(),
            exact_diagonal_via_matvecs(&s).unwrap()
        );
    }

    #[test]
    fn frobenius_examples() {
        let a = DenseMatrix::from_rows(&[vec![3.0, 4.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(frobenius_norm(&a).unwrap(), 5.0);
        assert_eq!(frobenius_norm(&DenseMatrix::identity(9)).unwrap(), 3.0);
        assert_eq!(frobenius_norm(&tightness2()).unwrap(), 1.0);
    }

    #[test]
    fn off_diagonal_frobenius_examples() {
        let d = DenseMatrix::diagonal(&[4.0, -2.0, 7.0]).unwrap();
        assert_eq!(off_diagonal_frobenius(&d).unwrap(), 0.0);
        assert_eq!(off_diagonal_frobenius(&tightness2()).unwrap(), 1.0);
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        let expected = 8.0_f64.sqrt();
        assert!((off_diagonal_frobenius(&a).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn norm_pythagoras_identity() {
        // ||off||^2 + ||diag||^2 = ||A||^2, with the two sides computed by
        // independent summations.
        for seed in 0..10 {
            let a = DenseMatrix::random_uniform(12, seed);
            let off = off_diagonal_frobenius(&a).unwrap();
            let diag_sq: f64 = exact_diagonal(&a).unwrap().iter().map(|d| d * d).sum();
            let total = frobenius_norm(&a).unwrap();
            let lhs = off * off + diag_sq;
            let rhs = total * total;
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }
    }

    #[test]
    fn implicit_operator_rejects_entry_queries() {
        let a = DenseMatrix::identity(4);
        let b = DenseMatrix::identity(4);
        let s = sum(&a, &b).unwrap();
        assert!(!s.has_explicit_entries());
        assert!(matches!(frobenius_norm(&s), Err(Error::ImplicitOperator)));
        assert!(matches!(exact_diagonal(&s), Err(Error::ImplicitOperator)));
        // The opt-in matvec extraction still works.
        assert_eq!(exact_diagonal_via_matvecs(&s).unwrap(), vec![2.0; 4]);
    }

    #[test]
    fn compositions_compute_expected_products() {
        let a = DenseMatrix::random_uniform(6, 1);
        let b = DenseMatrix::random_uniform(6, 2);
        let x: Vec<f64> = (0..6).map(|i| i as f64 - 2.5).collect();

        let sum_op = sum(&a, &b).unwrap();
        let got = matvec(&sum_op, &x).unwrap();
        let ax = matvec(&a, &x).unwrap();
        let bx = matvec(&b, &x).unwrap();
        for i in 0..6 {
            assert!((got[i] - (ax[i] + bx[i])).abs() < 1e-14);
        }

        let prod_op = product(&a, &b).unwrap();
        let got = matvec(&prod_op, &x).unwrap();
        let abx = matvec(&a, &bx).unwrap();
        assert_eq!(got, abx);

        let scaled = scale(-2.5, &a).unwrap();
        let got = matvec(&scaled, &x).unwrap();
        for i in 0..6 {
            assert!((got[i] - (-2.5 * ax[i])).abs() < 1e-14);
        }
    }

    #[test]
    fn counting_operator_counts() {
        let a = CountingOperator::new(DenseMatrix::identity(3));
        let x = [1.0, 2.0, 3.0];
        for _ in 0..7 {
            matvec(&a, &x).unwrap();
        }
        assert_eq!(a.matvec_count(), 7);
        a.reset();
        assert_eq!(a.matvec_count(), 0);
    }

    #[test]
    fn linearity_holds_for_compositions() {
        let a = DenseMatrix::random_uniform(10, 11);
        let b = DenseMatrix::random_uniform(10, 12);
        let op = product(scale(3.0, &a).unwrap(), sum(&a, &b).unwrap()).unwrap();
        let worst = check_linearity(&op, 20, 7).unwrap();
        assert!(worst < 1e-12, "linearity residual {worst}");
    }
}
