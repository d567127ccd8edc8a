//! Diagonal estimation for an operator that is never materialized.
//!
//! The operator here is (D + L)^T (D + L) built from composition adapters:
//! its entries are not stored anywhere, only matvecs are available — the
//! situation the estimators exist for. The exact diagonal for comparison
//! comes from the opt-in n-matvec extraction.
//!
//! ```bash
//! cargo run --example matrix_free
//! ```

use diagest::operator::{product, sum};
use diagest::{
    exact_diagonal_via_matvecs, generalized_diagonal, DenseMatrix, LinearOperator,
    ProbeDistribution,
};

/// The transpose of a stored matrix, exposed only through matvecs.
struct Transposed(DenseMatrix);

impl LinearOperator for Transposed {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for v in y.iter_mut() {
            *v = 0.0;
        }
        for (i, &xi) in x.iter().enumerate() {
            for (j, yj) in y.iter_mut().enumerate() {
                *yj += self.0.get(i, j) * xi;
            }
        }
    }
    fn concurrent_safe(&self) -> bool {
        true
    }
    // no entry(): this operator is implicit
}

fn main() {
    let n = 48;
    let d = DenseMatrix::diagonal(
        &(0..n)
            .map(|i| (i as f64 / 6.0).cos() + 2.0)
            .collect::<Vec<_>>(),
    )
    .unwrap();
    let l = DenseMatrix::random_uniform(n, 3);

    // M = (D + L)^T (D + L), assembled from adapters; still just matvecs.
    let d_plus_l = sum(&d, &l).unwrap();
    let d_plus_l_t = Transposed(DenseMatrix::linear_combination(1.0, &d, 1.0, &l).unwrap());
    let m_op = product(&d_plus_l_t, &d_plus_l).unwrap();

    println!(
        "operator has explicit entries: {}",
        m_op.has_explicit_entries()
    );

    // Ground truth via n basis matvecs (the cost the estimator avoids).
    let truth = exact_diagonal_via_matvecs(&m_op).unwrap();

    for m in [16usize, 128, 1024] {
        let est = generalized_diagonal(&m_op, m, &ProbeDistribution::Rademacher, 1).unwrap();
        let err: f64 = est
            .values
            .iter()
            .zip(&truth)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let scale: f64 = truth.iter().map(|d| d * d).sum::<f64>().sqrt();
        println!(
            "m = {m:>4}: relative diagonal error {:.4} ({m} matvecs vs {n} for exact extraction)",
            err / scale
        );
    }
}
