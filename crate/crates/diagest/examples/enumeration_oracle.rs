//! Exact ground truth at small n: enumerate all 2^n sign vectors and verify
//! the estimator's expectation identities to machine precision.
//!
//! ```bash
//! cargo run --example enumeration_oracle
//! ```

use diagest::oracle::{
    exact_expected_diag_estimate, exact_expected_squared_error, exact_tightness_pmf,
    exact_trace_moments,
};
use diagest::{exact_diagonal, off_diagonal_frobenius, DenseMatrix, LinearOperator};

fn main() {
    let a = DenseMatrix::random_uniform(10, 77);
    println!("matrix: random uniform 10x10 (2^10 = 1024 sign vectors)\n");

    // Unbiasedness: the enumeration mean of g (.) Ag is exactly diag(A).
    let mean = exact_expected_diag_estimate(&a).unwrap();
    let diag = exact_diagonal(&a).unwrap();
    let dev = mean
        .iter()
        .zip(&diag)
        .map(|(m, d)| (m - d).abs())
        .fold(0.0, f64::max);
    println!("unbiasedness: max |E[g(.)Ag] - diag(A)| = {dev:.2e}");

    // Expected squared error equals the squared off-diagonal norm.
    let oracle_err = exact_expected_squared_error(&a).unwrap();
    let off = off_diagonal_frobenius(&a).unwrap();
    println!(
        "expected squared error: enumeration {oracle_err:.12} vs closed form {:.12}",
        off * off
    );

    // Trace estimator: mean = tr(B), variance = 2 ||B offdiag||_F^2 for
    // symmetric B.
    let b = DenseMatrix::random_symmetric(9, 3);
    let (mean, var) = exact_trace_moments(&b).unwrap();
    let trace: f64 = (0..b.dim()).map(|i| b.get(i, i)).sum();
    let b_off = off_diagonal_frobenius(&b).unwrap();
    println!("\ntrace estimator on symmetric 9x9:");
    println!("  enumeration mean {mean:.12} vs tr(B) {trace:.12}");
    println!(
        "  enumeration var  {var:.12} vs 2||B-bar||^2 {:.12}",
        2.0 * b_off * b_off
    );

    // The worst-case 2x2: the estimate's first coordinate is a scaled
    // centered binomial, so accuracy improves no faster than 1/sqrt(m).
    println!("\nworst-case matrix [[0,1],[0,0]]: Pr[|estimate_1| > 0.5] by probe count");
    for m in [1usize, 2, 4, 8, 16] {
        let pmf = exact_tightness_pmf(m).unwrap();
        println!("  m = {m:>2}: {:.6}", pmf.failure_probability(0.5));
    }
}
