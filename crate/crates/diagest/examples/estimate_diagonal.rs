//! Estimate the diagonal of a stored matrix and watch the error shrink as
//! probes are added.
//!
//! ```bash
//! cargo run --example estimate_diagonal
//! ```

use diagest::bounds::expected_squared_error_rademacher;
use diagest::{exact_diagonal, hutchinson_diagonal, DenseMatrix};

fn main() {
    // A 64x64 matrix with strong diagonal and noisy off-diagonal entries.
    let n = 64;
    let noise = DenseMatrix::random_uniform(n, 7);
    let spine =
        DenseMatrix::diagonal(&(0..n).map(|i| 1.0 + i as f64 / 8.0).collect::<Vec<_>>()).unwrap();
    let a = DenseMatrix::linear_combination(1.0, &spine, 0.25, &noise).unwrap();

    let truth = exact_diagonal(&a).unwrap();

    println!("probes | observed ||error||_2 | rms predicted");
    println!("-------+----------------------+--------------");
    for m in [1usize, 4, 16, 64, 256, 1024] {
        let estimate = hutchinson_diagonal(&a, m, 42).unwrap();
        let observed = estimate.error_l2(&truth).unwrap();
        // The expected squared error is ||A offdiag||_F^2 / m, so its square
        // root is the natural scale to compare against.
        let predicted = expected_squared_error_rademacher(&a, m).unwrap().sqrt();
        println!("{m:>6} | {observed:>20.6} | {predicted:>12.6}");
    }

    let final_estimate = hutchinson_diagonal(&a, 1024, 42).unwrap();
    println!(
        "\nfirst five coordinates at m = 1024: {:?}",
        &final_estimate.values[..5]
    );
    println!("first five true values:             {:?}", &truth[..5]);
    println!(
        "\nestimate provenance: m = {}, distribution = {}, seed = {}",
        final_estimate.num_probes, final_estimate.distribution, final_estimate.master_seed
    );
}
