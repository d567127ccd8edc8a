//! The closed-form error calculators: expected squared error, the Markov
//! tail bound, the dimension-free high-probability bound, the sub-Gaussian
//! bound, and the probe budgets they imply.
//!
//! ```bash
//! cargo run --example bounds_report
//! ```

use diagest::bounds::{bound_report, probes_needed, BoundInputs, ProbeBudget};
use diagest::{DenseMatrix, ProbeDistribution};

fn main() {
    let a = DenseMatrix::random_uniform(64, 21);
    let dist = ProbeDistribution::Gaussian;
    let delta = 0.05;

    println!("bounds for a 64x64 uniform matrix, Gaussian probes, delta = {delta}");
    println!("(tail bounds are shape-only up to the absolute constant c, here c = 1)\n");
    println!("    m | E[err^2]  | Markov    | main      | sub-Gaussian | E");
    println!("------+-----------+-----------+-----------+--------------+--------");
    for m in [1usize, 16, 64, 256, 1024] {
        let r = bound_report(
            &a,
            BoundInputs::new(m, delta, dist.fourth_moment(), dist.subgauss_param()),
        )
        .unwrap();
        println!(
            "{m:>5} | {:>9.4} | {:>9.4} | {:>9.4} | {:>12.4} | {:>6.3}",
            r.expected_sq_error, r.markov_bound, r.main_bound, r.subgauss_bound, r.quantity_e
        );
    }

    println!("\nprobe budgets for error epsilon * scale with probability 1 - delta:");
    println!("epsilon  delta   | markov route | high-probability route");
    for (eps, delta) in [(0.5, 0.1), (0.5, 0.01), (0.5, 0.001), (0.1, 0.01)] {
        let markov = probes_needed(eps, delta, ProbeBudget::Markov).unwrap();
        let main = probes_needed(eps, delta, ProbeBudget::HighProbability).unwrap();
        println!("{eps:>7}  {delta:>6} | {markov:>12} | {main:>22}");
    }
    println!("\nthe Markov route grows linearly in 1/delta, the other logarithmically.");

    // The full report serializes for the experiment sidecar.
    let r = bound_report(
        &a,
        BoundInputs::new(64, delta, dist.fourth_moment(), dist.subgauss_param()),
    )
    .unwrap();
    println!(
        "\nJSON form:\n{}",
        serde_json::to_string_pretty(&r).unwrap()
    );
}
