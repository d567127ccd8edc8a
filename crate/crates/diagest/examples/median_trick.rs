//! Boosting a constant-probability estimator to high probability by running
//! r = ceil(10 ln(1/delta)) replicates and selecting via pairwise-distance
//! order statistics.
//!
//! ```bash
//! cargo run --example median_trick
//! ```

use diagest::probes::mix_seed;
use diagest::{exact_diagonal, replication_count, robust_diagonal, DenseMatrix, ProbeDistribution};

fn main() {
    let a = DenseMatrix::random_uniform(40, 5);
    let truth = exact_diagonal(&a).unwrap();
    let dist = ProbeDistribution::Gaussian;
    let m = 24;

    println!("delta -> replicates r = max(3, ceil(10 ln(1/delta)))");
    for delta in [0.5, 0.1, 0.05, 0.01, 0.001] {
        println!("  {delta:>6}: r = {}", replication_count(delta).unwrap());
    }

    let delta = 0.05;
    let sel = robust_diagonal(&a, m, delta, &dist, 2024).unwrap();
    let err = |v: &[f64]| -> f64 {
        v.iter()
            .zip(&truth)
            .map(|(x, d)| (x - d) * (x - d))
            .sum::<f64>()
            .sqrt()
    };

    println!(
        "\none run at delta = {delta}: r = {}, m = {m} probes each",
        sel.r
    );
    let errors: Vec<f64> = sel.candidates.iter().map(|c| err(c)).collect();
    let worst = errors.iter().cloned().fold(0.0f64, f64::max);
    let best = errors.iter().cloned().fold(f64::INFINITY, f64::min);
    println!("candidate errors: best {best:.4}, worst {worst:.4}");
    println!(
        "selected index {} with B = {:.4}, error {:.4}",
        sel.selected_index,
        sel.b_values[sel.selected_index],
        err(sel.selected())
    );

    // The selection cannot be much worse even when some candidates are bad;
    // show the worst selected error over repeated runs vs the worst single
    // candidate seen.
    let runs = 200;
    let mut worst_selected: f64 = 0.0;
    let mut worst_candidate: f64 = 0.0;
    for t in 0..runs {
        let sel = robust_diagonal(&a, m, delta, &dist, mix_seed(&[7, t])).unwrap();
        worst_selected = worst_selected.max(err(sel.selected()));
        for c in &sel.candidates {
            worst_candidate = worst_candidate.max(err(c));
        }
    }
    println!(
        "\nacross {runs} runs: worst selected error {worst_selected:.4} vs worst candidate \
         anywhere {worst_candidate:.4}"
    );
}
