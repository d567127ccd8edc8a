//! Run a full experiment sweep through the harness (the same path the CLI
//! uses): per-trial error records, CSV output, and the bounds sidecar.
//!
//! ```bash
//! cargo run --release --example experiment_sweep
//! ```

use diagest::harness::{
    percentile_nearest_rank, run_experiment, write_records_csv, EstimatorMode, ExperimentConfig,
    GeneratorSpec, MatrixSource,
};
use diagest::ProbeDistribution;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig {
        source: MatrixSource::Generator(GeneratorSpec::OffdiagUniform { n: 64 }),
        dist: ProbeDistribution::Rademacher,
        mode: EstimatorMode::Plain,
        m_values: vec![16, 64, 256],
        delta: 0.05,
        trials: 500,
        seed: 12345,
    };
    let output = run_experiment(&cfg)?;

    println!(
        "{} trials x {} probe counts on {} (seed {})\n",
        cfg.trials,
        cfg.m_values.len(),
        output.sidecar.matrix,
        output.sidecar.seed
    );

    println!("    m | p50 error | p95 error | sqrt(E[err^2])");
    println!("------+-----------+-----------+---------------");
    for (i, &m) in cfg.m_values.iter().enumerate() {
        let errors: Vec<f64> = output
            .records
            .iter()
            .filter(|r| r.m == m)
            .map(|r| r.error_l2)
            .collect();
        let p50 = percentile_nearest_rank(&errors, 0.5);
        let p95 = percentile_nearest_rank(&errors, 0.95);
        let rms = output.sidecar.bounds[i].expected_sq_error.sqrt();
        println!("{m:>5} | {p50:>9.4} | {p95:>9.4} | {rms:>13.4}");
    }
    println!("\nquadrupling m halves every row: the 1/sqrt(m) rate.");

    // Same artifacts the CLI writes.
    let dir = std::env::temp_dir().join("diagest-example");
    std::fs::create_dir_all(&dir)?;
    let csv_path = dir.join("sweep.csv");
    let mut csv = Vec::new();
    write_records_csv(&mut csv, &output.records)?;
    std::fs::write(&csv_path, &csv)?;
    let sidecar_path = dir.join("sweep.bounds.json");
    std::fs::write(
        &sidecar_path,
        serde_json::to_string_pretty(&output.sidecar)?,
    )?;
    println!(
        "\nwrote {} records to {} and bounds to {}",
        output.records.len(),
        csv_path.display(),
        sidecar_path.display()
    );
    Ok(())
}
