//! Load a Matrix Market file and estimate its diagonal.
//!
//! Writes a small symmetric coordinate file to a temp directory, reads it
//! back (symmetric storage expands to full), and runs the estimator.
//!
//! ```bash
//! cargo run --example matrix_market
//! ```

use diagest::operator::read_matrix_market;
use diagest::{exact_diagonal, hutchinson_diagonal, LinearOperator};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("diagest-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("laplacian5.mtx");

    // 1D graph Laplacian on 5 nodes, lower triangle only.
    std::fs::write(
        &path,
        "%%MatrixMarket matrix coordinate real symmetric\n\
         % path-graph Laplacian\n\
         5 5 9\n\
         1 1 1.0\n\
         2 1 -1.0\n\
         2 2 2.0\n\
         3 2 -1.0\n\
         3 3 2.0\n\
         4 3 -1.0\n\
         4 4 2.0\n\
         5 4 -1.0\n\
         5 5 1.0\n",
    )?;

    let matrix = read_matrix_market(&path)?;
    println!(
        "loaded {} ({}x{})",
        path.display(),
        matrix.dim(),
        matrix.dim()
    );

    let truth = exact_diagonal(&matrix)?;
    println!("true diagonal:      {truth:?}");

    let est = hutchinson_diagonal(&matrix, 400, 9)?;
    let rounded: Vec<f64> = est
        .values
        .iter()
        .map(|v| (v * 100.0).round() / 100.0)
        .collect();
    println!("estimate (m = 400): {rounded:?}");
    println!("l2 error: {:.4}", est.error_l2(&truth)?);

    // The symmetric header stored only the lower triangle; the loaded
    // operator has both halves.
    assert_eq!(matrix.entry(0, 1), matrix.entry(1, 0));
    println!(
        "symmetric expansion verified: A[0][1] == A[1][0] == {:?}",
        matrix.entry(0, 1)
    );
    Ok(())
}
