//! Matrix-free stochastic diagonal estimation.
//!
//! Estimate `diag(A)` for a matrix you can only multiply vectors by:
//! Hutchinson's estimator averages `g ⊙ Ag` over random sign probes, the
//! generalized variant accepts any mean-0/variance-1 probe distribution, and
//! a median-of-means selector boosts the success probability for a
//! logarithmic replication cost. Exact enumeration oracles and closed-form
//! error-bound calculators make every expectation identity checkable at
//! desk scale.
//!
//! ```
//! use diagest::{hutchinson_diagonal, DenseMatrix};
//!
//! let a = DenseMatrix::from_rows(&[
//!     vec![4.0, 1.0, 0.0],
//!     vec![1.0, 3.0, -1.0],
//!     vec![0.0, -1.0, 2.0],
//! ]).unwrap();
//! let estimate = hutchinson_diagonal(&a, 64, 0).unwrap();
//! assert_eq!(estimate.values.len(), 3);
//! ```
//!
//! The `examples/` directory walks through each capability; the `diagest`
//! binary exposes the experiment harness (`estimate`, `experiment`,
//! `verify`).

pub mod bounds;
mod error;
pub mod estimators;
pub mod harness;
pub mod median;
pub mod operator;
pub mod oracle;
pub mod probes;

pub use error::{Error, Result};
pub use estimators::{
    generalized_diagonal, hutchinson_diagonal, hutchinson_trace, normalized_diagonal,
    single_probe_error, DiagonalEstimate, ErrorVector,
};
pub use median::{median_select, replication_count, robust_diagonal, MedianSelection};
pub use operator::{
    exact_diagonal, exact_diagonal_via_matvecs, frobenius_norm, hadamard, matvec,
    off_diagonal_frobenius, DenseMatrix, LinearOperator, LoadedMatrix, SparseMatrix,
};
pub use probes::{sample_probe, ProbeDistribution, ProbeStream};
