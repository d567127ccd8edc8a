//! Closed-form expected errors and tail bounds for the diagonal estimators.
//!
//! The concentration results carry unspecified absolute constants, so every
//! tail-bound calculator takes the constant `c` as an explicit argument
//! (default 1.0 via [`BoundInputs`]); the returned numbers pin the *shape*
//! of the bound, and experiments fit the constant empirically. Natural
//! logarithms throughout.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::LinearOperator;

/// Squared norms an explicit matrix contributes to every bound:
/// `(‖off-diagonal‖_F², ‖diag‖₂², ‖A‖_F²)`.
pub fn matrix_norms_sq(op: &(impl LinearOperator + ?Sized)) -> Result<(f64, f64, f64)> {
    let n = op.dim();
    let mut off_sq = 0.0;
    let mut diag_sq = 0.0;
    for i in 0..n {
        for j in 0..n {
            let a = op.entry(i, j).ok_or(Error::ImplicitOperator)?;
            if i == j {
                diag_sq += a * a;
            } else {
                off_sq += a * a;
            }
        }
    }
    Ok((off_sq, diag_sq, off_sq + diag_sq))
}

fn require_m(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidParameter("probe count m must be >= 1".into()));
    }
    Ok(())
}

fn require_delta_open(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    Ok(())
}

fn require_delta_half_open(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1], got {delta}"
        )));
    }
    Ok(())
}

fn require_c4(c4: f64) -> Result<()> {
    if c4.is_finite() && c4 >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "fourth moment c4 must be finite and >= 1, got {c4}"
        )))
    }
}

fn require_positive(value: f64, what: &str) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{what} must be finite and positive, got {value}"
        )))
    }
}

/// Expected squared error of the Rademacher estimator at m probes:
/// `‖Ā‖_F² / m`.
pub fn expected_squared_error_rademacher(
    op: &(impl LinearOperator + ?Sized),
    m: usize,
) -> Result<f64> {
    // c4 = 1 specializes the general formula; one implementation.
    expected_squared_error_general(op, m, 1.0)
}

/// Expected squared error of the generalized estimator with fourth moment
/// c4: `(‖Ā‖_F² + (c4 − 1)·‖diag(A)‖₂²) / m`.
pub fn expected_squared_error_general(
    op: &(impl LinearOperator + ?Sized),
    m: usize,
    c4: f64,
) -> Result<f64> {
    require_m(m)?;
    require_c4(c4)?;
    let (off_sq, diag_sq, _) = matrix_norms_sq(op)?;
    Ok((off_sq + (c4 - 1.0) * diag_sq) / m as f64)
}

/// The error scale `E = sqrt((c4 − 1)·‖diag(A)‖₂² + ‖Ā‖_F²)` of the
/// generalized estimator.
pub fn quantity_e(op: &(impl LinearOperator + ?Sized), c4: f64) -> Result<f64> {
    require_c4(c4)?;
    let (off_sq, diag_sq, _) = matrix_norms_sq(op)?;
    Ok(((c4 - 1.0) * diag_sq + off_sq).sqrt())
}

/// Markov-inequality tail bound: with probability 1 − delta the estimator
/// error is at most `sqrt(1/(m·delta)) · E`.
pub fn markov_bound(
    op: &(impl LinearOperator + ?Sized),
    m: usize,
    delta: f64,
    c4: f64,
) -> Result<f64> {
    require_m(m)?;
    require_delta_open(delta)?;
    Ok((1.0 / (m as f64 * delta)).sqrt() * quantity_e(op, c4)?)
}

/// The dimension-free Rademacher tail bound
/// `c · sqrt(ln(2/delta)/m) · ‖Ā‖_F`.
pub fn dimension_free_bound(
    op: &(impl LinearOperator + ?Sized),
    m: usize,
    delta: f64,
    c: f64,
) -> Result<f64> {
    require_m(m)?;
    require_delta_half_open(delta)?;
    require_positive(c, "constant c")?;
    let (off_sq, _, _) = matrix_norms_sq(op)?;
    Ok(c * ((2.0 / delta).ln() / m as f64).sqrt() * off_sq.sqrt())
}

/// The sub-Gaussian tail bound
/// `c · K² · sqrt(ln(2/delta)/m + ln(2/delta)⁴/m²) · ‖A‖_F`.
pub fn subgauss_bound(
    op: &(impl LinearOperator + ?Sized),
    m: usize,
    delta: f64,
    k: f64,
    c: f64,
) -> Result<f64> {
    require_m(m)?;
    require_delta_half_open(delta)?;
    require_positive(k, "sub-Gaussian parameter K")?;
    require_positive(c, "constant c")?;
    let (_, _, total_sq) = matrix_norms_sq(op)?;
    let log_term = (2.0 / delta).ln();
    let mf = m as f64;
    let shape = (log_term / mf + log_term.powi(4) / (mf * mf)).sqrt();
    Ok(c * k * k * shape * total_sq.sqrt())
}

/// Which probe-budget rule to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeBudget {
    /// `⌈1/(epsilon²·delta)⌉` — the Markov route, linear in 1/delta.
    Markov,
    /// `⌈ln(2/delta)/epsilon²⌉` — the high-probability route (constant
    /// taken as 1), logarithmic in 1/delta.
    HighProbability,
}

/// Probes needed for error `epsilon · scale` at failure probability `delta`.
pub fn probes_needed(epsilon: f64, delta: f64, mode: ProbeBudget) -> Result<usize> {
    require_positive(epsilon, "epsilon")?;
    require_delta_open(delta)?;
    let raw = match mode {
        ProbeBudget::Markov => 1.0 / (epsilon * epsilon * delta),
        ProbeBudget::HighProbability => (2.0 / delta).ln() / (epsilon * epsilon),
    };
    // Guard against ulp noise turning an exact integer into the next one.
    Ok(((raw - 1e-9).ceil().max(1.0)) as usize)
}

/// Inputs echoed into a [`BoundReport`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundInputs {
    pub m: usize,
    pub delta: f64,
    pub c4: f64,
    pub subgauss_k: f64,
    /// The unspecified absolute constant; bounds are shape-only up to it.
    pub constant_c: f64,
}

impl BoundInputs {
    pub fn new(m: usize, delta: f64, c4: f64, subgauss_k: f64) -> Self {
        BoundInputs {
            m,
            delta,
            c4,
            subgauss_k,
            constant_c: 1.0,
        }
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.constant_c = c;
        self
    }
}

/// Every bound the calculators produce for one (matrix, m, delta) cell.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub expected_sq_error: f64,
    pub markov_bound: f64,
    pub main_bound: f64,
    pub subgauss_bound: f64,
    pub quantity_e: f64,
    #[serde(flatten)]
    pub inputs: BoundInputs,
}

/// Evaluates all calculators on one explicit matrix.
pub fn bound_report(
    op: &(impl LinearOperator + ?Sized),
    inputs: BoundInputs,
) -> Result<BoundReport> {
    let report = BoundReport {
        expected_sq_error: expected_squared_error_general(op, inputs.m, inputs.c4)?,
        markov_bound: markov_bound(op, inputs.m, inputs.delta, inputs.c4)?,
        main_bound: dimension_free_bound(op, inputs.m, inputs.delta, inputs.constant_c)?,
        subgauss_bound: subgauss_bound(
            op,
            inputs.m,
            inputs.delta,
            inputs.subgauss_k,
            inputs.constant_c,
        )?,
        quantity_e: quantity_e(op, inputs.c4)?,
        inputs,
    };
    debug_assert!(report.expected_sq_error >= 0.0);
    Ok(report)
}
