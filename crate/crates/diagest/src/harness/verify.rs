//! Built-in exactness checks: the enumeration oracles and distribution
//! identities evaluated on fixture matrices, reported one pass/fail line at
//! a time. Backs the `verify` subcommand.

use serde::Serialize;

use crate::operator::{
    exact_diagonal, frobenius_norm, matvec, off_diagonal_frobenius, DenseMatrix, LinearOperator,
};
use crate::oracle;
use crate::probes::{sample_probe, ProbeDistribution, ProbeStream};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub check: &'static str,
    pub matrix: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn from_deviation(
        check: &'static str,
        matrix: &str,
        deviation: f64,
        tolerance: f64,
    ) -> CheckResult {
        CheckResult {
            check,
            matrix: matrix.to_string(),
            passed: deviation <= tolerance,
            detail: format!("max deviation {deviation:.3e} (tolerance {tolerance:.3e})"),
        }
    }
}

fn error_result(check: &'static str, matrix: &str, err: impl std::fmt::Display) -> CheckResult {
    CheckResult {
        check,
        matrix: matrix.to_string(),
        passed: false,
        detail: format!("error: {err}"),
    }
}

/// Fixture matrices the suite runs on. All are small enough for exact
/// enumeration.
pub fn fixtures() -> Vec<(String, DenseMatrix)> {
    vec![
        (
            "tightness2".into(),
            DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap(),
        ),
        ("identity4".into(), DenseMatrix::identity(4)),
        (
            "diag5".into(),
            DenseMatrix::diagonal(&[2.0, -1.0, 0.5, 3.0, -0.25]).unwrap(),
        ),
        ("dense6".into(), DenseMatrix::random_uniform(6, 0xD155)),
        ("dense8".into(), DenseMatrix::random_uniform(8, 0xD156)),
        ("sym8".into(), DenseMatrix::random_symmetric(8, 0xD157)),
    ]
}

/// Enumeration mean of the single-probe estimate against a claimed diagonal.
pub fn check_unbiasedness(name: &str, a: &DenseMatrix, claimed_diag: &[f64]) -> CheckResult {
    const CHECK: &str = "unbiasedness";
    let mean = match oracle::exact_expected_diag_estimate(a) {
        Ok(v) => v,
        Err(e) => return error_result(CHECK, name, e),
    };
    let fro = frobenius_norm(a).unwrap_or(1.0);
    let dev = mean
        .iter()
        .zip(claimed_diag)
        .map(|(m, d)| (m - d).abs())
        .fold(0.0, f64::max);
    CheckResult::from_deviation(CHECK, name, dev, 1e-10 * fro.max(1e-300))
}

/// Enumeration expected squared error against the off-diagonal norm.
pub fn check_expected_squared_error(name: &str, a: &DenseMatrix) -> CheckResult {
    const CHECK: &str = "expected-squared-error";
    let got = match oracle::exact_expected_squared_error(a) {
        Ok(v) => v,
        Err(e) => return error_result(CHECK, name, e),
    };
    let off = match off_diagonal_frobenius(a) {
        Ok(v) => v,
        Err(e) => return error_result(CHECK, name, e),
    };
    let expected = off * off;
    let dev = (got - expected).abs();
    CheckResult::from_deviation(CHECK, name, dev, 1e-10 * expected.max(1e-12))
}

/// Enumeration trace-estimator moments against `tr(B)` and `2‖B̄‖_F²`.
/// Meaningful for symmetric B (the variance identity needs symmetry).
pub fn check_trace_moments(name: &str, b: &DenseMatrix) -> CheckResult {
    const CHECK: &str = "trace-moments";
    let (mean, var) = match oracle::exact_trace_moments(b) {
        Ok(v) => v,
        Err(e) => return error_result(CHECK, name, e),
    };
    let n = b.dim();
    let trace: f64 = (0..n).map(|i| b.get(i, i)).sum();
    let off = match off_diagonal_frobenius(b) {
        Ok(v) => v,
        Err(e) => return error_result(CHECK, name, e),
    };
    let expected_var = 2.0 * off * off;
    let mean_dev = (mean - trace).abs() / trace.abs().max(1e-12);
    let var_dev = (var - expected_var).abs() / expected_var.max(1e-12);
    CheckResult::from_deviation(CHECK, name, mean_dev.max(var_dev), 1e-10)
}

/// Squared single-probe error against the trace quadratic form `‖Āg‖²`,
/// probe by probe.
pub fn check_error_trace_identity(name: &str, a: &DenseMatrix, probes: usize) -> CheckResult {
    const CHECK: &str = "error-trace-identity";
    let off = a.off_diagonal_part();
    let fro = match frobenius_norm(a) {
        Ok(v) => v,
        Err(e) => return error_result(CHECK, name, e),
    };
    let stream = ProbeStream::new(0xE22);
    let n = a.dim();
    let mut worst: f64 = 0.0;
    for z in 0..probes {
        let g = sample_probe(&ProbeDistribution::Rademacher, n, &stream, z as u64);
        let e = match crate::estimators::single_probe_error(a, &g) {
            Ok(v) => v,
            Err(e) => return error_result(CHECK, name, e),
        };
        let og = match matvec(&off, &g) {
            Ok(v) => v,
            Err(e) => return error_result(CHECK, name, e),
        };
        let quad: f64 = og.iter().map(|v| v * v).sum();
        worst = worst.max((e.norm_sq() - quad).abs());
    }
    CheckResult::from_deviation(CHECK, name, worst, 1e-9 * (fro * fro).max(1e-12))
}

/// Walk enumeration pmf against the closed-form centered binomial, plus
/// monotonicity of the implied failure probability under doubling m.
///
/// Monotonicity is checked along m → 2m, not consecutive m: the binomial
/// lattice makes `Pr[|S/m| > eps]` oscillate between adjacent m (at
/// eps = 0.5 it is 0.125 for m = 4 but 0.375 for m = 5).
pub fn check_tightness_pmf(max_m: usize) -> CheckResult {
    const CHECK: &str = "tightness-pmf";
    let mut worst: f64 = 0.0;
    let mut failures = Vec::with_capacity(max_m);
    for m in 1..=max_m {
        let pmf = match oracle::exact_tightness_pmf(m) {
            Ok(p) => p,
            Err(e) => return error_result(CHECK, "tightness2", e),
        };
        // closed-form binomial C(m, k) / 2^m, iteratively.
        let mut coeff = 1.0f64;
        let scale = (1u64 << m) as f64;
        for k in 0..=m {
            worst = worst.max((pmf.probs[k] - coeff / scale).abs());
            coeff = coeff * (m - k) as f64 / (k + 1) as f64;
        }
        failures.push(pmf.failure_probability(0.5));
    }
    let mut monotone = true;
    for m in 1..=max_m / 2 {
        if failures[2 * m - 1] > failures[m - 1] + 1e-12 {
            monotone = false;
        }
    }
    let mut result = CheckResult::from_deviation(CHECK, "tightness2", worst, 1e-12);
    if !monotone {
        result.passed = false;
        result.detail = format!(
            "{}; failure probability not monotone under doubling m",
            result.detail
        );
    }
    result
}

/// Runs the whole suite on the built-in fixtures.
pub fn run_all() -> Vec<CheckResult> {
    let mut results = Vec::new();
    for (name, a) in fixtures() {
        let diag = exact_diagonal(&a).expect("fixtures are explicit");
        results.push(check_unbiasedness(&name, &a, &diag));
        results.push(check_expected_squared_error(&name, &a));
        results.push(check_error_trace_identity(&name, &a, 200));
        // The variance identity requires symmetry.
        let symmetric = {
            let n = a.dim();
            (0..n).all(|i| (0..n).all(|j| a.get(i, j) == a.get(j, i)))
        };
        if symmetric {
            results.push(check_trace_moments(&name, &a));
        }
    }
    results.push(check_tightness_pmf(10));
    results
}
