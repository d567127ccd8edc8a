//! End-to-end checks of the `diagest` binary: output formats, exit codes,
//! and agreement with library-level results.

use std::path::Path;
use std::process::{Command, Output};

use diagest::{hutchinson_diagonal, DenseMatrix};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_diagest"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_tightness_mtx(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("tightness2.mtx");
    std::fs::write(
        &path,
        "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 2 1.0\n",
    )
    .unwrap();
    path
}

#[test]
fn estimate_matches_library_result() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = write_tightness_mtx(dir.path());
    let out = run(&[
        "estimate",
        "--matrix",
        mtx.to_str().unwrap(),
        "--mode",
        "plain",
        "--m",
        "1",
        "--seed",
        "5",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();

    let values: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.parse().unwrap())
        .collect();

    let a = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
    let expected = hutchinson_diagonal(&a, 1, 5).unwrap();
    assert_eq!(values, expected.values);

    // metadata header present
    assert!(text.contains("# matrix tightness2"));
    assert!(text.contains("# m 1"));
    assert!(text.contains("# seed 5"));
    assert!(text.contains("# matvecs 1"));
}

#[test]
fn estimate_median_reports_replicates() {
    let out = run(&[
        "estimate",
        "--generator",
        "tightness2",
        "--mode",
        "median",
        "--m",
        "2",
        "--delta",
        "0.05",
        "--json",
    ]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // r = ceil(10 ln 20) = 30
    assert_eq!(json["metadata"]["replicates"], 30);
    assert_eq!(json["metadata"]["matvecs"], 60);
    assert_eq!(json["values"].as_array().unwrap().len(), 2);
}

#[test]
fn malformed_header_exits_3_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.mtx");
    std::fs::write(
        &path,
        "%%MatrixMarket matrix coordinate complex general\n1 1 1\n",
    )
    .unwrap();
    let out = run(&["estimate", "--matrix", path.to_str().unwrap(), "--m", "1"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 1"), "stderr: {err}");
}

#[test]
fn missing_source_exits_2() {
    let out = run(&["estimate", "--m", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_file_exits_3() {
    let out = run(&["estimate", "--matrix", "/nonexistent/x.mtx", "--m", "1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn invalid_delta_rejected_before_compute() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let out = run(&[
        "experiment",
        "--generator",
        "tightness2",
        "--m",
        "4",
        "--delta",
        "1.5",
        "--trials",
        "2",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!csv.exists(), "no output should be written on config error");
}

#[test]
fn experiment_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = run(&[
        "experiment",
        "--generator",
        "spiked-diag(8,0.5)",
        "--dist",
        "gaussian",
        "--m",
        "4,16",
        "--trials",
        "3",
        "--seed",
        "11",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "matrix,n,distribution,mode,m,trial,error_l2,matvecs"
    );
    assert_eq!(lines.count(), 6); // 2 m-values x 3 trials

    let sidecar: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("sweep.bounds.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(sidecar["seed"], 11);
    assert_eq!(sidecar["bounds"].as_array().unwrap().len(), 2);
    assert!(sidecar["bounds"][0]["markov_bound"].as_f64().unwrap() > 0.0);
}

#[test]
fn experiment_sweep_errors_shrink_with_m() {
    // 2000 trials at m = 16/64/256 -> 6000 rows, with the 95th-percentile
    // error decreasing as probes are added.
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rate.csv");
    let out = run(&[
        "experiment",
        "--generator",
        "offdiag-uniform(32)",
        "--m",
        "16,64,256",
        "--trials",
        "2000",
        "--seed",
        "3",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 6000);

    let p95_for = |m: &str| -> f64 {
        let mut errors: Vec<f64> = rows
            .iter()
            .filter(|r| r.split(',').nth(4) == Some(m))
            .map(|r| r.split(',').nth(6).unwrap().parse().unwrap())
            .collect();
        assert_eq!(errors.len(), 2000);
        errors.sort_by(f64::total_cmp);
        errors[(0.95f64 * 2000.0).ceil() as usize - 1]
    };
    let (p16, p64, p256) = (p95_for("16"), p95_for("64"), p95_for("256"));
    assert!(
        p16 > p64 && p64 > p256,
        "p95 not decreasing: {p16} / {p64} / {p256}"
    );
}

#[test]
fn verify_passes_and_supports_json() {
    let out = run(&["verify"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("PASS unbiasedness")));
    assert!(!text.contains("\nFAIL"));

    let out = run(&["verify", "--json"]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["passed"], true);
    assert!(json["checks"].as_array().unwrap().len() > 10);
}
