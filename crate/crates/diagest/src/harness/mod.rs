//! Experiment harness: matrix ingestion, estimator sweeps, error records,
//! and the CSV/JSON emission behind the command-line interface.

mod generators;
pub mod verify;

pub use generators::GeneratorSpec;

use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{bound_report, BoundInputs, BoundReport};
use crate::error::{Error, Result};
use crate::estimators::{generalized_diagonal, normalized_diagonal};
use crate::median::{replication_count, robust_diagonal};
use crate::operator::{
    exact_diagonal, read_matrix_market, CountingOperator, LinearOperator, LoadedMatrix,
};
use crate::probes::{mix_seed, ProbeDistribution};

/// Estimator variant selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorMode {
    Plain,
    Normalized,
    Median,
}

impl EstimatorMode {
    pub fn from_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "plain" => Ok(EstimatorMode::Plain),
            "normalized" => Ok(EstimatorMode::Normalized),
            "median" => Ok(EstimatorMode::Median),
            other => Err(Error::InvalidParameter(format!(
                "unknown mode {other:?} (expected plain | normalized | median)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EstimatorMode::Plain => "plain",
            EstimatorMode::Normalized => "normalized",
            EstimatorMode::Median => "median",
        }
    }
}

/// Where the experiment matrix comes from.
#[derive(Debug, Clone)]
pub enum MatrixSource {
    File(PathBuf),
    Generator(GeneratorSpec),
}

impl MatrixSource {
    /// Loads the matrix and a short id for record rows.
    pub fn load(&self) -> Result<(String, LoadedMatrix)> {
        match self {
            MatrixSource::File(path) => {
                let id = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.to_string_lossy().into_owned());
                Ok((id, read_matrix_market(path)?))
            }
            MatrixSource::Generator(spec) => Ok((spec.id(), LoadedMatrix::Dense(spec.build()?))),
        }
    }
}

/// Full configuration of one experiment sweep.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub source: MatrixSource,
    pub dist: ProbeDistribution,
    pub mode: EstimatorMode,
    pub m_values: Vec<usize>,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        if self.m_values.is_empty() || self.m_values.contains(&0) {
            return Err(Error::InvalidParameter(
                "m values must be a non-empty list of positive integers".into(),
            ));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        Ok(())
    }
}

/// One trial's outcome. CSV schema (stable):
/// `matrix,n,distribution,mode,m,trial,error_l2,matvecs`.
#[derive(Debug, Clone)]
pub struct ErrorRecord {
    pub matrix: String,
    pub n: usize,
    pub distribution: String,
    pub mode: &'static str,
    pub m: usize,
    pub trial: usize,
    pub error_l2: f64,
    pub matvecs: u64,
}

pub const CSV_HEADER: &str = "matrix,n,distribution,mode,m,trial,error_l2,matvecs";

/// Sidecar metadata written next to the CSV.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSidecar {
    pub matrix: String,
    pub n: usize,
    pub distribution: String,
    pub mode: &'static str,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    /// Replicate count r when the mode is median.
    pub replicates: Option<usize>,
    /// Bound calculator outputs per m value.
    pub bounds: Vec<BoundReport>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub records: Vec<ErrorRecord>,
    pub sidecar: ExperimentSidecar,
}

/// Runs the sweep: for each m and each trial, one estimate and one record.
///
/// Trials run on the current rayon pool; the per-trial seed is derived from
/// `(seed, m-index, trial)`, so the output is byte-identical for any worker
/// count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let (matrix_id, matrix) = cfg.source.load()?;
    let n = matrix.dim();
    // Errors need the true diagonal, so the experiment requires an explicit
    // matrix.
    let diag = exact_diagonal(&matrix)?;

    let replicates = match cfg.mode {
        EstimatorMode::Median => Some(replication_count(cfg.delta)?),
        _ => None,
    };

    let mut records = Vec::with_capacity(cfg.m_values.len() * cfg.trials);
    for (m_index, &m) in cfg.m_values.iter().enumerate() {
        let mut rows: Vec<ErrorRecord> = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| -> Result<ErrorRecord> {
                let cell_seed = mix_seed(&[cfg.seed, m_index as u64, trial as u64]);
                let counting = CountingOperator::new(&matrix);
                let values = match cfg.mode {
                    EstimatorMode::Plain => {
                        generalized_diagonal(&counting, m, &cfg.dist, cell_seed)?.values
                    }
                    EstimatorMode::Normalized => {
                        normalized_diagonal(&counting, m, &cfg.dist, cell_seed)?.values
                    }
                    EstimatorMode::Median => {
                        robust_diagonal(&counting, m, cfg.delta, &cfg.dist, cell_seed)?
                            .selected()
                            .to_vec()
                    }
                };
                let error_l2 = values
                    .iter()
                    .zip(&diag)
                    .map(|(v, d)| (v - d) * (v - d))
                    .sum::<f64>()
                    .sqrt();
                Ok(ErrorRecord {
                    matrix: matrix_id.clone(),
                    n,
                    distribution: cfg.dist.name().to_string(),
                    mode: cfg.mode.name(),
                    m,
                    trial,
                    error_l2,
                    matvecs: counting.matvec_count(),
                })
            })
            .collect::<Result<_>>()?;
        records.append(&mut rows);
    }

    let bounds = cfg
        .m_values
        .iter()
        .map(|&m| {
            bound_report(
                &matrix,
                BoundInputs::new(
                    m,
                    cfg.delta,
                    cfg.dist.fourth_moment(),
                    cfg.dist.subgauss_param(),
                ),
            )
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ExperimentOutput {
        records,
        sidecar: ExperimentSidecar {
            matrix: matrix_id,
            n,
            distribution: cfg.dist.name().to_string(),
            mode: cfg.mode.name(),
            delta: cfg.delta,
            trials: cfg.trials,
            seed: cfg.seed,
            replicates,
            bounds,
        },
    })
}

/// Configuration of a single estimate run.
#[derive(Debug, Clone)]
pub struct EstimateConfig {
    pub source: MatrixSource,
    pub dist: ProbeDistribution,
    pub mode: EstimatorMode,
    pub m: usize,
    pub delta: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateMetadata {
    pub matrix: String,
    pub n: usize,
    pub distribution: String,
    pub mode: &'static str,
    pub m: usize,
    pub seed: u64,
    pub replicates: Option<usize>,
    pub matvecs: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateOutput {
    pub metadata: EstimateMetadata,
    pub values: Vec<f64>,
}

pub fn run_estimate(cfg: &EstimateConfig) -> Result<EstimateOutput> {
    if cfg.m == 0 {
        return Err(Error::InvalidParameter("probe count m must be >= 1".into()));
    }
    if cfg.mode == EstimatorMode::Median && !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1), got {}",
            cfg.delta
        )));
    }
    let (matrix_id, matrix) = cfg.source.load()?;
    let counting = CountingOperator::new(&matrix);
    let (values, replicates) = match cfg.mode {
        EstimatorMode::Plain => (
            generalized_diagonal(&counting, cfg.m, &cfg.dist, cfg.seed)?.values,
            None,
        ),
        EstimatorMode::Normalized => (
            normalized_diagonal(&counting, cfg.m, &cfg.dist, cfg.seed)?.values,
            None,
        ),
        EstimatorMode::Median => {
            let sel = robust_diagonal(&counting, cfg.m, cfg.delta, &cfg.dist, cfg.seed)?;
            (sel.selected().to_vec(), Some(sel.r))
        }
    };
    Ok(EstimateOutput {
        metadata: EstimateMetadata {
            matrix: matrix_id,
            n: matrix.dim(),
            distribution: cfg.dist.name().to_string(),
            mode: cfg.mode.name(),
            m: cfg.m,
            seed: cfg.seed,
            replicates,
            matvecs: counting.matvec_count(),
        },
        values,
    })
}

/// 17 significant digits: round-trippable f64 text.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the stable CSV schema.
pub fn write_records_csv(w: &mut impl Write, records: &[ErrorRecord]) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.matrix,
            r.n,
            r.distribution,
            r.mode,
            r.m,
            r.trial,
            format_f64(r.error_l2),
            r.matvecs
        )?;
    }
    Ok(())
}

/// Nearest-rank percentile (no interpolation): the ⌈p·len⌉-th smallest value.
/// Byte-stable across platforms.
pub fn percentile_nearest_rank(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty(), "percentile of empty slice");
    assert!(p > 0.0 && p <= 1.0, "percentile level must be in (0, 1]");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = (p * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}
