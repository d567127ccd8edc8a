//! Built-in matrix generators for reproducible experiments.
//!
//! Each generator is a pure function of its parameters: the entries come
//! from a stream keyed by a fixed internal constant, not by the experiment
//! seed, so `offdiag-uniform(64)` names one canonical matrix everywhere.

use crate::error::{Error, Result};
use crate::operator::DenseMatrix;
use crate::probes::ProbeStream;

/// Stream key for generator entries; independent of experiment seeds.
const GENERATOR_STREAM_KEY: u64 = 0x0FFD_1A60_D1A6_0E57;

/// A named matrix family with fixed parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    /// Zero diagonal, i.i.d. uniform off-diagonal entries rescaled so the
    /// off-diagonal Frobenius norm is exactly 1. Isolates the off-diagonal
    /// error term at every dimension.
    OffdiagUniform { n: usize },
    /// Random diagonal rescaled to unit Euclidean norm plus i.i.d. uniform
    /// off-diagonal entries rescaled to off-diagonal Frobenius norm `rho`.
    /// Separates the diagonal and off-diagonal error contributions.
    SpikedDiag { n: usize, rho: f64 },
    /// The 2×2 worst case `[[0,1],[0,0]]`.
    Tightness2,
}

impl GeneratorSpec {
    /// Parses `name(args)` or `name:args` forms, e.g. `offdiag-uniform(64)`,
    /// `spiked-diag:64:0.5`, `tightness2`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (name, args) = split_spec(text)?;
        let bad = |msg: String| Error::InvalidParameter(msg);
        match name.as_str() {
            "tightness2" => {
                if args.is_empty() {
                    Ok(GeneratorSpec::Tightness2)
                } else {
                    Err(bad("tightness2 takes no arguments".into()))
                }
            }
            "offdiag-uniform" => {
                if args.len() != 1 {
                    return Err(bad(format!(
                        "offdiag-uniform takes one argument (n), got {text:?}"
                    )));
                }
                let n = parse_dim(&args[0])?;
                Ok(GeneratorSpec::OffdiagUniform { n })
            }
            "spiked-diag" => {
                if args.len() != 2 {
                    return Err(bad(format!(
                        "spiked-diag takes two arguments (n, rho), got {text:?}"
                    )));
                }
                let n = parse_dim(&args[0])?;
                let rho: f64 = args[1].parse().map_err(|_| {
                    Error::InvalidParameter(format!("cannot parse rho from {:?}", args[1]))
                })?;
                if !(rho.is_finite() && rho >= 0.0) {
                    return Err(bad(format!("rho must be finite and >= 0, got {rho}")));
                }
                Ok(GeneratorSpec::SpikedDiag { n, rho })
            }
            other => Err(bad(format!(
                "unknown generator {other:?} (expected offdiag-uniform | spiked-diag | tightness2)"
            ))),
        }
    }

    /// Canonical id used in CSV rows and metadata.
    pub fn id(&self) -> String {
        match self {
            GeneratorSpec::OffdiagUniform { n } => format!("offdiag-uniform({n})"),
            GeneratorSpec::SpikedDiag { n, rho } => format!("spiked-diag({n},{rho})"),
            GeneratorSpec::Tightness2 => "tightness2".into(),
        }
    }

    pub fn build(&self) -> Result<DenseMatrix> {
        match *self {
            GeneratorSpec::Tightness2 => DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]),
            GeneratorSpec::OffdiagUniform { n } => {
                if n < 2 {
                    return Err(Error::InvalidParameter(
                        "offdiag-uniform needs n >= 2".into(),
                    ));
                }
                let stream = ProbeStream::new(GENERATOR_STREAM_KEY);
                let mut rng = stream.substream(0, n as u64);
                let mut a = DenseMatrix::from_row_major(n, vec![0.0; n * n])?;
                let mut off_sq = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            let v = 2.0 * rng.next_f64() - 1.0;
                            a.set(i, j, v);
                            off_sq += v * v;
                        }
                    }
                }
                let scale = 1.0 / off_sq.sqrt();
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            a.set(i, j, a.get(i, j) * scale);
                        }
                    }
                }
                Ok(a)
            }
            GeneratorSpec::SpikedDiag { n, rho } => {
                if n < 2 {
                    return Err(Error::InvalidParameter("spiked-diag needs n >= 2".into()));
                }
                let stream = ProbeStream::new(GENERATOR_STREAM_KEY);
                let mut rng = stream.substream(1, n as u64);
                let mut a = DenseMatrix::from_row_major(n, vec![0.0; n * n])?;

                // Diagonal drawn from [0.5, 1.5), then normalized to unit norm.
                let mut diag_sq = 0.0;
                for i in 0..n {
                    let v = 0.5 + rng.next_f64();
                    a.set(i, i, v);
                    diag_sq += v * v;
                }
                let dscale = 1.0 / diag_sq.sqrt();
                for i in 0..n {
                    a.set(i, i, a.get(i, i) * dscale);
                }

                // Off-diagonal from [-1, 1), normalized to norm rho.
                let mut off_sq = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            let v = 2.0 * rng.next_f64() - 1.0;
                            a.set(i, j, v);
                            off_sq += v * v;
                        }
                    }
                }
                let oscale = if off_sq > 0.0 {
                    rho / off_sq.sqrt()
                } else {
                    0.0
                };
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            a.set(i, j, a.get(i, j) * oscale);
                        }
                    }
                }
                Ok(a)
            }
        }
    }
}

fn split_spec(text: &str) -> Result<(String, Vec<String>)> {
    if let Some(open) = text.find('(') {
        if !text.ends_with(')') {
            return Err(Error::InvalidParameter(format!(
                "unbalanced parentheses in generator spec {text:?}"
            )));
        }
        let name = text[..open].to_ascii_lowercase();
        let inner = &text[open + 1..text.len() - 1];
        let args = if inner.trim().is_empty() {
            Vec::new()
        } else {
            inner.split(',').map(|s| s.trim().to_string()).collect()
        };
        Ok((name, args))
    } else if text.contains(':') {
        let mut parts = text.split(':').map(str::trim);
        let name = parts.next().unwrap_or_default().to_ascii_lowercase();
        Ok((name, parts.map(String::from).collect()))
    } else {
        Ok((text.to_ascii_lowercase(), Vec::new()))
    }
}

fn parse_dim(token: &str) -> Result<usize> {
    let n: usize = token
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("cannot parse dimension from {token:?}")))?;
    Ok(n)
}
