//! Thin command-line front end over the library's experiment harness.
//!
//! Exit codes: 0 success, 1 verification/computation failure, 2 usage or
//! configuration error, 3 I/O or input-parse error.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use diagest::harness::{
    format_f64, run_estimate, run_experiment, verify, EstimateConfig, EstimatorMode,
    ExperimentConfig, GeneratorSpec, MatrixSource,
};
use diagest::{Error, ProbeDistribution};

#[derive(Parser)]
#[command(
    name = "diagest",
    version,
    about = "Stochastic diagonal estimation: estimates, experiment sweeps, and exactness checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the diagonal of one matrix and write the vector out.
    Estimate(EstimateArgs),
    /// Sweep probe counts over repeated trials; write per-trial errors to
    /// CSV with a JSON bounds sidecar.
    Experiment(ExperimentArgs),
    /// Run the built-in enumeration-oracle and identity checks.
    Verify {
        /// Emit machine-readable JSON instead of pass/fail lines.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct SourceArgs {
    /// Matrix Market file (.mtx), coordinate or array, real, general or
    /// symmetric.
    #[arg(long, value_name = "PATH", conflicts_with = "generator")]
    matrix: Option<PathBuf>,
    /// Built-in generator: offdiag-uniform(n) | spiked-diag(n,rho) |
    /// tightness2.
    #[arg(long, value_name = "SPEC")]
    generator: Option<String>,
}

impl SourceArgs {
    fn resolve(&self) -> Result<MatrixSource, Error> {
        match (&self.matrix, &self.generator) {
            (Some(path), None) => Ok(MatrixSource::File(path.clone())),
            (None, Some(spec)) => Ok(MatrixSource::Generator(GeneratorSpec::parse(spec)?)),
            _ => Err(Error::InvalidParameter(
                "exactly one of --matrix or --generator is required".into(),
            )),
        }
    }
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Probe distribution: rademacher | gaussian | uniform.
    #[arg(long, default_value = "rademacher")]
    dist: String,
    /// Estimator: plain | normalized | median.
    #[arg(long, default_value = "plain")]
    mode: String,
    /// Number of probes per estimator.
    #[arg(long, default_value_t = 32)]
    m: usize,
    /// Failure probability (median mode replication rule).
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Master seed; reruns with the same seed reproduce the output exactly.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path (stdout when omitted).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Emit a JSON object instead of the text vector format.
    #[arg(long)]
    json: bool,
    /// Worker threads (0 = automatic).
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Probe distribution: rademacher | gaussian | uniform.
    #[arg(long, default_value = "rademacher")]
    dist: String,
    /// Estimator: plain | normalized | median.
    #[arg(long, default_value = "plain")]
    mode: String,
    /// Comma-separated probe counts, e.g. 16,64,256.
    #[arg(long, value_delimiter = ',', required = true)]
    m: Vec<usize>,
    /// Failure probability used by the bound reports and the median rule.
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Trials per probe count.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path; the bounds sidecar lands next to it as
    /// `<stem>.bounds.json`.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Worker threads (0 = automatic).
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidParameter(_) => 2,
        Error::Io(_) | Error::Parse { .. } => 3,
        _ => 1,
    }
}

fn in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, Error> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Estimate(args) => {
            let cfg = EstimateConfig {
                source: args.source.resolve()?,
                dist: ProbeDistribution::from_name(&args.dist)?,
                mode: EstimatorMode::from_name(&args.mode)?,
                m: args.m,
                delta: args.delta,
                seed: args.seed,
            };
            let output = in_pool(args.workers, || run_estimate(&cfg))??;
            eprintln!("seed: {}", output.metadata.seed);

            let mut text = String::new();
            if args.json {
                text.push_str(&serde_json::to_string_pretty(&output).expect("serializable"));
                text.push('\n');
            } else {
                let md = &output.metadata;
                text.push_str(&format!("# matrix {}\n", md.matrix));
                text.push_str(&format!("# n {}\n", md.n));
                text.push_str(&format!("# distribution {}\n", md.distribution));
                text.push_str(&format!("# mode {}\n", md.mode));
                text.push_str(&format!("# m {}\n", md.m));
                text.push_str(&format!("# seed {}\n", md.seed));
                if let Some(r) = md.replicates {
                    text.push_str(&format!("# r {r}\n"));
                }
                text.push_str(&format!("# matvecs {}\n", md.matvecs));
                for v in &output.values {
                    text.push_str(&format_f64(*v));
                    text.push('\n');
                }
            }
            write_output(args.out.as_deref(), text.as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Experiment(args) => {
            let cfg = ExperimentConfig {
                source: args.source.resolve()?,
                dist: ProbeDistribution::from_name(&args.dist)?,
                mode: EstimatorMode::from_name(&args.mode)?,
                m_values: args.m,
                delta: args.delta,
                trials: args.trials,
                seed: args.seed,
            };
            cfg.validate()?;
            let output = in_pool(args.workers, || run_experiment(&cfg))??;
            eprintln!("seed: {}", output.sidecar.seed);

            let file = File::create(&args.out)?;
            let mut w = BufWriter::new(file);
            diagest::harness::write_records_csv(&mut w, &output.records)?;
            w.flush()?;

            let sidecar_path = args.out.with_extension("bounds.json");
            let sidecar = File::create(&sidecar_path)?;
            let mut w = BufWriter::new(sidecar);
            serde_json::to_writer_pretty(&mut w, &output.sidecar)
                .map_err(|e| Error::InvalidParameter(format!("cannot serialize sidecar: {e}")))?;
            w.write_all(b"\n")?;
            w.flush()?;

            eprintln!(
                "wrote {} records to {} (bounds sidecar: {})",
                output.records.len(),
                args.out.display(),
                sidecar_path.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { json } => {
            let results = verify::run_all();
            let all_passed = results.iter().all(|r| r.passed);
            if json {
                #[derive(serde::Serialize)]
                struct Report<'a> {
                    passed: bool,
                    checks: &'a [verify::CheckResult],
                }
                println!(
                    "{}",
                    serde_json::to_string_pretty(&Report {
                        passed: all_passed,
                        checks: &results
                    })
                    .expect("serializable")
                );
            } else {
                for r in &results {
                    let tag = if r.passed { "PASS" } else { "FAIL" };
                    println!("{tag} {} [{}] {}", r.check, r.matrix, r.detail);
                }
                println!(
                    "{}: {} checks, {} failed",
                    if all_passed { "ok" } else { "FAILED" },
                    results.len(),
                    results.iter().filter(|r| !r.passed).count()
                );
            }
            Ok(if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn write_output(path: Option<&std::path::Path>, bytes: &[u8]) -> Result<(), Error> {
    match path {
        Some(path) => {
            let mut f = BufWriter::new(File::create(path)?);
            f.write_all(bytes)?;
            f.flush()?;
        }
        None => {
            std::io::stdout().write_all(bytes)?;
        }
    }
    Ok(())
}
