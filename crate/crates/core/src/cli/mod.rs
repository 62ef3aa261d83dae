//! Command-line surface.
//!
//! Exit codes: 0 when every privacy test passes (or the command has no
//! verdict), 1 when at least one test fails, 2 on any operational error.

pub mod plot;
pub mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use crate::counterexamples::LeakOutliersSpec;
use crate::data::{generate_gauss, read_csv, write_atomic, write_csv, GaussSpec, OutlierRule};
use crate::error::{Error, Result};
use crate::experiments::{canonical_data, leak_spec_for, ExperimentConfig, ExperimentMode};
use crate::nn::DistanceKind;
use plot::Role;
use report::{
    execute, reproduces, AuditReport, CommandConfig, Counterexample, Timing, FORMAT_VERSION,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "sbpm-audit",
    version,
    about = "Audit similarity-based privacy metrics on synthetic data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Distance {
    Euclidean,
    Hamming,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    OracleResample,
    Resplit,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a 2d standard normal dataset as CSV.
    Generate {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        n: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run IMS, DCR and NNDR on three CSV files.
    Evaluate {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        synth: PathBuf,
        /// Defaults to hamming when --bins is given, euclidean otherwise.
        #[arg(long, value_enum)]
        distance: Option<Distance>,
        /// Discretize all three files into this many equal-width bins per
        /// column (shared edges) before evaluating.
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
        bins: Option<u32>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Build and evaluate a leaking synthetic dataset on a generated split.
    Counterexample {
        #[arg(long, value_enum)]
        which: Counterexample,
        #[arg(long)]
        seed: u64,
        /// Per-coordinate noise scale for leaked outliers.
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        synth_size: Option<usize>,
        /// Outlier radius; defaults to the 10% tail radius sqrt(2 ln 10).
        #[arg(long)]
        radius: Option<f64>,
        /// Where to write the synthetic dataset.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Monte Carlo pass-rate experiment.
    Experiment {
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        reps: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        synth_size: u64,
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
        bins: Option<u32>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Scatter plot of 2d datasets as SVG.
    Plot {
        #[arg(long)]
        train: Option<PathBuf>,
        #[arg(long)]
        test: Option<PathBuf>,
        #[arg(long)]
        synth: Option<PathBuf>,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-run the configuration echoed in a report and compare results.
    Reproduce { report: PathBuf },
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_ERROR
            } else {
                EXIT_PASS
            };
        }
    };
    let echo: Vec<String> = args
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match dispatch(cli.command, echo) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(command: Command, echo: Vec<String>) -> Result<i32> {
    let config = match command {
        Command::Generate { n, seed, out } => {
            let d = generate_gauss(&GaussSpec::new(n as usize, seed)?)?;
            write_csv(&d, &out)?;
            return Ok(EXIT_PASS);
        }
        Command::Plot {
            train,
            test,
            synth,
            radius,
            out,
        } => {
            plot_files(train, test, synth, radius, &out)?;
            return Ok(EXIT_PASS);
        }
        Command::Reproduce { report } => {
            let text = std::fs::read_to_string(&report).map_err(|e| Error::io(&report, e))?;
            let parsed = AuditReport::from_json(&text)?;
            return Ok(if reproduces(&parsed)? {
                println!("reproduced: results identical");
                EXIT_PASS
            } else {
                println!("results differ from {}", report.display());
                EXIT_FAIL
            });
        }
        Command::Evaluate {
            train,
            test,
            synth,
            distance,
            bins,
            report,
        } => {
            let distance = match (distance, bins) {
                (Some(Distance::Euclidean), Some(_)) => {
                    return Err(Error::InvalidParameter(
                        "--bins produces discrete codes, compared with hamming distance".into(),
                    ))
                }
                (Some(Distance::Hamming), _) | (None, Some(_)) => DistanceKind::Hamming,
                (Some(Distance::Euclidean), None) | (None, None) => DistanceKind::Euclidean,
            };
            let config = CommandConfig::Evaluate {
                train,
                test,
                synth,
                distance,
                bins,
            };
            return finish(config, echo, report.as_deref(), None);
        }
        Command::Counterexample {
            which,
            seed,
            sigma,
            synth_size,
            radius,
            out,
            report,
        } => {
            let canon = canonical_data(seed)?;
            let leak_outliers = match which {
                Counterexample::LeakTest => None,
                Counterexample::LeakOutliers => {
                    let base = leak_spec_for(seed);
                    Some(LeakOutliersSpec {
                        perturbation_scale: sigma.unwrap_or(base.perturbation_scale),
                        synth_size: synth_size.unwrap_or(base.synth_size),
                        outlier_rule: match radius {
                            Some(r) => OutlierRule::new(r)?,
                            None => base.outlier_rule,
                        },
                        ..base
                    })
                }
            };
            let config = CommandConfig::Counterexample {
                which,
                master_seed: seed,
                gauss: canon.gauss,
                split_seed: canon.split_seed,
                leak_outliers,
            };
            return finish(config, echo, report.as_deref(), out.as_deref());
        }
        Command::Experiment {
            mode,
            reps,
            seed,
            synth_size,
            bins,
            report,
        } => {
            let config = ExperimentConfig {
                synth_size: synth_size as usize,
                distance: if bins.is_some() {
                    DistanceKind::Hamming
                } else {
                    DistanceKind::Euclidean
                },
                bins,
                ..ExperimentConfig::canonical(seed).with_reps(reps as usize)
            };
            let mode = match mode {
                Mode::OracleResample => ExperimentMode::OracleResample,
                Mode::Resplit => ExperimentMode::Resplit,
            };
            (CommandConfig::Experiment { mode, config }, report)
        }
    };
    finish(config.0, echo, config.1.as_deref(), None)
}

fn finish(
    config: CommandConfig,
    echo: Vec<String>,
    report_path: Option<&Path>,
    synth_out: Option<&Path>,
) -> Result<i32> {
    let start = Instant::now();
    let exec = execute(&config)?;
    let report = AuditReport {
        format_version: FORMAT_VERSION.to_string(),
        command: echo,
        config,
        results: exec.results,
        timing: Timing {
            wall_clock_seconds: start.elapsed().as_secs_f64(),
        },
    };
    if let (Some(path), Some(synth)) = (synth_out, &exec.synth) {
        write_csv(synth, path)?;
    }
    let json = report.to_json();
    if let Some(path) = report_path {
        write_atomic(path, json.as_bytes())?;
    }
    print!("{json}");
    Ok(match report.results.all_pass() {
        Some(false) => EXIT_FAIL,
        _ => EXIT_PASS,
    })
}

fn plot_files(
    train: Option<PathBuf>,
    test: Option<PathBuf>,
    synth: Option<PathBuf>,
    radius: Option<f64>,
    out: &Path,
) -> Result<()> {
    let mut layers = Vec::new();
    for (role, path) in [
        (Role::Train, train),
        (Role::Test, test),
        (Role::Synth, synth),
    ] {
        if let Some(p) = path {
            layers.push((role, read_csv(p)?));
        }
    }
    if layers.is_empty() {
        return Err(Error::InvalidParameter(
            "plot needs at least one of --train, --test, --synth".into(),
        ));
    }
    let rule = match radius {
        Some(r) => OutlierRule::new(r)?,
        None => OutlierRule::default(),
    };
    let refs: Vec<_> = layers.iter().map(|(r, d)| (*r, d)).collect();
    let svg = plot::render_svg(&refs, &rule)?;
    write_atomic(out, svg.as_bytes())
}
