//! Versioned audit report files.
//!
//! A report echoes the typed configuration that produced it. Executing that
//! configuration again yields an identical `results` section, which is what
//! `reproduce` checks.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::counterexamples::{LeakOutliersSpec, LeakageSummary};
use crate::data::{discretize_jointly, read_csv, Dataset, GaussSpec};
use crate::error::{Error, Result};
use crate::experiments::{
    run_experiment, run_leak_outliers, run_leak_test, CanonicalData, ExperimentConfig,
    ExperimentMode, ExperimentReport,
};
use crate::metrics::{evaluate_all, PrivacyReport};
use crate::nn::DistanceKind;

pub const FORMAT_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Counterexample {
    LeakTest,
    LeakOutliers,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum CommandConfig {
    Evaluate {
        train: PathBuf,
        test: PathBuf,
        synth: PathBuf,
        distance: DistanceKind,
        bins: Option<u32>,
    },
    Counterexample {
        which: Counterexample,
        master_seed: u64,
        gauss: GaussSpec,
        split_seed: u64,
        /// Present for `leak-outliers` only.
        leak_outliers: Option<LeakOutliersSpec>,
    },
    Experiment {
        mode: ExperimentMode,
        config: ExperimentConfig,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Results {
    Counterexample {
        report: PrivacyReport,
        leakage: Option<LeakageSummary>,
    },
    Privacy(PrivacyReport),
    Experiment(ExperimentReport),
}

impl Results {
    /// The all-pass verdict, when the results carry one.
    pub fn all_pass(&self) -> Option<bool> {
        match self {
            Results::Privacy(r) | Results::Counterexample { report: r, .. } => Some(r.all_pass),
            Results::Experiment(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_clock_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub format_version: String,
    pub command: Vec<String>,
    pub config: CommandConfig,
    pub results: Results,
    pub timing: Timing,
}

impl AuditReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("report: {e}")))?;
        match value.get("format_version").and_then(|v| v.as_str()) {
            Some(FORMAT_VERSION) => {}
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unsupported report format version {other:?}"
                )))
            }
        }
        serde_json::from_value(value).map_err(|e| Error::InvalidParameter(format!("report: {e}")))
    }
}

/// Side outputs of an execution that are not part of the results section.
pub struct Execution {
    pub results: Results,
    pub synth: Option<Dataset>,
}

pub fn execute(config: &CommandConfig) -> Result<Execution> {
    match config {
        CommandConfig::Evaluate {
            train,
            test,
            synth,
            distance,
            bins,
        } => {
            let (train, test, synth) = (read_csv(train)?, read_csv(test)?, read_csv(synth)?);
            let report = match bins {
                Some(k) => {
                    let d = discretize_jointly(&[&train, &test, &synth], *k)?;
                    evaluate_all(&d[0], &d[1], &d[2], *distance)?
                }
                None => evaluate_all(&train, &test, &synth, *distance)?,
            };
            Ok(Execution {
                results: Results::Privacy(report),
                synth: None,
            })
        }
        CommandConfig::Counterexample {
            which,
            gauss,
            split_seed,
            leak_outliers,
            ..
        } => {
            let canon = CanonicalData::from_seeds(*gauss, *split_seed)?;
            match (which, leak_outliers) {
                (Counterexample::LeakTest, _) => {
                    let run = run_leak_test(&canon)?;
                    Ok(Execution {
                        results: Results::Counterexample {
                            report: run.report,
                            leakage: None,
                        },
                        synth: Some(run.synth),
                    })
                }
                (Counterexample::LeakOutliers, Some(spec)) => {
                    let run = run_leak_outliers(&canon, spec)?;
                    Ok(Execution {
                        results: Results::Counterexample {
                            report: run.report,
                            leakage: Some(run.leakage),
                        },
                        synth: Some(run.synth),
                    })
                }
                (Counterexample::LeakOutliers, None) => Err(Error::InvalidParameter(
                    "leak-outliers needs its parameters".into(),
                )),
            }
        }
        CommandConfig::Experiment { mode, config } => Ok(Execution {
            results: Results::Experiment(run_experiment(*mode, config, true)?),
            synth: None,
        }),
    }
}

/// Re-executes a report's echoed configuration and checks that the results
/// section comes out identical.
pub fn reproduces(report: &AuditReport) -> Result<bool> {
    let again = execute(&report.config)?.results;
    let a = serde_json::to_value(&report.results).expect("results serialize");
    let b = serde_json::to_value(&again).expect("results serialize");
    Ok(a == b)
}
