//! Monte Carlo harness for the pass-rate inconsistency experiments, plus the
//! canonical counter-example runs.
//!
//! All randomness flows from one master seed. The dataset, the canonical split
//! and any fixed synthetic set use the reserved streams in [`crate::seed`];
//! repetition `i` uses `seed::mix(master_seed, i)`. Repetitions run in
//! parallel and only integer pass counts are accumulated, so serial and
//! parallel runs produce identical reports.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counterexamples::{
    leak_outliers, leak_test, outlier_leakage, LeakOutliersSpec, LeakageSummary,
};
use crate::data::{
    discretize_jointly, generate_gauss, sample_standard_normal, split_even, Dataset, GaussSpec,
    SplitResult,
};
use crate::error::{Error, Result};
use crate::metrics::{evaluate_all, Evaluator, PrivacyReport};
use crate::nn::DistanceKind;
use crate::seed::{self, DATA_STREAM, SPLIT_STREAM, SYNTH_STREAM};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentMode {
    /// Fixed train/test split; a fresh synthetic set from the true
    /// distribution every repetition.
    OracleResample,
    /// Fixed synthetic set; a fresh random train/test split every repetition.
    Resplit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_reps: usize,
    pub master_seed: u64,
    pub gauss: GaussSpec,
    pub synth_size: usize,
    pub distance: DistanceKind,
    /// Equal-width bins per column for the Hamming mode; train, test and
    /// synth are discretized together each repetition.
    #[serde(default)]
    pub bins: Option<u32>,
}

impl ExperimentConfig {
    /// 1000 repetitions on 2000 generated points, 1000 synthetic rows,
    /// Euclidean distance.
    pub fn canonical(master_seed: u64) -> Self {
        ExperimentConfig {
            n_reps: 1000,
            master_seed,
            gauss: GaussSpec {
                n_points: 2000,
                seed: seed::mix(master_seed, DATA_STREAM),
            },
            synth_size: 1000,
            distance: DistanceKind::Euclidean,
            bins: None,
        }
    }

    pub fn with_reps(self, n_reps: usize) -> Self {
        ExperimentConfig { n_reps, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_reps == 0 {
            return Err(Error::InvalidParameter("n_reps must be at least 1".into()));
        }
        if self.synth_size == 0 {
            return Err(Error::InvalidParameter(
                "synth_size must be at least 1".into(),
            ));
        }
        self.gauss.validate()?;
        match (self.distance, self.bins) {
            (DistanceKind::Euclidean, None) | (DistanceKind::Hamming, Some(_)) => Ok(()),
            (DistanceKind::Euclidean, Some(_)) => Err(Error::InvalidParameter(
                "binned data is compared with hamming distance".into(),
            )),
            (DistanceKind::Hamming, None) => Err(Error::InvalidParameter(
                "hamming distance needs a bin count".into(),
            )),
        }
    }

    pub fn rep_seed(&self, rep: usize) -> u64 {
        seed::mix(self.master_seed, rep as u64)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PassRates {
    pub ims: f64,
    pub dcr: f64,
    pub nndr: f64,
    pub all: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub mode: ExperimentMode,
    pub n_reps: usize,
    pub pass_count_ims: usize,
    pub pass_count_dcr: usize,
    pub pass_count_nndr: usize,
    pub pass_count_all: usize,
    pub rates: PassRates,
    pub config: ExperimentConfig,
    pub notes: Vec<String>,
}

/// Derived seeds and split of a canonical run under `master_seed`.
pub struct CanonicalData {
    pub gauss: GaussSpec,
    pub split_seed: u64,
    pub data: Dataset,
    pub split: SplitResult,
}

pub fn canonical_data(master_seed: u64) -> Result<CanonicalData> {
    canonical_data_for(
        GaussSpec {
            n_points: 2000,
            seed: seed::mix(master_seed, DATA_STREAM),
        },
        master_seed,
    )
}

fn canonical_data_for(gauss: GaussSpec, master_seed: u64) -> Result<CanonicalData> {
    CanonicalData::from_seeds(gauss, seed::mix(master_seed, SPLIT_STREAM))
}

impl CanonicalData {
    pub fn from_seeds(gauss: GaussSpec, split_seed: u64) -> Result<Self> {
        let data = generate_gauss(&gauss)?;
        let split = split_even(&data, split_seed)?;
        Ok(CanonicalData {
            gauss,
            split_seed,
            data,
            split,
        })
    }
}

type Verdict = [bool; 4];

fn verdict(r: &PrivacyReport) -> Verdict {
    [r.ims.passed, r.dcr.passed, r.nndr.passed, r.all_pass]
}

fn run_reps<F>(n_reps: usize, parallel: bool, f: F) -> Result<Vec<Verdict>>
where
    F: Fn(usize) -> Result<Verdict> + Sync + Send,
{
    if parallel {
        (0..n_reps).into_par_iter().map(f).collect()
    } else {
        (0..n_reps).map(f).collect()
    }
}

/// Evaluates one (train, test, synth) triple under the configured mode of
/// comparison.
fn evaluate_binned(
    cfg: &ExperimentConfig,
    train: &Dataset,
    test: &Dataset,
    synth: &Dataset,
) -> Result<PrivacyReport> {
    match cfg.bins {
        None => evaluate_all(train, test, synth, cfg.distance),
        Some(bins) => {
            let d = discretize_jointly(&[train, test, synth], bins)?;
            evaluate_all(&d[0], &d[1], &d[2], DistanceKind::Hamming)
        }
    }
}

pub fn run_experiment(
    mode: ExperimentMode,
    cfg: &ExperimentConfig,
    parallel: bool,
) -> Result<ExperimentReport> {
    cfg.validate()?;
    let canon = canonical_data_for(cfg.gauss, cfg.master_seed)?;
    let (verdicts, notes) = match mode {
        ExperimentMode::OracleResample => {
            let (train, test) = (&canon.split.train, &canon.split.test);
            let cached = match cfg.bins {
                None => Some(Evaluator::new(train, test, cfg.distance)?),
                Some(_) => None,
            };
            let v = run_reps(cfg.n_reps, parallel, |i| {
                let synth = sample_standard_normal(cfg.synth_size, cfg.rep_seed(i));
                let r = match &cached {
                    Some(e) => e.evaluate(&synth)?,
                    None => evaluate_binned(cfg, train, test, &synth)?,
                };
                Ok(verdict(&r))
            })?;
            let notes = vec![
                format!("train/test split fixed (split seed {})", canon.split_seed),
                "synthetic sets drawn directly from the 2d standard normal; no model is trained"
                    .into(),
            ];
            (v, notes)
        }
        ExperimentMode::Resplit => {
            let synth_seed = seed::mix(cfg.master_seed, SYNTH_STREAM);
            let synth = sample_standard_normal(cfg.synth_size, synth_seed);
            let v = run_reps(cfg.n_reps, parallel, |i| {
                let split = split_even(&canon.data, cfg.rep_seed(i))?;
                Ok(verdict(&evaluate_binned(
                    cfg,
                    &split.train,
                    &split.test,
                    &synth,
                )?))
            })?;
            let notes = vec![
                format!(
                    "synthetic set fixed (seed {synth_seed}), drawn from the 2d standard normal"
                ),
                "each repetition re-splits the generated data into train/test halves".into(),
            ];
            (v, notes)
        }
    };

    let count = |k: usize| verdicts.iter().filter(|v| v[k]).count();
    let (ims, dcr, nndr, all) = (count(0), count(1), count(2), count(3));
    let n = cfg.n_reps as f64;
    Ok(ExperimentReport {
        mode,
        n_reps: cfg.n_reps,
        pass_count_ims: ims,
        pass_count_dcr: dcr,
        pass_count_nndr: nndr,
        pass_count_all: all,
        rates: PassRates {
            ims: ims as f64 / n,
            dcr: dcr as f64 / n,
            nndr: nndr as f64 / n,
            all: all as f64 / n,
        },
        config: *cfg,
        notes,
    })
}

pub fn oracle_resample_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment(ExperimentMode::OracleResample, cfg, true)
}

pub fn resplit_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment(ExperimentMode::Resplit, cfg, true)
}

/// Default leak-outliers parameters for a canonical run, seeded from the
/// synth stream of `master_seed`.
pub fn leak_spec_for(master_seed: u64) -> LeakOutliersSpec {
    LeakOutliersSpec::with_seed(seed::mix(master_seed, SYNTH_STREAM))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeakTestRun {
    pub synth: Dataset,
    pub report: PrivacyReport,
}

pub fn run_leak_test(canon: &CanonicalData) -> Result<LeakTestRun> {
    let synth = leak_test(&canon.split.test);
    let report = evaluate_all(
        &canon.split.train,
        &canon.split.test,
        &synth,
        DistanceKind::Euclidean,
    )?
    .with_seed("data", canon.gauss.seed)
    .with_seed("split", canon.split_seed)
    .with_note("synthetic set is a verbatim copy of the test set");
    Ok(LeakTestRun { synth, report })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeakOutliersRun {
    pub synth: Dataset,
    pub report: PrivacyReport,
    pub leakage: LeakageSummary,
}

pub fn run_leak_outliers(
    canon: &CanonicalData,
    spec: &LeakOutliersSpec,
) -> Result<LeakOutliersRun> {
    let train = &canon.split.train;
    let synth = leak_outliers(train, spec)?;
    let report = evaluate_all(train, &canon.split.test, &synth, DistanceKind::Euclidean)?
        .with_seed("data", canon.gauss.seed)
        .with_seed("split", canon.split_seed)
        .with_seed("perturbation", spec.seed)
        .with_note(format!(
            "artifact defaults, not from the source construction: perturbation sigma {}, synth size {}, filler {:?}",
            spec.perturbation_scale, spec.synth_size, spec.filler_value
        ));
    let leakage = outlier_leakage(train, &synth, &spec.outlier_rule, spec.leakage_bound())?;
    Ok(LeakOutliersRun {
        synth,
        report,
        leakage,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleSummary {
    pub master_seed: u64,
    pub leak_test: PrivacyReport,
    pub leak_outliers: PrivacyReport,
    pub leak_outliers_spec: LeakOutliersSpec,
    pub leakage: LeakageSummary,
}

/// Both counter-examples on the canonical split of `master_seed`.
pub fn counterexample_suite(master_seed: u64) -> Result<CounterexampleSummary> {
    let canon = canonical_data(master_seed)?;
    let spec = leak_spec_for(master_seed);
    let lt = run_leak_test(&canon)?;
    let lo = run_leak_outliers(&canon, &spec)?;
    Ok(CounterexampleSummary {
        master_seed,
        leak_test: lt.report,
        leak_outliers: lo.report,
        leak_outliers_spec: spec,
        leakage: lo.leakage,
    })
}
