//! The three similarity-based privacy tests.
//!
//! Each test computes one statistic over synth→train quantities and the same
//! statistic over test→train quantities, then compares them (non-strictly):
//!
//! | metric | per-row quantity                 | statistic | passes when     |
//! |--------|----------------------------------|-----------|-----------------|
//! | IMS    | has an exact copy in train       | average   | synth ≤ test    |
//! | DCR    | nearest-neighbor distance        | P5        | synth ≥ test    |
//! | NNDR   | nearest / second-nearest ratio   | P5        | synth ≥ test    |
//!
//! A synthetic dataset is reported private when all three pass.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::{DistanceKind, ExactMatchIndex, NeighborIndex, NeighborResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StatisticKind {
    Average,
    /// Nearest-rank 5th percentile: the ⌈0.05·n⌉-th smallest value.
    P5,
}

/// 1-based nearest-rank position of the 5th percentile, ⌈n/20⌉, computed in
/// integers.
pub fn p5_rank(n: usize) -> usize {
    n.div_ceil(20).max(1)
}

pub fn statistic(values: &[f64], kind: StatisticKind) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(match kind {
        StatisticKind::Average => values.iter().sum::<f64>() / values.len() as f64,
        StatisticKind::P5 => {
            let mut v = values.to_vec();
            let k = p5_rank(v.len()) - 1;
            *v.select_nth_unstable_by(k, f64::total_cmp).1
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MetricName {
    #[serde(rename = "IMS")]
    Ims,
    #[serde(rename = "DCR")]
    Dcr,
    #[serde(rename = "NNDR")]
    Nndr,
}

impl MetricName {
    pub fn direction(self) -> Direction {
        match self {
            MetricName::Ims => Direction::SynthLeTest,
            MetricName::Dcr | MetricName::Nndr => Direction::SynthGeTest,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    SynthLeTest,
    SynthGeTest,
}

impl Direction {
    pub fn passes(self, stat_synth: f64, stat_test: f64) -> bool {
        match self {
            Direction::SynthLeTest => stat_synth <= stat_test,
            Direction::SynthGeTest => stat_synth >= stat_test,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub metric: MetricName,
    pub stat_synth: f64,
    pub stat_test: f64,
    pub direction: Direction,
    pub passed: bool,
}

impl MetricResult {
    pub fn new(metric: MetricName, stat_synth: f64, stat_test: f64) -> Self {
        let direction = metric.direction();
        MetricResult {
            metric,
            stat_synth,
            stat_test,
            direction,
            passed: direction.passes(stat_synth, stat_test),
        }
    }
}

/// Where a report's inputs came from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub n_train: usize,
    pub n_test: usize,
    pub n_synth: usize,
    pub distance: DistanceKind,
    /// Named seeds that produced the inputs, when they were generated.
    #[serde(default)]
    pub seeds: BTreeMap<String, u64>,
    #[serde(default)]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyReport {
    pub ims: MetricResult,
    pub dcr: MetricResult,
    pub nndr: MetricResult,
    pub all_pass: bool,
    pub provenance: Provenance,
}

impl PrivacyReport {
    pub fn metrics(&self) -> [&MetricResult; 3] {
        [&self.ims, &self.dcr, &self.nndr]
    }

    pub fn with_seed(mut self, name: impl Into<String>, seed: u64) -> Self {
        self.provenance.seeds.insert(name.into(), seed);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.provenance.notes.push(note.into());
        self
    }
}

fn first_distances(n: &[NeighborResult]) -> Vec<f64> {
    n.iter().map(|r| r.first_distance).collect()
}

fn ratios(n: &[NeighborResult]) -> Vec<f64> {
    n.iter().map(NeighborResult::ratio).collect()
}

/// Train-side state shared by every synthetic dataset evaluated against one
/// train/test pair: the neighbor index, the exact-copy index and the three
/// test-side statistics.
#[derive(Clone, Debug)]
pub struct Evaluator {
    index: NeighborIndex,
    copies: ExactMatchIndex,
    n_train: usize,
    n_test: usize,
    ims_test: f64,
    dcr_test: f64,
    nndr_test: f64,
}

impl Evaluator {
    pub fn new(train: &Dataset, test: &Dataset, kind: DistanceKind) -> Result<Self> {
        train.check_compatible(test)?;
        let index = NeighborIndex::new(train, kind)?;
        let copies = ExactMatchIndex::new(train);
        let test_nn = index.search(test)?;
        Ok(Evaluator {
            ims_test: copies.share(test)?,
            dcr_test: statistic(&first_distances(&test_nn), StatisticKind::P5)?,
            nndr_test: statistic(&ratios(&test_nn), StatisticKind::P5)?,
            n_train: train.n_rows(),
            n_test: test.n_rows(),
            index,
            copies,
        })
    }

    pub fn evaluate(&self, synth: &Dataset) -> Result<PrivacyReport> {
        let synth_nn = self.index.search(synth)?;
        let ims = MetricResult::new(MetricName::Ims, self.copies.share(synth)?, self.ims_test);
        let dcr = MetricResult::new(
            MetricName::Dcr,
            statistic(&first_distances(&synth_nn), StatisticKind::P5)?,
            self.dcr_test,
        );
        let nndr = MetricResult::new(
            MetricName::Nndr,
            statistic(&ratios(&synth_nn), StatisticKind::P5)?,
            self.nndr_test,
        );
        Ok(PrivacyReport {
            all_pass: ims.passed && dcr.passed && nndr.passed,
            ims,
            dcr,
            nndr,
            provenance: Provenance {
                n_train: self.n_train,
                n_test: self.n_test,
                n_synth: synth.n_rows(),
                distance: self.index.kind(),
                ..Provenance::default()
            },
        })
    }
}

/// Identical match share: synth→train copy share against test→train.
pub fn ims(train: &Dataset, test: &Dataset, synth: &Dataset) -> Result<MetricResult> {
    train.check_compatible(test)?;
    let copies = ExactMatchIndex::new(train);
    Ok(MetricResult::new(
        MetricName::Ims,
        copies.share(synth)?,
        copies.share(test)?,
    ))
}

/// Distance to closest record: P5 of nearest-train distances.
pub fn dcr(
    train: &Dataset,
    test: &Dataset,
    synth: &Dataset,
    kind: DistanceKind,
) -> Result<MetricResult> {
    let (s, t) = both_sides(train, test, synth, kind)?;
    Ok(MetricResult::new(
        MetricName::Dcr,
        statistic(&first_distances(&s), StatisticKind::P5)?,
        statistic(&first_distances(&t), StatisticKind::P5)?,
    ))
}

/// Nearest neighbor distance ratio: P5 of first/second nearest-train
/// distance.
pub fn nndr(
    train: &Dataset,
    test: &Dataset,
    synth: &Dataset,
    kind: DistanceKind,
) -> Result<MetricResult> {
    let (s, t) = both_sides(train, test, synth, kind)?;
    Ok(MetricResult::new(
        MetricName::Nndr,
        statistic(&ratios(&s), StatisticKind::P5)?,
        statistic(&ratios(&t), StatisticKind::P5)?,
    ))
}

fn both_sides(
    train: &Dataset,
    test: &Dataset,
    synth: &Dataset,
    kind: DistanceKind,
) -> Result<(Vec<NeighborResult>, Vec<NeighborResult>)> {
    train.check_compatible(test)?;
    let index = NeighborIndex::new(train, kind)?;
    Ok((index.search(synth)?, index.search(test)?))
}

/// Runs all three tests on the same inputs.
pub fn evaluate_all(
    train: &Dataset,
    test: &Dataset,
    synth: &Dataset,
    kind: DistanceKind,
) -> Result<PrivacyReport> {
    Evaluator::new(train, test, kind)?.evaluate(synth)
}
