//! Synthetic datasets that pass all three tests while leaking records.

use std::collections::HashSet;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::{outlier_mask, require_2d_numeric, Dataset, OutlierRule};
use crate::error::{Error, Result};
use crate::nn::{nearest_two, DistanceKind};
use crate::seed;

/// Outlier-derived rows must stay below this share of the synthetic rows so
/// the P5 statistics land on filler rows.
pub const MAX_LEAKED_SHARE: f64 = 0.05;

/// A verbatim copy of the test set.
pub fn leak_test(test: &Dataset) -> Dataset {
    test.clone()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeakOutliersSpec {
    pub outlier_rule: OutlierRule,
    /// Standard deviation of the per-coordinate Gaussian noise added to each
    /// leaked outlier.
    pub perturbation_scale: f64,
    pub synth_size: usize,
    pub filler_value: [f64; 2],
    pub seed: u64,
}

impl Default for LeakOutliersSpec {
    fn default() -> Self {
        LeakOutliersSpec {
            outlier_rule: OutlierRule::default(),
            perturbation_scale: 0.05,
            synth_size: 2500,
            filler_value: [0.0, 0.0],
            seed: 0,
        }
    }
}

impl LeakOutliersSpec {
    pub fn with_seed(seed: u64) -> Self {
        LeakOutliersSpec {
            seed,
            ..Self::default()
        }
    }

    /// Distance within which every leaked outlier is expected to have a
    /// synthetic neighbor.
    pub fn leakage_bound(&self) -> f64 {
        6.0 * self.perturbation_scale
    }

    fn validate(&self, n_outliers: usize) -> Result<()> {
        if !(self.perturbation_scale.is_finite() && self.perturbation_scale > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "perturbation scale must be positive, got {}",
                self.perturbation_scale
            )));
        }
        if self.filler_value.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "filler value must be finite".into(),
            ));
        }
        if n_outliers == 0 {
            return Err(Error::InvalidParameter(format!(
                "train has no outliers beyond radius {}",
                self.outlier_rule.radius()
            )));
        }
        if self.synth_size < n_outliers
            || n_outliers as f64 / self.synth_size as f64 >= MAX_LEAKED_SHARE
        {
            return Err(Error::InvalidParameter(format!(
                "synth size {} too small: {n_outliers} leaked outliers must stay under {}% of the rows",
                self.synth_size,
                MAX_LEAKED_SHARE * 100.0
            )));
        }
        Ok(())
    }
}

/// Every train outlier plus independent Gaussian noise, followed by copies of
/// the filler value up to `synth_size` rows. A perturbed row that lands
/// exactly on a train row is re-drawn.
pub fn leak_outliers(train: &Dataset, spec: &LeakOutliersSpec) -> Result<Dataset> {
    require_2d_numeric(train, "leak_outliers train set")?;
    let mask = outlier_mask(train, &spec.outlier_rule)?;
    let outliers: Vec<&[f64]> = train
        .rows()
        .zip(&mask)
        .filter_map(|(r, &m)| m.then_some(r))
        .collect();
    spec.validate(outliers.len())?;

    let train_rows: HashSet<[u64; 2]> = train.rows().map(key).collect();
    if train_rows.contains(&key(&spec.filler_value)) {
        return Err(Error::InvalidParameter(format!(
            "filler value {:?} is itself a train row",
            spec.filler_value
        )));
    }

    let noise = Normal::new(0.0, spec.perturbation_scale)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut rng = seed::rng(spec.seed);
    let mut values = Vec::with_capacity(spec.synth_size * 2);
    for o in &outliers {
        loop {
            let p = [o[0] + noise.sample(&mut rng), o[1] + noise.sample(&mut rng)];
            if !train_rows.contains(&key(&p)) {
                values.extend(p);
                break;
            }
        }
    }
    for _ in outliers.len()..spec.synth_size {
        values.extend(spec.filler_value);
    }
    Dataset::from_flat(train.columns().to_vec(), values)
}

fn key(p: &[f64]) -> [u64; 2] {
    [(p[0] + 0.0).to_bits(), (p[1] + 0.0).to_bits()]
}

/// How closely a synthetic dataset reproduces the train outliers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeakageSummary {
    pub n_outliers: usize,
    /// Largest distance from a train outlier to its nearest synthetic row.
    pub max_distance: f64,
    pub mean_distance: f64,
    pub bound: f64,
    pub within_bound: bool,
}

pub fn outlier_leakage(
    train: &Dataset,
    synth: &Dataset,
    rule: &OutlierRule,
    bound: f64,
) -> Result<LeakageSummary> {
    let mask = outlier_mask(train, rule)?;
    let idx: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
    let found = nearest_two(&train.select(&idx), synth, DistanceKind::Euclidean)?;
    let max_distance = found.iter().map(|r| r.first_distance).fold(0.0, f64::max);
    let mean_distance = if found.is_empty() {
        0.0
    } else {
        found.iter().map(|r| r.first_distance).sum::<f64>() / found.len() as f64
    };
    Ok(LeakageSummary {
        n_outliers: idx.len(),
        max_distance,
        mean_distance,
        bound,
        within_bound: max_distance <= bound,
    })
}
