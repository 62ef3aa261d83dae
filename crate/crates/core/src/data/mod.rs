//! Datasets: representation, the 2d Gauss generator, even train/test splits,
//! outlier labeling and equal-width discretization.

mod io;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

pub use io::{read_csv, read_csv_from, write_atomic, write_csv, write_csv_to};

/// Equal-width bin layout of a discretized column.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinEdges {
    pub count: u32,
    pub min: f64,
    pub max: f64,
}

impl BinEdges {
    /// Lower boundary of bin `code`.
    pub fn lower(&self, code: u32) -> f64 {
        self.min + (self.max - self.min) * f64::from(code) / f64::from(self.count)
    }

    fn code_of(&self, x: f64) -> u32 {
        let span = self.max - self.min;
        if span <= 0.0 {
            return 0;
        }
        let raw = ((x - self.min) / span * f64::from(self.count)).floor();
        // max value lands in the top bin
        (raw.max(0.0) as u32).min(self.count - 1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ColumnKind {
    Numeric,
    /// Non-negative integer bin codes, with the layout that produced them when
    /// known.
    Discrete {
        bins: Option<BinEdges>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

impl Column {
    pub fn numeric(name: impl Into<String>) -> Self {
        Column {
            name: name.into(),
            kind: ColumnKind::Numeric,
        }
    }

    pub fn discrete(name: impl Into<String>, bins: Option<BinEdges>) -> Self {
        Column {
            name: name.into(),
            kind: ColumnKind::Discrete { bins },
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.kind, ColumnKind::Numeric)
    }
}

/// An immutable table of fixed-arity records, stored row-major.
///
/// Numeric cells are finite reals; discrete cells are non-negative integer
/// codes stored as `f64`. Both are checked at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    values: Vec<f64>,
}

impl Dataset {
    pub fn new(columns: Vec<Column>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let arity = columns.len();
        let mut values = Vec::with_capacity(rows.len() * arity);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != arity {
                return Err(Error::SchemaMismatch(format!(
                    "row {} has {} values, schema has {arity} columns",
                    i + 1,
                    row.len()
                )));
            }
            values.extend(row);
        }
        Self::from_flat(columns, values)
    }

    /// Builds a dataset from row-major values.
    pub fn from_flat(columns: Vec<Column>, values: Vec<f64>) -> Result<Self> {
        if columns.is_empty() {
            if values.is_empty() {
                return Ok(Dataset { columns, values });
            }
            return Err(Error::SchemaMismatch(
                "values given for an empty schema".into(),
            ));
        }
        let arity = columns.len();
        if !values.len().is_multiple_of(arity) {
            return Err(Error::SchemaMismatch(format!(
                "{} values do not form rows of arity {arity}",
                values.len()
            )));
        }
        for (i, row) in values.chunks_exact(arity).enumerate() {
            for (col, &v) in columns.iter().zip(row) {
                check_cell(col, v).map_err(|message| Error::Cell {
                    row: i + 1,
                    column: col.name.clone(),
                    message,
                })?;
            }
        }
        Ok(Dataset { columns, values })
    }

    /// Two numeric columns `x`, `y`.
    pub fn from_points(points: &[[f64; 2]]) -> Result<Self> {
        Self::from_flat(
            vec![Column::numeric("x"), Column::numeric("y")],
            points.iter().flatten().copied().collect(),
        )
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn arity(&self) -> usize {
        self.columns.len()
    }

    pub fn n_rows(&self) -> usize {
        if self.columns.is_empty() {
            0
        } else {
            self.values.len() / self.columns.len()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.n_rows() == 0
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let a = self.arity();
        &self.values[i * a..(i + 1) * a]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        // arity 0 would make chunks_exact panic; such a dataset has no rows
        self.values.chunks_exact(self.arity().max(1))
    }

    /// True when every column is numeric.
    pub fn is_numeric(&self) -> bool {
        self.columns.iter().all(Column::is_numeric)
    }

    /// True when every column holds discrete codes.
    pub fn is_discrete(&self) -> bool {
        !self.columns.is_empty() && self.columns.iter().all(|c| !c.is_numeric())
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(indices.len() * self.arity());
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Dataset {
            columns: self.columns.clone(),
            values,
        }
    }

    /// Multiplies every numeric cell by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Dataset> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale factor must be positive and finite, got {factor}"
            )));
        }
        let arity = self.arity();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                if self.columns[k % arity].is_numeric() {
                    v * factor
                } else {
                    v
                }
            })
            .collect();
        Dataset::from_flat(self.columns.clone(), values)
    }

    /// Checks that `other` has the same arity and column kinds (bin layouts
    /// and names are not compared).
    pub fn check_compatible(&self, other: &Dataset) -> Result<()> {
        if self.arity() != other.arity() {
            return Err(Error::SchemaMismatch(format!(
                "arity {} vs {}",
                self.arity(),
                other.arity()
            )));
        }
        for (a, b) in self.columns.iter().zip(&other.columns) {
            if a.is_numeric() != b.is_numeric() {
                return Err(Error::SchemaMismatch(format!(
                    "column `{}` is {} but `{}` is {}",
                    a.name,
                    kind_label(a),
                    b.name,
                    kind_label(b)
                )));
            }
        }
        Ok(())
    }
}

fn kind_label(c: &Column) -> &'static str {
    if c.is_numeric() {
        "numeric"
    } else {
        "discrete"
    }
}

fn check_cell(col: &Column, v: f64) -> std::result::Result<(), String> {
    if !v.is_finite() {
        return Err(format!("non-finite value {v}"));
    }
    if !col.is_numeric() && (v < 0.0 || v.fract() != 0.0) {
        return Err(format!(
            "discrete code must be a non-negative integer, got {v}"
        ));
    }
    Ok(())
}

/// Parameters of the 2d standard normal toy dataset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaussSpec {
    pub n_points: usize,
    pub seed: u64,
}

impl GaussSpec {
    pub const DIMENSIONS: usize = 2;

    pub fn new(n_points: usize, seed: u64) -> Result<Self> {
        let spec = GaussSpec { n_points, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < 2 {
            return Err(Error::InvalidParameter(format!(
                "n_points must be at least 2, got {}",
                self.n_points
            )));
        }
        Ok(())
    }
}

/// Draws `spec.n_points` i.i.d. points from the uncorrelated 2d standard
/// normal.
pub fn generate_gauss(spec: &GaussSpec) -> Result<Dataset> {
    spec.validate()?;
    Ok(sample_standard_normal(spec.n_points, spec.seed))
}

pub(crate) fn sample_standard_normal(n: usize, seed: u64) -> Dataset {
    let mut rng = seed::rng(seed);
    let values = (0..n * GaussSpec::DIMENSIONS)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    Dataset {
        columns: vec![Column::numeric("x"), Column::numeric("y")],
        values,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitResult {
    pub train: Dataset,
    pub test: Dataset,
    /// `permutation[k]` is the parent row placed at position `k` of
    /// train ++ test.
    pub permutation: Vec<usize>,
}

/// Uniformly shuffles the rows and cuts the result in half: first half train,
/// second half test.
pub fn split_even(d: &Dataset, seed: u64) -> Result<SplitResult> {
    let n = d.n_rows();
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::UnevenSplit(n));
    }
    let mut permutation: Vec<usize> = (0..n).collect();
    permutation.shuffle(&mut seed::rng(seed));
    let (a, b) = permutation.split_at(n / 2);
    Ok(SplitResult {
        train: d.select(a),
        test: d.select(b),
        permutation,
    })
}

/// A record is an outlier when its Euclidean norm exceeds `radius`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutlierRule {
    radius: f64,
}

impl OutlierRule {
    /// √(2·ln 10): P(‖X‖ > r) = exp(−r²/2) = 0.1 for the 2d standard normal.
    pub fn ten_percent_tail() -> Self {
        OutlierRule {
            radius: (2.0 * std::f64::consts::LN_10).sqrt(),
        }
    }

    pub fn new(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "outlier radius must be positive, got {radius}"
            )));
        }
        Ok(OutlierRule { radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn is_outlier(&self, point: &[f64]) -> bool {
        point.iter().map(|v| v * v).sum::<f64>().sqrt() > self.radius
    }
}

impl Default for OutlierRule {
    fn default() -> Self {
        Self::ten_percent_tail()
    }
}

pub(crate) fn require_2d_numeric(d: &Dataset, what: &str) -> Result<()> {
    if d.arity() != 2 || !d.is_numeric() {
        return Err(Error::SchemaMismatch(format!(
            "{what} needs exactly 2 numeric columns, got {} column(s){}",
            d.arity(),
            if d.is_numeric() {
                ""
            } else {
                " with discrete kinds"
            }
        )));
    }
    Ok(())
}

pub fn outlier_mask(d: &Dataset, rule: &OutlierRule) -> Result<Vec<bool>> {
    require_2d_numeric(d, "outlier labeling")?;
    Ok(d.rows().map(|r| rule.is_outlier(r)).collect())
}

/// Maps every numeric column to `bins_per_column` equal-width bins over its
/// observed range. The column maximum goes to the top bin; a constant column
/// maps to bin 0. Columns that are already discrete are copied unchanged, so
/// applying this twice yields the same codes.
pub fn discretize(d: &Dataset, bins_per_column: u32) -> Result<Dataset> {
    if bins_per_column < 2 {
        return Err(Error::InvalidParameter(format!(
            "bins_per_column must be at least 2, got {bins_per_column}"
        )));
    }
    let arity = d.arity();
    let mut columns = d.columns.clone();
    let mut values = d.values.clone();
    for (j, col) in columns.iter_mut().enumerate() {
        if !col.is_numeric() {
            continue;
        }
        let (min, max) = d
            .rows()
            .map(|r| r[j])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
        let (min, max) = if d.is_empty() { (0.0, 0.0) } else { (min, max) };
        let edges = BinEdges {
            count: bins_per_column,
            min,
            max,
        };
        for v in values.iter_mut().skip(j).step_by(arity) {
            *v = f64::from(edges.code_of(*v));
        }
        col.kind = ColumnKind::Discrete { bins: Some(edges) };
    }
    Ok(Dataset { columns, values })
}

/// Discretizes several datasets with shared bin layouts: each numeric
/// column's range is taken over the rows of all inputs together, so equal
/// codes mean equal bins across the outputs.
pub fn discretize_jointly(datasets: &[&Dataset], bins_per_column: u32) -> Result<Vec<Dataset>> {
    let Some(first) = datasets.first() else {
        return Ok(Vec::new());
    };
    for d in &datasets[1..] {
        first.check_compatible(d)?;
    }
    let mut stacked = Vec::new();
    for d in datasets {
        stacked.extend_from_slice(d.values());
    }
    let joint = discretize(
        &Dataset {
            columns: first.columns.clone(),
            values: stacked,
        },
        bins_per_column,
    )?;
    let mut out = Vec::with_capacity(datasets.len());
    let mut offset = 0;
    for d in datasets {
        let len = d.values.len();
        out.push(Dataset {
            columns: joint.columns.clone(),
            values: joint.values[offset..offset + len].to_vec(),
        });
        offset += len;
    }
    Ok(out)
}
