//! Exact first/second nearest-neighbor search.
//!
//! [`nearest_two`] answers queries from a kd-tree in parallel;
//! [`nearest_two_bruteforce`] is the plain scan it must agree with bit for
//! bit. Both rank reference rows by `(distance, reference index)`, so
//! equidistant rows resolve to the lower index and duplicate values count as
//! distinct neighbors.

mod kdtree;

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

pub use kdtree::KdTree;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    /// L2 over numeric columns.
    #[default]
    Euclidean,
    /// Number of differing coordinates over discrete columns.
    Hamming,
}

impl DistanceKind {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            DistanceKind::Euclidean => {
                let mut sq = 0.0;
                for (x, y) in a.iter().zip(b) {
                    let d = x - y;
                    sq += d * d;
                }
                sq.sqrt()
            }
            DistanceKind::Hamming => a.iter().zip(b).filter(|(x, y)| x != y).count() as f64,
        }
    }

    /// Lower bound on the distance from `q` to any point of the box
    /// `[lo, hi]`. Accumulates in the same order as [`Self::distance`] so the
    /// bound never exceeds a computed in-box distance, rounding included.
    pub(crate) fn box_bound(self, q: &[f64], lo: &[f64], hi: &[f64]) -> f64 {
        match self {
            DistanceKind::Euclidean => {
                let mut sq = 0.0;
                for ((&x, &l), &h) in q.iter().zip(lo).zip(hi) {
                    let gap = if x < l {
                        l - x
                    } else if x > h {
                        x - h
                    } else {
                        0.0
                    };
                    sq += gap * gap;
                }
                sq.sqrt()
            }
            DistanceKind::Hamming => q
                .iter()
                .zip(lo)
                .zip(hi)
                .filter(|((&x, &l), &h)| x < l || x > h)
                .count() as f64,
        }
    }

    fn check(self, d: &Dataset, role: &str) -> Result<()> {
        let ok = match self {
            DistanceKind::Euclidean => d.is_numeric(),
            DistanceKind::Hamming => d.is_discrete(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::SchemaMismatch(format!(
                "{role} columns must all be {} for {self:?} distance",
                match self {
                    DistanceKind::Euclidean => "numeric",
                    DistanceKind::Hamming => "discrete",
                }
            )))
        }
    }
}

impl std::fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DistanceKind::Euclidean => "euclidean",
            DistanceKind::Hamming => "hamming",
        })
    }
}

/// The two closest reference rows of one query row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NeighborResult {
    pub query_index: usize,
    pub first_distance: f64,
    pub second_distance: f64,
    pub first_ref_index: usize,
    pub second_ref_index: usize,
}

impl NeighborResult {
    /// first / second distance; 0 when the second distance is 0.
    pub fn ratio(&self) -> f64 {
        if self.second_distance == 0.0 {
            0.0
        } else {
            self.first_distance / self.second_distance
        }
    }
}

/// Running best two `(distance, index)` pairs.
#[derive(Clone, Copy, Debug)]
pub(crate) struct TopTwo {
    best: [(f64, usize); 2],
}

impl TopTwo {
    pub(crate) fn new() -> Self {
        TopTwo {
            best: [(f64::INFINITY, usize::MAX); 2],
        }
    }

    #[inline]
    fn precedes(a: (f64, usize), b: (f64, usize)) -> bool {
        a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
    }

    #[inline]
    pub(crate) fn offer(&mut self, distance: f64, index: usize) {
        let c = (distance, index);
        if Self::precedes(c, self.best[1]) {
            if Self::precedes(c, self.best[0]) {
                self.best[1] = self.best[0];
                self.best[0] = c;
            } else {
                self.best[1] = c;
            }
        }
    }

    /// Distance a candidate must not exceed to still enter the top two.
    #[inline]
    pub(crate) fn worst(&self) -> f64 {
        self.best[1].0
    }

    fn into_result(self, query_index: usize) -> NeighborResult {
        NeighborResult {
            query_index,
            first_distance: self.best[0].0,
            second_distance: self.best[1].0,
            first_ref_index: self.best[0].1,
            second_ref_index: self.best[1].1,
        }
    }
}

fn check_inputs(queries: &Dataset, references: &Dataset, kind: DistanceKind) -> Result<()> {
    if references.n_rows() < 2 {
        return Err(Error::TooFewReferences(references.n_rows()));
    }
    queries.check_compatible(references)?;
    kind.check(references, "reference")?;
    kind.check(queries, "query")
}

/// A reference dataset prepared for repeated nearest-two queries.
#[derive(Clone, Debug)]
pub struct NeighborIndex {
    kind: DistanceKind,
    reference_rows: usize,
    template: Dataset,
    tree: KdTree,
}

impl NeighborIndex {
    pub fn new(references: &Dataset, kind: DistanceKind) -> Result<Self> {
        check_inputs(references, references, kind)?;
        Ok(NeighborIndex {
            kind,
            reference_rows: references.n_rows(),
            template: references.select(&[]),
            tree: KdTree::build(references.values(), references.arity()),
        })
    }

    pub fn kind(&self) -> DistanceKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.reference_rows
    }

    pub fn is_empty(&self) -> bool {
        self.reference_rows == 0
    }

    /// Nearest two references of every query row, in query order. Rows are
    /// searched in parallel; the output does not depend on the schedule.
    pub fn search(&self, queries: &Dataset) -> Result<Vec<NeighborResult>> {
        queries.check_compatible(&self.template)?;
        self.kind.check(queries, "query")?;
        let arity = queries.arity();
        Ok(queries
            .values()
            .par_chunks_exact(arity)
            .enumerate()
            .map(|(i, q)| self.tree.nearest_two(q, self.kind).into_result(i))
            .collect())
    }
}

/// Nearest two distinct reference rows for each query row.
pub fn nearest_two(
    queries: &Dataset,
    references: &Dataset,
    kind: DistanceKind,
) -> Result<Vec<NeighborResult>> {
    check_inputs(queries, references, kind)?;
    NeighborIndex::new(references, kind)?.search(queries)
}

/// Same contract as [`nearest_two`], by exhaustive scan.
pub fn nearest_two_bruteforce(
    queries: &Dataset,
    references: &Dataset,
    kind: DistanceKind,
) -> Result<Vec<NeighborResult>> {
    check_inputs(queries, references, kind)?;
    Ok(queries
        .rows()
        .enumerate()
        .map(|(i, q)| {
            let mut top = TopTwo::new();
            for (j, r) in references.rows().enumerate() {
                top.offer(kind.distance(q, r), j);
            }
            top.into_result(i)
        })
        .collect())
}

fn canonical_key(row: &[f64]) -> Vec<u64> {
    // + 0.0 folds -0.0 into 0.0
    row.iter().map(|v| (v + 0.0).to_bits()).collect()
}

/// Hash set of reference rows for exact-copy lookups.
#[derive(Clone, Debug)]
pub struct ExactMatchIndex {
    template: Dataset,
    keys: HashSet<Vec<u64>>,
}

impl ExactMatchIndex {
    pub fn new(references: &Dataset) -> Self {
        ExactMatchIndex {
            template: references.select(&[]),
            keys: references.rows().map(canonical_key).collect(),
        }
    }

    /// Per query row: whether some reference row holds identical values.
    pub fn mask(&self, queries: &Dataset) -> Result<Vec<bool>> {
        queries.check_compatible(&self.template)?;
        Ok(queries
            .rows()
            .map(|q| self.keys.contains(&canonical_key(q)))
            .collect())
    }

    /// Fraction of matched query rows (0 for an empty query set).
    pub fn share(&self, queries: &Dataset) -> Result<f64> {
        let mask = self.mask(queries)?;
        if mask.is_empty() {
            return Ok(0.0);
        }
        Ok(mask.iter().filter(|&&m| m).count() as f64 / mask.len() as f64)
    }
}

pub fn exact_match_mask(queries: &Dataset, references: &Dataset) -> Result<Vec<bool>> {
    queries.check_compatible(references)?;
    ExactMatchIndex::new(references).mask(queries)
}

/// Fraction of query rows having a value-identical reference row. Values are
/// compared bitwise after folding -0.0 into 0.0.
pub fn exact_match_share(queries: &Dataset, references: &Dataset) -> Result<f64> {
    queries.check_compatible(references)?;
    ExactMatchIndex::new(references).share(queries)
}
