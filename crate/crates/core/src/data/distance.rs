//! Gower-style distances over mixed-type records and exhaustive
//! nearest-neighbor search with a pinned tie rule.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

use super::{ColumnKind, DataError, Dataset, Record, TabularSchema, Value};

/// Corpus size above which distance scans fan out across threads. Both
/// branches produce the same ordered result.
const PARALLEL_SCAN_MIN: usize = 1024;

/// Per-column normalization: categorical columns compare by equality,
/// numeric columns divide by `hi - lo`. A column with `lo >= hi` is
/// constant and contributes 0 to every distance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnScale {
    Categorical,
    Numeric { lo: f64, hi: f64 },
}

/// Normalization ranges for the column-mean (Gower-style) distance.
///
/// Every per-column distance lies in `[0, 1]`: numeric columns contribute
/// `min(|a - b| / (hi - lo), 1)`, categorical columns 0 or 1, and the record
/// distance is the mean over columns. The result is symmetric, zero on
/// identical records, and satisfies the triangle inequality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceConfig {
    scales: Vec<ColumnScale>,
}

impl DistanceConfig {
    /// Ranges taken from the schema's declared `[min, max]` bounds.
    pub fn from_schema(schema: &TabularSchema) -> DistanceConfig {
        let scales = schema
            .columns()
            .iter()
            .map(|c| match &c.kind {
                ColumnKind::Categorical { .. } => ColumnScale::Categorical,
                ColumnKind::Numeric { min, max } => ColumnScale::Numeric { lo: *min, hi: *max },
            })
            .collect();
        DistanceConfig { scales }
    }

    /// Ranges observed over the union of the given datasets, so later
    /// queries cannot shift the metric's geometry. All datasets must share
    /// one schema; columns with no spread become constant columns.
    pub fn from_datasets(datasets: &[&Dataset]) -> Result<DistanceConfig, DataError> {
        let first = datasets
            .first()
            .ok_or_else(|| DataError::SchemaMismatch("no datasets given".into()))?;
        for d in &datasets[1..] {
            if d.schema() != first.schema() {
                return Err(DataError::SchemaMismatch(
                    "datasets disagree on schema".into(),
                ));
            }
        }
        let schema = first.schema();
        let scales = schema
            .columns()
            .iter()
            .enumerate()
            .map(|(idx, c)| match &c.kind {
                ColumnKind::Categorical { .. } => ColumnScale::Categorical,
                ColumnKind::Numeric { .. } => {
                    let mut lo = f64::INFINITY;
                    let mut hi = f64::NEG_INFINITY;
                    for d in datasets {
                        for row in d.rows() {
                            if let Value::Number(v) = row.value(idx) {
                                lo = lo.min(v);
                                hi = hi.max(v);
                            }
                        }
                    }
                    if lo > hi {
                        // no rows at all: fall back to a constant column
                        ColumnScale::Numeric { lo: 0.0, hi: 0.0 }
                    } else {
                        ColumnScale::Numeric { lo, hi }
                    }
                }
            })
            .collect();
        Ok(DistanceConfig { scales })
    }

    pub fn scales(&self) -> &[ColumnScale] {
        &self.scales
    }

    /// Normalized width `hi - lo` of a numeric column (0 when constant).
    pub fn numeric_width(&self, column: usize) -> Option<f64> {
        match self.scales.get(column)? {
            ColumnScale::Numeric { lo, hi } => Some((hi - lo).max(0.0)),
            ColumnScale::Categorical => None,
        }
    }

    pub(crate) fn check_record(&self, record: &Record) -> Result<(), DataError> {
        if record.values().len() != self.scales.len() {
            return Err(DataError::SchemaMismatch(format!(
                "record has {} values, distance config has {} columns",
                record.values().len(),
                self.scales.len()
            )));
        }
        for (i, (scale, value)) in self.scales.iter().zip(record.values()).enumerate() {
            match (scale, value) {
                (ColumnScale::Categorical, Value::Category(_)) => {}
                (ColumnScale::Numeric { .. }, Value::Number(_)) => {}
                _ => {
                    return Err(DataError::SchemaMismatch(format!(
                        "value kind does not match distance config at column {i}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Per-column normalized distance; records must already be validated.
pub(crate) fn column_distance(scale: &ColumnScale, a: Value, b: Value) -> f64 {
    match (scale, a, b) {
        (ColumnScale::Categorical, Value::Category(x), Value::Category(y)) => {
            if x == y {
                0.0
            } else {
                1.0
            }
        }
        (ColumnScale::Numeric { lo, hi }, Value::Number(x), Value::Number(y)) => {
            let width = hi - lo;
            if width > 0.0 {
                ((x - y).abs() / width).min(1.0)
            } else {
                0.0
            }
        }
        _ => unreachable!("records validated against config"),
    }
}

pub(crate) fn distance_unchecked(a: &Record, b: &Record, scales: &[ColumnScale]) -> f64 {
    let total: f64 = scales
        .iter()
        .zip(a.values().iter().zip(b.values()))
        .map(|(scale, (&x, &y))| column_distance(scale, x, y))
        .sum();
    total / scales.len() as f64
}

/// Column-mean Gower distance between two records, in `[0, 1]`.
pub fn distance(a: &Record, b: &Record, cfg: &DistanceConfig) -> Result<f64, DataError> {
    cfg.check_record(a)?;
    cfg.check_record(b)?;
    Ok(distance_unchecked(a, b, cfg.scales()))
}

pub(crate) fn by_distance_then_index(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))
}

fn scan_distances(q: &Record, corpus: &Dataset, cfg: &DistanceConfig) -> Vec<(usize, f64)> {
    let scales = cfg.scales();
    if corpus.n() >= PARALLEL_SCAN_MIN {
        corpus
            .rows()
            .par_iter()
            .enumerate()
            .map(|(i, row)| (i, distance_unchecked(q, row, scales)))
            .collect()
    } else {
        corpus
            .rows()
            .iter()
            .enumerate()
            .map(|(i, row)| (i, distance_unchecked(q, row, scales)))
            .collect()
    }
}

fn validate_nn_inputs(
    q: &Record,
    corpus: &Dataset,
    k: usize,
    cfg: &DistanceConfig,
) -> Result<(), DataError> {
    if corpus.n() == 0 {
        return Err(DataError::EmptyCorpus);
    }
    if k == 0 || k > corpus.n() {
        return Err(DataError::KTooLarge { k, n: corpus.n() });
    }
    cfg.check_record(q)?;
    for row in corpus.rows().iter().take(1) {
        cfg.check_record(row)?;
    }
    // one representative row is enough when the corpus came from a
    // validated Dataset; mixed-arity rows cannot occur there
    Ok(())
}

/// The `k` nearest corpus rows to `q`, ascending by distance with ties
/// broken by the smaller corpus index. This is the accelerated path
/// (threaded scan plus partial selection); it must agree with
/// [`nearest_neighbors_reference`] exactly, tie order included.
pub fn nearest_neighbors(
    q: &Record,
    corpus: &Dataset,
    k: usize,
    cfg: &DistanceConfig,
) -> Result<Vec<(usize, f64)>, DataError> {
    validate_nn_inputs(q, corpus, k, cfg)?;
    let mut pairs = scan_distances(q, corpus, cfg);
    if k < pairs.len() {
        pairs.select_nth_unstable_by(k - 1, by_distance_then_index);
        pairs.truncate(k);
    }
    pairs.sort_unstable_by(by_distance_then_index);
    Ok(pairs)
}

/// Number of corpus rows within `radius` (inclusive) of `q`.
pub fn proximity_count(
    q: &Record,
    corpus: &Dataset,
    radius: f64,
    cfg: &DistanceConfig,
) -> Result<usize, DataError> {
    cfg.check_record(q)?;
    if let Some(row) = corpus.rows().first() {
        cfg.check_record(row)?;
    }
    let scales = cfg.scales();
    Ok(corpus
        .rows()
        .iter()
        .filter(|row| distance_unchecked(q, row, scales) <= radius)
        .count())
}

/// Reference implementation: exhaustive sequential scan with a full sort.
pub fn nearest_neighbors_reference(
    q: &Record,
    corpus: &Dataset,
    k: usize,
    cfg: &DistanceConfig,
) -> Result<Vec<(usize, f64)>, DataError> {
    validate_nn_inputs(q, corpus, k, cfg)?;
    let scales = cfg.scales();
    let mut pairs: Vec<(usize, f64)> = corpus
        .rows()
        .iter()
        .enumerate()
        .map(|(i, row)| (i, distance_unchecked(q, row, scales)))
        .collect();
    pairs.sort_by(by_distance_then_index);
    pairs.truncate(k);
    Ok(pairs)
}
