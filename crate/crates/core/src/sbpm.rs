//! Similarity-based privacy metrics and their pass/fail tests.
//!
//! Three metrics compare a synthetic dataset against the train data, using
//! the held-out test data as the reference for "how close is too close":
//!
//! - identical match share (IMS): fraction of rows that are exact copies of
//!   a train row (statistic: average; passes when `ims_test >= ims_synth`);
//! - distance to closest record (DCR): per-row nearest-train distance
//!   (statistic: 5th percentile; passes when `dcr_test <= dcr_synth`);
//! - nearest-neighbor distance ratio (NNDR): nearest distance divided by the
//!   second-nearest (statistic: 5th percentile; same direction as DCR).
//!
//! The synthetic data is deemed private only if all three tests pass. All
//! comparisons are non-strict, so a synthetic dataset that replicates the
//! test distribution exactly passes every test — which is precisely the
//! failure mode the attacks module exploits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::sync::atomic::{AtomicU64, Ordering};
use thiserror::Error;

use crate::data::{
    nearest_neighbors, row_key, DataError, Dataset, DistanceConfig,
};

#[derive(Debug, Error)]
pub enum SbpmError {
    #[error("schema mismatch between datasets")]
    SchemaMismatch,
    #[error("empty dataset")]
    EmptyDataset,
    #[error("train dataset needs at least 2 rows for distance ratios, got {0}")]
    TrainTooSmall(usize),
    #[error("empty input")]
    EmptyInput,
    #[error(transparent)]
    Data(#[from] DataError),
}

/// The summary statistic reducing a distance distribution to one number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricStatistic {
    Average,
    /// 5th percentile with linear interpolation between order statistics at
    /// zero-based rank `0.05 * (n - 1)`.
    Percentile5,
}

/// Reduce a non-empty list of values to the requested statistic.
pub fn percentile(values: &[f64], stat: MetricStatistic) -> Result<f64, SbpmError> {
    if values.is_empty() {
        return Err(SbpmError::EmptyInput);
    }
    match stat {
        MetricStatistic::Average => {
            Ok(values.iter().sum::<f64>() / values.len() as f64)
        }
        MetricStatistic::Percentile5 => {
            let mut sorted = values.to_vec();
            sorted.sort_unstable_by(f64::total_cmp);
            let rank = 0.05 * (sorted.len() - 1) as f64;
            let lower = rank.floor() as usize;
            let frac = rank - lower as f64;
            if lower + 1 < sorted.len() {
                Ok(sorted[lower] + frac * (sorted[lower + 1] - sorted[lower]))
            } else {
                Ok(sorted[lower])
            }
        }
    }
}

fn check_pair(train: &Dataset, other: &Dataset) -> Result<(), SbpmError> {
    if train.schema() != other.schema() {
        return Err(SbpmError::SchemaMismatch);
    }
    if train.is_empty() || other.is_empty() {
        return Err(SbpmError::EmptyDataset);
    }
    Ok(())
}

/// Fraction of `other` rows that are exact copies (all columns, exact value
/// equality) of at least one train row.
pub fn identical_match_share(train: &Dataset, other: &Dataset) -> Result<f64, SbpmError> {
    check_pair(train, other)?;
    let train_keys: HashSet<Vec<u64>> = train.rows().iter().map(row_key).collect();
    let indicators: Vec<f64> = other
        .rows()
        .iter()
        .map(|row| if train_keys.contains(&row_key(row)) { 1.0 } else { 0.0 })
        .collect();
    percentile(&indicators, MetricStatistic::Average)
}

/// Per-row distance from each `other` row to its nearest train row, in the
/// row order of `other`.
pub fn dcr_values(
    train: &Dataset,
    other: &Dataset,
    cfg: &DistanceConfig,
) -> Result<Vec<f64>, SbpmError> {
    check_pair(train, other)?;
    other
        .rows()
        .par_iter()
        .map(|row| {
            let hits = nearest_neighbors(row, train, 1, cfg)?;
            Ok(hits[0].1)
        })
        .collect()
}

/// Per-row ratio of the nearest to the second-nearest train distance,
/// `d1 / d2` with `d1 <= d2`. A zero second-nearest distance pins the ratio
/// to 1.0 (the query duplicates a duplicated train row: maximal ambiguity).
pub fn nndr_values(
    train: &Dataset,
    other: &Dataset,
    cfg: &DistanceConfig,
) -> Result<Vec<f64>, SbpmError> {
    check_pair(train, other)?;
    if train.n() < 2 {
        return Err(SbpmError::TrainTooSmall(train.n()));
    }
    other
        .rows()
        .par_iter()
        .map(|row| {
            let hits = nearest_neighbors(row, train, 2, cfg)?;
            let (d1, d2) = (hits[0].1, hits[1].1);
            Ok(if d2 == 0.0 { 1.0 } else { d1 / d2 })
        })
        .collect()
}

/// The six metric statistics plus the three pass flags and their
/// conjunction. Serializes with exactly these field names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbpmReport {
    pub ims_synth: f64,
    pub ims_test: f64,
    pub dcr_p5_synth: f64,
    pub dcr_p5_test: f64,
    pub nndr_p5_synth: f64,
    pub nndr_p5_test: f64,
    pub ims_pass: bool,
    pub dcr_pass: bool,
    pub nndr_pass: bool,
    pub all_pass: bool,
}

fn side_statistics(
    train: &Dataset,
    other: &Dataset,
    cfg: &DistanceConfig,
) -> Result<(f64, f64, f64), SbpmError> {
    let ims = identical_match_share(train, other)?;
    let dcr = percentile(&dcr_values(train, other, cfg)?, MetricStatistic::Percentile5)?;
    let nndr = percentile(&nndr_values(train, other, cfg)?, MetricStatistic::Percentile5)?;
    Ok((ims, dcr, nndr))
}

/// Compute all three metrics for the synthetic and test sides and apply the
/// non-strict pass tests. Equality passes by design: a synthetic dataset
/// whose statistics coincide with the test side's is judged private.
pub fn evaluate_sbpm(
    train: &Dataset,
    test: &Dataset,
    synth: &Dataset,
    cfg: &DistanceConfig,
) -> Result<SbpmReport, SbpmError> {
    check_pair(train, test)?;
    check_pair(train, synth)?;
    if train.n() < 2 {
        return Err(SbpmError::TrainTooSmall(train.n()));
    }
    let (ims_synth, dcr_p5_synth, nndr_p5_synth) = side_statistics(train, synth, cfg)?;
    let (ims_test, dcr_p5_test, nndr_p5_test) = side_statistics(train, test, cfg)?;
    let ims_pass = ims_test >= ims_synth;
    let dcr_pass = dcr_p5_test <= dcr_p5_synth;
    let nndr_pass = nndr_p5_test <= nndr_p5_synth;
    Ok(SbpmReport {
        ims_synth,
        ims_test,
        dcr_p5_synth,
        dcr_p5_test,
        nndr_p5_synth,
        nndr_p5_test,
        ims_pass,
        dcr_pass,
        nndr_pass,
        all_pass: ims_pass && dcr_pass && nndr_pass,
    })
}

/// Vendor-style metrics API: holds the sensitive train/test datasets
/// privately and answers metric queries about candidate synthetic datasets,
/// counting every call. Only `SbpmReport` values ever leave the oracle.
pub struct MetricsOracle {
    train: Dataset,
    test: Dataset,
    cfg: DistanceConfig,
    queries: AtomicU64,
}

impl MetricsOracle {
    pub fn new(
        train: Dataset,
        test: Dataset,
        cfg: DistanceConfig,
    ) -> Result<MetricsOracle, SbpmError> {
        check_pair(&train, &test)?;
        if train.n() < 2 {
            return Err(SbpmError::TrainTooSmall(train.n()));
        }
        Ok(MetricsOracle {
            train,
            test,
            cfg,
            queries: AtomicU64::new(0),
        })
    }

    /// Evaluate the metrics for one candidate synthetic dataset against the
    /// hidden train/test data. Every call counts, successful or not.
    pub fn evaluate(&self, candidate: &Dataset) -> Result<SbpmReport, SbpmError> {
        self.queries.fetch_add(1, Ordering::Relaxed);
        if candidate.schema() != self.train.schema() {
            return Err(SbpmError::SchemaMismatch);
        }
        evaluate_sbpm(&self.train, &self.test, candidate, &self.cfg)
    }

    pub fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    pub fn schema(&self) -> &crate::data::TabularSchema {
        self.train.schema()
    }
}
