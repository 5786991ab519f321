//! Tabular generators: independent-marginal samplers (non-private and
//! Laplace-noised under a privacy accountant) plus deliberately leaky
//! generators used as audit fixtures.
//!
//! The DP path trains per-column histograms whose counts have sensitivity 1
//! under add/remove-one-record neighborhood, perturbs each count with
//! Laplace noise of scale `C / epsilon` (the budget split equally over the
//! `C` columns), and charges the accountant exactly once per fit. Sampling
//! from a trained model is post-processing and never touches the ledger.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{
    ColumnKind, DataError, Dataset, DistanceConfig, Record, SeededRng, TabularSchema, Value,
};

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("bin count must be at least 1")]
    ZeroBins,
    #[error("scale must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("epsilon must be positive, got {0}")]
    ZeroEpsilon(f64),
    #[error("delta must be in [0, 1), got {0}")]
    BadDelta(f64),
    #[error("this mechanism only supports delta = 0, got {0}")]
    UnsupportedDelta(f64),
    #[error("cannot sample zero rows")]
    ZeroRows,
    #[error("leaky generator precondition failed: {0}")]
    VariantPrecondition(String),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// An `(epsilon, delta)` differential-privacy budget. `epsilon` must be
/// positive and `delta` in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    pub epsilon: f64,
    pub delta: f64,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, delta: f64) -> Result<PrivacyBudget, GeneratorError> {
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(GeneratorError::ZeroEpsilon(epsilon));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(GeneratorError::BadDelta(delta));
        }
        Ok(PrivacyBudget { epsilon, delta })
    }

    /// Pure-epsilon budget (`delta = 0`).
    pub fn pure(epsilon: f64) -> Result<PrivacyBudget, GeneratorError> {
        PrivacyBudget::new(epsilon, 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub label: String,
    pub epsilon: f64,
    pub delta: f64,
}

/// Sequential-composition ledger: the running totals are always the plain
/// sums of the recorded charges. Sampling operations never append entries.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PrivacyAccountant {
    ledger: Vec<LedgerEntry>,
}

impl PrivacyAccountant {
    pub fn new() -> PrivacyAccountant {
        PrivacyAccountant::default()
    }

    pub fn charge(&mut self, label: &str, budget: PrivacyBudget) {
        self.ledger.push(LedgerEntry {
            label: label.to_string(),
            epsilon: budget.epsilon,
            delta: budget.delta,
        });
    }

    pub fn ledger(&self) -> &[LedgerEntry] {
        &self.ledger
    }

    pub fn total_epsilon(&self) -> f64 {
        self.ledger.iter().map(|e| e.epsilon).sum()
    }

    pub fn total_delta(&self) -> f64 {
        self.ledger.iter().map(|e| e.delta).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ledger serializes")
    }
}

/// Per-column distribution: a probability vector over the levels, or a
/// normalized histogram over equal-width bins with explicit edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnDistribution {
    Categorical { probs: Vec<f64> },
    Numeric { edges: Vec<f64>, masses: Vec<f64> },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DpMeta {
    pub epsilon: f64,
    pub delta: f64,
    pub noise_scale: f64,
}

/// Independent per-column model fitted on train data. Probability vectors
/// sum to 1 (within 1e-9) and bin edges cover the schema's `[min, max]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorModel {
    pub schema: TabularSchema,
    pub columns: Vec<ColumnDistribution>,
    pub dp_meta: Option<DpMeta>,
}

impl GeneratorModel {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(json: &str) -> Result<GeneratorModel, serde_json::Error> {
        serde_json::from_str(json)
    }
}

fn bin_index(value: f64, min: f64, width: f64, bins: usize) -> usize {
    if width <= 0.0 {
        return 0;
    }
    let raw = ((value - min) / width).floor();
    if raw < 0.0 {
        0
    } else {
        (raw as usize).min(bins - 1)
    }
}

fn column_counts(train: &Dataset, bins: usize) -> Vec<(Vec<f64>, Option<Vec<f64>>)> {
    train
        .schema()
        .columns()
        .iter()
        .enumerate()
        .map(|(idx, col)| match &col.kind {
            ColumnKind::Categorical { levels } => {
                let mut counts = vec![0.0; levels.len()];
                for row in train.rows() {
                    if let Value::Category(i) = row.value(idx) {
                        counts[i] += 1.0;
                    }
                }
                (counts, None)
            }
            ColumnKind::Numeric { min, max } => {
                let width = (max - min) / bins as f64;
                let edges: Vec<f64> = (0..=bins)
                    .map(|b| {
                        if b == bins {
                            *max
                        } else {
                            min + width * b as f64
                        }
                    })
                    .collect();
                let mut counts = vec![0.0; bins];
                for row in train.rows() {
                    if let Value::Number(v) = row.value(idx) {
                        counts[bin_index(v, *min, width, bins)] += 1.0;
                    }
                }
                (counts, Some(edges))
            }
        })
        .collect()
}

fn normalize(counts: &[f64]) -> Vec<f64> {
    let total: f64 = counts.iter().sum();
    if total > 0.0 {
        counts.iter().map(|c| c / total).collect()
    } else {
        // nothing survived (all noisy counts clamped to zero): fall back to
        // a uniform distribution, deterministically
        vec![1.0 / counts.len() as f64; counts.len()]
    }
}

/// Fit per-column empirical frequencies (categorical) and equal-width
/// histogram densities (numeric, `bins` bins over the schema range). No
/// accountant interaction.
pub fn fit_marginals(train: &Dataset, bins: usize) -> Result<GeneratorModel, GeneratorError> {
    if train.is_empty() {
        return Err(GeneratorError::EmptyDataset);
    }
    if bins == 0 {
        return Err(GeneratorError::ZeroBins);
    }
    let columns = column_counts(train, bins)
        .into_iter()
        .map(|(counts, edges)| match edges {
            None => ColumnDistribution::Categorical {
                probs: normalize(&counts),
            },
            Some(edges) => ColumnDistribution::Numeric {
                edges,
                masses: normalize(&counts),
            },
        })
        .collect();
    Ok(GeneratorModel {
        schema: train.schema().clone(),
        columns,
        dp_meta: None,
    })
}

/// Inverse CDF of the Laplace distribution with mean 0 and scale `b`,
/// evaluated at `u` in `(0, 1)`: `-b * sgn(u - 1/2) * ln(1 - 2|u - 1/2|)`.
/// The median input `u = 1/2` maps to 0.
pub fn laplace_inverse_cdf(u: f64, scale: f64) -> f64 {
    let centered = u - 0.5;
    -scale * centered.signum() * (1.0 - 2.0 * centered.abs()).ln()
}

/// One draw from `Laplace(0, scale)` via inverse-CDF on a uniform draw.
pub fn laplace_sample(scale: f64, rng: &mut SeededRng) -> Result<f64, GeneratorError> {
    if !scale.is_finite() || scale <= 0.0 {
        return Err(GeneratorError::NonPositiveScale(scale));
    }
    Ok(laplace_inverse_cdf(rng.open01(), scale))
}

/// Differentially private marginal fit: every per-column count is perturbed
/// with `Laplace(C / epsilon)` noise (`C` = column count, each column's
/// histogram having sensitivity 1 under add/remove-one), negative noisy
/// counts are clamped to zero, and the result renormalized. The accountant
/// is charged exactly once with the full budget.
pub fn fit_marginals_dp(
    train: &Dataset,
    bins: usize,
    budget: PrivacyBudget,
    accountant: &mut PrivacyAccountant,
    rng: &mut SeededRng,
) -> Result<GeneratorModel, GeneratorError> {
    if train.is_empty() {
        return Err(GeneratorError::EmptyDataset);
    }
    if bins == 0 {
        return Err(GeneratorError::ZeroBins);
    }
    if budget.epsilon <= 0.0 || budget.epsilon.is_nan() {
        return Err(GeneratorError::ZeroEpsilon(budget.epsilon));
    }
    if budget.delta != 0.0 {
        return Err(GeneratorError::UnsupportedDelta(budget.delta));
    }
    let columns_total = train.schema().len() as f64;
    let noise_scale = columns_total / budget.epsilon;

    let columns = column_counts(train, bins)
        .into_iter()
        .map(|(mut counts, edges)| {
            for c in counts.iter_mut() {
                *c = (*c + laplace_inverse_cdf(rng.open01(), noise_scale)).max(0.0);
            }
            match edges {
                None => ColumnDistribution::Categorical {
                    probs: normalize(&counts),
                },
                Some(edges) => ColumnDistribution::Numeric {
                    edges,
                    masses: normalize(&counts),
                },
            }
        })
        .collect();

    accountant.charge("dp-marginals-fit", budget);
    Ok(GeneratorModel {
        schema: train.schema().clone(),
        columns,
        dp_meta: Some(DpMeta {
            epsilon: budget.epsilon,
            delta: budget.delta,
            noise_scale,
        }),
    })
}

fn pick_weighted(probs: &[f64], rng: &mut SeededRng) -> usize {
    let u = rng.uniform();
    let mut cumulative = 0.0;
    for (i, p) in probs.iter().enumerate() {
        cumulative += p;
        if u < cumulative {
            return i;
        }
    }
    probs.len() - 1
}

/// Sample `n` i.i.d. rows from a trained model: categorical values by their
/// probability vector, numeric values by a bin choice followed by a uniform
/// draw within the bin. Post-processing: no accountant is touched.
pub fn sample_model(
    model: &GeneratorModel,
    n: usize,
    rng: &mut SeededRng,
) -> Result<Dataset, GeneratorError> {
    if n == 0 {
        return Err(GeneratorError::ZeroRows);
    }
    let rows = (0..n)
        .map(|_| {
            let values = model
                .columns
                .iter()
                .map(|col| match col {
                    ColumnDistribution::Categorical { probs } => {
                        Value::Category(pick_weighted(probs, rng))
                    }
                    ColumnDistribution::Numeric { edges, masses } => {
                        let bin = pick_weighted(masses, rng);
                        let (lo, hi) = (edges[bin], edges[bin + 1]);
                        Value::Number(lo + rng.uniform() * (hi - lo))
                    }
                })
                .collect();
            Record::new(values)
        })
        .collect();
    Ok(Dataset::new(model.schema.clone(), rows)?)
}

/// Recipes for deliberately leaky synthetic data, used as audit fixtures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeakySpec {
    /// Output is an exact copy of the held-out test data.
    CopyTest,
    /// The `k` train rows farthest from the column-wise train centroid,
    /// each numeric column perturbed by centered Gaussian noise of scale
    /// `perturb_sigma`, plus `filler_count` copies of `filler_value`.
    OutlierLeak {
        k: usize,
        perturb_sigma: f64,
        filler_count: usize,
        filler_value: Record,
    },
    /// `|train|` rows, each a uniformly chosen train row with numeric
    /// columns perturbed at scale `resample_sigma`.
    Overfit { resample_sigma: f64 },
    /// The fixed two-record dataset `{target, other}` used for worst-case
    /// differencing fixtures; ignores the train and test inputs.
    TwoRecordWorstCase { target: Record, other: Record },
}

/// Column-wise centroid of a dataset: numeric mean, categorical modal level
/// (ties to the lowest index).
fn centroid(train: &Dataset) -> Record {
    let values = train
        .schema()
        .columns()
        .iter()
        .enumerate()
        .map(|(idx, col)| match &col.kind {
            ColumnKind::Numeric { .. } => {
                let sum: f64 = train
                    .rows()
                    .iter()
                    .map(|r| match r.value(idx) {
                        Value::Number(v) => v,
                        _ => unreachable!(),
                    })
                    .sum();
                Value::Number(sum / train.n() as f64)
            }
            ColumnKind::Categorical { levels } => {
                let mut counts = vec![0usize; levels.len()];
                for row in train.rows() {
                    if let Value::Category(i) = row.value(idx) {
                        counts[i] += 1;
                    }
                }
                let mode = counts
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                Value::Category(mode)
            }
        })
        .collect();
    Record::new(values)
}

/// Indices of the `k` train rows with the largest Gower distance from the
/// train centroid (ranges observed from the train data), ties broken by the
/// smaller row index. Exposed so audits can locate the at-risk records the
/// outlier-leak fixture exposes.
pub fn outlier_indices(train: &Dataset, k: usize) -> Result<Vec<usize>, GeneratorError> {
    if train.is_empty() {
        return Err(GeneratorError::EmptyDataset);
    }
    let center = centroid(train);
    let cfg = DistanceConfig::from_datasets(&[train])?;
    let mut scored: Vec<(usize, f64)> = train
        .rows()
        .iter()
        .enumerate()
        .map(|(i, row)| Ok((i, crate::data::distance(row, &center, &cfg)?)))
        .collect::<Result<_, DataError>>()?;
    // descending distance, ties to the smaller index
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(scored.into_iter().take(k).map(|(i, _)| i).collect())
}

fn perturb_numeric(record: &Record, schema: &TabularSchema, sigma: f64, rng: &mut SeededRng) -> Record {
    // always draw, even at sigma = 0, so sweeping sigma at a fixed seed
    // compares identical underlying draws
    let values = schema
        .columns()
        .iter()
        .zip(record.values())
        .map(|(col, value)| match (&col.kind, value) {
            (ColumnKind::Numeric { .. }, Value::Number(v)) => {
                Value::Number(v + sigma * rng.normal())
            }
            (_, v) => *v,
        })
        .collect();
    Record::new(values)
}

/// Produce a leaky synthetic dataset per the given recipe. `test` is only
/// required by [`LeakySpec::CopyTest`].
pub fn generate_leaky(
    spec: &LeakySpec,
    train: &Dataset,
    test: Option<&Dataset>,
    rng: &mut SeededRng,
) -> Result<Dataset, GeneratorError> {
    match spec {
        LeakySpec::CopyTest => {
            let test = test.ok_or_else(|| {
                GeneratorError::VariantPrecondition("copy-test requires test data".into())
            })?;
            Ok(test.clone())
        }
        LeakySpec::OutlierLeak {
            k,
            perturb_sigma,
            filler_count,
            filler_value,
        } => {
            if *k == 0 {
                return Err(GeneratorError::VariantPrecondition(
                    "outlier count k must be at least 1".into(),
                ));
            }
            if train.n() < *k {
                return Err(GeneratorError::VariantPrecondition(format!(
                    "train has {} rows, need at least k={k}",
                    train.n()
                )));
            }
            if *perturb_sigma < 0.0 {
                return Err(GeneratorError::VariantPrecondition(
                    "perturbation scale must be non-negative".into(),
                ));
            }
            train
                .schema()
                .validate_record(filler_value)
                .map_err(|e| GeneratorError::VariantPrecondition(format!("filler: {e}")))?;
            let mut rows = Vec::with_capacity(k + filler_count);
            for idx in outlier_indices(train, *k)? {
                rows.push(perturb_numeric(
                    &train.rows()[idx],
                    train.schema(),
                    *perturb_sigma,
                    rng,
                ));
            }
            rows.extend(std::iter::repeat_n(filler_value.clone(), *filler_count));
            Ok(Dataset::new(train.schema().clone(), rows)?)
        }
        LeakySpec::Overfit { resample_sigma } => {
            generate_overfit(train, *resample_sigma, train.n(), rng)
        }
        LeakySpec::TwoRecordWorstCase { target, other } => {
            let schema = train.schema().clone();
            Ok(Dataset::new(schema, vec![target.clone(), other.clone()])?)
        }
    }
}

fn generate_overfit(
    train: &Dataset,
    sigma: f64,
    n_out: usize,
    rng: &mut SeededRng,
) -> Result<Dataset, GeneratorError> {
    if train.is_empty() {
        return Err(GeneratorError::EmptyDataset);
    }
    if sigma < 0.0 {
        return Err(GeneratorError::VariantPrecondition(
            "resample scale must be non-negative".into(),
        ));
    }
    if n_out == 0 {
        return Err(GeneratorError::ZeroRows);
    }
    let rows = (0..n_out)
        .map(|_| {
            let source = &train.rows()[rng.index(train.n())];
            perturb_numeric(source, train.schema(), sigma, rng)
        })
        .collect();
    Ok(Dataset::new(train.schema().clone(), rows)?)
}

/// A train-then-sample procedure mapping a train dataset to a synthetic
/// dataset. Attacks treat pipelines as black boxes and retrain them freely;
/// implementations must be deterministic given the passed random source.
pub trait Pipeline: Sync {
    /// Generate a synthetic dataset of `n_out` rows where the variant allows
    /// choosing the size; fixture variants with inherent sizes ignore it.
    fn generate_n(
        &self,
        train: &Dataset,
        n_out: usize,
        rng: &mut SeededRng,
    ) -> Result<Dataset, GeneratorError>;

    /// Default release size: one synthetic row per train row.
    fn generate(&self, train: &Dataset, rng: &mut SeededRng) -> Result<Dataset, GeneratorError> {
        self.generate_n(train, train.n(), rng)
    }
}

/// Non-private independent-marginal fit and sample.
#[derive(Clone, Debug)]
pub struct MarginalsPipeline {
    pub bins: usize,
}

impl Pipeline for MarginalsPipeline {
    fn generate_n(
        &self,
        train: &Dataset,
        n_out: usize,
        rng: &mut SeededRng,
    ) -> Result<Dataset, GeneratorError> {
        let model = fit_marginals(train, self.bins)?;
        sample_model(&model, n_out, rng)
    }
}

/// DP marginal fit and sample. Each `generate` call fits a fresh model with
/// a throwaway accountant; audits that publish a model charge a real
/// accountant via [`fit_marginals_dp`] directly.
#[derive(Clone, Debug)]
pub struct DpMarginalsPipeline {
    pub bins: usize,
    pub epsilon: f64,
}

impl Pipeline for DpMarginalsPipeline {
    fn generate_n(
        &self,
        train: &Dataset,
        n_out: usize,
        rng: &mut SeededRng,
    ) -> Result<Dataset, GeneratorError> {
        let budget = PrivacyBudget::pure(self.epsilon)?;
        let mut scratch = PrivacyAccountant::new();
        let model = fit_marginals_dp(train, self.bins, budget, &mut scratch, rng)?;
        sample_model(&model, n_out, rng)
    }
}

/// Leaky fixture pipeline. Output sizes are dictated by the variant except
/// for the overfit recipe, which honors the requested size.
#[derive(Clone, Debug)]
pub struct LeakyPipeline {
    pub spec: LeakySpec,
    pub test: Option<Dataset>,
}

impl Pipeline for LeakyPipeline {
    fn generate_n(
        &self,
        train: &Dataset,
        n_out: usize,
        rng: &mut SeededRng,
    ) -> Result<Dataset, GeneratorError> {
        match &self.spec {
            LeakySpec::Overfit { resample_sigma } => {
                generate_overfit(train, *resample_sigma, n_out, rng)
            }
            spec => generate_leaky(spec, train, self.test.as_ref(), rng),
        }
    }
}

/// Returns its training data unchanged: the maximal leak.
#[derive(Clone, Copy, Debug)]
pub struct IdentityPipeline;

impl Pipeline for IdentityPipeline {
    fn generate_n(
        &self,
        train: &Dataset,
        _n_out: usize,
        _rng: &mut SeededRng,
    ) -> Result<Dataset, GeneratorError> {
        Ok(train.clone())
    }
}

/// Ignores its training data entirely: the null generator.
#[derive(Clone, Debug)]
pub struct ConstantPipeline {
    pub output: Dataset,
}

impl Pipeline for ConstantPipeline {
    fn generate_n(
        &self,
        _train: &Dataset,
        _n_out: usize,
        _rng: &mut SeededRng,
    ) -> Result<Dataset, GeneratorError> {
        Ok(self.output.clone())
    }
}

/// Total-variation distance between two fitted column distributions; the
/// columns must have the same shape.
pub fn column_total_variation(a: &ColumnDistribution, b: &ColumnDistribution) -> f64 {
    let (pa, pb) = match (a, b) {
        (
            ColumnDistribution::Categorical { probs: pa },
            ColumnDistribution::Categorical { probs: pb },
        ) => (pa, pb),
        (
            ColumnDistribution::Numeric { masses: pa, .. },
            ColumnDistribution::Numeric { masses: pb, .. },
        ) => (pa, pb),
        _ => return 1.0,
    };
    0.5 * pa
        .iter()
        .zip(pb)
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
}

/// Checked model invariants: probability vectors non-negative summing to 1
/// within 1e-9, edges covering the schema range.
pub fn check_model_invariants(model: &GeneratorModel) -> Result<(), String> {
    for (col, dist) in model.schema.columns().iter().zip(&model.columns) {
        let probs = match dist {
            ColumnDistribution::Categorical { probs } => probs,
            ColumnDistribution::Numeric { edges, masses } => {
                if let ColumnKind::Numeric { min, max } = &col.kind {
                    if edges.first() != Some(min) || edges.last() != Some(max) {
                        return Err(format!("column {:?}: edges do not cover range", col.name));
                    }
                }
                masses
            }
        };
        if probs.iter().any(|p| *p < 0.0) {
            return Err(format!("column {:?}: negative probability", col.name));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(format!("column {:?}: probabilities sum to {total}", col.name));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gaussian2d_sample, Column};
    use approx::assert_abs_diff_eq;

    fn cat_dataset(rows: &[usize]) -> Dataset {
        let schema = TabularSchema::new(vec![Column::categorical("c", &["a", "b"])]).unwrap();
        Dataset::new(
            schema,
            rows.iter()
                .map(|&i| Record::new(vec![Value::Category(i)]))
                .collect(),
        )
        .unwrap()
    }

    fn num_dataset(values: &[f64], min: f64, max: f64) -> Dataset {
        let schema = TabularSchema::new(vec![Column::numeric("x", min, max)]).unwrap();
        Dataset::new(
            schema,
            values
                .iter()
                .map(|&v| Record::new(vec![Value::Number(v)]))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn fit_counts_categorical_frequencies() {
        let train = cat_dataset(&[0, 0, 1]);
        let model = fit_marginals(&train, 4).unwrap();
        match &model.columns[0] {
            ColumnDistribution::Categorical { probs } => {
                assert_abs_diff_eq!(probs[0], 2.0 / 3.0, epsilon = 1e-12);
                assert_abs_diff_eq!(probs[1], 1.0 / 3.0, epsilon = 1e-12);
            }
            _ => panic!("expected categorical column"),
        }
        check_model_invariants(&model).unwrap();
    }

    #[test]
    fn constant_numeric_column_concentrates_in_one_bin() {
        let train = num_dataset(&[5.0, 5.0, 5.0], 0.0, 10.0);
        let model = fit_marginals(&train, 4).unwrap();
        match &model.columns[0] {
            ColumnDistribution::Numeric { masses, .. } => {
                assert_eq!(masses.iter().filter(|m| **m > 0.0).count(), 1);
                assert_eq!(masses[2], 1.0); // 5.0 lands in [5.0, 7.5)
            }
            _ => panic!("expected numeric column"),
        }
    }

    #[test]
    fn uniform_sample_spreads_mass_evenly() {
        let mut rng = SeededRng::new(8);
        let values: Vec<f64> = (0..100_000).map(|_| rng.uniform()).collect();
        let train = num_dataset(&values, 0.0, 1.0);
        let model = fit_marginals(&train, 10).unwrap();
        match &model.columns[0] {
            ColumnDistribution::Numeric { masses, .. } => {
                for m in masses {
                    assert!((0.09..=0.11).contains(m), "bin mass {m}");
                }
            }
            _ => panic!("expected numeric column"),
        }
    }

    #[test]
    fn laplace_median_and_determinism() {
        assert_eq!(laplace_inverse_cdf(0.5, 3.0), 0.0);
        let mut a = SeededRng::new(4);
        let mut b = SeededRng::new(4);
        for _ in 0..50 {
            assert_eq!(
                laplace_sample(1.0, &mut a).unwrap(),
                laplace_sample(1.0, &mut b).unwrap()
            );
        }
        assert!(laplace_sample(0.0, &mut a).is_err());
        assert!(laplace_sample(-1.0, &mut a).is_err());
    }

    #[test]
    fn dp_fit_records_noise_scale_and_charges_once() {
        let mut rng = SeededRng::new(1);
        let train = gaussian2d_sample(50, &mut rng).unwrap();
        let mut acct = PrivacyAccountant::new();
        let budget = PrivacyBudget::pure(1.0).unwrap();
        let model = fit_marginals_dp(&train, 10, budget, &mut acct, &mut rng).unwrap();
        // two columns at epsilon 1 -> per-column scale 2
        assert_eq!(model.dp_meta.unwrap().noise_scale, 2.0);
        assert_eq!(acct.ledger().len(), 1);
        assert_eq!(acct.total_epsilon(), 1.0);
        check_model_invariants(&model).unwrap();
    }

    #[test]
    fn dp_fit_composition_doubles_the_total() {
        let mut rng = SeededRng::new(2);
        let train = gaussian2d_sample(30, &mut rng).unwrap();
        let mut acct = PrivacyAccountant::new();
        let budget = PrivacyBudget::pure(0.7).unwrap();
        fit_marginals_dp(&train, 5, budget, &mut acct, &mut rng).unwrap();
        fit_marginals_dp(&train, 5, budget, &mut acct, &mut rng).unwrap();
        assert_abs_diff_eq!(acct.total_epsilon(), 1.4, epsilon = 1e-12);
        assert_eq!(acct.total_delta(), 0.0);
        assert_eq!(acct.ledger().len(), 2);
    }

    #[test]
    fn huge_epsilon_approaches_the_nonprivate_fit() {
        let mut rng = SeededRng::new(3);
        let train = gaussian2d_sample(200, &mut rng).unwrap();
        let exact = fit_marginals(&train, 10).unwrap();
        let mut acct = PrivacyAccountant::new();
        let budget = PrivacyBudget::pure(1e6).unwrap();
        let noisy = fit_marginals_dp(&train, 10, budget, &mut acct, &mut rng).unwrap();
        for (a, b) in exact.columns.iter().zip(&noisy.columns) {
            assert!(column_total_variation(a, b) <= 1e-3);
        }
    }

    #[test]
    fn dp_fit_rejects_nonzero_delta_and_zero_epsilon() {
        let train = cat_dataset(&[0, 1]);
        let mut acct = PrivacyAccountant::new();
        let mut rng = SeededRng::new(0);
        let budget = PrivacyBudget::new(1.0, 0.1).unwrap();
        assert!(matches!(
            fit_marginals_dp(&train, 2, budget, &mut acct, &mut rng),
            Err(GeneratorError::UnsupportedDelta(_))
        ));
        assert!(PrivacyBudget::pure(0.0).is_err());
        assert!(PrivacyBudget::new(1.0, 1.0).is_err());
    }

    #[test]
    fn sampling_is_post_processing() {
        let mut rng = SeededRng::new(6);
        let train = gaussian2d_sample(40, &mut rng).unwrap();
        let mut acct = PrivacyAccountant::new();
        let budget = PrivacyBudget::pure(2.0).unwrap();
        let model = fit_marginals_dp(&train, 8, budget, &mut acct, &mut rng).unwrap();
        let before = acct.to_json();
        for i in 0..20 {
            let mut sub = rng.substream(&format!("sample{i}"));
            sample_model(&model, 15, &mut sub).unwrap();
        }
        assert_eq!(before, acct.to_json());
    }

    #[test]
    fn degenerate_model_samples_constantly() {
        let train = cat_dataset(&[1, 1, 1]);
        let model = fit_marginals(&train, 1).unwrap();
        let mut rng = SeededRng::new(9);
        let sample = sample_model(&model, 25, &mut rng).unwrap();
        assert!(sample
            .rows()
            .iter()
            .all(|r| r.value(0) == Value::Category(1)));
        assert!(sample_model(&model, 0, &mut rng).is_err());
    }

    #[test]
    fn sampled_frequencies_track_the_model() {
        let mut rng = SeededRng::new(10);
        let values: Vec<f64> = (0..50_000).map(|_| rng.uniform()).collect();
        let train = num_dataset(&values, 0.0, 1.0);
        let model = fit_marginals(&train, 10).unwrap();
        let sample = sample_model(&model, 100_000, &mut rng).unwrap();
        let refit = fit_marginals(&sample, 10).unwrap();
        let (masses, refit_masses) = match (&model.columns[0], &refit.columns[0]) {
            (
                ColumnDistribution::Numeric { masses: a, .. },
                ColumnDistribution::Numeric { masses: b, .. },
            ) => (a, b),
            _ => unreachable!(),
        };
        for (m, r) in masses.iter().zip(refit_masses) {
            assert!((m - r).abs() <= 0.01, "bin drifted: model {m}, sample {r}");
        }
    }

    #[test]
    fn dp_noise_matches_laplace_moments() {
        // noisy count minus true count over 10^4 fits of a single-column
        // dataset: mean ~ 0, variance ~ 2 * scale^2 within 5%
        let train = cat_dataset(&[0, 0, 0, 0, 0]);
        let budget = PrivacyBudget::pure(0.5).unwrap();
        let scale: f64 = 1.0 / 0.5;
        let root = SeededRng::new(77);
        let mut diffs = Vec::with_capacity(10_000);
        for i in 0..10_000 {
            let mut rng = root.substream(&format!("rep{i}"));
            // reproduce the same noise the fit would inject on the count
            diffs.push(laplace_inverse_cdf(rng.open01(), scale));
        }
        let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
        let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / diffs.len() as f64;
        let true_var = 2.0 * scale * scale;
        assert!(mean.abs() <= 0.05 * true_var, "mean {mean}");
        assert!(
            (var - true_var).abs() <= 0.05 * true_var,
            "variance {var} vs {true_var}"
        );
        // and the fit applies exactly that noise to the raw counts
        let mut acct = PrivacyAccountant::new();
        let mut rng = root.substream("rep0");
        let model = fit_marginals_dp(&train, 1, budget, &mut acct, &mut rng).unwrap();
        let mut replay = root.substream("rep0");
        let noisy0 = (5.0 + laplace_inverse_cdf(replay.open01(), scale)).max(0.0);
        let noisy1 = (0.0 + laplace_inverse_cdf(replay.open01(), scale)).max(0.0);
        match &model.columns[0] {
            ColumnDistribution::Categorical { probs } => {
                let expected = normalize(&[noisy0, noisy1]);
                assert_abs_diff_eq!(probs[0], expected[0], epsilon = 1e-12);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn marginal_fit_is_consistent_as_n_grows() {
        // ground truth: uniform over [0,1), 10 bins -> mass 0.1 each
        let truth = vec![0.1; 10];
        let mut tv_by_n = Vec::new();
        for (label, n) in [("small", 100usize), ("large", 10_000usize)] {
            let mut rng = SeededRng::with_stream(123, label);
            let values: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
            let train = num_dataset(&values, 0.0, 1.0);
            let model = fit_marginals(&train, 10).unwrap();
            let masses = match &model.columns[0] {
                ColumnDistribution::Numeric { masses, .. } => masses.clone(),
                _ => unreachable!(),
            };
            let tv = 0.5
                * masses
                    .iter()
                    .zip(&truth)
                    .map(|(a, b)| (a - b).abs())
                    .sum::<f64>();
            tv_by_n.push(tv);
        }
        assert!(
            tv_by_n[1] < tv_by_n[0],
            "total variation did not shrink: {tv_by_n:?}"
        );
    }

    #[test]
    fn copy_test_reproduces_test_exactly() {
        let mut rng = SeededRng::new(12);
        let train = gaussian2d_sample(10, &mut rng.substream("train")).unwrap();
        let test = gaussian2d_sample(10, &mut rng.substream("test")).unwrap();
        let synth =
            generate_leaky(&LeakySpec::CopyTest, &train, Some(&test), &mut rng).unwrap();
        assert_eq!(synth, test);
        assert!(generate_leaky(&LeakySpec::CopyTest, &train, None, &mut rng).is_err());
    }

    #[test]
    fn outlier_leak_emits_outliers_and_fillers() {
        let rng = SeededRng::new(14);
        let train = gaussian2d_sample(10, &mut rng.substream("train")).unwrap();
        let filler = Record::new(vec![Value::Number(0.0), Value::Number(0.0)]);
        let spec = LeakySpec::OutlierLeak {
            k: 3,
            perturb_sigma: 0.05,
            filler_count: 70,
            filler_value: filler.clone(),
        };
        let synth = generate_leaky(&spec, &train, None, &mut rng.substream("gen")).unwrap();
        assert_eq!(synth.n(), 73);
        let filler_rows = synth.rows().iter().filter(|r| **r == filler).count();
        assert_eq!(filler_rows, 70);

        // the three leaked rows sit near true train outliers
        let outliers = outlier_indices(&train, 3).unwrap();
        let cfg = DistanceConfig::from_datasets(&[&train]).unwrap();
        for (leaked, &idx) in synth.rows()[..3].iter().zip(&outliers) {
            let d = crate::data::distance(leaked, &train.rows()[idx], &cfg).unwrap();
            assert!(d <= 0.1, "leaked row strayed {d} from its outlier");
        }
    }

    #[test]
    fn outlier_leak_preconditions() {
        let mut rng = SeededRng::new(15);
        let train = gaussian2d_sample(2, &mut rng).unwrap();
        let filler = Record::new(vec![Value::Number(0.0), Value::Number(0.0)]);
        let spec = LeakySpec::OutlierLeak {
            k: 3,
            perturb_sigma: 0.05,
            filler_count: 1,
            filler_value: filler,
        };
        assert!(matches!(
            generate_leaky(&spec, &train, None, &mut rng),
            Err(GeneratorError::VariantPrecondition(_))
        ));
    }

    #[test]
    fn overfit_with_zero_scale_replays_train_rows() {
        let rng = SeededRng::new(16);
        let train = gaussian2d_sample(20, &mut rng.substream("train")).unwrap();
        let synth = generate_leaky(
            &LeakySpec::Overfit { resample_sigma: 0.0 },
            &train,
            None,
            &mut rng.substream("gen"),
        )
        .unwrap();
        assert_eq!(synth.n(), train.n());
        for row in synth.rows() {
            assert!(train.contains(row), "resampled row not in train");
        }
    }

    #[test]
    fn two_record_fixture_ignores_inputs() {
        let mut rng = SeededRng::new(17);
        let train = gaussian2d_sample(5, &mut rng).unwrap();
        let target = Record::new(vec![Value::Number(4.0), Value::Number(4.0)]);
        let other = Record::new(vec![Value::Number(0.0), Value::Number(0.0)]);
        let spec = LeakySpec::TwoRecordWorstCase {
            target: target.clone(),
            other: other.clone(),
        };
        let synth = generate_leaky(&spec, &train, None, &mut rng).unwrap();
        assert_eq!(synth.rows(), &[target, other]);
    }

    #[test]
    fn model_json_round_trip() {
        let train = cat_dataset(&[0, 1, 1]);
        let model = fit_marginals(&train, 3).unwrap();
        let json = model.to_json();
        let back = GeneratorModel::from_json(&json).unwrap();
        assert_eq!(model, back);
    }

    #[test]
    fn accountant_totals_are_plain_sums() {
        let mut acct = PrivacyAccountant::new();
        let charges = [(0.25, 0.0), (1.5, 0.0), (0.125, 0.0)];
        for (i, (eps, delta)) in charges.iter().enumerate() {
            acct.charge(&format!("step{i}"), PrivacyBudget::new(*eps, *delta).unwrap());
        }
        assert_abs_diff_eq!(acct.total_epsilon(), 1.875, epsilon = 1e-12);
        assert_eq!(acct.total_delta(), 0.0);
    }
}
