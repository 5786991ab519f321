//! Reconstruction through the metrics oracle. The identical-match share of a
//! single-record candidate dataset is an exact membership predicate on the
//! hidden train data, so enumerating a finite candidate domain and keeping
//! every candidate with a positive match share recovers the train records in
//! that domain — one oracle query per candidate, no false positives.

use rayon::prelude::*;
use std::collections::HashSet;

use super::{AttackError, AttackResult};
use crate::data::{row_key, ColumnKind, Dataset, Record, TabularSchema, Value};
use crate::sbpm::MetricsOracle;

/// Guard on the candidate domain size.
pub const MAX_RECON_DOMAIN: usize = 1_000_000;

/// Candidates the oracle confirmed, plus the query spend. Ground truth stays
/// with the harness: pair this with [`recon_match_rate`] to score the attack.
#[derive(Clone, Debug, PartialEq)]
pub struct ReconDeclared {
    pub declared: Vec<Record>,
    pub oracle_queries: u64,
}

impl ReconDeclared {
    /// Score against the hidden train data the harness holds.
    pub fn into_result(&self, hidden_train: &Dataset) -> AttackResult {
        AttackResult::Recon {
            match_rate: recon_match_rate(&self.declared, hidden_train),
            oracle_queries: self.oracle_queries,
        }
    }
}

/// Query the oracle once per domain candidate and declare train membership
/// for every candidate whose identical-match share is positive. The declared
/// set keeps each distinct record once, in domain order.
pub fn recon_metric_oracle(
    oracle: &MetricsOracle,
    domain: &[Record],
) -> Result<ReconDeclared, AttackError> {
    if domain.len() > MAX_RECON_DOMAIN {
        return Err(AttackError::DomainTooLarge {
            got: domain.len(),
            cap: MAX_RECON_DOMAIN,
        });
    }
    let flags: Vec<bool> = domain
        .par_iter()
        .map(|candidate| -> Result<bool, AttackError> {
            let single = Dataset::new(oracle.schema().clone(), vec![candidate.clone()])?;
            let report = oracle.evaluate(&single)?;
            Ok(report.ims_synth > 0.0)
        })
        .collect::<Result<_, _>>()?;

    let mut seen = HashSet::new();
    let mut declared = Vec::new();
    for (candidate, hit) in domain.iter().zip(flags) {
        if hit && seen.insert(row_key(candidate)) {
            declared.push(candidate.clone());
        }
    }
    Ok(ReconDeclared {
        declared,
        oracle_queries: domain.len() as u64,
    })
}

/// Fraction of distinct hidden train records present in the declared set.
pub fn recon_match_rate(declared: &[Record], hidden_train: &Dataset) -> f64 {
    let train_keys: HashSet<Vec<u64>> = hidden_train.rows().iter().map(row_key).collect();
    if train_keys.is_empty() {
        return 0.0;
    }
    let declared_keys: HashSet<Vec<u64>> = declared.iter().map(row_key).collect();
    let recovered = train_keys.intersection(&declared_keys).count();
    recovered as f64 / train_keys.len() as f64
}

/// The finite candidate domain induced by a schema: the cartesian product of
/// categorical levels and numeric histogram-bin midpoints (`bins` equal-width
/// bins over the declared range; a constant column contributes its single
/// value). Fails rather than materializing more than [`MAX_RECON_DOMAIN`]
/// candidates.
pub fn enumerate_domain(
    schema: &TabularSchema,
    bins: usize,
) -> Result<Vec<Record>, AttackError> {
    let per_column: Vec<Vec<Value>> = schema
        .columns()
        .iter()
        .map(|col| match &col.kind {
            ColumnKind::Categorical { levels } => {
                (0..levels.len()).map(Value::Category).collect()
            }
            ColumnKind::Numeric { min, max } => {
                if max > min && bins > 0 {
                    let width = (max - min) / bins as f64;
                    (0..bins)
                        .map(|b| Value::Number(min + width * (b as f64 + 0.5)))
                        .collect()
                } else {
                    vec![Value::Number(*min)]
                }
            }
        })
        .collect();

    let mut total: usize = 1;
    for values in &per_column {
        total = total.saturating_mul(values.len());
        if total > MAX_RECON_DOMAIN {
            return Err(AttackError::DomainTooLarge {
                got: total,
                cap: MAX_RECON_DOMAIN,
            });
        }
    }

    // odometer enumeration, last column fastest
    let mut records = Vec::with_capacity(total);
    let mut indices = vec![0usize; per_column.len()];
    loop {
        records.push(Record::new(
            indices
                .iter()
                .zip(&per_column)
                .map(|(&i, values)| values[i])
                .collect(),
        ));
        let mut pos = per_column.len();
        loop {
            if pos == 0 {
                return Ok(records);
            }
            pos -= 1;
            indices[pos] += 1;
            if indices[pos] < per_column[pos].len() {
                break;
            }
            indices[pos] = 0;
        }
    }
}
