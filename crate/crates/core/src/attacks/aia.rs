//! Attribute inference by nearest-neighbor imputation: given a record with
//! one hidden column, find the k synthetic rows closest over the known
//! columns and predict the hidden value from their majority level (ties to
//! the lowest index) or mean. The advantage is the accuracy gain over always
//! predicting the synthetic marginal mode/mean.

use super::{AttackError, AttackResult};
use crate::data::{
    by_distance_then_index, column_distance, ColumnKind, Dataset, DistanceConfig, Record, Value,
};

/// Normalized distance within which a numeric prediction counts as correct.
const NUMERIC_HIT_TOLERANCE: f64 = 0.05;

fn masked_distance(
    a: &Record,
    b: &Record,
    cfg: &DistanceConfig,
    skip: usize,
) -> f64 {
    let scales = cfg.scales();
    let mut total = 0.0;
    for (idx, scale) in scales.iter().enumerate() {
        if idx == skip {
            continue;
        }
        total += column_distance(scale, a.value(idx), b.value(idx));
    }
    total / (scales.len() - 1) as f64
}

fn predict_from(values: &[Value], kind: &ColumnKind) -> Value {
    match kind {
        ColumnKind::Categorical { levels } => {
            let mut counts = vec![0usize; levels.len()];
            for v in values {
                if let Value::Category(i) = v {
                    counts[*i] += 1;
                }
            }
            // majority, ties to the lowest level index
            let mode = counts
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
                .map(|(i, _)| i)
                .unwrap_or(0);
            Value::Category(mode)
        }
        ColumnKind::Numeric { .. } => {
            let sum: f64 = values
                .iter()
                .map(|v| match v {
                    Value::Number(x) => *x,
                    _ => unreachable!(),
                })
                .sum();
            Value::Number(sum / values.len() as f64)
        }
    }
}

/// Impute the hidden column of `partial` from its k nearest synthetic rows,
/// measured over the known columns only.
pub fn aia_knn(
    synth: &Dataset,
    partial: &Record,
    hidden_col: &str,
    k: usize,
    cfg: &DistanceConfig,
) -> Result<Value, AttackError> {
    let hidden_idx = synth
        .schema()
        .column_index(hidden_col)
        .ok_or_else(|| AttackError::UnknownColumn(hidden_col.to_string()))?;
    if synth.is_empty() {
        return Err(AttackError::EmptySynth);
    }
    if k == 0 || k > synth.n() {
        return Err(AttackError::Data(crate::data::DataError::KTooLarge {
            k,
            n: synth.n(),
        }));
    }
    if synth.schema().len() < 2 {
        return Err(AttackError::UnknownColumn(
            "need at least one known column besides the hidden one".into(),
        ));
    }
    synth.schema().validate_record(partial)?;

    let mut scored: Vec<(usize, f64)> = synth
        .rows()
        .iter()
        .enumerate()
        .map(|(i, row)| (i, masked_distance(partial, row, cfg, hidden_idx)))
        .collect();
    if k < scored.len() {
        scored.select_nth_unstable_by(k - 1, by_distance_then_index);
        scored.truncate(k);
    }
    scored.sort_unstable_by(by_distance_then_index);

    let neighbor_values: Vec<Value> = scored
        .iter()
        .map(|(i, _)| synth.rows()[*i].value(hidden_idx))
        .collect();
    Ok(predict_from(
        &neighbor_values,
        &synth.schema().columns()[hidden_idx].kind,
    ))
}

fn prediction_hits(
    predicted: Value,
    actual: Value,
    kind: &ColumnKind,
    cfg: &DistanceConfig,
    hidden_idx: usize,
) -> bool {
    match kind {
        ColumnKind::Categorical { .. } => predicted == actual,
        ColumnKind::Numeric { .. } => {
            let scale = &cfg.scales()[hidden_idx];
            column_distance(scale, predicted, actual) <= NUMERIC_HIT_TOLERANCE
        }
    }
}

/// Accuracy of [`aia_knn`] over the victim records against the marginal
/// baseline (always predicting the synthetic mode/mean of the hidden
/// column). `advantage = accuracy - baseline`.
pub fn aia_advantage(
    synth: &Dataset,
    victims: &[Record],
    hidden_col: &str,
    k: usize,
    cfg: &DistanceConfig,
) -> Result<AttackResult, AttackError> {
    if victims.is_empty() {
        return Err(AttackError::NoVictims);
    }
    let hidden_idx = synth
        .schema()
        .column_index(hidden_col)
        .ok_or_else(|| AttackError::UnknownColumn(hidden_col.to_string()))?;
    let kind = &synth.schema().columns()[hidden_idx].kind;

    let marginal: Vec<Value> = synth.rows().iter().map(|r| r.value(hidden_idx)).collect();
    let baseline_prediction = predict_from(&marginal, kind);

    let mut hits = 0usize;
    let mut baseline_hits = 0usize;
    for victim in victims {
        let actual = victim.value(hidden_idx);
        let predicted = aia_knn(synth, victim, hidden_col, k, cfg)?;
        if prediction_hits(predicted, actual, kind, cfg, hidden_idx) {
            hits += 1;
        }
        if prediction_hits(baseline_prediction, actual, kind, cfg, hidden_idx) {
            baseline_hits += 1;
        }
    }
    let accuracy = hits as f64 / victims.len() as f64;
    let baseline = baseline_hits as f64 / victims.len() as f64;
    Ok(AttackResult::Aia {
        accuracy,
        baseline,
        advantage: accuracy - baseline,
        k,
    })
}
