//! Shadow-model membership inference.
//!
//! The attacker builds shadow worlds from a reference dataset: half train the
//! pipeline on a subset plus the target, half on a subset of the same size
//! without it. Each world's synthetic output is reduced to a feature vector
//! (per-numeric-column mean and standard deviation, per-categorical-column
//! level frequencies, and the count of rows near the target), features are
//! standardized across worlds, and membership is scored by a nearest-centroid
//! classifier evaluated leave-one-out, with each feature weighted by the
//! class-mean gap seen in the fold. The reported AUC ranks the signed
//! distance score; accuracy uses the zero cut.

use rayon::prelude::*;

use super::{AttackError, AttackResult, TargetRecord};
use crate::data::{
    proximity_count, ColumnKind, Dataset, DistanceConfig, Record, SeededRng, Value,
};
use crate::generators::Pipeline;

#[derive(Clone, Debug)]
pub struct MiaConfig {
    /// Shadow world count; at least 20 and even (half member, half not).
    pub n_shadow: usize,
    /// Rows per shadow training set (member worlds use one fewer reference
    /// row plus the target, so both classes train on equally many rows).
    pub shadow_train_size: usize,
    /// Synthetic rows requested per world, as a multiple of the training
    /// size. Black-box access allows sampling at will, and more samples make
    /// memorized rows more likely to surface.
    pub synth_factor: usize,
    /// Radius for the target-proximity feature.
    pub radius: f64,
    pub distance: DistanceConfig,
}

impl MiaConfig {
    /// Defaults: shadow sets of half the reference, quadruple-size synthetic
    /// output, radius 0.05.
    pub fn new(n_shadow: usize, reference_size: usize, distance: DistanceConfig) -> MiaConfig {
        MiaConfig {
            n_shadow,
            shadow_train_size: (reference_size / 2).max(2),
            synth_factor: 4,
            radius: 0.05,
            distance,
        }
    }
}

/// Summary features of a synthetic dataset, relative to the current target:
/// per numeric column the mean and population standard deviation, per
/// categorical column the level frequencies, then the target-proximity
/// count. The length is fixed given the schema.
pub fn extract_features(
    synth: &Dataset,
    target: &Record,
    distance: &DistanceConfig,
    radius: f64,
) -> Result<Vec<f64>, AttackError> {
    if synth.is_empty() {
        return Err(AttackError::EmptySynth);
    }
    let n = synth.n() as f64;
    let mut features = Vec::new();
    for (idx, col) in synth.schema().columns().iter().enumerate() {
        match &col.kind {
            ColumnKind::Numeric { .. } => {
                let values: Vec<f64> = synth
                    .rows()
                    .iter()
                    .map(|r| match r.value(idx) {
                        Value::Number(v) => v,
                        _ => unreachable!("validated dataset"),
                    })
                    .collect();
                let mean = values.iter().sum::<f64>() / n;
                let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                features.push(mean);
                features.push(var.sqrt());
            }
            ColumnKind::Categorical { levels } => {
                let mut counts = vec![0.0; levels.len()];
                for row in synth.rows() {
                    if let Value::Category(i) = row.value(idx) {
                        counts[i] += 1.0;
                    }
                }
                features.extend(counts.into_iter().map(|c| c / n));
            }
        }
    }
    features.push(proximity_count(target, synth, radius, distance)? as f64);
    Ok(features)
}

fn weighted_euclidean(a: &[f64], b: &[f64], weights: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(weights)
        .map(|((x, y), w)| (w * (x - y)).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Mann-Whitney AUC of `scores` against boolean labels, ties counted half.
fn auc_from_scores(scores: &[f64], labels: &[bool]) -> f64 {
    let mut pairs = 0.0;
    let mut wins = 0.0;
    for (&si, &li) in scores.iter().zip(labels) {
        if !li {
            continue;
        }
        for (&sj, &lj) in scores.iter().zip(labels) {
            if lj {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    if pairs == 0.0 {
        0.5
    } else {
        wins / pairs
    }
}

/// Run the shadow-model membership game and report AUC and accuracy.
pub fn mia_shadow(
    pipeline: &dyn Pipeline,
    reference: &Dataset,
    target: &TargetRecord,
    cfg: &MiaConfig,
    rng: &SeededRng,
) -> Result<AttackResult, AttackError> {
    if cfg.n_shadow < 20 || !cfg.n_shadow.is_multiple_of(2) {
        return Err(AttackError::BadShadowCount(cfg.n_shadow));
    }
    target.validate(reference.schema())?;

    // shadow training subsets are drawn from the reference without the target
    let pool: Vec<Record> = reference
        .rows()
        .iter()
        .filter(|r| **r != target.record)
        .cloned()
        .collect();
    if pool.len() < 2 * cfg.shadow_train_size {
        return Err(AttackError::ReferenceTooSmall {
            need: 2 * cfg.shadow_train_size,
            got: pool.len(),
        });
    }

    let labels: Vec<bool> = (0..cfg.n_shadow).map(|i| i % 2 == 0).collect();
    let features: Vec<Vec<f64>> = (0..cfg.n_shadow)
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>, AttackError> {
            let mut world_rng = rng.substream(&format!("world{i}"));
            let member = i % 2 == 0;
            let take = if member {
                cfg.shadow_train_size - 1
            } else {
                cfg.shadow_train_size
            };
            let mut order: Vec<usize> = (0..pool.len()).collect();
            world_rng.shuffle(&mut order);
            let mut rows: Vec<Record> =
                order[..take].iter().map(|&j| pool[j].clone()).collect();
            if member {
                rows.push(target.record.clone());
            }
            let train = Dataset::new(reference.schema().clone(), rows)?;
            let synth = pipeline.generate_n(
                &train,
                cfg.shadow_train_size * cfg.synth_factor.max(1),
                &mut world_rng,
            )?;
            extract_features(&synth, &target.record, &cfg.distance, cfg.radius)
        })
        .collect::<Result<_, _>>()?;

    // per-feature standardization over all worlds; flat features drop out
    let dims = features[0].len();
    let n = features.len() as f64;
    let mut standardized = vec![vec![0.0; dims]; features.len()];
    for d in 0..dims {
        let mean = features.iter().map(|f| f[d]).sum::<f64>() / n;
        let var = features.iter().map(|f| (f[d] - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        if sd > 0.0 {
            for (z, f) in standardized.iter_mut().zip(&features) {
                z[d] = (f[d] - mean) / sd;
            }
        }
    }

    // leave-one-out nearest-centroid: score = distance to the non-member
    // centroid minus distance to the member centroid. Each feature is
    // weighted by the class-mean gap observed in the fold, so features that
    // carry no membership signal do not dilute the ones that do.
    let mut scores = vec![0.0; standardized.len()];
    let mut correct = 0usize;
    for i in 0..standardized.len() {
        let mut member_centroid = vec![0.0; dims];
        let mut other_centroid = vec![0.0; dims];
        let mut member_count = 0.0;
        let mut other_count = 0.0;
        for (j, z) in standardized.iter().enumerate() {
            if j == i {
                continue;
            }
            if labels[j] {
                for (c, v) in member_centroid.iter_mut().zip(z) {
                    *c += v;
                }
                member_count += 1.0;
            } else {
                for (c, v) in other_centroid.iter_mut().zip(z) {
                    *c += v;
                }
                other_count += 1.0;
            }
        }
        for c in member_centroid.iter_mut() {
            *c /= member_count;
        }
        for c in other_centroid.iter_mut() {
            *c /= other_count;
        }
        let weights: Vec<f64> = member_centroid
            .iter()
            .zip(&other_centroid)
            .map(|(m, o)| (m - o).abs())
            .collect();
        let score = weighted_euclidean(&standardized[i], &other_centroid, &weights)
            - weighted_euclidean(&standardized[i], &member_centroid, &weights);
        scores[i] = score;
        if (score > 0.0) == labels[i] {
            correct += 1;
        }
    }

    Ok(AttackResult::Mia {
        auc: auc_from_scores(&scores, &labels),
        accuracy: correct as f64 / standardized.len() as f64,
        n_shadow: cfg.n_shadow,
        radius: cfg.radius,
        seed: rng.seed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gaussian2d_sample, Column, TabularSchema};
    use crate::generators::{ConstantPipeline, LeakyPipeline, LeakySpec};
    use approx::assert_abs_diff_eq;

    fn outlier_target() -> TargetRecord {
        TargetRecord::new(
            Record::new(vec![Value::Number(4.0), Value::Number(4.0)]),
            "planted outlier",
        )
    }

    fn feature_fixture() -> (Dataset, DistanceConfig) {
        let schema = TabularSchema::new(vec![Column::numeric("x", 0.0, 1.0)]).unwrap();
        let d = Dataset::new(
            schema.clone(),
            vec![
                Record::new(vec![Value::Number(0.0)]),
                Record::new(vec![Value::Number(1.0)]),
            ],
        )
        .unwrap();
        let cfg = DistanceConfig::from_schema(&schema);
        (d, cfg)
    }

    #[test]
    fn features_use_population_convention() {
        let (d, cfg) = feature_fixture();
        let target = Record::new(vec![Value::Number(0.0)]);
        let f = extract_features(&d, &target, &cfg, 0.05).unwrap();
        // mean 0.5, population sd 0.5, one row within radius of the target
        assert_abs_diff_eq!(f[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(f[1], 0.5, epsilon = 1e-12);
        assert_eq!(f[2], 1.0);
    }

    #[test]
    fn features_of_constant_data_have_zero_spread() {
        let schema = TabularSchema::new(vec![
            Column::numeric("x", 0.0, 1.0),
            Column::categorical("c", &["a", "b"]),
        ])
        .unwrap();
        let row = Record::new(vec![Value::Number(0.25), Value::Category(1)]);
        let d = Dataset::new(schema.clone(), vec![row.clone(); 5]).unwrap();
        let cfg = DistanceConfig::from_schema(&schema);
        let f = extract_features(&d, &row, &cfg, 0.05).unwrap();
        assert_eq!(f, vec![0.25, 0.0, 0.0, 1.0, 5.0]);
        // identical datasets give identical vectors
        let f2 = extract_features(&d.clone(), &row, &cfg, 0.05).unwrap();
        assert_eq!(f, f2);
    }

    #[test]
    fn overfit_pipeline_is_separable() {
        let mut data_rng = SeededRng::with_stream(61, "reference");
        let reference = gaussian2d_sample(100, &mut data_rng).unwrap();
        let target = outlier_target();
        let mut pool_rows = reference.rows().to_vec();
        pool_rows.push(target.record.clone());
        let pool = Dataset::new(reference.schema().clone(), pool_rows).unwrap();
        let distance = DistanceConfig::from_datasets(&[&pool]).unwrap();
        let cfg = MiaConfig::new(40, reference.n(), distance);
        let pipeline = LeakyPipeline {
            spec: LeakySpec::Overfit { resample_sigma: 0.0 },
            test: None,
        };
        let rng = SeededRng::with_stream(61, "mia");
        let result = mia_shadow(&pipeline, &reference, &target, &cfg, &rng).unwrap();
        match result {
            AttackResult::Mia { auc, .. } => {
                assert!(auc >= 0.95, "auc {auc} below separability floor");
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn constant_pipeline_scores_at_chance() {
        let mut data_rng = SeededRng::with_stream(62, "reference");
        let reference = gaussian2d_sample(60, &mut data_rng).unwrap();
        let fixed = gaussian2d_sample(30, &mut data_rng).unwrap();
        let distance = DistanceConfig::from_datasets(&[&reference]).unwrap();
        let cfg = MiaConfig::new(40, reference.n(), distance);
        let pipeline = ConstantPipeline { output: fixed };
        let rng = SeededRng::with_stream(62, "mia");
        let result = mia_shadow(&pipeline, &reference, &outlier_target(), &cfg, &rng).unwrap();
        match result {
            AttackResult::Mia { auc, accuracy, .. } => {
                // every feature vector is identical: exact coin-flip scores
                assert_eq!(auc, 0.5);
                assert_eq!(accuracy, 0.5);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn shadow_worlds_are_stable_under_more_worlds() {
        // world i depends only on (seed, i): growing n_shadow replays the
        // same early worlds
        let mut data_rng = SeededRng::with_stream(63, "reference");
        let reference = gaussian2d_sample(50, &mut data_rng).unwrap();
        let distance = DistanceConfig::from_datasets(&[&reference]).unwrap();
        let pipeline = LeakyPipeline {
            spec: LeakySpec::Overfit { resample_sigma: 0.1 },
            test: None,
        };
        let rng = SeededRng::with_stream(63, "mia");
        let cfg20 = MiaConfig::new(20, reference.n(), distance.clone());
        let cfg40 = MiaConfig::new(40, reference.n(), distance);
        let a = mia_shadow(&pipeline, &reference, &outlier_target(), &cfg20, &rng).unwrap();
        let b = mia_shadow(&pipeline, &reference, &outlier_target(), &cfg40, &rng).unwrap();
        let a2 = mia_shadow(&pipeline, &reference, &outlier_target(), &cfg20, &rng).unwrap();
        assert_eq!(a, a2);
        match (a, b) {
            (AttackResult::Mia { n_shadow: n_a, .. }, AttackResult::Mia { n_shadow: n_b, .. }) => {
                assert_eq!((n_a, n_b), (20, 40));
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn shadow_count_and_reference_preconditions() {
        let mut data_rng = SeededRng::with_stream(64, "reference");
        let reference = gaussian2d_sample(10, &mut data_rng).unwrap();
        let distance = DistanceConfig::from_datasets(&[&reference]).unwrap();
        let pipeline = LeakyPipeline {
            spec: LeakySpec::Overfit { resample_sigma: 0.0 },
            test: None,
        };
        let rng = SeededRng::new(64);

        let mut cfg = MiaConfig::new(21, reference.n(), distance.clone());
        assert!(matches!(
            mia_shadow(&pipeline, &reference, &outlier_target(), &cfg, &rng),
            Err(AttackError::BadShadowCount(21))
        ));
        cfg = MiaConfig::new(20, reference.n(), distance);
        cfg.shadow_train_size = 50;
        assert!(matches!(
            mia_shadow(&pipeline, &reference, &outlier_target(), &cfg, &rng),
            Err(AttackError::ReferenceTooSmall { .. })
        ));
    }
}
