//! Differencing probe: a two-world distinguishing game against a
//! train-then-sample pipeline, scored as an empirical lower bound on the
//! privacy-loss parameter.
//!
//! Each round flips a fair coin between `D0 = base` and `D1 = base + target`,
//! runs the pipeline, and records a scalar observable: the number of
//! synthetic rows within Gower distance `radius` of the target. The first
//! half of the rounds calibrates a threshold rule; the second half is scored.
//! With one-sided Clopper-Pearson upper bounds `a` (false-positive rate) and
//! `b` (false-negative rate) at confidence `ci_level`, the bound is
//!
//! ```text
//! eps_hat = max( ln((1 - a) / b), ln((1 - b) / a), 0 )
//! ```
//!
//! which any epsilon-DP pipeline can only exceed with probability controlled
//! by the confidence level. Both worlds sample the same number of synthetic
//! rows (`|base| + 1`), so output size cannot serve as a side channel.

use rayon::prelude::*;
use statrs::distribution::{Beta, ContinuousCDF};

use super::{AttackError, AttackResult, DecisionRule, Direction, TargetRecord};
use crate::data::{proximity_count, Dataset, DistanceConfig, SeededRng};
use crate::generators::Pipeline;

#[derive(Clone, Debug)]
pub struct DifferencingConfig {
    /// Total rounds; at least 100 and even. Half calibrate, half evaluate.
    pub trials: usize,
    /// Proximity radius in normalized Gower units.
    pub radius: f64,
    /// Confidence for the error-rate upper bounds, in (0, 1).
    pub ci_level: f64,
    /// Distance normalization, fixed before the game starts.
    pub distance: DistanceConfig,
}

impl DifferencingConfig {
    pub fn new(trials: usize, distance: DistanceConfig) -> DifferencingConfig {
        DifferencingConfig {
            trials,
            radius: 0.05,
            ci_level: 0.95,
            distance,
        }
    }
}

/// One-sided Clopper-Pearson upper bound on a binomial proportion: the
/// `level` quantile of `Beta(x + 1, n - x)` for `x` failures in `n` trials,
/// pinned to 1 when `x = n` (or when there were no trials). The quantile is
/// found by bisection on the regularized incomplete beta to ~1e-12.
pub fn clopper_pearson_upper(failures: usize, n: usize, level: f64) -> f64 {
    if n == 0 || failures >= n {
        return 1.0;
    }
    let beta = Beta::new((failures + 1) as f64, (n - failures) as f64)
        .expect("valid Beta parameters");
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if beta.cdf(mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn calibrate(calibration: &[(bool, f64)]) -> Option<DecisionRule> {
    let mut values: Vec<f64> = calibration.iter().map(|(_, obs)| *obs).collect();
    values.sort_unstable_by(f64::total_cmp);
    values.dedup();
    if values.len() < 2 {
        return None; // all observables identical: nothing to threshold on
    }
    let mut best: Option<(usize, DecisionRule)> = None;
    for &threshold in &values {
        for direction in [Direction::Above, Direction::Below] {
            let rule = DecisionRule {
                threshold,
                direction,
            };
            let correct = calibration
                .iter()
                .filter(|(member, obs)| rule.predicts_member(*obs) == *member)
                .count();
            if best.as_ref().is_none_or(|(c, _)| correct > *c) {
                best = Some((correct, rule));
            }
        }
    }
    best.map(|(_, rule)| rule)
}

/// Run the distinguishing game and report the empirical-epsilon lower bound.
pub fn differencing_probe(
    pipeline: &dyn Pipeline,
    base: &Dataset,
    target: &TargetRecord,
    cfg: &DifferencingConfig,
    rng: &SeededRng,
) -> Result<AttackResult, AttackError> {
    if cfg.trials < 100 || !cfg.trials.is_multiple_of(2) {
        return Err(AttackError::TooFewTrials(cfg.trials));
    }
    if !(cfg.ci_level > 0.0 && cfg.ci_level < 1.0) {
        return Err(AttackError::BadConfidence(cfg.ci_level));
    }
    target.validate(base.schema())?;
    if base.contains(&target.record) {
        return Err(AttackError::TargetInBase);
    }

    let mut with_target_rows = base.rows().to_vec();
    with_target_rows.push(target.record.clone());
    let with_target = Dataset::new(base.schema().clone(), with_target_rows)?;
    let synth_size = base.n() + 1;

    let rounds: Vec<(bool, f64)> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| -> Result<(bool, f64), AttackError> {
            let mut round_rng = rng.substream(&format!("round{t}"));
            let member = round_rng.coin();
            let train = if member { &with_target } else { base };
            let synth = pipeline.generate_n(train, synth_size, &mut round_rng)?;
            let near = proximity_count(&target.record, &synth, cfg.radius, &cfg.distance)?;
            Ok((member, near as f64))
        })
        .collect::<Result<_, _>>()?;

    let (calibration, evaluation) = rounds.split_at(cfg.trials / 2);

    let degenerate_result = |seed| AttackResult::Differencing {
        eps_hat: 0.0,
        ci_level: cfg.ci_level,
        trials: cfg.trials,
        radius: cfg.radius,
        seed,
        degenerate: true,
    };

    let rule = match calibrate(calibration) {
        Some(rule) => rule,
        None => return Ok(degenerate_result(rng.seed())),
    };

    let mut n0 = 0usize;
    let mut n1 = 0usize;
    let mut false_positives = 0usize;
    let mut false_negatives = 0usize;
    for (member, obs) in evaluation {
        let guess = rule.predicts_member(*obs);
        if *member {
            n1 += 1;
            if !guess {
                false_negatives += 1;
            }
        } else {
            n0 += 1;
            if guess {
                false_positives += 1;
            }
        }
    }
    if n0 == 0 || n1 == 0 {
        return Ok(degenerate_result(rng.seed()));
    }

    let alpha = clopper_pearson_upper(false_positives, n0, cfg.ci_level);
    let beta = clopper_pearson_upper(false_negatives, n1, cfg.ci_level);
    let eps_hat = ((1.0 - alpha) / beta)
        .ln()
        .max(((1.0 - beta) / alpha).ln())
        .max(0.0);

    Ok(AttackResult::Differencing {
        eps_hat,
        ci_level: cfg.ci_level,
        trials: cfg.trials,
        radius: cfg.radius,
        seed: rng.seed(),
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gaussian2d_sample, Record, Value};
    use crate::generators::{ConstantPipeline, DpMarginalsPipeline, IdentityPipeline, LeakyPipeline, LeakySpec};
    use approx::assert_abs_diff_eq;

    fn outlier_target() -> TargetRecord {
        TargetRecord::new(
            Record::new(vec![Value::Number(4.0), Value::Number(4.0)]),
            "planted outlier",
        )
    }

    fn base_and_config(n: usize, trials: usize, seed: u64) -> (Dataset, DifferencingConfig) {
        let mut rng = SeededRng::with_stream(seed, "base");
        let base = gaussian2d_sample(n, &mut rng).unwrap();
        let target = outlier_target();
        let mut all_rows = base.rows().to_vec();
        all_rows.push(target.record.clone());
        let pool = Dataset::new(base.schema().clone(), all_rows).unwrap();
        let distance = DistanceConfig::from_datasets(&[&pool]).unwrap();
        (base, DifferencingConfig::new(trials, distance))
    }

    #[test]
    fn clopper_pearson_matches_closed_form_at_zero_failures() {
        // upper bound for 0 of n at level g solves (1 - u)^n = 1 - g
        for n in [10usize, 100, 250] {
            let u = clopper_pearson_upper(0, n, 0.95);
            let expected = 1.0 - (1.0f64 - 0.95).powf(1.0 / n as f64);
            assert_abs_diff_eq!(u, expected, epsilon = 1e-6);
        }
        assert_eq!(clopper_pearson_upper(5, 5, 0.95), 1.0);
        assert_eq!(clopper_pearson_upper(0, 0, 0.95), 1.0);
    }

    #[test]
    fn clopper_pearson_is_a_valid_upper_bound() {
        // monotone in failures and always above the point estimate
        let mut last = 0.0;
        for x in 0..=20 {
            let u = clopper_pearson_upper(x, 20, 0.95);
            assert!(u >= x as f64 / 20.0);
            assert!(u >= last);
            last = u;
        }
    }

    #[test]
    fn identity_leak_yields_a_large_bound() {
        let (base, cfg) = base_and_config(20, 1000, 41);
        let rng = SeededRng::with_stream(41, "probe");
        let result =
            differencing_probe(&IdentityPipeline, &base, &outlier_target(), &cfg, &rng).unwrap();
        match result {
            AttackResult::Differencing {
                eps_hat,
                degenerate,
                ..
            } => {
                assert!(!degenerate);
                assert!(eps_hat >= 2.0, "eps_hat {eps_hat} below 2");
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn constant_generator_is_degenerate_with_zero_bound() {
        let (base, cfg) = base_and_config(10, 200, 42);
        let mut out_rng = SeededRng::with_stream(42, "constant");
        let fixed = gaussian2d_sample(10, &mut out_rng).unwrap();
        let pipeline = ConstantPipeline { output: fixed };
        let rng = SeededRng::with_stream(42, "probe");
        let result =
            differencing_probe(&pipeline, &base, &outlier_target(), &cfg, &rng).unwrap();
        match result {
            AttackResult::Differencing {
                eps_hat,
                degenerate,
                ..
            } => {
                assert!(degenerate);
                assert_eq!(eps_hat, 0.0);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn dp_pipeline_stays_below_its_budget_at_a_pinned_seed() {
        let (base, cfg) = base_and_config(20, 1000, 43);
        let pipeline = DpMarginalsPipeline {
            bins: 10,
            epsilon: 0.5,
        };
        let rng = SeededRng::with_stream(43, "probe");
        let result =
            differencing_probe(&pipeline, &base, &outlier_target(), &cfg, &rng).unwrap();
        match result {
            AttackResult::Differencing { eps_hat, .. } => {
                assert!(eps_hat <= 0.5, "eps_hat {eps_hat} exceeded budget");
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn memorization_strength_orders_the_bound() {
        let (base, cfg) = base_and_config(20, 600, 44);
        let rng = SeededRng::with_stream(44, "probe");
        let mut bounds = Vec::new();
        for sigma in [0.5, 0.1, 0.0] {
            let pipeline = LeakyPipeline {
                spec: LeakySpec::Overfit {
                    resample_sigma: sigma,
                },
                test: None,
            };
            let result =
                differencing_probe(&pipeline, &base, &outlier_target(), &cfg, &rng).unwrap();
            bounds.push(result.score());
        }
        assert!(
            bounds[0] <= bounds[1] + 1e-12 && bounds[1] <= bounds[2] + 1e-12,
            "bounds not monotone: {bounds:?}"
        );
    }

    #[test]
    fn preconditions_are_enforced() {
        let (base, cfg) = base_and_config(10, 200, 45);
        let rng = SeededRng::new(45);

        let mut bad = cfg.clone();
        bad.trials = 99;
        assert!(matches!(
            differencing_probe(&IdentityPipeline, &base, &outlier_target(), &bad, &rng),
            Err(AttackError::TooFewTrials(99))
        ));

        let mut bad_ci = cfg.clone();
        bad_ci.ci_level = 1.0;
        assert!(matches!(
            differencing_probe(&IdentityPipeline, &base, &outlier_target(), &bad_ci, &rng),
            Err(AttackError::BadConfidence(_))
        ));

        let in_base = TargetRecord::new(base.rows()[0].clone(), "already there");
        assert!(matches!(
            differencing_probe(&IdentityPipeline, &base, &in_base, &cfg, &rng),
            Err(AttackError::TargetInBase)
        ));
    }

    #[test]
    fn probe_is_deterministic_given_seeds() {
        let (base, cfg) = base_and_config(10, 200, 46);
        let rng = SeededRng::with_stream(46, "probe");
        let a = differencing_probe(&IdentityPipeline, &base, &outlier_target(), &cfg, &rng)
            .unwrap();
        let b = differencing_probe(&IdentityPipeline, &base, &outlier_target(), &cfg, &rng)
            .unwrap();
        assert_eq!(a, b);
    }
}
