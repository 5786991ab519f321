//! Pinned worst-case fixtures exercised by the CLI `basecase` command and
//! the acceptance suite. They are deliberately extreme: small datasets whose
//! privacy behavior is fully analyzable, serving as unit tests for the
//! mechanisms themselves.

use crate::data::{gaussian2d_sample, DataError, Dataset, Record, SeededRng, Value};
use crate::generators::{generate_leaky, GeneratorError, LeakySpec};

/// Default perturbation scale for the outlier-leak fixture.
pub const OUTLIER_PERTURB_SIGMA: f64 = 0.05;
/// Default number of leaked outliers.
pub const OUTLIER_LEAK_K: usize = 3;
/// Default number of filler copies.
pub const OUTLIER_FILLER_COUNT: usize = 70;

/// Train/test/synthetic triple plus the recipe that produced the synthetic
/// side.
#[derive(Clone, Debug)]
pub struct LeakScenario {
    pub train: Dataset,
    pub test: Dataset,
    pub synth: Dataset,
    pub spec: LeakySpec,
}

/// Ten train and ten test records sampled from a 2-d standard normal, from
/// disjoint sub-streams of the seed.
pub fn gaussian_pair(seed: u64) -> Result<(Dataset, Dataset), DataError> {
    let rng = SeededRng::with_stream(seed, "scenario");
    let train = gaussian2d_sample(10, &mut rng.substream("train"))?;
    let test = gaussian2d_sample(10, &mut rng.substream("test"))?;
    Ok((train, test))
}

/// Synthetic data that is an exact replica of the held-out test data: every
/// similarity test passes while half of the personal records are published
/// verbatim.
pub fn replica_leak(seed: u64) -> Result<LeakScenario, GeneratorError> {
    let (train, test) = gaussian_pair(seed)?;
    let spec = LeakySpec::CopyTest;
    let mut rng = SeededRng::with_stream(seed, "scenario/synth");
    let synth = generate_leaky(&spec, &train, Some(&test), &mut rng)?;
    Ok(LeakScenario {
        train,
        test,
        synth,
        spec,
    })
}

/// Synthetic data exposing the three train records farthest from the
/// centroid (lightly perturbed) behind seventy copies of the origin: the
/// distance distributions still pass every similarity test.
pub fn outlier_leak(seed: u64) -> Result<LeakScenario, GeneratorError> {
    let (train, test) = gaussian_pair(seed)?;
    let spec = LeakySpec::OutlierLeak {
        k: OUTLIER_LEAK_K,
        perturb_sigma: OUTLIER_PERTURB_SIGMA,
        filler_count: OUTLIER_FILLER_COUNT,
        filler_value: Record::new(vec![Value::Number(0.0), Value::Number(0.0)]),
    };
    let mut rng = SeededRng::with_stream(seed, "scenario/synth");
    let synth = generate_leaky(&spec, &train, Some(&test), &mut rng)?;
    Ok(LeakScenario {
        train,
        test,
        synth,
        spec,
    })
}

/// Worst-case differencing fixture: a base dataset of one ordinary record
/// and a far-out target. Any DP pipeline must keep the two training worlds
/// (base alone vs. base plus target) indistinguishable up to its budget even
/// here.
pub struct WorstCasePair {
    pub base: Dataset,
    pub target: Record,
}

pub fn worst_case_pair() -> Result<WorstCasePair, DataError> {
    // reuse the 2-d gaussian schema so ranges and bins are well-defined
    let mut rng = SeededRng::with_stream(0, "scenario/schema-probe");
    let probe = gaussian2d_sample(1, &mut rng)?;
    let schema = probe.schema().clone();
    let other = Record::new(vec![Value::Number(0.0), Value::Number(0.0)]);
    let target = Record::new(vec![Value::Number(4.0), Value::Number(4.0)]);
    let base = Dataset::new(schema, vec![other])?;
    Ok(WorstCasePair { base, target })
}
