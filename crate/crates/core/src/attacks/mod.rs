//! The motivated-intruder suite: one attack per identifiability risk.
//!
//! - [`differencing_probe`] distinguishes pipelines trained with vs. without
//!   a target record and converts the distinguisher's error rates into an
//!   empirical lower bound on the privacy-loss parameter (singling out).
//! - [`mia_shadow`] trains shadow pipelines on datasets that include or
//!   exclude the target and classifies membership from summary features of
//!   the synthetic outputs (linkability).
//! - [`aia_knn`] / [`aia_advantage`] impute a hidden attribute from the
//!   synthetic neighbors of a partially known record and measure the gain
//!   over the marginal baseline (inference).
//! - [`recon_metric_oracle`] enumerates a candidate domain against the
//!   metrics oracle and declares train members from the identical-match
//!   share alone (overall reconstruction).
//!
//! Every attack is a deterministic function of its inputs and seeds: trials
//! and shadow worlds draw from per-index sub-streams, so results do not
//! depend on scheduling.

mod aia;
mod differencing;
mod mia;
mod recon;

pub use aia::{aia_advantage, aia_knn};
pub use differencing::{clopper_pearson_upper, differencing_probe, DifferencingConfig};
pub use mia::{extract_features, mia_shadow, MiaConfig};
pub use recon::{enumerate_domain, recon_match_rate, recon_metric_oracle, ReconDeclared, MAX_RECON_DOMAIN};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{DataError, Record, TabularSchema};
use crate::generators::GeneratorError;
use crate::sbpm::SbpmError;

#[derive(Debug, Error)]
pub enum AttackError {
    #[error("trials must be at least 100 and even, got {0}")]
    TooFewTrials(usize),
    #[error("target record is already present in the base dataset")]
    TargetInBase,
    #[error("confidence level {0} must lie in (0, 1)")]
    BadConfidence(f64),
    #[error("shadow count must be at least 20 and even, got {0}")]
    BadShadowCount(usize),
    #[error("reference dataset too small: need at least {need} rows, got {got}")]
    ReferenceTooSmall { need: usize, got: usize },
    #[error("unknown column: {0}")]
    UnknownColumn(String),
    #[error("synthetic dataset is empty")]
    EmptySynth,
    #[error("no victim records supplied")]
    NoVictims,
    #[error("candidate domain has {got} records, cap is {cap}")]
    DomainTooLarge { got: usize, cap: usize },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Sbpm(#[from] SbpmError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
}

/// The record an adversary focuses on, with a label for reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetRecord {
    pub record: Record,
    pub label: String,
}

impl TargetRecord {
    pub fn new(record: Record, label: &str) -> TargetRecord {
        TargetRecord {
            record,
            label: label.to_string(),
        }
    }

    pub fn validate(&self, schema: &TabularSchema) -> Result<(), DataError> {
        schema.validate_record(&self.record)
    }
}

/// Which side of the threshold the rule accepts as "target present".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Above,
    Below,
}

/// A calibrated accept region over the scalar observable: `Above` guesses
/// membership when the observable is `>= threshold`, `Below` when it is
/// `<= threshold`. Calibration always runs on trials disjoint from the
/// evaluation trials.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionRule {
    pub threshold: f64,
    pub direction: Direction,
}

impl DecisionRule {
    pub fn predicts_member(&self, observable: f64) -> bool {
        match self.direction {
            Direction::Above => observable >= self.threshold,
            Direction::Below => observable <= self.threshold,
        }
    }
}

/// Per-attack scores, with enough configuration embedded to reproduce the
/// run. Serializes with an `attack` tag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "attack", rename_all = "snake_case")]
pub enum AttackResult {
    Differencing {
        eps_hat: f64,
        ci_level: f64,
        trials: usize,
        radius: f64,
        seed: u64,
        /// Set when all calibration observables were identical (no usable
        /// rule); the bound is then reported as 0.
        degenerate: bool,
    },
    Mia {
        auc: f64,
        accuracy: f64,
        n_shadow: usize,
        radius: f64,
        seed: u64,
    },
    Aia {
        accuracy: f64,
        baseline: f64,
        advantage: f64,
        k: usize,
    },
    Recon {
        match_rate: f64,
        oracle_queries: u64,
    },
}

impl AttackResult {
    /// The scalar an audit compares against its flagging threshold.
    pub fn score(&self) -> f64 {
        match self {
            AttackResult::Differencing { eps_hat, .. } => *eps_hat,
            AttackResult::Mia { auc, .. } => *auc,
            AttackResult::Aia { advantage, .. } => *advantage,
            AttackResult::Recon { match_rate, .. } => *match_rate,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AttackResult::Differencing { .. } => "differencing",
            AttackResult::Mia { .. } => "membership_inference",
            AttackResult::Aia { .. } => "attribute_inference",
            AttackResult::Recon { .. } => "reconstruction",
        }
    }
}
