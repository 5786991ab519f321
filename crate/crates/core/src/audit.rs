//! One-shot audit: generate synthetic data with the configured pipeline,
//! compute the similarity metrics, run all four attacks, and map each attack
//! onto its identifiability risk:
//!
//! | risk         | attack               |
//! |--------------|----------------------|
//! | singling out | differencing         |
//! | linkability  | membership inference |
//! | inference    | attribute inference  |
//! | overall      | reconstruction       |
//!
//! The metric pass/fail flags and the attack verdicts are computed
//! independently, so a report can show `all_pass = true` next to flagged
//! verdicts — on the leaky fixtures it must, which is the audit's whole
//! point: passing similarity tests is not evidence of privacy.

use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use thiserror::Error;

use crate::attacks::{
    aia_advantage, differencing_probe, enumerate_domain, mia_shadow, recon_metric_oracle,
    AttackError, AttackResult, DifferencingConfig, MiaConfig, TargetRecord, MAX_RECON_DOMAIN,
};
use crate::data::{row_key, DataError, Dataset, DistanceConfig, Record, SeededRng};
use crate::generators::{
    fit_marginals, fit_marginals_dp, generate_leaky, outlier_indices, sample_model,
    DpMarginalsPipeline, GeneratorError, LeakyPipeline, LeakySpec, MarginalsPipeline, Pipeline,
    PrivacyAccountant, PrivacyBudget,
};
use crate::sbpm::{evaluate_sbpm, MetricsOracle, SbpmError, SbpmReport};

/// Fixed caveat attached to every singling-out verdict: surviving the
/// differencing probe does not rule the risk out, because rare attribute
/// combinations in released synthetic records can still isolate individuals.
pub const SINGLING_OUT_CAVEAT: &str = "Surviving the differencing probe does not rule out \
singling-out: rare attribute combinations in released synthetic records can still isolate \
individuals.";

#[derive(Debug, Error)]
pub enum AuditError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Sbpm(#[from] SbpmError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Attack(#[from] AttackError),
    #[error("audit precondition failed: {0}")]
    Precondition(String),
}

/// Which generation pipeline the audit exercises.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "pipeline", rename_all = "snake_case")]
pub enum PipelineSpec {
    NonPrivateMarginals { bins: usize },
    DpMarginals { epsilon: f64, bins: usize },
    Leaky { spec: LeakySpec },
}

impl PipelineSpec {
    fn build(&self, test: &Dataset) -> Box<dyn Pipeline> {
        match self {
            PipelineSpec::NonPrivateMarginals { bins } => {
                Box::new(MarginalsPipeline { bins: *bins })
            }
            PipelineSpec::DpMarginals { epsilon, bins } => Box::new(DpMarginalsPipeline {
                bins: *bins,
                epsilon: *epsilon,
            }),
            PipelineSpec::Leaky { spec } => Box::new(LeakyPipeline {
                spec: spec.clone(),
                test: Some(test.clone()),
            }),
        }
    }
}

/// Flagging thresholds; every report echoes them. A verdict flags when its
/// attack score strictly exceeds the threshold, so the reconstruction
/// default of 0 flags any reconstruction at all.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub eps_flag: f64,
    pub mia_auc_flag: f64,
    pub aia_adv_flag: f64,
    pub recon_flag: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            eps_flag: 1.0,
            mia_auc_flag: 0.6,
            aia_adv_flag: 0.1,
            recon_flag: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub pipeline: PipelineSpec,
    pub thresholds: Thresholds,
    /// Differencing rounds (half calibrate, half evaluate).
    pub trials: usize,
    /// Shadow worlds for membership inference.
    pub n_shadow: usize,
    /// Proximity radius in normalized Gower units.
    pub radius: f64,
    /// Confidence level for the differencing error bounds.
    pub ci_level: f64,
    /// Neighbors used by attribute inference.
    pub aia_k: usize,
    /// Hidden column for attribute inference; defaults to the last column.
    pub aia_hidden_col: Option<String>,
    /// Cap on attribute-inference victims (train-row prefix).
    pub max_victims: usize,
    /// Bins per numeric column when discretizing the reconstruction domain.
    pub domain_bins: usize,
    pub seed: u64,
}

impl AuditConfig {
    pub fn new(pipeline: PipelineSpec, seed: u64) -> AuditConfig {
        AuditConfig {
            pipeline,
            thresholds: Thresholds::default(),
            trials: 200,
            n_shadow: 200,
            radius: 0.05,
            ci_level: 0.95,
            aia_k: 5,
            aia_hidden_col: None,
            max_victims: 200,
            domain_bins: 10,
            seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskKind {
    SinglingOut,
    Linkability,
    Inference,
    Overall,
}

impl RiskKind {
    pub fn label(&self) -> &'static str {
        match self {
            RiskKind::SinglingOut => "singling out",
            RiskKind::Linkability => "linkability",
            RiskKind::Inference => "inference",
            RiskKind::Overall => "overall",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskVerdict {
    pub risk: RiskKind,
    pub attack: AttackResult,
    pub flagged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caveat: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AccountantSnapshot {
    pub entries: Vec<crate::generators::LedgerEntry>,
    pub total_epsilon: f64,
    pub total_delta: f64,
}

impl AccountantSnapshot {
    fn capture(accountant: &PrivacyAccountant) -> AccountantSnapshot {
        AccountantSnapshot {
            entries: accountant.ledger().to_vec(),
            total_epsilon: accountant.total_epsilon(),
            total_delta: accountant.total_delta(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Summary {
    AllClear,
    Flagged { risks: Vec<RiskKind> },
}

/// The full audit output. Serialization is canonical: fixed field order and
/// deterministic contents, so identical inputs give byte-identical JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub report_version: u32,
    pub config: AuditConfig,
    pub sbpm: SbpmReport,
    pub verdicts: Vec<RiskVerdict>,
    pub accountant: AccountantSnapshot,
    pub summary: Summary,
}

/// The train row to center the membership attacks on: the record farthest
/// from the column-wise centroid, i.e. the individual most exposed by
/// memorization.
fn pick_target(train: &Dataset) -> Result<TargetRecord, AuditError> {
    let idx = outlier_indices(train, 1)?
        .first()
        .copied()
        .ok_or_else(|| AuditError::Precondition("empty train data".into()))?;
    Ok(TargetRecord::new(
        train.rows()[idx].clone(),
        &format!("train row {idx} (max centroid distance)"),
    ))
}

fn dedup_rows<I: Iterator<Item = Record>>(rows: I) -> Vec<Record> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for row in rows {
        if seen.insert(row_key(&row)) {
            out.push(row);
        }
    }
    out
}

/// Overall reconstruction score for an audit: oracle-declared records plus a
/// linkage check of the released synthetic rows, both counted against the
/// distinct sensitive pool (train and held-out test records). Exact copies
/// in the release are reconstructions the intruder already holds in hand.
fn score_reconstruction(
    declared: &[Record],
    synth: &Dataset,
    sensitive: &[Record],
    oracle_queries: u64,
) -> AttackResult {
    let sensitive_keys: HashSet<Vec<u64>> = sensitive.iter().map(row_key).collect();
    let mut recovered: HashSet<Vec<u64>> = HashSet::new();
    for record in declared.iter().chain(synth.rows()) {
        let key = row_key(record);
        if sensitive_keys.contains(&key) {
            recovered.insert(key);
        }
    }
    let match_rate = if sensitive_keys.is_empty() {
        0.0
    } else {
        recovered.len() as f64 / sensitive_keys.len() as f64
    };
    AttackResult::Recon {
        match_rate,
        oracle_queries,
    }
}

/// Run the full audit. All randomness flows from `cfg.seed`; the four
/// attacks use disjoint sub-streams, and the report is a pure function of
/// `(train, test, cfg)`.
pub fn run_audit(
    train: &Dataset,
    test: &Dataset,
    cfg: &AuditConfig,
) -> Result<RiskReport, AuditError> {
    if train.schema() != test.schema() {
        return Err(AuditError::Precondition(
            "train and test schemas differ".into(),
        ));
    }
    if train.n() < 3 {
        return Err(AuditError::Precondition(
            "need at least 3 train rows to hold out a target".into(),
        ));
    }
    let rng = SeededRng::with_stream(cfg.seed, "audit");
    let distance = DistanceConfig::from_datasets(&[train, test])?;

    // released synthetic data; only the DP path charges the accountant
    let mut accountant = PrivacyAccountant::new();
    let mut generate_rng = rng.substream("generate");
    let synth = match &cfg.pipeline {
        PipelineSpec::NonPrivateMarginals { bins } => {
            let model = fit_marginals(train, *bins)?;
            sample_model(&model, train.n(), &mut generate_rng)?
        }
        PipelineSpec::DpMarginals { epsilon, bins } => {
            let budget = PrivacyBudget::pure(*epsilon)?;
            let model =
                fit_marginals_dp(train, *bins, budget, &mut accountant, &mut generate_rng)?;
            sample_model(&model, train.n(), &mut generate_rng)?
        }
        PipelineSpec::Leaky { spec } => generate_leaky(spec, train, Some(test), &mut generate_rng)?,
    };

    let sbpm = evaluate_sbpm(train, test, &synth, &distance)?;

    let pipeline = cfg.pipeline.build(test);
    let target = pick_target(train)?;

    // singling out: differencing over base = train without the target row
    let base_rows: Vec<Record> = train
        .rows()
        .iter()
        .filter(|r| **r != target.record)
        .cloned()
        .collect();
    let base = Dataset::new(train.schema().clone(), base_rows)?;
    let differencing_cfg = DifferencingConfig {
        trials: cfg.trials,
        radius: cfg.radius,
        ci_level: cfg.ci_level,
        distance: distance.clone(),
    };
    let differencing = differencing_probe(
        pipeline.as_ref(),
        &base,
        &target,
        &differencing_cfg,
        &rng.substream("differencing"),
    )?;

    // linkability: shadow-model membership inference over a same-distribution
    // reference pool (train without the target, plus the held-out test rows)
    let reference_rows: Vec<Record> = base.rows().iter().chain(test.rows()).cloned().collect();
    let reference = Dataset::new(train.schema().clone(), reference_rows)?;
    let mut mia_cfg = MiaConfig::new(cfg.n_shadow, reference.n(), distance.clone());
    mia_cfg.radius = cfg.radius;
    let mia = mia_shadow(
        pipeline.as_ref(),
        &reference,
        &target,
        &mia_cfg,
        &rng.substream("mia"),
    )?;

    // inference: attribute inference over a train-row victim prefix
    let hidden_col = match &cfg.aia_hidden_col {
        Some(name) => name.clone(),
        None => train
            .schema()
            .columns()
            .last()
            .expect("schema is non-empty")
            .name
            .clone(),
    };
    let victims: Vec<Record> = train
        .rows()
        .iter()
        .take(cfg.max_victims.max(1))
        .cloned()
        .collect();
    let aia = aia_advantage(&synth, &victims, &hidden_col, cfg.aia_k, &distance)?;

    // overall: reconstruction through the metrics oracle over the schema
    // grid plus the released synthetic rows (the intruder holds those), then
    // a linkage check of the release against the sensitive pool
    let oracle = MetricsOracle::new(train.clone(), test.clone(), distance.clone())?;
    let mut domain = enumerate_domain(train.schema(), cfg.domain_bins)?;
    let mut domain_keys: HashSet<Vec<u64>> = domain.iter().map(row_key).collect();
    for row in dedup_rows(synth.rows().iter().cloned()) {
        if domain.len() >= MAX_RECON_DOMAIN {
            break;
        }
        if domain_keys.insert(row_key(&row)) {
            domain.push(row);
        }
    }
    let declared = recon_metric_oracle(&oracle, &domain)?;
    let sensitive = dedup_rows(train.rows().iter().chain(test.rows()).cloned());
    let recon = score_reconstruction(
        &declared.declared,
        &synth,
        &sensitive,
        declared.oracle_queries,
    );

    let thresholds = cfg.thresholds;
    let verdicts = vec![
        RiskVerdict {
            risk: RiskKind::SinglingOut,
            flagged: differencing.score() > thresholds.eps_flag,
            attack: differencing,
            caveat: Some(SINGLING_OUT_CAVEAT.to_string()),
        },
        RiskVerdict {
            risk: RiskKind::Linkability,
            flagged: mia.score() > thresholds.mia_auc_flag,
            attack: mia,
            caveat: None,
        },
        RiskVerdict {
            risk: RiskKind::Inference,
            flagged: aia.score() > thresholds.aia_adv_flag,
            attack: aia,
            caveat: None,
        },
        RiskVerdict {
            risk: RiskKind::Overall,
            flagged: recon.score() > thresholds.recon_flag,
            attack: recon,
            caveat: None,
        },
    ];

    let flagged_risks: Vec<RiskKind> = verdicts
        .iter()
        .filter(|v| v.flagged)
        .map(|v| v.risk)
        .collect();
    let summary = if flagged_risks.is_empty() {
        Summary::AllClear
    } else {
        Summary::Flagged {
            risks: flagged_risks,
        }
    };

    Ok(RiskReport {
        report_version: 1,
        config: cfg.clone(),
        sbpm,
        verdicts,
        accountant: AccountantSnapshot::capture(&accountant),
        summary,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Markdown,
}

fn threshold_for(verdict: &RiskVerdict, thresholds: &Thresholds) -> f64 {
    match verdict.risk {
        RiskKind::SinglingOut => thresholds.eps_flag,
        RiskKind::Linkability => thresholds.mia_auc_flag,
        RiskKind::Inference => thresholds.aia_adv_flag,
        RiskKind::Overall => thresholds.recon_flag,
    }
}

/// Render a report: canonical JSON (stable key order, deterministic bytes)
/// or a human-readable summary table suitable for compliance documentation.
pub fn render_report(report: &RiskReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut out =
                serde_json::to_string_pretty(report).expect("report serializes");
            out.push('\n');
            out
        }
        ReportFormat::Markdown => {
            let mut out = String::new();
            out.push_str("# Privacy audit report\n\n");
            out.push_str(&format!("- report version: {}\n", report.report_version));
            out.push_str(&format!("- seed: {}\n", report.config.seed));
            out.push_str(&format!(
                "- similarity metrics all_pass: {}\n",
                report.sbpm.all_pass
            ));
            out.push_str(&format!(
                "- metric values: ims {:.4}/{:.4}, dcr_p5 {:.4}/{:.4}, nndr_p5 {:.4}/{:.4} (synth/test)\n",
                report.sbpm.ims_synth,
                report.sbpm.ims_test,
                report.sbpm.dcr_p5_synth,
                report.sbpm.dcr_p5_test,
                report.sbpm.nndr_p5_synth,
                report.sbpm.nndr_p5_test,
            ));
            out.push_str(&format!(
                "- privacy spend: epsilon {} (delta {})\n\n",
                report.accountant.total_epsilon, report.accountant.total_delta
            ));
            out.push_str("| risk | attack | score | threshold | flagged |\n");
            out.push_str("|------|--------|-------|-----------|---------|\n");
            for verdict in &report.verdicts {
                out.push_str(&format!(
                    "| {} | {} | {:.4} | {:.4} | {} |\n",
                    verdict.risk.label(),
                    verdict.attack.name(),
                    verdict.attack.score(),
                    threshold_for(verdict, &report.config.thresholds),
                    if verdict.flagged { "yes" } else { "no" },
                ));
            }
            out.push('\n');
            for verdict in &report.verdicts {
                if let Some(caveat) = &verdict.caveat {
                    out.push_str(&format!("- caveat ({}): {}\n", verdict.risk.label(), caveat));
                }
            }
            match &report.summary {
                Summary::AllClear => out.push_str("\nsummary: all clear\n"),
                Summary::Flagged { risks } => {
                    let names: Vec<&str> = risks.iter().map(|r| r.label()).collect();
                    out.push_str(&format!("\nsummary: flagged ({})\n", names.join(", ")));
                }
            }
            out
        }
    }
}
