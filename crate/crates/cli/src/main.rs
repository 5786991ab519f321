//! Command-line surface for generation, metrics, attacks, full audits, and
//! one-command reproduction of the pinned worst-case scenarios.
//!
//! Exit codes are a stable contract:
//! 0 success, 1 data error, 2 usage error, 3 metrics failed,
//! 4 basecase expectation failed.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sdaudit_core::attacks::{
    aia_advantage, differencing_probe, enumerate_domain, mia_shadow, recon_metric_oracle,
    AttackResult, DifferencingConfig, MiaConfig, TargetRecord,
};
use sdaudit_core::audit::{
    render_report, run_audit, AuditConfig, PipelineSpec, ReportFormat, Summary,
};
use sdaudit_core::data::{
    load_csv, load_schema, save_csv, save_schema, Dataset, DistanceConfig, Record, SeededRng,
    Value,
};
use sdaudit_core::generators::{
    fit_marginals, fit_marginals_dp, outlier_indices, sample_model, DpMarginalsPipeline,
    LeakyPipeline, LeakySpec, MarginalsPipeline, Pipeline, PrivacyAccountant, PrivacyBudget,
};
use sdaudit_core::sbpm::{evaluate_sbpm, MetricsOracle};
use sdaudit_core::scenarios;

#[derive(Parser)]
#[command(
    name = "sdaudit",
    version,
    about = "Privacy audits for tabular synthetic data: similarity metrics, DP generators, and a motivated-intruder attack suite"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a generator on train data and write a synthetic CSV plus model JSON
    Generate(GenerateArgs),
    /// Compute the three similarity-based privacy metrics (exit 3 on failure)
    Metrics(MetricsArgs),
    /// Run a single attack and print its result as JSON
    Attack(AttackArgs),
    /// Full audit: metrics, all four attacks, and a risk report
    Audit(AuditArgs),
    /// Build a pinned worst-case fixture, run it, and verify the expected outcome
    Basecase(BasecaseArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PipelineArg {
    /// Non-private independent marginals
    Marginals,
    /// Laplace-noised marginals (requires --epsilon)
    Dp,
    /// Leaky fixture: republish the test data
    CopyTest,
    /// Leaky fixture: expose perturbed train outliers behind filler rows
    OutlierLeak,
    /// Leaky fixture: resample train rows with optional noise
    Overfit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum AttackKindArg {
    Differencing,
    Mia,
    Aia,
    Recon,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Markdown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BasecaseId {
    /// Two-record worst case: DP budget must hold even here
    #[value(name = "6a")]
    WorstCasePair,
    /// Synthetic data replicates the held-out test data
    #[value(name = "6b")]
    ReplicaLeak,
    /// Synthetic data exposes perturbed train outliers behind filler rows
    #[value(name = "6c")]
    OutlierLeak,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    train: PathBuf,
    /// Needed by the copy-test pipeline
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PipelineArg::Marginals)]
    pipeline: PipelineArg,
    #[arg(long, default_value_t = 10)]
    bins: usize,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    resample_sigma: f64,
    /// Output rows (defaults to the train row count)
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Model JSON path (defaults to the output path with a .model.json suffix)
    #[arg(long)]
    model_out: Option<PathBuf>,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long)]
    synth: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long, value_enum)]
    kind: AttackKindArg,
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    train: PathBuf,
    /// Required by mia and recon (reference/oracle data)
    #[arg(long)]
    test: Option<PathBuf>,
    /// Required by aia (the release under attack)
    #[arg(long)]
    synth: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PipelineArg::Marginals)]
    pipeline: PipelineArg,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 10)]
    bins: usize,
    #[arg(long, default_value_t = 0.05)]
    resample_sigma: f64,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 40)]
    n_shadow: usize,
    #[arg(long, default_value_t = 0.05)]
    radius: f64,
    #[arg(long, default_value_t = 0.95)]
    ci_level: f64,
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Hidden column for aia (defaults to the last schema column)
    #[arg(long)]
    hidden_col: Option<String>,
    #[arg(long, default_value_t = 10)]
    domain_bins: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, value_enum, default_value_t = PipelineArg::Marginals)]
    pipeline: PipelineArg,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 10)]
    bins: usize,
    #[arg(long, default_value_t = 0.05)]
    resample_sigma: f64,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 200)]
    n_shadow: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BasecaseArgs {
    #[arg(value_enum)]
    fig: BasecaseId,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Privacy budget for the worst-case pair probe
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Directory for fixture inputs and reports (defaults to basecase-<id>)
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
    MetricsFailed,
    ExpectationFailed(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Data(msg) => write!(f, "{msg}"),
            CliError::MetricsFailed => write!(f, "privacy metrics failed"),
            CliError::ExpectationFailed(msg) => write!(f, "expectation failed: {msg}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 1,
            CliError::MetricsFailed => 3,
            CliError::ExpectationFailed(_) => 4,
        }
    }
}

fn data_err(e: impl fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Metrics(args) => cmd_metrics(args),
        Command::Attack(args) => cmd_attack(args),
        Command::Audit(args) => cmd_audit(args),
        Command::Basecase(args) => cmd_basecase(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn positive_epsilon(epsilon: Option<f64>) -> Result<f64, CliError> {
    match epsilon {
        Some(e) if e > 0.0 && e.is_finite() => Ok(e),
        Some(_) => Err(CliError::Usage("epsilon must be positive".into())),
        None => Err(CliError::Usage(
            "--epsilon is required for the dp pipeline".into(),
        )),
    }
}

fn default_filler(schema: &sdaudit_core::data::TabularSchema) -> Record {
    Record::new(
        schema
            .columns()
            .iter()
            .map(|c| match &c.kind {
                sdaudit_core::data::ColumnKind::Numeric { .. } => Value::Number(0.0),
                sdaudit_core::data::ColumnKind::Categorical { .. } => Value::Category(0),
            })
            .collect(),
    )
}

fn leaky_spec_for(
    arg: PipelineArg,
    schema: &sdaudit_core::data::TabularSchema,
    resample_sigma: f64,
) -> Option<LeakySpec> {
    match arg {
        PipelineArg::CopyTest => Some(LeakySpec::CopyTest),
        PipelineArg::OutlierLeak => Some(LeakySpec::OutlierLeak {
            k: scenarios::OUTLIER_LEAK_K,
            perturb_sigma: scenarios::OUTLIER_PERTURB_SIGMA,
            filler_count: scenarios::OUTLIER_FILLER_COUNT,
            filler_value: default_filler(schema),
        }),
        PipelineArg::Overfit => Some(LeakySpec::Overfit { resample_sigma }),
        _ => None,
    }
}

fn pipeline_spec(
    arg: PipelineArg,
    epsilon: Option<f64>,
    bins: usize,
    resample_sigma: f64,
    schema: &sdaudit_core::data::TabularSchema,
) -> Result<PipelineSpec, CliError> {
    Ok(match arg {
        PipelineArg::Marginals => PipelineSpec::NonPrivateMarginals { bins },
        PipelineArg::Dp => PipelineSpec::DpMarginals {
            epsilon: positive_epsilon(epsilon)?,
            bins,
        },
        leaky => PipelineSpec::Leaky {
            spec: leaky_spec_for(leaky, schema, resample_sigma)
                .expect("leaky arg variants are covered"),
        },
    })
}

fn write_or_print(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(data_err),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn model_out_path(out: &Path, explicit: Option<PathBuf>) -> PathBuf {
    explicit.unwrap_or_else(|| out.with_extension("model.json"))
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let schema = load_schema(&args.schema).map_err(data_err)?;
    let train = load_csv(&args.train, &schema).map_err(data_err)?;
    let n_out = args.n.unwrap_or(train.n());
    let mut rng = SeededRng::with_stream(args.seed, "generate");
    let mut accountant = PrivacyAccountant::new();

    let (synth, model) = match args.pipeline {
        PipelineArg::Marginals => {
            let model = fit_marginals(&train, args.bins).map_err(data_err)?;
            let synth = sample_model(&model, n_out, &mut rng).map_err(data_err)?;
            (synth, Some(model))
        }
        PipelineArg::Dp => {
            let epsilon = positive_epsilon(args.epsilon)?;
            let budget = PrivacyBudget::pure(epsilon).map_err(data_err)?;
            let model = fit_marginals_dp(&train, args.bins, budget, &mut accountant, &mut rng)
                .map_err(data_err)?;
            let synth = sample_model(&model, n_out, &mut rng).map_err(data_err)?;
            (synth, Some(model))
        }
        leaky => {
            let spec = leaky_spec_for(leaky, &schema, args.resample_sigma)
                .expect("leaky arg variants are covered");
            if leaky == PipelineArg::CopyTest && args.test.is_none() {
                return Err(CliError::Usage(
                    "--test is required for the copy-test pipeline".into(),
                ));
            }
            let test = match &args.test {
                Some(path) => Some(load_csv(path, &schema).map_err(data_err)?),
                None => None,
            };
            let synth =
                sdaudit_core::generators::generate_leaky(&spec, &train, test.as_ref(), &mut rng)
                    .map_err(data_err)?;
            (synth, None)
        }
    };

    save_csv(&synth, &args.out).map_err(data_err)?;
    if let Some(model) = &model {
        let path = model_out_path(&args.out, args.model_out.clone());
        fs::write(&path, model.to_json()).map_err(data_err)?;
    }
    println!("{}", accountant.to_json());
    Ok(())
}

fn cmd_metrics(args: MetricsArgs) -> Result<(), CliError> {
    let schema = load_schema(&args.schema).map_err(data_err)?;
    let train = load_csv(&args.train, &schema).map_err(data_err)?;
    let test = load_csv(&args.test, &schema).map_err(data_err)?;
    let synth = load_csv(&args.synth, &schema).map_err(data_err)?;
    let cfg = DistanceConfig::from_datasets(&[&train, &test]).map_err(data_err)?;
    let report = evaluate_sbpm(&train, &test, &synth, &cfg).map_err(data_err)?;

    let mut text = serde_json::to_string_pretty(&report).map_err(data_err)?;
    text.push('\n');
    write_or_print(&text, args.out.as_deref())?;
    if args.out.is_some() {
        println!("all_pass: {}", report.all_pass);
    }
    if report.all_pass {
        Ok(())
    } else {
        Err(CliError::MetricsFailed)
    }
}

/// The train record the attack focuses on: the row farthest from the
/// column-wise centroid, with the rest of the train data as the base.
fn split_target(train: &Dataset) -> Result<(Dataset, TargetRecord), CliError> {
    let idx = outlier_indices(train, 1)
        .map_err(data_err)?
        .first()
        .copied()
        .ok_or_else(|| CliError::Data("train data is empty".into()))?;
    let target = TargetRecord::new(
        train.rows()[idx].clone(),
        &format!("train row {idx} (max centroid distance)"),
    );
    let base_rows: Vec<Record> = train
        .rows()
        .iter()
        .filter(|r| **r != target.record)
        .cloned()
        .collect();
    let base = Dataset::new(train.schema().clone(), base_rows).map_err(data_err)?;
    Ok((base, target))
}

fn build_pipeline(
    arg: PipelineArg,
    epsilon: Option<f64>,
    bins: usize,
    resample_sigma: f64,
    schema: &sdaudit_core::data::TabularSchema,
    test: Option<Dataset>,
) -> Result<Box<dyn Pipeline>, CliError> {
    Ok(match arg {
        PipelineArg::Marginals => Box::new(MarginalsPipeline { bins }),
        PipelineArg::Dp => Box::new(DpMarginalsPipeline {
            bins,
            epsilon: positive_epsilon(epsilon)?,
        }),
        leaky => Box::new(LeakyPipeline {
            spec: leaky_spec_for(leaky, schema, resample_sigma)
                .expect("leaky arg variants are covered"),
            test,
        }),
    })
}

fn cmd_attack(args: AttackArgs) -> Result<(), CliError> {
    let schema = load_schema(&args.schema).map_err(data_err)?;
    let train = load_csv(&args.train, &schema).map_err(data_err)?;
    let test = match &args.test {
        Some(path) => Some(load_csv(path, &schema).map_err(data_err)?),
        None => None,
    };
    let rng = SeededRng::with_stream(args.seed, "attack");

    let result: AttackResult = match args.kind {
        AttackKindArg::Differencing => {
            let (base, target) = split_target(&train)?;
            let mut parts: Vec<&Dataset> = vec![&train];
            if let Some(t) = &test {
                parts.push(t);
            }
            let distance = DistanceConfig::from_datasets(&parts).map_err(data_err)?;
            let pipeline = build_pipeline(
                args.pipeline,
                args.epsilon,
                args.bins,
                args.resample_sigma,
                &schema,
                test.clone(),
            )?;
            let cfg = DifferencingConfig {
                trials: args.trials,
                radius: args.radius,
                ci_level: args.ci_level,
                distance,
            };
            differencing_probe(pipeline.as_ref(), &base, &target, &cfg, &rng).map_err(data_err)?
        }
        AttackKindArg::Mia => {
            let test = test
                .clone()
                .ok_or_else(|| CliError::Usage("--test is required for mia".into()))?;
            let (base, target) = split_target(&train)?;
            let reference_rows: Vec<Record> =
                base.rows().iter().chain(test.rows()).cloned().collect();
            let reference = Dataset::new(schema.clone(), reference_rows).map_err(data_err)?;
            let distance =
                DistanceConfig::from_datasets(&[&train, &test]).map_err(data_err)?;
            let pipeline = build_pipeline(
                args.pipeline,
                args.epsilon,
                args.bins,
                args.resample_sigma,
                &schema,
                Some(test),
            )?;
            let mut cfg = MiaConfig::new(args.n_shadow, reference.n(), distance);
            cfg.radius = args.radius;
            mia_shadow(pipeline.as_ref(), &reference, &target, &cfg, &rng).map_err(data_err)?
        }
        AttackKindArg::Aia => {
            let synth_path = args
                .synth
                .as_ref()
                .ok_or_else(|| CliError::Usage("--synth is required for aia".into()))?;
            let synth = load_csv(synth_path, &schema).map_err(data_err)?;
            let hidden = args.hidden_col.clone().unwrap_or_else(|| {
                schema.columns().last().expect("non-empty schema").name.clone()
            });
            let mut parts: Vec<&Dataset> = vec![&train];
            if let Some(t) = &test {
                parts.push(t);
            }
            let distance = DistanceConfig::from_datasets(&parts).map_err(data_err)?;
            let victims: Vec<Record> = train.rows().iter().take(200).cloned().collect();
            aia_advantage(&synth, &victims, &hidden, args.k, &distance).map_err(data_err)?
        }
        AttackKindArg::Recon => {
            let test = test
                .clone()
                .ok_or_else(|| CliError::Usage("--test is required for recon".into()))?;
            let distance =
                DistanceConfig::from_datasets(&[&train, &test]).map_err(data_err)?;
            let oracle =
                MetricsOracle::new(train.clone(), test, distance).map_err(data_err)?;
            let domain = enumerate_domain(&schema, args.domain_bins).map_err(data_err)?;
            let declared = recon_metric_oracle(&oracle, &domain).map_err(data_err)?;
            declared.into_result(&train)
        }
    };

    let mut text = serde_json::to_string_pretty(&result).map_err(data_err)?;
    text.push('\n');
    write_or_print(&text, args.out.as_deref())
}

fn cmd_audit(args: AuditArgs) -> Result<(), CliError> {
    let schema = load_schema(&args.schema).map_err(data_err)?;
    let train = load_csv(&args.train, &schema).map_err(data_err)?;
    let test = load_csv(&args.test, &schema).map_err(data_err)?;
    let spec = pipeline_spec(
        args.pipeline,
        args.epsilon,
        args.bins,
        args.resample_sigma,
        &schema,
    )?;
    let mut cfg = AuditConfig::new(spec, args.seed);
    cfg.trials = args.trials;
    cfg.n_shadow = args.n_shadow;
    let report = run_audit(&train, &test, &cfg).map_err(data_err)?;
    let format = match args.format {
        FormatArg::Json => ReportFormat::Json,
        FormatArg::Markdown => ReportFormat::Markdown,
    };
    write_or_print(&render_report(&report, format), args.out.as_deref())
}

fn prepare_out_dir(args: &BasecaseArgs, label: &str) -> Result<PathBuf, CliError> {
    let dir = args
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("basecase-{label}")));
    fs::create_dir_all(&dir).map_err(data_err)?;
    Ok(dir)
}

fn write_fixture(
    dir: &Path,
    train: &Dataset,
    test: &Dataset,
    synth: Option<&Dataset>,
) -> Result<(), CliError> {
    save_schema(train.schema(), dir.join("schema.json")).map_err(data_err)?;
    save_csv(train, dir.join("train.csv")).map_err(data_err)?;
    save_csv(test, dir.join("test.csv")).map_err(data_err)?;
    if let Some(synth) = synth {
        save_csv(synth, dir.join("synth.csv")).map_err(data_err)?;
    }
    Ok(())
}

fn run_leak_basecase(args: &BasecaseArgs, label: &str) -> Result<(), CliError> {
    let scenario = match label {
        "6b" => scenarios::replica_leak(args.seed).map_err(data_err)?,
        "6c" => scenarios::outlier_leak(args.seed).map_err(data_err)?,
        _ => unreachable!(),
    };
    let dir = prepare_out_dir(args, label)?;
    write_fixture(&dir, &scenario.train, &scenario.test, Some(&scenario.synth))?;

    let distance = DistanceConfig::from_datasets(&[&scenario.train, &scenario.test])
        .map_err(data_err)?;
    let metrics = evaluate_sbpm(&scenario.train, &scenario.test, &scenario.synth, &distance)
        .map_err(data_err)?;
    println!("all_pass: {}", metrics.all_pass);

    if label == "6c" {
        let outliers =
            outlier_indices(&scenario.train, scenarios::OUTLIER_LEAK_K).map_err(data_err)?;
        let mut exposed = 0usize;
        for &idx in &outliers {
            let victim = &scenario.train.rows()[idx];
            let nearest = scenario
                .synth
                .rows()
                .iter()
                .map(|row| sdaudit_core::data::distance(row, victim, &distance).unwrap_or(1.0))
                .fold(f64::INFINITY, f64::min);
            if nearest <= 0.1 {
                exposed += 1;
            }
        }
        println!(
            "outlier leaks within perturbation radius: {exposed}/{}",
            outliers.len()
        );
        if exposed != outliers.len() {
            return Err(CliError::ExpectationFailed(format!(
                "only {exposed}/{} outliers exposed",
                outliers.len()
            )));
        }
    }

    let mut cfg = AuditConfig::new(
        PipelineSpec::Leaky {
            spec: scenario.spec.clone(),
        },
        args.seed,
    );
    cfg.trials = 200;
    cfg.n_shadow = 40;
    let report = run_audit(&scenario.train, &scenario.test, &cfg).map_err(data_err)?;
    fs::write(dir.join("report.json"), render_report(&report, ReportFormat::Json))
        .map_err(data_err)?;

    let flagged = matches!(report.summary, Summary::Flagged { .. });
    let flagged_risks: Vec<&str> = report
        .verdicts
        .iter()
        .filter(|v| v.flagged)
        .map(|v| v.risk.label())
        .collect();
    println!("attack flagged: {flagged}");
    println!("flagged risks: [{}]", flagged_risks.join(", "));
    println!("fixture written to {}", dir.display());

    if !metrics.all_pass {
        return Err(CliError::ExpectationFailed(
            "similarity metrics were expected to pass".into(),
        ));
    }
    if label == "6b" && !flagged_risks.contains(&"overall") {
        return Err(CliError::ExpectationFailed(
            "the test-replica leak was expected to flag the overall risk".into(),
        ));
    }
    if !flagged {
        return Err(CliError::ExpectationFailed(
            "an attack was expected to flag the leak".into(),
        ));
    }
    Ok(())
}

fn run_worst_case_basecase(args: &BasecaseArgs) -> Result<(), CliError> {
    if args.epsilon <= 0.0 || !args.epsilon.is_finite() {
        return Err(CliError::Usage("epsilon must be positive".into()));
    }
    let pair = scenarios::worst_case_pair().map_err(data_err)?;
    let dir = prepare_out_dir(args, "6a")?;

    // the two-record train data: the target outlier plus one ordinary record
    let mut train_rows = vec![pair.target.clone()];
    train_rows.extend(pair.base.rows().iter().cloned());
    let train =
        Dataset::new(pair.base.schema().clone(), train_rows).map_err(data_err)?;
    write_fixture(&dir, &train, &pair.base, None)?;

    let target = TargetRecord::new(pair.target.clone(), "worst-case outlier");
    let distance = DistanceConfig::from_datasets(&[&train]).map_err(data_err)?;
    let cfg = DifferencingConfig {
        trials: args.trials,
        radius: 0.05,
        ci_level: 0.95,
        distance,
    };
    let pipeline = DpMarginalsPipeline {
        bins: 10,
        epsilon: args.epsilon,
    };
    let rng = SeededRng::with_stream(args.seed, "basecase");
    let result =
        differencing_probe(&pipeline, &pair.base, &target, &cfg, &rng).map_err(data_err)?;

    let mut text = serde_json::to_string_pretty(&result).map_err(data_err)?;
    text.push('\n');
    fs::write(dir.join("report.json"), &text).map_err(data_err)?;

    let eps_hat = result.score();
    println!("theoretical epsilon: {}", args.epsilon);
    println!("eps_hat: {eps_hat}");
    println!("fixture written to {}", dir.display());
    if eps_hat > args.epsilon {
        return Err(CliError::ExpectationFailed(format!(
            "eps_hat {eps_hat} exceeded the theoretical budget {}",
            args.epsilon
        )));
    }
    Ok(())
}

fn cmd_basecase(args: BasecaseArgs) -> Result<(), CliError> {
    match args.fig {
        BasecaseId::WorstCasePair => run_worst_case_basecase(&args),
        BasecaseId::ReplicaLeak => run_leak_basecase(&args, "6b"),
        BasecaseId::OutlierLeak => run_leak_basecase(&args, "6c"),
    }
}
