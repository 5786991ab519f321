//! End-to-end tests of the binary: exit codes, determinism, and the
//! basecase expectations.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sdaudit(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdaudit"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

/// Build the replica-leak fixture files in `dir/fix` and return the paths.
fn fixture(dir: &Path) -> (String, String, String, String) {
    let out = sdaudit(&["basecase", "6b", "--out-dir", "fix"], dir);
    assert!(out.status.success(), "fixture build failed: {}", stderr(&out));
    (
        "fix/schema.json".into(),
        "fix/train.csv".into(),
        "fix/test.csv".into(),
        "fix/synth.csv".into(),
    )
}

#[test]
fn generate_is_deterministic_and_writes_model() {
    let dir = tempfile::tempdir().unwrap();
    let (schema, train, _, _) = fixture(dir.path());
    for out_name in ["a.csv", "b.csv"] {
        let out = sdaudit(
            &[
                "generate", "--schema", &schema, "--train", &train, "--pipeline", "dp",
                "--epsilon", "1.0", "--seed", "7", "--out", out_name,
            ],
            dir.path(),
        );
        assert!(out.status.success(), "{}", stderr(&out));
        // the accountant ledger is printed
        assert!(stdout(&out).contains("\"ledger\""));
    }
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    let b = fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b, "same seed must give identical synthetic files");
    let model_a = fs::read(dir.path().join("a.model.json")).unwrap();
    let model_b = fs::read(dir.path().join("b.model.json")).unwrap();
    assert_eq!(model_a, model_b);
}

#[test]
fn generate_rejects_nonpositive_epsilon_as_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let (schema, train, _, _) = fixture(dir.path());
    let out = sdaudit(
        &[
            "generate", "--schema", &schema, "--train", &train, "--pipeline", "dp",
            "--epsilon", "0", "--seed", "7", "--out", "x.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("epsilon must be positive"));
}

#[test]
fn metrics_exit_codes_encode_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let (schema, train, test, synth) = fixture(dir.path());

    // replica of test passes all three tests
    let ok = sdaudit(
        &[
            "metrics", "--schema", &schema, "--train", &train, "--test", &test,
            "--synth", &synth,
        ],
        dir.path(),
    );
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    assert!(stdout(&ok).contains("\"all_pass\": true"));

    // a straight train copy fails the identical-match test
    let fail = sdaudit(
        &[
            "metrics", "--schema", &schema, "--train", &train, "--test", &test,
            "--synth", &train,
        ],
        dir.path(),
    );
    assert_eq!(fail.status.code(), Some(3));

    // missing required flag is a usage error
    let usage = sdaudit(
        &["metrics", "--schema", &schema, "--train", &train, "--test", &test],
        dir.path(),
    );
    assert_eq!(usage.status.code(), Some(2));

    // missing file is a data error
    let data = sdaudit(
        &[
            "metrics", "--schema", &schema, "--train", &train, "--test", &test,
            "--synth", "absent.csv",
        ],
        dir.path(),
    );
    assert_eq!(data.status.code(), Some(1));
}

#[test]
fn audit_runs_are_byte_identical_and_render_markdown() {
    let dir = tempfile::tempdir().unwrap();
    let (schema, train, test, _) = fixture(dir.path());
    let common = [
        "audit", "--schema", schema.as_str(), "--train", train.as_str(), "--test",
        test.as_str(), "--pipeline", "copy-test", "--seed", "3", "--trials", "100",
        "--n-shadow", "20",
    ];
    for out_name in ["r1.json", "r2.json"] {
        let mut args: Vec<&str> = common.to_vec();
        args.extend(["--out", out_name]);
        let out = sdaudit(&args, dir.path());
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let r1 = fs::read(dir.path().join("r1.json")).unwrap();
    let r2 = fs::read(dir.path().join("r2.json")).unwrap();
    assert_eq!(r1, r2, "audit reports must be byte-identical");
    assert!(String::from_utf8_lossy(&r1).contains("\"report_version\": 1"));

    let mut md_args: Vec<&str> = common.to_vec();
    md_args.extend(["--format", "markdown"]);
    let md = sdaudit(&md_args, dir.path());
    assert!(md.status.success());
    let text = stdout(&md);
    let rows = text
        .lines()
        .filter(|l| l.starts_with("| ") && !l.starts_with("| risk"))
        .count();
    assert_eq!(rows, 4, "markdown table must have one row per risk");
}

#[test]
fn replica_basecase_reports_the_contradiction() {
    let dir = tempfile::tempdir().unwrap();
    let out = sdaudit(&["basecase", "6b", "--out-dir", "case"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("all_pass: true"));
    assert!(text.contains("attack flagged: true"));
    assert!(text.contains("overall"), "overall risk must be flagged: {text}");
    for file in ["schema.json", "train.csv", "test.csv", "synth.csv", "report.json"] {
        assert!(
            dir.path().join("case").join(file).exists(),
            "missing fixture file {file}"
        );
    }
}

#[test]
fn outlier_basecase_reports_exposed_outliers() {
    let dir = tempfile::tempdir().unwrap();
    let out = sdaudit(&["basecase", "6c", "--out-dir", "case"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("all_pass: true"));
    assert!(text.contains("outlier leaks within perturbation radius: 3/3"));
}

#[test]
fn worst_case_basecase_respects_the_budget() {
    let dir = tempfile::tempdir().unwrap();
    let out = sdaudit(
        &["basecase", "6a", "--epsilon", "0.5", "--out-dir", "case"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("theoretical epsilon: 0.5"));
    let eps_hat: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("eps_hat: "))
        .expect("eps_hat line")
        .trim()
        .parse()
        .unwrap();
    assert!(eps_hat <= 0.5, "eps_hat {eps_hat} above budget");
}

#[test]
fn attack_subcommand_emits_tagged_json() {
    let dir = tempfile::tempdir().unwrap();
    let (schema, train, test, synth) = fixture(dir.path());

    let recon = sdaudit(
        &[
            "attack", "--kind", "recon", "--schema", &schema, "--train", &train,
            "--test", &test, "--domain-bins", "5",
        ],
        dir.path(),
    );
    assert!(recon.status.success(), "{}", stderr(&recon));
    let value: serde_json::Value = serde_json::from_str(&stdout(&recon)).unwrap();
    assert_eq!(value["attack"], "recon");
    assert_eq!(value["oracle_queries"], 25);

    let aia = sdaudit(
        &[
            "attack", "--kind", "aia", "--schema", &schema, "--train", &train,
            "--synth", &synth, "--k", "1",
        ],
        dir.path(),
    );
    assert!(aia.status.success(), "{}", stderr(&aia));
    let value: serde_json::Value = serde_json::from_str(&stdout(&aia)).unwrap();
    assert_eq!(value["attack"], "aia");

    // mia without --test is a usage error
    let mia = sdaudit(
        &["attack", "--kind", "mia", "--schema", &schema, "--train", &train],
        dir.path(),
    );
    assert_eq!(mia.status.code(), Some(2));
}
