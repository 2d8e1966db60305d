//! End-to-end tests of the command-line interface: report content, input
//! validation with line numbers, exit codes, manifest verification, and
//! fixture provenance.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use armshrink::scenario::{beta_cluster_truth, normal_effect_truth, ArmTruth};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_armshrink"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn armshrink")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).unwrap()
}

fn write_tmp(dir: &tempfile::TempDir, name: &str, contents: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn estimate_seven_arm_fixture_matches_known_shrinkage() {
    let out = run(&[
        "estimate",
        "--input",
        fixture("seven_arms.csv").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let arms = report["arms"].as_array().unwrap();
    assert_eq!(arms.len(), 7);
    let expected = [2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5];
    for (arm, want) in arms.iter().zip(expected) {
        let estimate = arm["estimate"].as_f64().unwrap();
        assert!((estimate - want).abs() < 1e-9, "{estimate} vs {want}");
        assert!((arm["xi"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    }
    assert_eq!(report["pooled"]["k"], 7);
    assert!((report["pooled"]["grand_mean"].as_f64().unwrap() - 4.0).abs() < 1e-9);
    assert!(report["manifest"]["inputs"][0]["sha256"]
        .as_str()
        .unwrap()
        .len()
        == 64);
}

#[test]
fn estimate_csv_format_embeds_manifest_comment() {
    let out = run(&[
        "estimate",
        "--input",
        fixture("seven_arms.csv").to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# manifest: "));
    assert_eq!(
        lines.next().unwrap(),
        "arm_id,n,mean,std_err,xi,estimate,variance,ci_low,ci_high"
    );
    assert_eq!(text.lines().count(), 2 + 7);
}

#[test]
fn naive_variance_on_pooled_arms_warns() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_tmp(
        &dir,
        "flat.csv",
        "arm_id,n,mean,std_err\na,100,2,1\nb,100,2,1\nc,100,2,1\nd,100,2,1\n",
    );
    let out = run(&[
        "estimate",
        "--input",
        input.to_str().unwrap(),
        "--variance",
        "naive",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let warnings = report["warnings"].as_array().unwrap();
    assert_eq!(warnings.len(), 1);
    assert!(warnings[0].as_str().unwrap().contains("understates"));
    for arm in report["arms"].as_array().unwrap() {
        assert_eq!(arm["variance"].as_f64().unwrap(), 0.0);
        assert!(arm["var_full"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn mixed_schema_rows_fail_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_tmp(
        &dir,
        "mixed.csv",
        "arm_id,n,mean,std_err\na,100,0.5,0.01\nb,100,7\nc,100,0.4,0.02\n",
    );
    let out = run(&["estimate", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn single_arm_and_bad_counts_are_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let single = write_tmp(&dir, "one.csv", "arm_id,n,successes\na,100,3\n");
    let out = run(&["estimate", "--input", single.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("at least 2"), "{}", stderr(&out));

    let overflow = write_tmp(
        &dir,
        "over.csv",
        "arm_id,n,successes\na,100,3\nb,100,101\n",
    );
    let out = run(&["estimate", "--input", overflow.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    let dupes = write_tmp(&dir, "dupes.csv", "arm_id,n,successes\na,100,3\na,100,4\n");
    let out = run(&["estimate", "--input", dupes.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("duplicate"), "{}", stderr(&out));
}

#[test]
fn three_arms_need_the_alternative_prior() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_tmp(
        &dir,
        "three.csv",
        "arm_id,n,mean,std_err\na,100,1,0.5\nb,100,2,0.5\nc,100,3,0.5\n",
    );
    let out = run(&["estimate", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("KMinus1"), "{}", stderr(&out));

    let out = run(&[
        "estimate",
        "--input",
        input.to_str().unwrap(),
        "--dof",
        "k-1",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn bandit_scenario_means_must_be_probabilities() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_tmp(
        &dir,
        "bad.csv",
        "arm_id,n,mean,std_err\na,100,1.5,0.1\nb,100,0.5,0.1\n",
    );
    let out = run(&[
        "bandit-sim",
        "--scenario",
        scenario.to_str().unwrap(),
        "--batches",
        "2",
        "--batch-size",
        "10",
        "--draws",
        "50",
        "--replications",
        "2",
        "--out-dir",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("outside [0, 1]"), "{}", stderr(&out));
}

#[test]
fn verify_accepts_fresh_reports_and_catches_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let scenario_src = std::fs::read_to_string(fixture("normal_16.csv")).unwrap();
    let scenario = write_tmp(&dir, "scenario.csv", &scenario_src);
    let out_dir = dir.path().join("study");
    let out = run(&[
        "static-sim",
        "--scenario",
        scenario.to_str().unwrap(),
        "--replications",
        "20",
        "--seed",
        "4",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));

    let report = out_dir.join("report.json");
    let out = run(&["verify", report.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("verified 1 input(s)"));

    std::fs::write(&scenario, scenario_src + "arm_xx,10,0.1,0.01\n").unwrap();
    let out = run(&["verify", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("digest mismatch"), "{}", stderr(&out));
}

#[test]
fn verify_reads_csv_report_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("report.csv");
    let out = bin()
        .args([
            "estimate",
            "--input",
            fixture("seven_arms.csv").to_str().unwrap(),
            "--format",
            "csv",
            "--out",
            report_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let out = run(&["verify", report_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn estimate_rerun_is_byte_identical() {
    let input = fixture("seven_arms.csv");
    let args = [
        "estimate",
        "--input",
        input.to_str().unwrap(),
        "--level",
        "0.9",
        "--variance",
        "mixture",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

// The scenario fixtures are versioned artifacts; they must stay exactly
// re-derivable from the generators that document them.
#[test]
fn scenario_fixtures_match_their_generators() {
    let render = |arms: &[ArmTruth]| {
        let mut text = String::from("arm_id,n,mean,std_err\n");
        for arm in arms {
            text.push_str(&format!(
                "{},{},{},{}\n",
                arm.arm_id, arm.n, arm.mean, arm.std_err
            ));
        }
        text
    };

    let bernoulli = beta_cluster_truth(20, 24.0, 936.0, 150_000, 42).unwrap();
    assert_eq!(
        std::fs::read_to_string(fixture("bernoulli_20.csv")).unwrap(),
        render(&bernoulli)
    );

    let normal = normal_effect_truth(16, 0.0, 1.0, 0.2_f64.sqrt(), 100_000, 77).unwrap();
    assert_eq!(
        std::fs::read_to_string(fixture("normal_16.csv")).unwrap(),
        render(&normal)
    );
}
