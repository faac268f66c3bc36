//! End-to-end tests of the `opelab` binary: exit codes, file outputs, and
//! rerun determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn opelab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opelab"))
        .args(args)
        .current_dir(dir)
        .env_remove("OPELAB_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn coverage_passes_on_the_hard_instance() {
    let dir = tempfile::tempdir().unwrap();
    let out = opelab(
        &["coverage", "--kind", "det", "--d", "4", "--horizon", "3"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(stdout(&out).contains("coverage: PASS"));
}

#[test]
fn failed_checks_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = opelab(
        &[
            "coverage",
            "--kind",
            "det",
            "--d",
            "4",
            "--horizon",
            "3",
            "--threshold",
            "0.5",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1), "{out:?}");
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    // Unknown instance kind.
    let out = opelab(
        &["coverage", "--kind", "zet", "--d", "4", "--horizon", "3"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2), "{out:?}");

    // Invalid instance parameters (odd d).
    let out = opelab(
        &["coverage", "--kind", "det", "--d", "5", "--horizon", "3"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2), "{out:?}");

    // Unknown flag (clap).
    let out = opelab(&["coverage", "--bogus"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn instance_build_writes_a_loadable_bundle_and_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let out = opelab(
        &[
            "instance",
            "build",
            "--kind",
            "sparse",
            "--d",
            "6",
            "--horizon",
            "4",
            "--r0-max",
            "--out",
            "bundle.json",
            "--sample",
            "25",
            "--seed",
            "3",
            "--dataset-out",
            "data.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");

    let bundle = opelab_cli::document::load_bundle(&dir.path().join("bundle.json")).unwrap();
    assert!((bundle.ground_truth_value - 1.0).abs() < 1e-10);

    let csv = fs::read_to_string(dir.path().join("data.csv")).unwrap();
    assert!(csv.starts_with("level,s,a,r,s_next,trial\n"));
    assert_eq!(csv.lines().count(), 1 + 4 * 25);

    // The written bundle is accepted by downstream commands.
    let out = opelab(
        &[
            "realizability",
            "--instance",
            "bundle.json",
            "--policies",
            "0",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
}

#[test]
fn identity_check_passes_and_reports_both_sides() {
    let dir = tempfile::tempdir().unwrap();
    let out = opelab(
        &[
            "identity",
            "check",
            "--kind",
            "det",
            "--d",
            "4",
            "--horizon",
            "4",
            "--r0-max",
            "--n",
            "100",
            "--lambda",
            "1.0",
            "--seed",
            "11",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(stdout(&out).contains("identity: PASS"));
}

#[test]
fn shift_report_prints_the_per_level_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = opelab(
        &[
            "shift",
            "report",
            "--kind",
            "det",
            "--d",
            "4",
            "--horizon",
            "3",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("sigma_min"));
    assert!(text.contains("C_h"));
    assert!(text.contains("product of C_h"));
}

#[test]
fn distinguish_rerun_is_byte_identical_and_env_overrides_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "test",
        "distinguish",
        "--kind",
        "det",
        "--d",
        "4",
        "--horizon",
        "4",
        "--n",
        "0,50",
        "--trials",
        "200",
        "--seed",
        "9",
        "--output-dir",
        "a",
    ];
    let out = opelab(&args, dir.path());
    assert_eq!(out.status.code(), Some(0), "{out:?}");

    let out = Command::new(env!("CARGO_BIN_EXE_opelab"))
        .args(args)
        .current_dir(dir.path())
        .env("OPELAB_OUTPUT_DIR", "b")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");

    let a = fs::read(dir.path().join("a/distinguish.csv")).unwrap();
    let b = fs::read(dir.path().join("b/distinguish.csv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn emit_plots_consumes_result_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = opelab(
        &[
            "test",
            "distinguish",
            "--kind",
            "det",
            "--d",
            "4",
            "--horizon",
            "3",
            "--n",
            "0,20",
            "--trials",
            "50",
            "--seed",
            "2",
            "--output-dir",
            "res",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");

    let out = opelab(&["emit", "plots", "--results-dir", "res"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let fig = fs::read_to_string(dir.path().join("res/fig_success_vs_n.csv")).unwrap();
    assert!(fig.starts_with("kind,d,H,N,success_rate,ci_lo,ci_hi\n"));
    assert_eq!(fig.lines().count(), 3);

    // An empty results dir is a usage error.
    let out = opelab(&["emit", "plots", "--results-dir", "nothing"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn rmse_figure_has_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = opelab(
        &[
            "sweep",
            "amplification",
            "--d",
            "4",
            "--horizon",
            "2,3",
            "--n",
            "20,40",
            "--trials",
            "15",
            "--seed",
            "1",
            "--output-dir",
            "res",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let out = opelab(&["emit", "plots", "--results-dir", "res"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let fig = fs::read_to_string(dir.path().join("res/fig_rmse_vs_h.csv")).unwrap();
    // One header plus |H grid| * |N grid| observations.
    assert_eq!(fig.lines().count(), 1 + 2 * 2);
}

#[test]
fn sweep_with_config_file_and_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("config.json"),
        r#"{"horizon": [2, 3], "n": [50], "trials": 60, "seed": 5, "output_dir": "fromfile"}"#,
    )
    .unwrap();
    let out = opelab(
        &[
            "sweep",
            "amplification",
            "--config",
            "config.json",
            "--trials",
            "20",
            "--output-dir",
            "sweepout",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    // The flag overrides the file for the output dir and trials.
    assert!(dir.path().join("sweepout/amplification.csv").exists());
    assert!(!dir.path().join("fromfile").exists());
    let config: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("sweepout/amplification_config.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(config["trials"], 20);
    assert_eq!(config["seed"], 5);
}
