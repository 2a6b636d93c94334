//! Black-box checks of the command-line interface: exit codes, output
//! schemas, determinism, and the documented state specifiers.

use std::process::{Command, Output};

use serde_json::Value;

fn steersim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_steersim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(output: &Output) -> Value {
    assert!(
        output.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("process exited")
}

#[test]
fn analyze_reports_the_symmetric_state() {
    let out = steersim(&["analyze", "--state", "w:0.57735,0.57735,0.57735"]);
    let report = stdout_json(&out);
    assert_eq!(report["category"], "fully_mutual");
    assert_eq!(report["sr_verdict"], "Y");
    assert_eq!(report["witness_display"], "-0.3333");
    let witness = report["witness"].as_f64().unwrap();
    assert!((witness + 1.0 / 3.0).abs() < 1e-5);
    let matrix = report["steering_matrix"].as_array().unwrap();
    assert_eq!(matrix.len(), 6);
    for entry in matrix {
        assert_eq!(entry["display"], "1.7778");
        assert_eq!(entry["threshold"], 2.0);
        assert_eq!(entry["violated"], true);
    }
    assert_eq!(report["arrows"].as_array().unwrap().len(), 6);
}

#[test]
fn analyze_classifies_the_monogamous_example() {
    let out = steersim(&["analyze", "--state", "w:0.2,0.4,0.8944272"]);
    let report = stdout_json(&out);
    assert_eq!(report["category"], "monogamous");
    assert_eq!(report["sr_verdict"], "N");
    assert_eq!(report["witnessing_party"], Value::Null);
}

#[test]
fn analyze_classifies_the_balanced_two_branch_state() {
    let out = steersim(&["analyze", "--state", "ghz:0.7071068,0.7071068"]);
    let report = stdout_json(&out);
    assert_eq!(report["category"], "unsteerable");
    assert_eq!(report["sr_verdict"], "N");
    assert!(report["arrows"].as_array().unwrap().is_empty());
}

#[test]
fn analyze_csv_emits_the_matrix_table() {
    let out = steersim(&["analyze", "--state", "w:0.57735,0.57735,0.57735", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "steerer,steered,value,stderr,threshold,violated,display");
    assert_eq!(lines.len(), 7);
    assert!(lines[1].starts_with("A,B,"));
}

#[test]
fn malformed_specifier_exits_with_usage_code() {
    let out = steersim(&["analyze", "--state", "w:oops,0.4,0.2"]);
    assert_eq!(exit_code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("oops"), "stderr was: {stderr}");
}

#[test]
fn missing_state_flag_exits_with_usage_code() {
    let out = steersim(&["analyze"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn unwritable_output_path_exits_with_io_code() {
    let out = steersim(&[
        "analyze",
        "--state",
        "w:0.57735,0.57735,0.57735",
        "--out",
        "/nonexistent-steersim-dir/report.json",
    ]);
    assert_eq!(exit_code(&out), 3);
}

#[test]
fn missing_state_file_exits_with_io_code() {
    let out = steersim(&["analyze", "--state", "file:/nonexistent-steersim-state.json"]);
    assert_eq!(exit_code(&out), 3);
}

#[test]
fn single_shot_simulation_exits_with_statistical_code() {
    let out = steersim(&["simulate", "--state", "w:0.57735,0.57735,0.57735", "--shots", "1"]);
    assert_eq!(exit_code(&out), 4);
}

#[test]
fn repeated_simulate_runs_are_byte_identical() {
    let args = [
        "simulate",
        "--state",
        "w:0.5,0.5,0.7071068",
        "--shots",
        "20000",
        "--seed",
        "9",
    ];
    let first = steersim(&args);
    let second = steersim(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn simulate_embeds_counts_and_error_bars() {
    let out = steersim(&[
        "simulate",
        "--state",
        "w:0.57735,0.57735,0.57735",
        "--shots",
        "50000",
        "--resamples",
        "100",
    ]);
    let report = stdout_json(&out);
    assert_eq!(report["mode"], "multinomial");
    assert_eq!(report["counts"]["counts"].as_object().unwrap().len(), 27);
    for entry in report["steering_matrix"].as_array().unwrap() {
        assert!(entry["stderr"].as_f64().unwrap() > 0.0);
        assert_eq!(entry["resamples"], 100);
        let display = entry["display"].as_str().unwrap();
        assert!(display.contains('('), "display {display} lacks an error digit");
    }
}

#[test]
fn deterministic_marginals_survive_sampling() {
    // ghz:0,1 is the |001> product state: its z outcomes are deterministic,
    // so the degenerate-variance rule and the bootstrap both see zero-width
    // pools and the run must still succeed end to end.
    let out = steersim(&[
        "simulate",
        "--state",
        "ghz:0,1",
        "--shots",
        "20000",
        "--sigma-k",
        "3",
    ]);
    let report = stdout_json(&out);
    assert_eq!(report["category"], "unsteerable");
    assert_eq!(report["sr_verdict"], "N");
}

#[test]
fn tomo_exact_mode_round_trips_through_a_state_file() {
    let dir = tempfile::tempdir().unwrap();
    let recon_path = dir.path().join("reconstruction.json");
    let out = steersim(&[
        "tomo",
        "--state",
        "w:0.57735,0.57735,0.57735",
        "--shots",
        "0",
        "--out",
        recon_path.to_str().unwrap(),
    ]);
    let report = stdout_json(&out);
    assert_eq!(report["display"], "1.000000");
    assert_eq!(report["mode"], "exact");

    // The written reconstruction is a loadable state file.
    let spec = format!("file:{}", recon_path.display());
    let reuse = steersim(&["analyze", "--state", &spec]);
    let reloaded = stdout_json(&reuse);
    assert_eq!(reloaded["category"], "fully_mutual");
    assert_eq!(reloaded["sr_verdict"], "Y");
}

#[test]
fn tomo_reports_fidelity_against_the_noise_free_target() {
    let out = steersim(&[
        "tomo",
        "--state",
        "w:0.57735,0.57735,0.57735",
        "--noise",
        "0.08",
        "--shots",
        "0",
    ]);
    let report = stdout_json(&out);
    let fidelity = report["fidelity"].as_f64().unwrap();
    let closed_form = (0.92_f64 + 0.08 / 8.0).sqrt();
    assert!((fidelity - closed_form).abs() < 1e-6);
}

#[test]
fn sweep_emits_the_full_grid_as_csv() {
    let args = ["sweep", "--resolution", "21"];
    let first = steersim(&args);
    assert!(first.status.success());
    let text = String::from_utf8(first.stdout.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "alpha,beta,gamma,P_AB,P_BA,P_AC,P_CA,P_BC,P_CB,category");
    assert_eq!(lines.len(), 1 + 21 * 21);
    assert!(text.contains("fully_mutual"));
    assert!(text.contains("monogamous"));
    assert!(text.contains(",invalid"));
    let second = steersim(&args);
    assert_eq!(first.stdout, second.stdout);
}
