//! Black-box tests of the binary: exit codes, diagnostics, file round-trips.

mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::fixture_path;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_facetsel"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    serde_json::from_slice(&output.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&output.stdout)
        )
    })
}

fn stderr_str(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn scratch_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("facetsel-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn fixture(name: &str) -> String {
    fixture_path(name).to_string_lossy().into_owned()
}

#[test]
fn compile_networking_chronicle() {
    let output = run(&["compile", "--quiet", "--in", &fixture("a3_chronicle.json")]);
    assert!(output.status.success());
    let parsed = stdout_json(&output);
    assert_eq!(parsed["macro_facets"].as_array().unwrap().len(), 5);
    let edges = parsed["condensation_edges"].as_array().unwrap();
    assert_eq!(edges.len(), 2);
}

#[test]
fn compile_empty_chronicle_succeeds() {
    let dir = scratch_dir("empty");
    let input = dir.join("empty.json");
    fs::write(&input, r#"{"facets":[],"edges":[]}"#).unwrap();
    let output = run(&["compile", "--quiet", "--in", input.to_str().unwrap()]);
    assert!(output.status.success());
    let parsed = stdout_json(&output);
    assert_eq!(parsed["macro_facets"].as_array().unwrap().len(), 0);
}

#[test]
fn compile_dangling_edge_exits_one_with_witness() {
    let dir = scratch_dir("dangling");
    let input = dir.join("bad.json");
    fs::write(
        &input,
        r#"{"facets":[{"id":"a","label":""}],"edges":[["a","ghost"]]}"#,
    )
    .unwrap();
    let output = run(&["compile", "--quiet", "--in", input.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = stderr_str(&output);
    assert!(stderr.contains("DANGLING_EDGE"), "stderr: {stderr}");
    assert!(stderr.contains("ghost"));
}

#[test]
fn compile_warns_on_zero_cost() {
    let dir = scratch_dir("zerocost");
    let input = dir.join("zero.json");
    fs::write(
        &input,
        r#"{"facets":[{"id":"a","label":"","cost":0.0}],"edges":[]}"#,
    )
    .unwrap();
    let output = run(&["compile", "--in", input.to_str().unwrap()]);
    assert!(output.status.success());
    assert!(stderr_str(&output).contains("ZERO_COST_FACET"));
}

#[test]
fn verify_style_fixture_passes() {
    let output = run(&[
        "verify",
        "--quiet",
        "--in",
        &fixture("a2_macro_facets.json"),
        "--constraints",
        &fixture("a2_constraints.json"),
    ]);
    assert!(output.status.success(), "stderr: {}", stderr_str(&output));
    let parsed = stdout_json(&output);
    assert_eq!(parsed["overall"], "pass");
    assert_eq!(parsed["matroid_axioms"]["status"], "pass");
}

#[test]
fn verify_checks_utility_exhaustively_on_small_grounds() {
    let dir = scratch_dir("verify-utility");
    let macro_file = dir.join("macro.json");
    run(&[
        "compile",
        "--quiet",
        "--in",
        &fixture("a3_chronicle.json"),
        "--out",
        macro_file.to_str().unwrap(),
    ]);
    let output = run(&[
        "verify",
        "--quiet",
        "--in",
        macro_file.to_str().unwrap(),
        "--constraints",
        &fixture("a3_constraints.json"),
        "--utility",
        &fixture("a3_modular_utility.json"),
    ]);
    assert!(output.status.success(), "stderr: {}", stderr_str(&output));
    let parsed = stdout_json(&output);
    assert_eq!(parsed["utility"]["status"], "pass");
    assert_eq!(parsed["utility"]["mode"], "exhaustive");
}

#[test]
fn verify_rejects_scripted_utility() {
    let output = run(&[
        "verify",
        "--quiet",
        "--in",
        &fixture("a2_macro_facets.json"),
        "--constraints",
        &fixture("a2_constraints.json"),
        "--utility",
        &fixture("a2_utility.json"),
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_str(&output).contains("SCRIPTED_NOT_VERIFIABLE"));
}

#[test]
fn verify_rejects_non_laminar_constraints() {
    let dir = scratch_dir("laminarity");
    let macro_file = dir.join("macro.json");
    let compile = run(&[
        "compile",
        "--quiet",
        "--in",
        &fixture("a3_chronicle.json"),
        "--out",
        macro_file.to_str().unwrap(),
    ]);
    assert!(compile.status.success());
    let output = run(&[
        "verify",
        "--quiet",
        "--in",
        macro_file.to_str().unwrap(),
        "--constraints",
        &fixture("a3_constraints_as_printed.json"),
    ]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = stderr_str(&output);
    assert!(stderr.contains("LAMINARITY_VIOLATION"));
    assert!(stderr.contains("\"a\":\"A2\"") && stderr.contains("\"b\":\"A3\""));
}

#[test]
fn select_style_fixture_end_to_end() {
    let output = run(&[
        "select",
        "--quiet",
        "--in",
        &fixture("a2_macro_facets.json"),
        "--constraints",
        &fixture("a2_constraints.json"),
        "--utility",
        &fixture("a2_utility.json"),
        "--trace",
    ]);
    assert!(output.status.success(), "stderr: {}", stderr_str(&output));
    let parsed = stdout_json(&output);
    let chosen: Vec<&str> = parsed["chosen"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(chosen, vec!["m4", "m1", "m5"]);
    assert_eq!(parsed["trace"]["stop_reason"], "candidates-exhausted");
}

#[test]
fn lazy_select_matches_greedy_on_scripted_fixture() {
    // lazy probes the scripted table in a different order; replay tolerance
    // keeps the run alive and the chosen set identical
    let output = run(&[
        "select",
        "--quiet",
        "--in",
        &fixture("a2_macro_facets.json"),
        "--constraints",
        &fixture("a2_constraints.json"),
        "--utility",
        &fixture("a2_utility.json"),
        "--algo",
        "lazy",
    ]);
    assert!(output.status.success(), "stderr: {}", stderr_str(&output));
    let parsed = stdout_json(&output);
    let chosen: Vec<&str> = parsed["chosen"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(chosen, vec!["m4", "m1", "m5"]);
    assert!(parsed["stats"]["gain_evaluations"].as_u64().unwrap() <= 15);
}

#[test]
fn select_compare_reports_ratio_within_guarantee() {
    let dir = scratch_dir("compare");
    let macro_file = dir.join("macro.json");
    run(&[
        "compile",
        "--quiet",
        "--in",
        &fixture("a3_chronicle.json"),
        "--out",
        macro_file.to_str().unwrap(),
    ]);
    let output = run(&[
        "select",
        "--quiet",
        "--in",
        macro_file.to_str().unwrap(),
        "--constraints",
        &fixture("a3_constraints.json"),
        "--utility",
        &fixture("a3_modular_utility.json"),
        "--compare",
    ]);
    assert!(output.status.success(), "stderr: {}", stderr_str(&output));
    let parsed = stdout_json(&output);
    let ratio = parsed["ratio"].as_f64().unwrap();
    assert!((0.5..=1.0).contains(&ratio));
}

#[test]
fn compare_on_scripted_trace_exits_two() {
    let output = run(&[
        "select",
        "--quiet",
        "--in",
        &fixture("a2_macro_facets.json"),
        "--constraints",
        &fixture("a2_constraints.json"),
        "--utility",
        &fixture("a2_utility.json"),
        "--compare",
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_str(&output).contains("SCRIPTED_NOT_VERIFIABLE"));
}

#[test]
fn optimal_over_brute_force_ceiling_exits_two() {
    let dir = scratch_dir("ceiling");
    let macro_file = dir.join("macro.json");
    let units: Vec<String> = (0..21)
        .map(|i| {
            format!(r#"{{"id":"m{i:02}","members":["m{i:02}"],"closure":["m{i:02}"],"cost":1.0}}"#)
        })
        .collect();
    fs::write(
        &macro_file,
        format!(
            r#"{{"macro_facets":[{}],"condensation_edges":[]}}"#,
            units.join(",")
        ),
    )
    .unwrap();
    let constraints = dir.join("constraints.json");
    fs::write(&constraints, r#"{"constraints":[]}"#).unwrap();
    let utility = dir.join("utility.json");
    let weights: Vec<String> = (0..21).map(|i| format!(r#""m{i:02}":1.0"#)).collect();
    fs::write(
        &utility,
        format!(
            r#"{{"kind":"modular","weights":{{{}}}}}"#,
            weights.join(",")
        ),
    )
    .unwrap();
    let output = run(&[
        "optimal",
        "--quiet",
        "--in",
        macro_file.to_str().unwrap(),
        "--constraints",
        constraints.to_str().unwrap(),
        "--utility",
        utility.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_str(&output).contains("LIMIT_EXCEEDED"));
}

#[test]
fn compile_output_feeds_select_unmodified() {
    let dir = scratch_dir("roundtrip");
    let macro_file = dir.join("macro.json");
    let compile = run(&[
        "compile",
        "--quiet",
        "--in",
        &fixture("a3_chronicle.json"),
        "--out",
        macro_file.to_str().unwrap(),
    ]);
    assert!(compile.status.success());
    let select = run(&[
        "select",
        "--quiet",
        "--in",
        macro_file.to_str().unwrap(),
        "--constraints",
        &fixture("a3_constraints.json"),
        "--utility",
        &fixture("a3_utility.json"),
    ]);
    assert!(select.status.success(), "stderr: {}", stderr_str(&select));
    let parsed = stdout_json(&select);
    let chosen: Vec<&str> = parsed["chosen"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(chosen, vec!["scc:f1", "scc:f3", "scc:f5"]);
    // expansion and cost are filled from the compiled set
    assert_eq!(parsed["expansion"].as_array().unwrap().len(), 5);
    assert_eq!(parsed["cost"].as_f64().unwrap(), 7.0);
}

#[test]
fn out_dir_env_var_prefixes_relative_outputs() {
    let dir = scratch_dir("envout");
    let output = bin()
        .args([
            "compile",
            "--quiet",
            "--in",
            &fixture("a3_chronicle.json"),
            "--out",
            "macro.json",
        ])
        .env("FACETSEL_OUT_DIR", &dir)
        .output()
        .unwrap();
    assert!(output.status.success(), "stderr: {}", stderr_str(&output));
    assert!(dir.join("macro.json").exists());
}

fn read_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|entry| {
            let entry = entry.unwrap();
            (
                entry.file_name().to_string_lossy().into_owned(),
                fs::read(entry.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn simulate_same_seed_is_byte_identical() {
    let dir_a = scratch_dir("sim-a");
    let dir_b = scratch_dir("sim-b");
    for dir in [&dir_a, &dir_b] {
        let output = run(&[
            "simulate",
            "--quiet",
            "--trials",
            "25",
            "--macro",
            "8",
            "--universe",
            "40",
            "--groups",
            "3",
            "--seed",
            "99",
            "--out-dir",
            dir.to_str().unwrap(),
        ]);
        assert!(output.status.success(), "stderr: {}", stderr_str(&output));
    }
    let files_a = read_files(&dir_a);
    let files_b = read_files(&dir_b);
    assert_eq!(
        files_a.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>(),
        vec!["histogram.csv", "report.json", "trials.csv"]
    );
    assert_eq!(files_a, files_b);
}
