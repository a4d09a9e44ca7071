//! End-to-end tests of the installed binary: every artifact flows through
//! real files, and exit codes are checked against the documented contract
//! (0 success, 1 invalid input, 2 failed certification, 64 usage).

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_metric-embed"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(output: &Output) -> Value {
    assert!(
        output.status.success(),
        "exit {:?}, stderr: {}",
        output.status.code(),
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

fn write_space(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let output = bin()
        .args(args)
        .arg("--out")
        .arg(&path)
        .output()
        .expect("binary runs");
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    path
}

#[test]
fn generated_spaces_are_deterministic_json() {
    let a = run(&["generate", "grid", "--dim", "2", "--points", "12", "--seed", "9"]);
    let b = run(&["generate", "grid", "--dim", "2", "--points", "12", "--seed", "9"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "same seed must give byte-identical output");
    let space = stdout_json(&a);
    assert_eq!(space["labels"].as_array().unwrap().len(), 12);
}

#[test]
fn pipeline_from_path_to_distortion_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let space = write_space(dir.path(), "p.json", &["generate", "path", "--points", "9"]);
    let table = dir.path().join("iso.json");
    let embed = bin()
        .args(["embed", "frechet", "--space"])
        .arg(&space)
        .arg("--out")
        .arg(&table)
        .output()
        .unwrap();
    assert!(embed.status.success(), "{}", String::from_utf8_lossy(&embed.stderr));

    let report = stdout_json(
        &bin()
            .args(["analyze", "distortion", "--space"])
            .arg(&space)
            .args(["--table"])
            .arg(&table)
            .output()
            .unwrap(),
    );
    assert_eq!(report["distortion"], 1.0);
    assert_eq!(report["scaling"], 1.0);
}

#[test]
fn compact_embedding_writes_table_and_prints_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let space =
        write_space(dir.path(), "i.json", &["generate", "interval", "--divisions", "16"]);
    let table = dir.path().join("table.json");
    let output = bin()
        .args(["embed", "compact", "--space"])
        .arg(&space)
        .arg("--out")
        .arg(&table)
        .output()
        .unwrap();
    let cert = stdout_json(&output);
    assert_eq!(cert["pairs_checked"], 136);
    assert_eq!(cert["upper_ok"], true);
    assert_eq!(cert["lower_ok"], true);
    let table_json: Value =
        serde_json::from_str(&std::fs::read_to_string(&table).unwrap()).unwrap();
    assert_eq!(table_json["images"].as_array().unwrap().len(), 17);
}

#[test]
fn glue_requires_a_seed_only_when_perturbed() {
    let dir = tempfile::tempdir().unwrap();
    let space = write_space(dir.path(), "p.json", &["generate", "path", "--points", "17"]);

    let missing_seed = bin()
        .args(["embed", "glue", "--eps0", "0.5", "--space"])
        .arg(&space)
        .output()
        .unwrap();
    assert_eq!(missing_seed.status.code(), Some(64));

    let seeded = bin()
        .args(["embed", "glue", "--eps0", "0.5", "--seed", "11", "--space"])
        .arg(&space)
        .output()
        .unwrap();
    let doc = stdout_json(&seeded);
    assert_eq!(doc["certificate"]["ok"], true);
    assert!(doc["certificate"]["measured_lip"].as_f64().unwrap() <= 13.5 + 1e-9);

    let exact = bin().args(["embed", "glue", "--space"]).arg(&space).output().unwrap();
    let doc = stdout_json(&exact);
    assert!(doc["certificate"]["measured_lip"].as_f64().unwrap() <= 9.0 + 1e-9);
}

#[test]
fn stability_witnesses_report_their_closed_forms() {
    let report = stdout_json(&run(&[
        "stability",
        "--witness",
        "c0",
        "--truncation",
        "64",
        "--window",
        "8",
    ]));
    assert_eq!(report["first_outer"], 2.0);
    assert_eq!(report["second_outer"], 1.0);
    assert_eq!(report["exact"], true);

    let report = stdout_json(&run(&[
        "stability",
        "--witness",
        "lp",
        "--truncation",
        "100",
        "--eta",
        "0.02",
        "--shrinking-head",
    ]));
    let residual = report["residual"].as_f64().unwrap();
    assert!(residual > 0.0 && residual < 0.03, "residual {residual}");

    // stuck mass at a support coordinate fails the decay gate: exit 2
    let violated = run(&["stability", "--witness", "lp", "--truncation", "100"]);
    assert!(violated.status.success(), "disjoint bump is exact");
    let report = stdout_json(&violated);
    assert_eq!(report["residual"], 0.0);
}

#[test]
fn snowflake_probe_reports_both_deltas() {
    let report = stdout_json(&run(&[
        "stability",
        "--witness",
        "c0",
        "--truncation",
        "32",
        "--window",
        "4",
        "--snowflake",
        "0.5",
    ]));
    assert_eq!(report["original"]["delta"], 1.0);
    let deformed = report["deformed"]["delta"].as_f64().unwrap();
    assert!((deformed - (2.0_f64.sqrt() - 1.0)).abs() <= 1e-12);
}

#[test]
fn interlace_search_needs_table_and_seed() {
    let no_table = run(&["interlace", "--n", "8", "--k", "2", "--search", "4"]);
    assert_eq!(no_table.status.code(), Some(64));

    let graph = stdout_json(&run(&["interlace", "--n", "4", "--k", "2"]));
    let vertices = graph["vertices"].as_array().unwrap();
    assert_eq!(vertices.len(), 6);
    assert_eq!(vertices[0], serde_json::json!([1, 2]));
    assert_eq!(vertices[5], serde_json::json!([3, 4]));
}

#[test]
fn point_cap_env_var_limits_generation() {
    let output = bin()
        .args(["generate", "path", "--points", "64"])
        .env("METRIC_EMBED_CAP", "10")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("cap"), "{err}");

    let bad_cap = bin()
        .args(["generate", "path", "--points", "4"])
        .env("METRIC_EMBED_CAP", "many")
        .output()
        .unwrap();
    assert_eq!(bad_cap.status.code(), Some(1));
}

#[test]
fn invalid_inputs_exit_one_and_usage_errors_exit_sixty_four() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    let output = bin().args(["net", "--eps", "1", "--space"]).arg(&bad).output().unwrap();
    assert_eq!(output.status.code(), Some(1));

    let unknown = run(&["no-such-command"]);
    assert_eq!(unknown.status.code(), Some(64));

    let missing_arg = run(&["net"]);
    assert_eq!(missing_arg.status.code(), Some(64));
}

#[test]
fn moduli_csv_is_stable_and_headed() {
    let dir = tempfile::tempdir().unwrap();
    let space = write_space(dir.path(), "p.json", &["generate", "path", "--points", "5"]);
    let table = dir.path().join("iso.json");
    bin()
        .args(["embed", "frechet", "--space"])
        .arg(&space)
        .arg("--out")
        .arg(&table)
        .output()
        .unwrap();
    let mut args = vec!["analyze".to_string(), "moduli".to_string()];
    args.push("--space".into());
    args.push(space.display().to_string());
    args.push("--table".into());
    args.push(table.display().to_string());
    args.push("--csv".into());
    let a = bin().args(&args).output().unwrap();
    let b = bin().args(&args).output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,rho_hat,omega_hat"));
    assert_eq!(lines.next(), Some("1,1,1"));
}

#[test]
fn certify_all_json_is_byte_stable_and_passes() {
    let a = run(&["certify-all", "--seed", "7", "--json"]);
    let b = run(&["certify-all", "--seed", "7", "--json"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let rows = stdout_json(&a);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r["passed"] == true));
}

#[test]
fn net_with_retraction_reports_certified_error() {
    let dir = tempfile::tempdir().unwrap();
    let space = write_space(dir.path(), "p.json", &["generate", "path", "--points", "11"]);
    let report = stdout_json(
        &bin()
            .args(["net", "--eps", "2", "--retraction", "--space"])
            .arg(&space)
            .output()
            .unwrap(),
    );
    assert_eq!(report["skeleton"]["members"], serde_json::json!([0, 2, 4, 6, 8, 10]));
    let measured = report["retraction"]["max_additive_error"].as_f64().unwrap();
    let bound = report["retraction"]["error_bound"].as_f64().unwrap();
    assert!(measured <= bound);
}
