//! Command-line contract: exit codes, error JSON on stderr, report shape,
//! and manifest echo.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_geomediate"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().args(args).arg("--out").arg(dir).output().unwrap()
}

/// Stderr of a failed run must be one machine-readable JSON object with a
/// `code` and a `message`.
fn error_json(out: &Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().next_back().unwrap_or_else(|| panic!("empty stderr"));
    serde_json::from_str(line).unwrap_or_else(|e| panic!("stderr not JSON ({e}): {stderr}"))
}

#[test]
fn mediate_happy_path_writes_report_and_manifest() {
    let root = tempfile::tempdir().unwrap();
    let sdir = root.path().join("s");
    let status = bin()
        .args(["synth", "--n", "60", "--out"])
        .arg(&sdir)
        .status()
        .unwrap();
    assert!(status.success());

    // Rename the generated mediator/outcome headers so the run reads like
    // a survey extract.
    let csv = std::fs::read_to_string(sdir.join("synth_data.csv")).unwrap();
    let csv = csv.replacen("id,u,v,x1,m,y", "id,u,v,GS,SA,AC", 1);
    let park = root.path().join("park.csv");
    std::fs::write(&park, csv).unwrap();

    let out = run_in(
        root.path(),
        &["mediate", "--in", park.to_str().unwrap(), "--mediator", "SA", "--outcome", "AC"],
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    // The report leads with the mediator path and decomposes each
    // predictor into direct / indirect / total with an interval and a
    // classification.
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("GS -> SA -> AC"), "stdout: {stdout}");
    for needle in ["direct", "indirect", "total", "indirect CI", "class", "Path-model fit"] {
        assert!(stdout.contains(needle), "report lacks {needle:?}: {stdout}");
    }

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(root.path().join("mediate_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["mediator"], "SA");
    assert_eq!(report["outcome"], "AC");
    assert_eq!(report["effects"][0]["predictor"], "GS");

    // The manifest echoes the resolved configuration, defaults included.
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(root.path().join("mediate_manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["subcommand"], "mediate");
    assert_eq!(manifest["seed"], 42);
    assert_eq!(manifest["bootstrap"], 2000);
    assert!(manifest["library_version"].is_string());
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = bin().args(["gwr", "--definitely-not-a-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("Usage"), "stderr: {stderr}");
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = bin().args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mgwr_on_rank_deficient_data_names_the_location() {
    let root = tempfile::tempdir().unwrap();
    // Two far-apart clusters; the predictor is identically zero in the
    // first one, so any local window confined to it cannot identify the
    // predictor's coefficient. A small pinned bandwidth forces exactly
    // that window; skipping standardization keeps the zeros zero.
    let csv = "\
u,v,x1,m,y
0.0,0.0,0,1.2,2.1
1.0,0.0,0,0.8,1.7
0.0,1.0,0,1.5,2.6
1.0,1.0,0,0.9,1.9
0.5,0.5,0,1.1,2.0
0.2,0.8,0,1.3,2.2
100.0,100.0,1.4,2.2,3.9
101.0,100.0,-0.7,0.3,0.6
100.0,101.0,0.9,1.8,3.1
101.0,101.0,-1.2,-0.1,0.2
100.5,100.5,0.6,1.4,2.7
100.2,100.8,-0.3,0.7,1.3
";
    let path = root.path().join("degenerate.csv");
    std::fs::write(&path, csv).unwrap();

    let out = run_in(
        root.path(),
        &[
            "mgwr",
            "--in",
            path.to_str().unwrap(),
            "--mediator",
            "m",
            "--outcome",
            "y",
            "--raw",
            "--bandwidth",
            "5",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    let err = error_json(&out);
    assert_eq!(err["code"], "LocalRankDeficient");
    let message = err["message"].as_str().unwrap();
    assert!(message.contains("location 0"), "message: {message}");
}

#[test]
fn missing_input_file_is_a_data_error() {
    let root = tempfile::tempdir().unwrap();
    let out = run_in(
        root.path(),
        &["ols", "--in", "no-such-file.csv", "--mediator", "m", "--outcome", "y"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_json(&out)["code"], "Io");
}

#[test]
fn missing_column_is_a_data_error() {
    let root = tempfile::tempdir().unwrap();
    let path = root.path().join("tiny.csv");
    std::fs::write(&path, "u,v,x1,m,y\n0,0,1,2,3\n1,0,2,3,4\n0,1,3,4,5\n1,1,4,5,6\n").unwrap();
    let out = run_in(
        root.path(),
        &["ols", "--in", path.to_str().unwrap(), "--mediator", "nope", "--outcome", "y"],
    );
    assert_eq!(out.status.code(), Some(1));
    let err = error_json(&out);
    assert_eq!(err["code"], "MissingColumn");
    assert!(err["message"].as_str().unwrap().contains("nope"));
}
