use std::path::Path;
use std::process::{Command, Output};

use trivoc::io::report::{GroundTruthSidecar, OracleReport, RegistrationReport};

fn trivoc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trivoc"))
        .args(args)
        .env_remove("TRIVOC_SIGMA")
        .env_remove("TRIVOC_SEED")
        .env_remove("TRIVOC_SOLVER")
        .env_remove("TRIVOC_GAMMA_MULTIPLIER")
        .output()
        .expect("binary runs")
}

fn generate(dir: &Path, n: usize, ratio: f64, seed: u64) -> (String, GroundTruthSidecar) {
    let prefix = dir.join(format!("g{n}"));
    let prefix = prefix.to_str().unwrap();
    let out = trivoc(&[
        "generate",
        "--n",
        &n.to_string(),
        "--ratio",
        &ratio.to_string(),
        "--seed",
        &seed.to_string(),
        "--out-prefix",
        prefix,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let truth = std::fs::read_to_string(format!("{prefix}.truth.json")).unwrap();
    (format!("{prefix}.txt"), serde_json::from_str(&truth).unwrap())
}

fn register_json(file: &str, extra: &[&str]) -> (Output, RegistrationReport) {
    let mut args = vec!["register", "--correspondences", file, "--sigma", "0.01"];
    args.extend_from_slice(extra);
    let out = trivoc(&args);
    let report = serde_json::from_slice(&out.stdout).expect("JSON on stdout");
    (out, report)
}

#[test]
fn generate_then_register_outlier_free() {
    let dir = tempfile::tempdir().unwrap();
    let (file, truth) = generate(dir.path(), 10, 0.0, 5);
    assert_eq!(truth.inlier_indices, (1..=10).collect::<Vec<_>>());
    let (out, report) = register_json(&file, &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report.consensus_size, 10);
    assert!(report.success);
}

#[test]
fn five_field_row_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.txt");
    std::fs::write(&file, "0 0 0 1 1 1\n1 2 3 4 5 6\n1 2 3 4 5\n").unwrap();
    let out = trivoc(&["register", "--correspondences", file.to_str().unwrap(), "--sigma", "0.01"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn cli_register_matches_cli_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let (file, _) = generate(dir.path(), 20, 0.5, 20);
    let (_, report) = register_json(&file, &[]);
    let out = trivoc(&["oracle", "--correspondences", &file, "--sigma", "0.01"]);
    assert!(out.status.success());
    let oracle: OracleReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.consensus_size, oracle.consensus_size);
}

#[test]
fn no_consensus_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("line.txt");
    let rows: String = (0..6).map(|i| format!("{i} 0 0 {i} 0 0\n")).collect();
    std::fs::write(&file, rows).unwrap();
    let (out, report) = register_json(file.to_str().unwrap(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!report.success);
    assert!(report.failure.is_some());
}

#[test]
fn flags_override_environment() {
    let dir = tempfile::tempdir().unwrap();
    let (file, _) = generate(dir.path(), 10, 0.0, 5);
    let out = Command::new(env!("CARGO_BIN_EXE_trivoc"))
        .args(["register", "--correspondences", &file, "--solver", "trivoc"])
        .env("TRIVOC_SIGMA", "0.01")
        .env("TRIVOC_SOLVER", "ransac")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: RegistrationReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.solver, "trivoc");
}

#[test]
fn missing_required_flag_is_a_usage_error() {
    let out = trivoc(&["register", "--sigma", "0.01"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let out = trivoc(&[
        "bench", "--grid", "40:0.5", "--trials", "2", "--out", csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 2);
    assert_eq!(text.lines().next().unwrap(), trivoc::bench::CSV_HEADER);
}
