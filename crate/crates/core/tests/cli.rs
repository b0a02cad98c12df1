use std::path::Path;
use std::process::Command;

use mfentropy::cli::{execute, RunConfig};
use mfentropy::statistics::read_rows_csv;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mfentropy"))
}

fn run_ok(args: &[&str]) -> String {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    let argv = std::iter::once("mfentropy").chain(args.iter().copied());
    execute(argv)
}

#[test]
fn page_value_is_printed() {
    assert_eq!(run_ok(&["theory", "page", "--N", "8"]).trim(), "0.735087");
    assert_eq!(run_ok(&["theory", "page", "--N", "4"]).trim(), "0.480898");
    assert_eq!(run_ok(&["theory", "page", "--N", "2"]).trim(), "0.000000");
}

#[test]
fn theory_predictions_from_flags() {
    assert_eq!(
        run_ok(&["theory", "tangle", "--N", "16", "--p2", "0.25"]).trim(),
        "0.700000"
    );
    assert_eq!(
        run_ok(&["theory", "linear", "--N", "64", "--nu", "3", "--p2", "0.0625"]).trim(),
        "0.833333"
    );
    let uniform = [
        "--p2", "0.25", "--p3", "0.0625", "--p4", "0.015625", "--p2sq", "0.0625",
    ];
    let mut args = vec!["theory", "tangle-sq", "--N", "4"];
    args.extend(uniform);
    assert_eq!(run_ok(&args).trim(), "0.375000");
}

#[test]
fn theory_tangle_power_from_moduli_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("moduli.csv");
    std::fs::write(&path, "0.25\n0.25\n0.25\n0.25\n").unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(
        run_ok(&[
            "theory",
            "tangle-power",
            "--N",
            "4",
            "--power",
            "2",
            "--moduli",
            p
        ])
        .trim(),
        "0.375000"
    );
    assert_eq!(
        code(&["theory", "tangle-power", "--N", "4", "--moduli", p]),
        2
    );
}

#[test]
fn degenerate_gamma_is_rejected() {
    let out = bin()
        .args([
            "measure",
            "--ensemble",
            "intermediate",
            "--gamma",
            "1/2",
            "--nr",
            "4",
            "--samples",
            "10",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("N*gamma must not be an integer"));
}

#[test]
fn invalid_arguments_exit_with_two() {
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["theory", "tangle", "--N", "16"]), 2);
    assert_eq!(code(&["theory", "tangle", "--N", "16", "--p2", "2.0"]), 2);
    assert_eq!(
        code(&["measure", "--nr", "4", "--nu", "3", "--samples", "10"]),
        2
    );
    assert_eq!(
        code(&[
            "measure",
            "--nr",
            "4",
            "--samples",
            "10",
            "--observables",
            "p2,bogus"
        ]),
        2
    );
    assert_eq!(code(&["scan", "--nr", "6..4", "--samples", "10"]), 2);
    assert_eq!(code(&[]), 2);
}

#[test]
fn scan_writes_long_format_csv_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let o = out.to_str().unwrap();
    let args = [
        "scan",
        "--ensemble",
        "intermediate",
        "--gamma",
        "1/3",
        "--nr",
        "4..6",
        "--nu",
        "1",
        "--samples",
        "200",
        "--seed",
        "7",
        "--out",
        o,
    ];
    assert_eq!(code(&args), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "n_r,observable,mean,stderr,samples"
    );
    let rows = read_rows_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 3 * 10);
    let mut keys: Vec<(u32, String)> = rows.iter().map(|r| (r.n_r, r.observable.clone())).collect();
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), rows.len());

    let config_path = Path::new(&format!("{o}.config.json")).to_path_buf();
    let config = RunConfig::from_json(&std::fs::read_to_string(&config_path).unwrap()).unwrap();
    assert_eq!(config.seed, 7);
    assert_eq!(
        RunConfig::from_json(&config.to_json().unwrap()).unwrap(),
        config
    );

    // Re-running the recorded configuration reproduces the artifact.
    let again = dir.path().join("again.csv");
    let mut replay = config.clone();
    replay.output = Some(again.clone());
    let replay_path = dir.path().join("replay.json");
    std::fs::write(&replay_path, replay.to_json().unwrap()).unwrap();
    assert_eq!(
        code(&["--config", replay_path.to_str().unwrap(), "--workers", "2"]),
        0
    );
    assert_eq!(std::fs::read_to_string(&again).unwrap(), text);
}

#[test]
fn theory_rows_are_tagged() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.csv");
    let args = [
        "measure",
        "--ensemble",
        "exchangeable",
        "--profile",
        "geometric:0.8",
        "--nr",
        "4",
        "--samples",
        "100",
        "--seed",
        "1",
        "--observables",
        "p2,S",
        "--theory",
        "--out",
        out.to_str().unwrap(),
    ];
    assert_eq!(code(&args), 0);
    let rows = read_rows_csv(std::fs::File::open(&out).unwrap()).unwrap();
    let labels: Vec<&str> = rows.iter().map(|r| r.observable.as_str()).collect();
    assert_eq!(
        labels,
        [
            "p2",
            "S",
            "theory:tau",
            "theory:SL",
            "theory:S1",
            "theory:tau2",
            "theory:S2",
            "theory:S2-factorized"
        ]
    );
}

#[test]
fn json_output_embeds_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.json");
    let args = [
        "measure",
        "--nr",
        "3",
        "--samples",
        "50",
        "--seed",
        "9",
        "--out",
        out.to_str().unwrap(),
    ];
    assert_eq!(code(&args), 0);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["config"]["seed"], 9);
    assert_eq!(doc["config"]["command"]["subcommand"], "measure");
    assert_eq!(doc["rows"].as_array().unwrap().len(), 10);
    // The artifact itself is a valid --config input.
    let first = std::fs::read_to_string(&out).unwrap();
    assert_eq!(code(&["--config", out.to_str().unwrap()]), 0);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), first);
}

#[test]
fn missing_seed_is_drawn_and_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    assert_eq!(
        code(&[
            "sample",
            "--nr",
            "3",
            "--count",
            "2",
            "--out",
            out.to_str().unwrap()
        ]),
        0
    );
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(doc["config"]["seed"].is_u64());
    assert_eq!(doc["report"].as_array().unwrap().len(), 2);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .env("MFENTROPY_OUT_DIR", dir.path())
        .args(["sample", "--nr", "2", "--seed", "3", "--format", "csv"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("sample.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "state,component,re,im");
    assert_eq!(text.lines().count(), 1 + 4);
    assert!(dir.path().join("sample.csv.config.json").exists());
}

#[test]
fn fit_reads_scan_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cue.csv");
    let o = out.to_str().unwrap();
    let args = [
        "scan",
        "--nr",
        "4..7",
        "--samples",
        "2000",
        "--seed",
        "2",
        "--observables",
        "p2",
        "--out",
        o,
    ];
    assert_eq!(code(&args), 0);
    let stdout = run_ok(&["fit", "--input", o, "--observable", "p2", "--q", "2"]);
    let d2: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("D_2 = "))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!((d2 - 1.0).abs() < 0.1, "{stdout}");
    assert_eq!(code(&["fit", "--input", o, "--observable", "tau"]), 2);
    assert_eq!(
        code(&["fit", "--input", "/nonexistent.csv", "--observable", "p2"]),
        1
    );
}

#[test]
fn validate_passes() {
    let out = run_ok(&["validate", "--vectors", "4", "--seed", "5"]);
    assert!(!out.contains("FAIL"), "{out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS")).count(), 20);
}

#[test]
fn figure_commands_run_at_small_scale() {
    let out = run_ok(&["fig1", "--nr", "4..5", "--samples", "64", "--seed", "1"]);
    assert!(out.contains("series nu=half"));
    let out = run_ok(&[
        "fig1",
        "--ensemble",
        "manybody",
        "--nr",
        "4..5",
        "--samples",
        "16",
        "--seed",
        "1",
    ]);
    assert!(out.contains("series nu=1"));
    let out = run_ok(&[
        "fig2",
        "--gamma",
        "1/7",
        "--nr",
        "4..6",
        "--samples",
        "64",
        "--seed",
        "1",
    ]);
    assert!(out.contains("slope of log2|1-<S1>/<S>|"));
    assert_eq!(
        code(&[
            "fig2",
            "--ensemble",
            "cue",
            "--nr",
            "4..6",
            "--samples",
            "8"
        ]),
        2
    );
}
