//! End-to-end tests of the `csa` binary: flag handling, config parsing,
//! artifact formats, exit codes, and run-to-run determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_csa"))
}

fn shipped_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    assert!(
        out.status.success(),
        "command failed.\nstdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn write_config(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).expect("write config");
    path
}

/// Field `idx` of the second (data) line of a two-line CSV record.
fn csv_field(csv: &str, idx: usize) -> String {
    let line = csv.lines().nth(1).expect("data row");
    line.split(',').nth(idx).expect("field").to_owned()
}

#[test]
fn analyze_reports_repetition_mixture_statistics() {
    let cfg = shipped_config("irsa_r13.toml");
    let out = run(&["analyze", "--config", cfg.to_str().unwrap()]);
    let text = stdout_of(&out);
    assert!(text.contains("n_bar = 3"), "mean length: {text}");
    assert!(text.contains("R = 0.333333333"), "rate: {text}");
    assert!(text.contains("dP = 3"), "load step: {text}");
    assert!(text.contains("A2_bar = 0.554016"), "pair weight: {text}");
    // Twofold repetition contributes its full selection probability to the
    // pair weight: matrix 11, d_min 2, A_2 = 1.
    assert!(text.contains("matrix 11  d_min = 2  A_2 = 1"), "{text}");
    assert!(text.contains("matrix 111111  d_min = 6  A_2 = 0"), "{text}");
}

#[test]
fn analyze_reports_parity_check_profile() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "spc32.toml",
        r#"
[ensemble]
id = "spc-3-2"
k = 2
mode = "explicit"

[[ensemble.entries]]
matrix = "101,011"
prob = 1.0
"#,
    );
    let out = run(&["analyze", "--config", cfg.to_str().unwrap()]);
    let text = stdout_of(&out);
    assert!(text.contains("R = 0.666666667"), "rate: {text}");
    assert!(text.contains("dP = 1.5"), "load step: {text}");
    assert!(text.contains("A2_bar = 3"), "pair weight: {text}");
    assert!(text.contains("d_min = 2  A_2 = 3"), "profile: {text}");
}

#[test]
fn analyze_json_carries_enumeration_counts() {
    let cfg = shipped_config("csa_k2_r13.toml");
    let out = run(&[
        "analyze",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).expect("json");
    assert_eq!(doc["k"], 2);
    assert_eq!(doc["mode"], "random");
    let rate = doc["rate"].as_f64().unwrap();
    assert!((rate - 1.0 / 3.0).abs() < 1e-6, "rate {rate}");
    let comps = doc["components"].as_array().unwrap();
    assert_eq!(comps.len(), 4);
    // Uniform-random (4, 2) generators: 54 of the 81 nonzero-column
    // matrices have rank 2 and no zero or repeated column pattern that
    // breaks the distance condition.
    assert_eq!(comps[1]["n"], 4);
    assert_eq!(comps[1]["qualifying_matrices"], 54);
    assert_eq!(comps[3]["qualifying_matrices"], 531366u64);
}

#[test]
fn threshold_of_parity_check_ensemble_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "spc32.toml",
        r#"
[ensemble]
id = "spc-3-2"
k = 2
mode = "explicit"

[[ensemble.entries]]
matrix = "101,011"
prob = 1.0
"#,
    );
    let out_base = dir.path().join("spc_threshold");
    let out = run(&[
        "threshold",
        "--config",
        cfg.to_str().unwrap(),
        "--tol",
        "1e-6",
        "--out",
        out_base.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(out_base.with_extension("csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "ensemble_id,k,R,G_star,G_star_sb,tol"
    );
    assert_eq!(csv_field(&csv, 0), "spc-3-2");
    let g_star: f64 = csv_field(&csv, 3).parse().unwrap();
    assert!((g_star - 1.0 / 3.0).abs() < 1e-4, "G* = {g_star}");
    // A (3, 2) single parity check has A_2 = 3, so k/(2*A2_bar) = 1/3.
    assert_eq!(csv_field(&csv, 4), "0.333333333");
}

#[test]
fn threshold_json_reports_matched_bound_for_rate_3_5() {
    let cfg = shipped_config("csa_k2_r35.toml");
    let out = run(&[
        "threshold",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).expect("json");
    assert_eq!(doc["ensemble_id"], "csa-k2-r35");
    assert_eq!(doc["k"], 2);
    assert!((doc["R"].as_f64().unwrap() - 0.6).abs() < 1e-9);
    let g_star = doc["G_star"].as_f64().unwrap();
    let bound = doc["G_star_sb"].as_f64().unwrap();
    // At this rate the iterative threshold sits on its stability bound
    // 9/22 = 0.40909...
    assert!((bound - 9.0 / 22.0).abs() < 1e-9, "bound {bound}");
    assert!((g_star - 0.4091).abs() < 1e-3, "G* {g_star}");
    assert!(g_star <= bound + 1e-9);
}

#[test]
fn repetition_only_ensembles_report_unbounded_stability() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "rep3.toml",
        r#"
[ensemble]
k = 1
mode = "explicit"

[[ensemble.entries]]
matrix = "111"
prob = 1.0
"#,
    );
    let out = run(&["threshold", "--config", cfg.to_str().unwrap()]);
    let csv = stdout_of(&out);
    assert_eq!(csv_field(&csv, 0), "ensemble");
    assert_eq!(csv_field(&csv, 4), "unbounded");
}

#[test]
fn fraction_probabilities_are_accepted() {
    let cfg = shipped_config("csa_k2_r35.toml");
    let out = run(&["analyze", "--config", cfg.to_str().unwrap()]);
    let text = stdout_of(&out);
    assert!(text.contains("n_bar = 3.33333333"), "mean length: {text}");
    assert!(text.contains("R = 0.6"), "rate: {text}");
    assert!(text.contains("P = 0.666666667"), "first prob: {text}");
}

#[test]
fn verify_scores_published_distribution() {
    let cfg = shipped_config("verify_irsa_r13.toml");
    let out = run(&["verify", "--config", cfg.to_str().unwrap()]);
    let csv = stdout_of(&out);
    assert_eq!(csv_field(&csv, 0), "verify-irsa-r13");
    let g_star: f64 = csv_field(&csv, 3).parse().unwrap();
    assert!((g_star - 0.8792).abs() < 1e-3, "G* = {g_star}");
    let bound: f64 = csv_field(&csv, 4).parse().unwrap();
    assert!((bound - 0.9025).abs() < 1e-4, "bound = {bound}");
}

#[test]
fn optimize_writes_result_and_audit_trail() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "opt_tiny.toml",
        r#"
[problem]
id = "opt-tiny"
k = 1
mode = "explicit"
candidates = ["11", "111"]
rate = "2/5"

[problem.de]
population = 8
generations = 6
"#,
    );
    let out_base = dir.path().join("artifacts/opt_tiny");
    let out = run(&[
        "optimize",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "7",
        "--out",
        out_base.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_base.with_extension("json")).unwrap())
            .expect("result json");
    assert_eq!(doc["id"], "opt-tiny");
    assert_eq!(doc["seed"], 7);
    assert_eq!(doc["population"], 8);
    assert_eq!(doc["candidates"], serde_json::json!(["11", "111"]));
    let pmf: Vec<f64> = doc["pmf"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(pmf.len(), 2);
    assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    // Rate 2/5 over lengths {2, 3} forces the even split 2.5 = (2+3)/2.
    for p in &pmf {
        assert!((p - 0.5).abs() < 1e-6, "pmf {pmf:?}");
    }
    assert!((doc["achieved_rate"].as_f64().unwrap() - 0.4).abs() < 1e-6);
    assert!(doc["G_star"].as_f64().unwrap() > 0.5);

    let history =
        std::fs::read_to_string(dir.path().join("artifacts/opt_tiny_history.csv")).unwrap();
    let lines: Vec<&str> = history.lines().collect();
    assert_eq!(lines[0], "generation,best_G_star");
    assert_eq!(lines.len(), 1 + 6 + 1, "initial scores plus 6 generations");
    let bests: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(bests.windows(2).all(|w| w[1] >= w[0] - 1e-12));
}

#[test]
fn simulate_runs_are_byte_identical_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = shipped_config("sim_crdsa_smoke.toml");
    let mut artifacts = Vec::new();
    for (name, seed) in [("a", "42"), ("b", "42"), ("c", "43")] {
        let out_base = dir.path().join(name).join("run");
        let out = run(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            seed,
            "--out",
            out_base.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        artifacts.push((
            std::fs::read(out_base.with_extension("csv")).unwrap(),
            std::fs::read(out_base.with_extension("json")).unwrap(),
        ));
    }
    assert_eq!(artifacts[0], artifacts[1], "same seed, same bytes");
    assert_ne!(
        artifacts[0].0, artifacts[2].0,
        "different seed should shuffle frames"
    );

    let csv = String::from_utf8(artifacts[0].0.clone()).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "G_requested,G_actual,M,N,trials,S_mean,S_stderr,PLR,avg_peel_iters"
    );
    assert_eq!(csv.lines().count(), 1 + 9, "nine load points");
}

#[test]
fn simulate_reports_low_loss_well_below_threshold() {
    // Twofold repetition decodes nearly every burst at 40% of its
    // threshold load even in a small frame.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "light.toml",
        r#"
[ensemble]
k = 1
mode = "explicit"

[[ensemble.entries]]
matrix = "11"
prob = 1.0

[sim]
n_slots = 200
trials = 50
g_grid = [0.2]
"#,
    );
    let out_base = dir.path().join("light");
    let out = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_base.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(out_base.with_extension("csv")).unwrap();
    let plr: f64 = csv_field(&csv, 7).parse().unwrap();
    assert!(plr < 0.05, "PLR = {plr}");
    let s_mean: f64 = csv_field(&csv, 5).parse().unwrap();
    let g_actual: f64 = csv_field(&csv, 1).parse().unwrap();
    assert!((s_mean - g_actual * (1.0 - plr)).abs() < 1e-9);

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_base.with_extension("json")).unwrap())
            .unwrap();
    assert_eq!(doc["points"], 1);
    assert!((doc["peak_S"].as_f64().unwrap() - s_mean).abs() < 1e-12);
}

#[test]
fn single_trial_leaves_stderr_blank() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "one.toml",
        r#"
[ensemble]
k = 1
mode = "explicit"

[[ensemble.entries]]
matrix = "11"
prob = 1.0

[sim]
n_slots = 50
trials = 1
g_grid = [0.3]
"#,
    );
    let out_base = dir.path().join("one");
    let out = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_base.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(out_base.with_extension("csv")).unwrap();
    assert_eq!(csv_field(&csv, 4), "1");
    assert_eq!(csv_field(&csv, 6), "", "stderr is undefined for one trial");
}

#[test]
fn exit_codes_distinguish_validation_failures() {
    // Missing [ensemble] section.
    let opt_cfg = shipped_config("opt_irsa_r13.toml");
    let out = run(&["threshold", "--config", opt_cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("[ensemble]"), "stderr: {err}");

    // Nonexistent file.
    let out = run(&["analyze", "--config", "/nonexistent/x.toml"]);
    assert_eq!(out.status.code(), Some(2));

    // Bad tolerance.
    let cfg = shipped_config("irsa_r12.toml");
    let out = run(&[
        "threshold",
        "--config",
        cfg.to_str().unwrap(),
        "--tol",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // simulate/optimize insist on --out.
    let sim_cfg = shipped_config("sim_crdsa_smoke.toml");
    let out = run(&["simulate", "--config", sim_cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("--out"),
        "stderr should point at the missing flag"
    );
}

#[test]
fn empty_ensemble_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "empty.toml",
        r#"
[ensemble]
k = 1
mode = "explicit"
entries = []
"#,
    );
    let out = run(&["analyze", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("no entries"), "stderr: {err}");
}

#[test]
fn mode_and_entry_fields_must_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "mixed.toml",
        r#"
[ensemble]
k = 2
mode = "random"

[[ensemble.entries]]
matrix = "1100,0111"
prob = 1.0
"#,
    );
    let out = run(&["analyze", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("explicit mode"), "stderr: {err}");
}

#[test]
fn shipped_ensemble_configs_analyze_cleanly() {
    for name in [
        "irsa_r13.toml",
        "irsa_r25.toml",
        "irsa_r12.toml",
        "csa_k2_r13.toml",
        "csa_k2_r25.toml",
        "csa_k2_r12.toml",
        "csa_k2_r35.toml",
        "sim_crdsa_smoke.toml",
        "sim_csa_r13_explicit.toml",
    ] {
        let cfg = shipped_config(name);
        let out = run(&["analyze", "--config", cfg.to_str().unwrap()]);
        assert!(
            out.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}
