use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lodict(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lodict"))
        .args(args)
        .env("LODICT_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_then_recover_dictionary_instance() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst");
    let gen = lodict(&[
        "generate", "dictionary", "--m", "30", "--n", "30", "--r0", "2", "--dict-rank", "4", "--seed", "3", "--out",
        path(&inst),
    ]);
    assert!(gen.status.success(), "{}", String::from_utf8_lossy(&gen.stderr));
    for f in ["X.txt", "L0.txt", "S0.txt", "omega.txt", "A.txt", "meta.json"] {
        assert!(inst.join(f).exists(), "missing {f}");
    }

    let res_dir = dir.path().join("res");
    let out = lodict(&[
        "recover",
        path(&inst.join("X.txt")),
        "--dict",
        path(&inst.join("A.txt")),
        "--out",
        path(&res_dir),
    ]);
    let summary = stdout_json(&out);
    assert_eq!(summary["converged"], true);
    assert_eq!(summary["rows"], 30);
    assert!(res_dir.join("L.txt").exists());
    assert!(res_dir.join("Z.txt").exists());

    let l = lodict::linalg::text::load_matrix(&res_dir.join("L.txt")).unwrap();
    let l0 = lodict::linalg::text::load_matrix(&inst.join("L0.txt")).unwrap();
    assert!(lodict::linalg::relative_diff(&l, &l0) < 1e-4);
}

#[test]
fn certify_reports_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst");
    assert!(lodict(&["generate", "dictionary", "--seed", "1", "--out", path(&inst)]).status.success());
    let report = stdout_json(&lodict(&["certify", path(&inst)]));
    assert!(report["psi"].as_f64().unwrap() < 1.0);
    assert!(report["report"]["satisfied"].is_boolean());
    assert!(report["report"]["cond_c_value"].as_f64().is_some());
}

#[test]
fn coherence_of_generated_union() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("u");
    let gen = lodict(&[
        "generate", "union", "--m", "40", "--n", "60", "--k", "2", "--r0", "4", "--out", path(&inst),
    ]);
    assert!(gen.status.success());
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(inst.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["labels"].as_array().unwrap().len(), 60);

    let report = stdout_json(&lodict(&["coherence", path(&inst.join("L0.txt"))]));
    assert_eq!(report["rank_used"], 4);
    let mu1 = report["mu1"].as_f64().unwrap();
    assert!((1.0..=10.0).contains(&mu1), "mu1 = {mu1}");
}

#[test]
fn pursuit_summary_and_nonconvergence_exit() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("u");
    assert!(lodict(&[
        "generate", "union", "--m", "40", "--n", "60", "--k", "2", "--r0", "4", "--rho", "0.02", "--out", path(&inst),
    ])
    .status
    .success());
    let summary = stdout_json(&lodict(&["pursuit", path(&inst.join("X.txt"))]));
    assert_eq!(summary["rank_estimate"], 4);

    // one iteration cannot converge
    let out = lodict(&["recover", path(&inst.join("X.txt")), "--max-iters", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn phase_grid_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("grid.cfg");
    std::fs::write(
        &cfg,
        "m = 20\nn = 30\nk = 2\nrank_fracs = 0.1\ncorruption_fracs = 0.01, 0.5\ntrials = 2\nmethods = rpca\n",
    )
    .unwrap();
    let csv_path = dir.path().join("grid.csv");
    let out = lodict(&["phase-grid", "--config", path(&cfg), "--out", path(&csv_path)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# generated_unix="));
    assert!(lines[1].starts_with("method,"));
    assert_eq!(lines.len(), 2 + 2);

    let printed = lodict(&["phase-grid", "--config", path(&cfg), "--print-config"]);
    assert!(String::from_utf8_lossy(&printed.stdout).contains("trials = 2"));
}

#[test]
fn coherent_demo_summary_json() {
    let out = lodict(&["fig3-demo", "--p-values", "0", "--seeds", "0", "--summary", "--format", "json"]);
    let v = stdout_json(&out);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["p"], 0);
    assert_eq!(v["config"]["lrr_lambda"], 0.08);
}

#[test]
fn small_studies_emit_tables() {
    let zipf = lodict(&["zipf", "--num-matrices", "5", "--dim-min", "20", "--dim-max", "30", "--format", "json"]);
    let v = stdout_json(&zipf);
    assert!(v["rows"][0]["c1_mean"].as_f64().is_some());

    let mu3a = lodict(&["mu3a", "--axis", "vary_n", "--values", "30,40", "--trials", "1"]);
    assert!(mu3a.status.success(), "{}", String::from_utf8_lossy(&mu3a.stderr));
    let text = String::from_utf8(mu3a.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 2);
}

#[test]
fn invalid_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "1 2\n3\n").unwrap();
    let out = lodict(&["recover", path(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let out = lodict(&["mu3a", "--axis", "sideways"]);
    assert_eq!(out.status.code(), Some(2));
}
