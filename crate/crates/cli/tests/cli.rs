//! End-to-end tests of the `bundlecurv` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_bundlecurv");

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn run_config(command: &str, config: &Path, extra: &[&str]) -> Output {
    let mut args = vec![command, "--config", config.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn fatness_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let fat = write_config(dir.path(), "a.toml", "[triple]\ncatalog = \"t1s2\"\n");
    let v = json(&run_config("fatness", &fat, &[]));
    assert_eq!(v["fat"], true);
    assert!((v["deficit"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!(v["witness"].is_null());

    let thin = write_config(dir.path(), "b.toml", "[triple]\ncatalog = \"t1s3\"\n");
    let v = json(&run_config("fatness", &thin, &[]));
    assert_eq!(v["fat"], false);
    assert!(v["witness"]["bracket_norm"].as_f64().unwrap() < 1e-8);
}

#[test]
fn malformed_triple_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        "[triple]\nn = 4\nk_basis = [[3, 4]]\nh_basis = [[1, 2], [1, 3], [2, 3]]\n",
    );
    let out = run_config("fatness", &cfg, &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("residual"), "{}", stderr(&out));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "[triple]\ncatalog = \"t1s3\"\n[run]\nsampels = 4\n");
    let out = run_config("scan", &cfg, &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("sampels"), "{}", stderr(&out));
}

#[test]
fn certify_refuses_fat_bundles() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "[triple]\ncatalog = \"t1s2\"\n");
    let out = run_config("certify", &cfg, &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("deficit"), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
}

#[test]
fn certify_exact_mode_at_bi_invariant_metric() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "[triple]\ncatalog = \"t1s3\"\n[run]\nexact = true\neps = []\n");
    let v = json(&run_config("certify", &cfg, &[]));
    let certs = v["certificates"].as_array().unwrap();
    assert_eq!(certs.len(), 1);
    assert_eq!(certs[0]["mode"], "exact");
    assert!(certs[0]["k_m_value"].as_f64().unwrap().abs() < 1e-20);
}

#[test]
fn certify_schedule_reports_every_eps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        "[triple]\ncatalog = \"t1s3\"\n[metric]\nkind = \"random_spd\"\nseed = 7\n[run]\neps = [0.1, 0.05, 0.025]\n",
    );
    let v = json(&run_config("certify", &cfg, &[]));
    let certs = v["certificates"].as_array().unwrap();
    assert_eq!(certs.len(), 3);
    for c in certs {
        assert!(c["grad_residual"].as_f64().unwrap() < 1e-8);
        assert!(c["commute_residual"].as_f64().unwrap() < 1e-8);
        assert!(c["terms"]["k_m"].as_f64().unwrap() == c["k_m_value"].as_f64().unwrap());
    }
    let bad = write_config(dir.path(), "d.toml", "[triple]\ncatalog = \"t1s3\"\n[run]\neps = [0.1, -0.05]\n");
    assert_eq!(run_config("certify", &bad, &[]).status.code(), Some(1));
}

#[test]
fn scan_csv_and_validation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "[triple]\ncatalog = \"t1s3\"\n[run]\nsamples = 1000\n");
    let out = run_config("scan", &cfg, &[]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let floor: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("# floor = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(floor >= -1e-10);
    let counts: usize = text
        .lines()
        .skip_while(|l| *l != "bin_lo,bin_hi,count")
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(counts, 1000);

    let zero = write_config(dir.path(), "z.toml", "[triple]\ncatalog = \"t1s3\"\n[run]\nsamples = 0\n");
    assert_eq!(run_config("scan", &zero, &[]).status.code(), Some(1));
}

#[test]
fn sweep_rows_and_grid_validation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        "[triple]\ncatalog = \"t1s3\"\n[run]\nt_grid = [0.0, 0.25, 0.5, 0.75]\nbase_points = 20\nplanes_per_point = 10\n",
    );
    let out = run_config("sweep", &cfg, &[]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("t,"))
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0][1] >= -1e-10);

    for grid in ["[0.5, 1.0]", "[]"] {
        let bad = write_config(dir.path(), "b.toml", &format!("[triple]\ncatalog = \"t1s3\"\n[run]\nt_grid = {grid}\n"));
        assert_eq!(run_config("sweep", &bad, &[]).status.code(), Some(1), "grid {grid}");
    }
}

#[test]
fn out_flag_and_format_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "[triple]\ncatalog = \"t1s2\"\n");
    let path = dir.path().join("r.csv");
    let out = run_config("fatness", &cfg, &["--out", path.to_str().unwrap(), "--format", "csv"]);
    assert!(out.status.success() && out.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("# command = fatness\n"));
    assert!(text.contains("deficit,fat,bracket_norm,x,y"));
}

#[test]
fn seed_override_changes_scan() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "[triple]\ncatalog = \"t1s3\"\n[run]\nsamples = 50\n");
    let a = run_config("scan", &cfg, &["--seed", "1"]).stdout;
    let b = run_config("scan", &cfg, &["--seed", "2"]).stdout;
    assert_ne!(a, b);
}
