//! End-to-end runs of the `ouestim` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ouestim(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ouestim"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("OUESTIM_THREADS", "2")
        .output()
        .unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn selftest_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = ouestim(&["selftest"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn verify_limits_brownian_case() {
    let dir = tempfile::tempdir().unwrap();
    let out = ouestim(
        &["verify-limits", "--kernel", "fbm", "--hurst", "0.5", "--theta", "1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let (header, rows) = csv_rows(&dir.path().join("limits.csv"));
    assert_eq!(
        header,
        [
            "check_name",
            "kernel",
            "params",
            "t",
            "value",
            "reference",
            "gap",
            "pass"
        ]
    );
    let j0 = rows.iter().find(|r| r[0] == "J_0").expect("J_0 row");
    assert_eq!(j0[5].parse::<f64>().unwrap(), 1.0);
    assert!(j0[6].parse::<f64>().unwrap() <= 1e-6);
    assert!(rows.iter().all(|r| r[7] == "true"));
}

#[test]
fn verify_limits_reports_failures_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = ouestim(
        &[
            "verify-limits",
            "--kernel",
            "sfbm",
            "--hurst",
            "0.7",
            "--n-quad",
            "1024",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    let (_, rows) = csv_rows(&dir.path().join("limits.csv"));
    assert!(rows.iter().any(|r| r[7] == "false"));
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["simulate", "--bogus", "1"][..],
        &["simulate", "--kernel", "fbm"],
        &["mc-cauchy", "--T", "5,10", "--seed", "1"],
        &["simulate", "--kernel", "fbm", "--hurst", "1.5", "--seed", "1"],
        &["simulate", "--kernel", "levy", "--seed", "1"],
        &["simulate", "--T", "5,2", "--seed", "1"],
    ] {
        let out = ouestim(args, dir.path());
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    let help = ouestim(&["--help"], dir.path());
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn simulate_schema_and_config_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# defaults\nkernel = sfbm\nhurst = 0.3\nT = 2\nn-per-unit = 50\nreplicates = 3\nseed = 9\n",
    )
    .unwrap();
    let out = ouestim(
        &["simulate", "--config", cfg.to_str().unwrap(), "--hurst", "0.6"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let (header, rows) = csv_rows(&dir.path().join("paths.csv"));
    assert_eq!(header, ["replicate", "t", "g", "x_or_xi_scaled"]);
    assert_eq!(rows.len(), 3 * 101);
    assert!(rows
        .iter()
        .filter(|r| r[1].parse::<f64>().unwrap() == 0.0)
        .all(|r| r[2].parse::<f64>().unwrap() == 0.0));

    let summary = json(&dir.path().join("simulate_summary.json"));
    let c = &summary["config"];
    assert_eq!(c["kernel"], "sfbm");
    assert_eq!(c["hurst"], 0.6);
    assert_eq!(c["seed"], 9);
    assert_eq!(summary["result"]["x_or_xi_scaled"], "x");
    assert_eq!(summary["result"]["sampler_used"], "cholesky");

    fs::write(&cfg, "colour = blue\n").unwrap();
    let out = ouestim(
        &["simulate", "--config", cfg.to_str().unwrap(), "--seed", "1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn estimate_reads_driver_csv() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("driver.csv");
    let mut text = String::from("t,g\n");
    for k in 0..=4096 {
        let t = k as f64 / 4096.0;
        text.push_str(&format!("{t},{t}\n"));
    }
    fs::write(&input, text).unwrap();
    let out = ouestim(
        &["estimate", "--input", input.to_str().unwrap(), "--theta", "1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv_rows(&dir.path().join("estimate.csv"));
    assert_eq!(
        header,
        [
            "t",
            "theta_hat",
            "s_stable",
            "s_naive_or_empty",
            "d",
            "z",
            "psi",
            "r_scaled"
        ]
    );
    assert_eq!(rows.len(), 1);
    assert!((rows[0][1].parse::<f64>().unwrap() - 1.947646).abs() < 1e-4);

    fs::write(&input, "t,g\n0,0\n0.5,0\n1,0\n").unwrap();
    let out = ouestim(&["estimate", "--input", input.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2), "degenerate path");
}

#[test]
fn simulated_paths_round_trip_through_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let common = [
        "--kernel",
        "fbm",
        "--hurst",
        "0.7",
        "--T",
        "4",
        "--n-per-unit",
        "64",
        "--seed",
        "5",
    ];
    let sim = dir.path().join("sim");
    assert_eq!(
        ouestim(&[&["simulate", "--replicates", "2"][..], &common].concat(), &sim)
            .status
            .code(),
        Some(0)
    );
    let est = dir.path().join("est");
    let input = sim.join("paths.csv");
    let args = [
        "estimate",
        "--input",
        input.to_str().unwrap(),
        "--replicate",
        "1",
        "--T",
        "4",
    ];
    assert_eq!(ouestim(&args, &est).status.code(), Some(0));
    let direct = dir.path().join("direct");
    assert_eq!(
        ouestim(&[&["estimate", "--replicate", "1"][..], &common].concat(), &direct)
            .status
            .code(),
        Some(0)
    );
    let a = csv_rows(&est.join("estimate.csv")).1;
    let b = csv_rows(&direct.join("estimate.csv")).1;
    let (x, y): (f64, f64) = (a[0][1].parse().unwrap(), b[0][1].parse().unwrap());
    assert!((x - y).abs() <= 1e-12 * x.abs(), "{x} vs {y}");
}

#[test]
fn mc_outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "mc-cauchy",
        "--kernel",
        "fbm",
        "--hurst",
        "0.7",
        "--theta",
        "1",
        "--T",
        "10",
        "--n-per-unit",
        "410",
        "--replicates",
        "2000",
        "--seed",
        "42",
    ];
    let first = ouestim(&args, dir.path());
    assert_eq!(first.status.code(), Some(0));
    let json_a = fs::read(dir.path().join("cauchy_summary.json")).unwrap();
    let csv_a = fs::read(dir.path().join("cauchy.csv")).unwrap();
    assert_eq!(ouestim(&args, dir.path()).status.code(), Some(0));
    assert_eq!(json_a, fs::read(dir.path().join("cauchy_summary.json")).unwrap());
    assert_eq!(csv_a, fs::read(dir.path().join("cauchy.csv")).unwrap());

    let summary = json(&dir.path().join("cauchy_summary.json"));
    assert_eq!(summary["result"]["horizons"][0]["valid"], 2000);
    let (header, rows) = csv_rows(&dir.path().join("cauchy.csv"));
    assert_eq!(
        header,
        ["replicate", "theta_hat", "s_stable", "s_naive_or_empty", "normalized"]
    );
    assert_eq!(rows.len(), 2000);
}

#[test]
fn mc_consistency_schema() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "mc-consistency",
        "--kernel",
        "bifbm",
        "--hurst",
        "0.7",
        "--k",
        "0.8",
        "--T",
        "2,4",
        "--n-per-unit",
        "32",
        "--replicates",
        "20",
        "--seed",
        "4",
    ];
    assert_eq!(ouestim(&args, dir.path()).status.code(), Some(0));
    let (header, rows) = csv_rows(&dir.path().join("consistency.csv"));
    assert_eq!(header, ["replicate", "t", "theta_hat", "abs_error", "degenerate"]);
    assert_eq!(rows.len(), 40);
    let summary = json(&dir.path().join("consistency_summary.json"));
    assert_eq!(summary["config"]["kernel"], "bifbm");
    assert_eq!(summary["result"]["horizons"].as_array().unwrap().len(), 2);
}
