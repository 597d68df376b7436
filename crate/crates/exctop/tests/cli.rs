use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn exctop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exctop"))
        .args(args)
        .output()
        .expect("spawn exctop")
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn simulate(dir: &Path, extra: &[&str]) {
    let out = dir.to_str().unwrap();
    let mut args = vec![
        "simulate", "--ell", "0.1", "--dims", "64x48", "--seed", "11", "--out", out,
    ];
    args.extend_from_slice(extra);
    let res = exctop(&args);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
}

#[test]
fn missing_ell_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let res = exctop(&["simulate", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("--ell"));
    assert!(!dir.path().join("manifest.json").exists());
}

#[test]
fn simulate_is_byte_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        simulate(d.path(), &["--lambda", "-0.2", "--field-csv"]);
    }
    for f in [
        "excursion.pbm",
        "field.pgm",
        "field.json",
        "field.csv",
        "report.json",
        "report.csv",
    ] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert!(x == y, "{f} differs");
    }
    let manifest: Value =
        serde_json::from_slice(&std::fs::read(a.path().join("manifest.json")).unwrap()).unwrap();
    let listed: Vec<&str> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(listed.len(), 6);
    assert_eq!(manifest["seed"], 11);
}

#[test]
fn analyze_reproduces_simulate_report() {
    for (mode, fmt) in [("bounded", "raw"), ("torus", "plain"), ("bounded", "plain")] {
        let dir = tempfile::tempdir().unwrap();
        simulate(
            dir.path(),
            &["--mode", mode, "--pbm-format", fmt, "--eps", "0.02"],
        );
        let pbm = dir.path().join("excursion.pbm");
        let out = exctop(&[
            "analyze",
            pbm.to_str().unwrap(),
            "--eps",
            "0.02",
            "--mode",
            mode,
        ]);
        let original = std::fs::read(dir.path().join("report.json")).unwrap();
        assert!(out.stdout == original, "{mode}/{fmt}");
        let csv = exctop(&[
            "analyze",
            pbm.to_str().unwrap(),
            "--eps",
            "0.02",
            "--mode",
            mode,
            "--csv",
        ]);
        assert_eq!(
            csv.stdout,
            std::fs::read(dir.path().join("report.csv")).unwrap()
        );
    }
}

#[test]
fn high_level_gives_the_full_square() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), &["--lambda", "10"]);
    let bytes = std::fs::read(dir.path().join("excursion.pbm")).unwrap();
    assert!(bytes.starts_with(b"P4\n48 64\n"));
    assert!(bytes[9..].iter().all(|&b| b == 0xff));
    let report: Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["chi_bicov"], 1);
    assert_eq!(report["components_4"], 1);
    assert_eq!(report["holes_8"], 0);
}

#[test]
fn analyze_fixtures() {
    let single = json(&exctop(&["analyze", &fixture("single.pbm")]));
    assert_eq!(single["chi_bicov"], 1);
    assert_eq!(single["area"], 1.0);

    let ring = json(&exctop(&["analyze", &fixture("ring.pbm")]));
    assert_eq!(ring["chi_bicov"], 0);
    assert_eq!(ring["holes_8"], 1);
    assert_eq!(ring["components_4"], 1);
    assert_eq!(ring["per_inf"], 16.0);

    let empty = json(&exctop(&["analyze", &fixture("empty.pbm"), "--eps", "0.5"]));
    for key in ["chi_bicov", "chi_complex", "components_4", "holes_8"] {
        assert_eq!(empty[key], 0, "{key}");
    }
    for key in ["per_u1", "per_u2", "per_inf", "area"] {
        assert_eq!(empty[key], 0.0, "{key}");
    }
}

#[test]
fn malformed_pbm_names_the_offset() {
    let out = exctop(&["analyze", &fixture("malformed.pbm")]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("byte offset 15"), "{err}");
}

#[test]
fn predict_reports_both_conventions() {
    let v = json(&exctop(&["predict", "--mu", "1", "--lambda", "0,1"]));
    let l0 = &v["levels"][0];
    assert!(
        (l0["expected"]["chi"].as_f64().unwrap() - (1.0 / std::f64::consts::PI + 0.5)).abs()
            < 1e-12
    );
    assert_eq!(l0["expected_paper_phi"]["vol"], 0.0);
    assert_eq!(v["phi_convention"], "cdf");
    let ec = v["levels"][1]["densities"]["ec_density"].as_f64().unwrap();
    assert!((ec + 0.038510836890749).abs() < 1e-12);

    let p = json(&exctop(&[
        "predict",
        "--model",
        "se",
        "--ell",
        "0.1",
        "--lambda",
        "-1",
        "--paper-phi",
        "--window",
        "0,1,0,0.25",
    ]));
    assert_eq!(p["mu"], 100.0);
    assert_eq!(p["window"]["per_inf"], 2.5);
    assert_eq!(
        p["levels"][0]["expected"],
        p["levels"][0]["expected_paper_phi"]
    );
}

#[test]
fn predict_usage_errors() {
    assert_eq!(
        exctop(&["predict", "--mu", "1", "--model", "se", "--ell", "1", "--lambda", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(exctop(&["predict", "--lambda", "0"]).status.code(), Some(2));
    assert_eq!(
        exctop(&[
            "predict",
            "--mu",
            "1",
            "--lambda",
            "0",
            "--paper-phi",
            "--cdf-phi"
        ])
        .status
        .code(),
        Some(2)
    );
    // irregular model without override: runtime refusal
    let res = exctop(&[
        "predict",
        "--model",
        "matern-3/2",
        "--ell",
        "1",
        "--lambda",
        "0",
    ]);
    assert_eq!(res.status.code(), Some(1));
    assert!(exctop(&[
        "predict",
        "--model",
        "matern-3/2",
        "--ell",
        "1",
        "--lambda",
        "0",
        "--allow-irregular"
    ])
    .status
    .success());
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("run.toml");
    std::fs::write(&p, body).unwrap();
    p
}

const SMALL: &str = r#"
model = "squared-exponential"
ell = 0.1
lambdas = [-10.0, -0.5, 0.5]
dims = 64
eps = 0.015625
replicates = 8
seed = 4
mode = "torus"
sweep_eps = [0.0625, 0.03125, 0.015625]
"#;

#[test]
fn experiment_and_sweep_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let runs: Vec<_> = ["a", "b"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            let o = out.to_str().unwrap();
            for cmd in ["experiment", "sweep"] {
                let res = Command::new(env!("CARGO_BIN_EXE_exctop"))
                    .args([cmd, cfg.to_str().unwrap(), "--out", o])
                    .env("EXCTOP_THREADS", if *name == "a" { "1" } else { "3" })
                    .output()
                    .unwrap();
                assert!(
                    res.status.success(),
                    "{}",
                    String::from_utf8_lossy(&res.stderr)
                );
            }
            out
        })
        .collect();
    for f in ["summary.csv", "alternatives.csv", "sweep.csv"] {
        assert_eq!(
            std::fs::read(runs[0].join(f)).unwrap(),
            std::fs::read(runs[1].join(f)).unwrap(),
            "{f}"
        );
    }
    let summary = std::fs::read_to_string(runs[0].join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(
        lines.next(),
        Some("lambda,functional,mean,sd,se,predicted,z")
    );
    assert!(lines.next().unwrap().starts_with("-10,chi,0,0,0,"));
    assert_eq!(summary.lines().count(), 1 + 9);
    let sweep = std::fs::read_to_string(runs[0].join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 1 + 9);

    let manifest: Value =
        serde_json::from_slice(&std::fs::read(runs[0].join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "sweep");
    assert_eq!(manifest["config"]["ell"], 0.1);
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn invalid_config_lists_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let body = SMALL
        .replace("replicates = 8", "replicates = 1")
        .replace("eps = 0.015625", "eps = -1.0");
    let cfg = write_config(dir.path(), &body);
    let out = dir.path().join("out");
    let res = exctop(&[
        "experiment",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(1));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("replicates") && err.contains("eps"), "{err}");
    assert!(!out.join("manifest.json").exists());
}
