use std::path::Path;
use std::process::{Command, Output};

use pbom::cli::parse_csv;

fn pbom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pbom"))
        .args(args)
        .env_remove("PBOM_WORKERS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn model_prints_json() {
    let o = pbom(&["model", "--set", "zeta=1e-3"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["params"]["zeta"].as_f64(), Some(1e-3));
    let (u, w) = (v["u"].as_f64().unwrap(), v["v"].as_f64().unwrap());
    assert!((u * u - w * w - 1.0).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&pbom(&["model", "--set", "kappa=1"])), 2);
    assert_eq!(code(&pbom(&["model", "--set", "gamma=-1"])), 2);
    assert_eq!(code(&pbom(&["model", "--set", "n_t=1000"])), 3);
    assert_eq!(code(&pbom(&["steady", "--set", "g=8.4e-7"])), 4);
    assert_eq!(code(&pbom(&["spectrum", "--kind", "bogus"])), 2);
    assert_eq!(code(&pbom(&["fig", "fig1"])), 2);
    assert_eq!(code(&pbom(&["nonsense"])), 2);
    assert_eq!(code(&pbom(&["--help"])), 0);
    let o = pbom(&["steady", "--set", "g=8.4e-7"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("eigenvalues"));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"zeta": 1e-3, "points": 9, "omega_min": 0.5}"#).unwrap();
    let out = dir.path().join("sub/s.csv");
    let o = pbom(&[
        "spectrum",
        "--config",
        cfg.to_str().unwrap(),
        "--omega-max",
        "1.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = parse_csv(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(header, ["omega_over_Omega", "S_x_closed", "S_x_engine"]);
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[0][0], 0.5);
    assert_eq!(rows[8][0], 1.5);
    for r in &rows {
        assert!((r[1] - r[2]).abs() <= 1e-9 * r[1]);
    }

    std::fs::write(&cfg, r#"{"zeta": 1e-3, "bogus": 1}"#).unwrap();
    assert_eq!(code(&pbom(&["model", "--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn steady_matches_library() {
    let o = pbom(&["steady"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["n_phonon"].as_f64().unwrap() - 14.059).abs() < 1e-3);
    assert_eq!(v["stability"]["stable"].as_bool(), Some(true));
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

#[test]
fn fig_outputs_independent_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(
        code(&pbom(&["fig", "fig9", "--out", a.to_str().unwrap(), "--workers", "1"])),
        0
    );
    let o = Command::new(env!("CARGO_BIN_EXE_pbom"))
        .args(["fig", "fig9", "--out", b.to_str().unwrap()])
        .env("PBOM_WORKERS", "3")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let (fa, fb) = (files(&a), files(&b));
    assert_eq!(fa.len(), 4);
    assert_eq!(fa, fb);
    let manifest: serde_json::Value =
        serde_json::from_slice(&fa.iter().find(|f| f.0 == "fig9_manifest.json").unwrap().1).unwrap();
    assert_eq!(manifest["curves"].as_array().unwrap().len(), 3);
}

#[test]
fn bad_worker_env() {
    let o = Command::new(env!("CARGO_BIN_EXE_pbom"))
        .args([
            "fig",
            "fig2a",
            "--out",
            tempfile::tempdir().unwrap().path().to_str().unwrap(),
        ])
        .env("PBOM_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn sweep_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    let config = pbom::sweep::SweepConfig {
        name: "grid".into(),
        base: pbom::PhysicalParams::default(),
        curves: vec![],
        axis1: Some(pbom::sweep::Axis::new("t", vec![10.0, 150.0])),
        axis2: Some(pbom::sweep::Axis::new("zeta", vec![4e-4, 1e-3])),
        observables: vec![pbom::sweep::Observable::NPhonon, pbom::sweep::Observable::Stability],
        spectrum: None,
    };
    std::fs::write(&cfg, serde_json::to_string(&config).unwrap()).unwrap();
    let out = dir.path().join("out");
    let o = pbom(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--workers",
        "2",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let names: Vec<String> = files(&out).into_iter().map(|f| f.0).collect();
    assert_eq!(names.len(), 2, "{names:?}");
    let csv = out.join(names.iter().find(|n| n.ends_with(".csv")).unwrap());
    let (header, rows) = parse_csv(&std::fs::read_to_string(csv).unwrap()).unwrap();
    assert_eq!(header, ["T_over_omega_t", "zeta", "n_phonon", "max_re_lambda"]);
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[3] < 0.0));
}
