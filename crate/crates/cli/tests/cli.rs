use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn casimir(args: &[&str]) -> Output {
    casimir_env(args, &[])
}

fn casimir_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_casimir"));
    cmd.args(args).env_remove("CASIMIR_FIXTURE_DIR");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn model<'a>(report: &'a Value, label: &str) -> &'a Value {
    report["models"]
        .as_array()
        .unwrap()
        .iter()
        .find(|m| m["model_label"] == label)
        .unwrap()
}

fn status_at(m: &Value, beta: f64) -> &Value {
    &m["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["beta"].as_f64() == Some(beta))
        .unwrap()["status"]
}

#[test]
fn theory_grid_has_fifteen_points() {
    let out = casimir(&["theory", "--pair", "Au:Ni", "--grid", "220:500:20"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect();
    assert_eq!(rows.len(), 15);
    assert!(rows[0].starts_with("220,"));
    assert!(rows[14].starts_with("500,"));
}

#[test]
fn theory_ideal_pair_matches_analytic_gradient() {
    let out = casimir(&[
        "theory",
        "--pair",
        "ideal:ideal",
        "--grid",
        "100",
        "--temperature",
        "1",
        "--radius",
        "61.71",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row = text.lines().last().unwrap();
    let g: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    // 2πR·π²ħc/(240a⁴), ħc in J·m, R and a in m, result in μN/m
    let (hbar_c, r, a) = (3.161_526_773e-26_f64, 61.71e-6_f64, 100e-9_f64);
    let pi = std::f64::consts::PI;
    let ideal = 2.0 * pi * r * pi * pi * hbar_c / (240.0 * a.powi(4)) * 1e6;
    assert!(((g - ideal) / ideal).abs() < 5e-3, "{g} vs {ideal}");
}

#[test]
fn theory_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let out = casimir(&[
        "theory",
        "--pair",
        "Ni:Ni",
        "--model",
        "generalized-plasma",
        "--grid",
        "300,400",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(path).unwrap();
    assert!(text.starts_with("# model=generalized_plasma\na_nm,grad_uN_per_m,err_uN_per_m\n"));
}

#[test]
fn exit_codes() {
    let out = casimir(&["theory", "--pair", "Au:Pt", "--grid", "300"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Pt"));
    let out = casimir(&[
        "theory",
        "--pair",
        "ideal:ideal",
        "--model",
        "drude",
        "--grid",
        "300",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = casimir(&[
        "theory",
        "--pair",
        "Au:Au",
        "--grid",
        "300",
        "--temperature",
        "1e-4",
    ]);
    assert_eq!(out.status.code(), Some(4));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "# label=x\n# R_um=40\n# T_K=300\na_nm,grad_uN_per_m,da_nm,dgrad_uN_per_m\n300,1,0.5,0.1\n290,1,0.5,0.1\n").unwrap();
    let out = casimir(&[
        "compare",
        bad.to_str().unwrap(),
        "--pair",
        "Au:Au",
        "--models",
        "plasma",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"));

    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "window = 1\n").unwrap();
    let out = casimir(&["-c", cfg.to_str().unwrap(), "kcoef", "0.5", "1", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn kcoef_examples() {
    let parse = |args: &[&str]| {
        let out = casimir(args);
        assert!(out.status.success());
        let text = stdout(&out);
        let vals: Vec<f64> = text
            .lines()
            .map(|l| l.split(" = ").nth(1).unwrap().parse().unwrap())
            .collect();
        (vals[0], vals[1])
    };
    let (k, _) = parse(&["kcoef", "0.95", "1", "1"]);
    assert!((k - 1.10).abs() < 0.01);
    let (_, xi) = parse(&["kcoef", "0.10", "1", "0"]);
    assert!((xi - 0.10).abs() < 1e-6);
    let (_, xi) = parse(&["kcoef", "0.95", "2", "3"]);
    assert!((xi - 3.905).abs() < 1e-3);
}

#[test]
fn compare_ni_ni_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out = casimir(&[
        "compare",
        "ni_ni.csv",
        "--pair",
        "Ni:Ni",
        "--models",
        "drude,plasma",
        "--beta",
        "0.95,0.67,0.10",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = read_json(&dir.path().join("report.json"));
    let drude = model(&report, "drude");
    let s = status_at(drude, 0.95);
    assert_eq!(s["status"], "excluded");
    assert_eq!(s["from_nm"], 223.0);
    assert!(s["to_nm"].as_f64().unwrap() < 550.0);
    let plasma = model(&report, "plasma");
    assert_ne!(status_at(plasma, 0.10)["status"], "excluded");
    assert!(plasma["agreement_level"].as_f64().unwrap() >= 0.90 - 1e-12);
    for name in [
        "drude.svg",
        "plasma.svg",
        "drude_band_0.95.csv",
        "plasma_differences.csv",
        "bundle.json",
    ] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let band = fs::read_to_string(dir.path().join("drude_band_0.67.csv")).unwrap();
    assert!(band.starts_with("a_nm,xi_uN_per_m\n223,"));
    let svg = fs::read_to_string(dir.path().join("drude.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 6);
}

#[test]
fn compare_au_ni_fixture_both_not_excluded() {
    let dir = tempfile::tempdir().unwrap();
    let out = casimir(&[
        "compare",
        "au_ni.csv",
        "--pair",
        "Au:Ni",
        "--models",
        "drude,plasma",
        "--beta",
        "0.10",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report = read_json(&dir.path().join("report.json"));
    for label in ["drude", "plasma"] {
        assert_ne!(
            status_at(model(&report, label), 0.10)["status"],
            "excluded",
            "{label}"
        );
    }
}

#[test]
fn compare_graphene_external_theory() {
    let dir = tempfile::tempdir().unwrap();
    let out = casimir(&[
        "compare",
        "graphene.csv",
        "--theory",
        "graphene_theory.csv",
        "--beta",
        "0.10,0.20",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = read_json(&dir.path().join("report.json"));
    let g = model(&report, "graphene");
    assert_eq!(g["interpolated"], true);
    assert_eq!(status_at(g, 0.10)["status"], "excluded");
    assert_ne!(status_at(g, 0.20)["status"], "excluded");
    assert!((g["agreement_level"].as_f64().unwrap() - 0.80).abs() < 1e-12);
}

#[test]
fn reports_are_byte_identical_across_runs_and_threads() {
    let run = |threads: &str| {
        let dir = tempfile::tempdir().unwrap();
        let out = casimir_env(
            &[
                "compare",
                "au_au.csv",
                "--pair",
                "Au:Au",
                "--models",
                "drude,plasma",
                "--out-dir",
                dir.path().to_str().unwrap(),
            ],
            &[("RAYON_NUM_THREADS", threads)],
        );
        assert!(out.status.success());
        (
            fs::read(dir.path().join("report.json")).unwrap(),
            fs::read(dir.path().join("bundle.json")).unwrap(),
            fs::read(dir.path().join("drude.svg")).unwrap(),
        )
    };
    let first = run("1");
    assert_eq!(first, run("1"));
    assert_eq!(first, run("4"));
}

#[test]
fn plot_from_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("cmp");
    let out = casimir(&[
        "compare",
        "ni_ni.csv",
        "--pair",
        "Ni:Ni",
        "--models",
        "plasma",
        "--beta",
        "0.67",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let plots = dir.path().join("plots");
    let out = casimir(&[
        "plot",
        out_dir.join("bundle.json").to_str().unwrap(),
        "--beta",
        "0.1,0.95",
        "--out-dir",
        plots.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let svg = fs::read_to_string(plots.join("plasma.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 4);
    assert!(plots.join("plasma_band_0.95.csv").exists());

    fs::write(out_dir.join("bundle.json"), "{\"schema_version\": 99}").unwrap();
    let out = casimir(&[
        "plot",
        out_dir.join("bundle.json").to_str().unwrap(),
        "--out-dir",
        plots.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn fixture_dir_override_and_config_materials() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("cu.csv"),
        "# label=Cu-Cu\n# R_um=50\n# T_K=300\na_nm,grad_uN_per_m,da_nm,dgrad_uN_per_m\n\
         300,20.0,0.5,1.0\n320,16.0,0.5,1.0\n340,13.0,0.5,1.0\n360,11.0,0.5,1.0\n",
    )
    .unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "window = 3\nbeta_grid = [0.1, 0.5]\n\n[materials.Cu]\nplasma = { plasma_frequency = 8.9 }\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = casimir_env(
        &[
            "-c",
            cfg.to_str().unwrap(),
            "compare",
            "cu.csv",
            "--pair",
            "Cu:Cu",
            "--models",
            "plasma",
            "--out-dir",
            out_dir.to_str().unwrap(),
        ],
        &[("CASIMIR_FIXTURE_DIR", dir.path().to_str().unwrap())],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = read_json(&out_dir.join("report.json"));
    assert_eq!(report["window"], 3);
    assert_eq!(report["betas"].as_array().unwrap().len(), 2);
}
