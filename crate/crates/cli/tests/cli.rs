use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sphmax(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sphmax"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn with_config(dir: &Path, cmd: &str, text: &str) -> Output {
    let path = dir.join("cfg.json");
    fs::write(&path, text).unwrap();
    sphmax(&[cmd, "--config", path.to_str().unwrap(), "--out", "out"], dir)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&sphmax(&["frobnicate"], dir.path())), 2);
    assert_eq!(code(&sphmax(&["avg", "--seed", "minus-one"], dir.path())), 2);
}

#[test]
fn malformed_configs_exit_3_with_a_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = with_config(dir.path(), "avg", "");
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("`$`"), "{}", stderr(&out));

    let out = with_config(dir.path(), "avg", "{}");
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("`experiment`"), "{}", stderr(&out));

    let out = with_config(dir.path(), "avg", r#"{"experiment": "fourier"}"#);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("`experiment`"));

    let out = with_config(dir.path(), "avg", r#"{"experiment": "avg", "grid": {"n": "big", "half_width": 2}}"#);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("`grid.n`"), "{}", stderr(&out));

    let out = with_config(dir.path(), "avg", r#"{"experiment": "avg", "bogus": 1}"#);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("bogus"));
}

#[test]
fn invalid_parameters_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = with_config(
        dir.path(),
        "gen-measure",
        r#"{"experiment": "gen-measure", "measure": {"kind": "cantor", "ratio": 0.7, "depth": 3}}"#,
    );
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    let out = with_config(dir.path(), "avg", r#"{"experiment": "avg", "t": 1.5}"#);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn oversized_measure_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = with_config(
        dir.path(),
        "gen-measure",
        r#"{"experiment": "gen-measure", "measure": {"kind": "product", "factors": [
            {"kind": "cantor", "ratio": 0.25, "depth": 12},
            {"kind": "cantor", "ratio": 0.25, "depth": 12}]}}"#,
    );
    assert_eq!(code(&out), 4, "{}", stderr(&out));
}

#[test]
fn exponents_default_reports_case_i() {
    let dir = tempfile::tempdir().unwrap();
    let out = sphmax(&["exponents", "--out", "out"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rep = read_json(&dir.path().join("out/exponents.json"));
    assert_eq!(rep["interval"]["lo"], 1.5);
    assert_eq!(rep["interval"]["hi"], "inf");
    assert_eq!(rep["interval"]["case_label"], "i");

    let manifest = read_json(&dir.path().join("out/manifest.json"));
    assert_eq!(manifest["experiment"], "exponents");
    assert_eq!(manifest["config"]["d"], 3);
    assert_eq!(manifest["outputs"][0]["file"], "exponents.json");
}

#[test]
fn exponents_region_raster() {
    let dir = tempfile::tempdir().unwrap();
    let out = with_config(
        dir.path(),
        "exponents",
        r#"{"experiment": "exponents", "d": 3, "region": {"axes": "exponent", "s": [1, 3], "p": [1, 4], "nx": 5, "ny": 4}}"#,
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("out/region.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 5 * 4);
}

#[test]
fn runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"experiment": "opnorm", "family": "random_atoms",
            "mu": {"kind": "ball_sample", "d": 2, "radius": 0.5, "n": 300},
            "grid": {"n": 128, "half_width": 2}}"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    for out in ["a", "b"] {
        let o = sphmax(&["opnorm", "--config", cfg, "--seed", "7", "--out", out], dir.path());
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let o = sphmax(&["opnorm", "--config", cfg, "--seed", "7", "--threads", "1", "--out", "c"], dir.path());
    assert_eq!(code(&o), 0);
    let a = fs::read(dir.path().join("a/manifest.json")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b/manifest.json")).unwrap());
    assert_eq!(a, fs::read(dir.path().join("c/manifest.json")).unwrap());

    let o = sphmax(&["opnorm", "--config", cfg, "--seed", "8", "--out", "d"], dir.path());
    assert_eq!(code(&o), 0);
    let d = read_json(&dir.path().join("d/manifest.json"));
    assert_eq!(d["seed"], 8);
    assert_ne!(a, fs::read(dir.path().join("d/manifest.json")).unwrap());
}

#[test]
fn measure_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = sphmax(&["gen-measure", "--out", "m"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let original = read_json(&dir.path().join("m/measure.json"));
    for file in ["m/measure.json", "m/measure.bin"] {
        let cfg = format!(
            r#"{{"experiment": "gen-measure", "measure": {{"kind": "file", "path": "{}"}}}}"#,
            dir.path().join(file).display()
        );
        let out = with_config(dir.path(), "gen-measure", &cfg);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert_eq!(read_json(&dir.path().join("out/measure.json")), original);
    }
}

#[test]
fn avg_writes_field_and_run_record() {
    let dir = tempfile::tempdir().unwrap();
    let out = with_config(
        dir.path(),
        "avg",
        r#"{"experiment": "avg", "grid": {"n": 64, "half_width": 2}, "measure":
            {"kind": "sphere", "d": 2, "t": 0.5, "n_points": 256}}"#,
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let manifest = read_json(&dir.path().join("out/manifest.json"));
    assert_eq!(manifest["resolved"]["operator"], "spherical_average");
    assert_eq!(manifest["resolved"]["grid"]["n_per_axis"], 64);
    let csv = fs::read_to_string(dir.path().join("out/avg.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 64 * 64);
}

#[test]
fn counterexample_stein_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = with_config(
        dir.path(),
        "counterexample",
        r#"{"experiment": "counterexample", "construction": {"kind": "stein", "d": 2, "s": 1.5, "p": 2.5}}"#,
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(dir.path().join("out/divergence_0.csv").exists());
}

#[test]
fn quick_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = sphmax(&["suite", "--quick", "--out", "s"], dir.path());
    assert_eq!(code(&out), 0, "{}{}", String::from_utf8_lossy(&out.stdout), stderr(&out));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 10);
    let report = read_json(&dir.path().join("s/suite.json"));
    assert_eq!(report["outcomes"].as_array().unwrap().len(), 10);
}
