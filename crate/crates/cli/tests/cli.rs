use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn vskf(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vskf"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = vskf(dir, args);
    assert!(
        out.status.success(),
        "vskf {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Reduced grids so a reconstruction takes a fraction of a second.
const SMALL: &str = r#"{
    "pipeline": {"inversion": {"landweber": {"pad_side": 640, "output_side": 64, "max_iterations": 100}}}
}"#;

fn small_config(dir: &Path) -> &'static str {
    fs::write(dir.join("small.json"), SMALL).unwrap();
    "small.json"
}

fn data_rows(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn simulate_stix_gives_sixty_rows() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["simulate", "--out", "sim"]);
    let csv = tmp.path().join("sim/visibilities.csv");
    assert_eq!(data_rows(&csv), 60);
    assert!(fs::read_to_string(&csv).unwrap().starts_with("u,v,re,im\n"));
    assert_eq!(json(&tmp.path().join("sim/report.json"))["rows"], 60);
}

#[test]
fn simulate_fibonacci_gives_hundred_rows() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("fib.json"),
        r#"{"sampling": {"kind": "fibonacci", "n": 100, "radius": 0.0702}}"#,
    )
    .unwrap();
    ok(tmp.path(), &["simulate", "--config", "fib.json", "--out", "sim"]);
    assert_eq!(data_rows(&tmp.path().join("sim/visibilities.csv")), 100);
}

#[test]
fn simulate_rerun_is_byte_identical() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("noisy.json"), r#"{"noise_fraction": 0.02}"#).unwrap();
    for args in [
        vec!["--out", "a"],
        vec!["--out", "b"],
        vec!["--out", "c", "--config", "noisy.json"],
        vec!["--out", "d", "--config", "noisy.json"],
    ] {
        let mut full = vec!["simulate", "--seed", "5"];
        full.extend(args);
        ok(tmp.path(), &full);
    }
    let read = |d: &str| fs::read(tmp.path().join(d).join("visibilities.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_eq!(read("c"), read("d"));
    assert_ne!(read("a"), read("c"));
}

#[test]
fn missing_input_is_io_error_with_exit_two() {
    let tmp = TempDir::new().unwrap();
    let out = vskf(tmp.path(), &["pipeline", "--input", "absent.csv", "--out", "x"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["code"], "E_IO");
    assert!(err["message"].as_str().unwrap().contains("absent.csv"));
}

#[test]
fn usage_and_config_errors_exit_two() {
    let tmp = TempDir::new().unwrap();
    let out = vskf(tmp.path(), &["reconstruct"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(serde_json::from_slice::<Value>(&out.stderr).unwrap()["code"], "E_USAGE");

    fs::write(tmp.path().join("bad.json"), r#"{"seeed": 1}"#).unwrap();
    let out = vskf(tmp.path(), &["simulate", "--config", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seeed"));

    let out = vskf(tmp.path(), &["invert", "--out", "x"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn print_config_reflects_flag_overrides() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("c.json"), r#"{"seed": 3, "pipeline": {"vsk": true}}"#).unwrap();
    let out = ok(
        tmp.path(),
        &[
            "pipeline",
            "--config",
            "c.json",
            "--seed",
            "11",
            "--vsk",
            "off",
            "--print-config",
        ],
    );
    let cfg: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(cfg["seed"], 11);
    assert_eq!(cfg["pipeline"]["vsk"], false);
    assert_eq!(cfg["mode"], "pipeline");
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn vsk_flag_selects_algorithm_label() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path());
    ok(tmp.path(), &["simulate", "--out", "sim"]);
    for (flag, label) in [("off", "Land-RBF"), ("on", "Land-VSK")] {
        let out = format!("rec_{flag}");
        ok(
            tmp.path(),
            &[
                "pipeline",
                "--config",
                cfg,
                "--input",
                "sim/visibilities.csv",
                "--vsk",
                flag,
                "--out",
                &out,
            ],
        );
        let report = json(&tmp.path().join(&out).join("report.json"));
        assert_eq!(report["algorithm"], label);
        assert_eq!(report["config"]["pipeline"]["vsk"], flag == "on");
    }
}

#[test]
fn pipeline_writes_all_outputs_and_is_reproducible() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path());
    ok(tmp.path(), &["simulate", "--out", "sim"]);
    for out in ["r1", "r2"] {
        ok(
            tmp.path(),
            &[
                "pipeline",
                "--config",
                cfg,
                "--input",
                "sim/visibilities.csv",
                "--truth",
                "sim/truth.json",
                "--iterlog",
                "--out",
                out,
            ],
        );
    }
    let r1 = tmp.path().join("r1");
    for f in [
        "image.txt",
        "image.json",
        "image.pgm",
        "surface_re.txt",
        "surface_im.txt",
        "surface_modulus.txt",
        "surface.json",
        "diagnostics.json",
        "report.json",
        "iterations.csv",
    ] {
        assert!(r1.join(f).exists(), "missing {f}");
    }
    let report = json(&r1.join("report.json"));
    assert!(report["rrmse"].as_f64().unwrap() > 0.0);
    assert_eq!(report["config"]["io"]["iterlog"], true);
    let iters = report["iterations"].as_u64().unwrap() as usize;
    assert_eq!(data_rows(&r1.join("iterations.csv")), iters);
    let diag = json(&r1.join("diagnostics.json"));
    for key in [
        "spectral_ratio_classic",
        "spectral_ratio_vsk",
        "cond_classic",
        "cond_vsk",
        "prop2_min_eig",
        "rrmse",
    ] {
        assert!(diag.get(key).is_some(), "diagnostics lacks {key}");
    }
    for f in ["image.txt", "iterations.csv", "surface_modulus.txt"] {
        assert_eq!(
            fs::read(r1.join(f)).unwrap(),
            fs::read(tmp.path().join("r2").join(f)).unwrap(),
            "{f} differs"
        );
    }
}

#[test]
fn single_source_peak_lands_within_two_arcsec() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("single.json"),
        r#"{"source": {"sources": [{"x_p": [10.0, -5.0], "fwhm": 11.0, "flux": 10000.0}]}}"#,
    )
    .unwrap();
    ok(tmp.path(), &["simulate", "--config", "single.json", "--out", "sim"]);
    ok(
        tmp.path(),
        &[
            "pipeline",
            "--config",
            "single.json",
            "--input",
            "sim/visibilities.csv",
            "--vsk",
            "on",
            "--out",
            "rec",
        ],
    );
    let report = json(&tmp.path().join("rec/report.json"));
    assert_eq!(report["algorithm"], "Land-VSK");
    let (x, y) = (
        report["peak"]["x"].as_f64().unwrap(),
        report["peak"]["y"].as_f64().unwrap(),
    );
    assert!((x - 10.0).hypot(y + 5.0) <= 2.0, "peak at ({x}, {y})");
    assert_eq!(report["epsilon"], 0.01);

    ok(tmp.path(), &["paramfit", "--input", "rec/image.txt", "--out", "fit"]);
    let fit = json(&tmp.path().join("fit/sources.json"));
    let s = &fit["sources"][0];
    let (cx, cy) = (s["x_p"][0].as_f64().unwrap(), s["x_p"][1].as_f64().unwrap());
    assert!((cx - 10.0).hypot(cy + 5.0) <= 2.0);
}

#[test]
fn interpolate_then_invert_matches_pipeline() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path());
    ok(tmp.path(), &["simulate", "--out", "sim"]);
    let input = ["--config", cfg, "--input", "sim/visibilities.csv"];
    ok(tmp.path(), &[&["interpolate"][..], &input, &["--out", "surf"]].concat());
    assert!(
        json(&tmp.path().join("surf/surface.json"))["support_radius"]
            .as_f64()
            .unwrap()
            > 0.07
    );
    ok(
        tmp.path(),
        &["invert", "--config", cfg, "--input", "surf", "--out", "img"],
    );
    ok(tmp.path(), &[&["pipeline"][..], &input, &["--out", "full"]].concat());
    assert_eq!(
        fs::read(tmp.path().join("img/image.txt")).unwrap(),
        fs::read(tmp.path().join("full/image.txt")).unwrap()
    );
}

#[test]
fn repeat_runs_seeds_independently() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("rep.json"),
        r#"{"noise_fraction": 0.02,
            "pipeline": {"inversion": {"landweber": {"pad_side": 640, "output_side": 64, "max_iterations": 50}}}}"#,
    )
    .unwrap();
    ok(
        tmp.path(),
        &[
            "pipeline", "--config", "rep.json", "--repeat", "2", "--seed", "4", "--out", "rep",
        ],
    );
    let summary = json(&tmp.path().join("rep/summary.json"));
    let runs = summary["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 2);
    assert_eq!(runs[0]["seed"], 4);
    assert_eq!(runs[1]["seed"], 5);
    assert!(summary["mean_rrmse"].as_f64().unwrap() > 0.0);
    assert_ne!(
        fs::read(tmp.path().join("rep/run_000/image.txt")).unwrap(),
        fs::read(tmp.path().join("rep/run_001/image.txt")).unwrap()
    );
}

#[test]
fn select_epsilon_and_diagnose_write_reports() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["simulate", "--out", "sim"]);
    ok(
        tmp.path(),
        &["select-epsilon", "--input", "sim/visibilities.csv", "--out", "sel"],
    );
    assert_eq!(json(&tmp.path().join("sel/report.json"))["epsilon"], 0.01);
    assert_eq!(data_rows(&tmp.path().join("sel/epsilon_curve.csv")), 100);

    ok(
        tmp.path(),
        &["diagnose", "--input", "sim/visibilities.csv", "--out", "diag"],
    );
    let d = json(&tmp.path().join("diag/diagnostics.json"));
    assert!(d["cond_vsk"].as_f64().unwrap() < d["cond_classic"].as_f64().unwrap());
    assert!(d["rrmse"].is_null());
}
