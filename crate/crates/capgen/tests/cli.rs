use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn capgen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_capgen")).args(args).output().unwrap()
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn gen_is_reproducible_and_on_the_sphere() {
    let args = ["gen", "--dim", "256", "--eps", "0.1", "--seed", "c0ffee"];
    let a = capgen(&args);
    let b = capgen(&args);
    assert_eq!(a.stdout, b.stdout);
    let v = stdout_json(&a);
    let point: Vec<f64> = serde_json::from_value(v["point"].clone()).unwrap();
    assert_eq!(point.len(), 256);
    let r: f64 = point.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!((r - 1.0).abs() < 1e-12);

    let raw = capgen(&["gen", "--dim", "16", "--eps", "0.2", "--seed", "01", "--out", "raw", "--gaussian"]);
    assert!(raw.status.success());
    assert_eq!(String::from_utf8(raw.stdout).unwrap().split_whitespace().count(), 16);
}

#[test]
fn seedlen_reports_the_ladder() {
    let v = stdout_json(&capgen(&["seedlen", "--dim", "4294967296", "--eps", "0.0009765625"]));
    assert_eq!(v["ladder"], serde_json::json!([4294967296u64, 65536, 256]));
    assert_eq!(v["seed_length"], 5538);
}

#[test]
fn caps_report_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let out = capgen(&[
            "verify", "caps", "--dim", "16", "--eps", "0.25", "--caps", "10", "--seed-mode", "sampled:2000",
            "--reference", "mc:2000", "--out", path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        fs::read(path).unwrap()
    };
    let (a, b) = (run("a.json"), run("b.json"));
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    let per: Vec<f64> = v["per_cap"].as_array().unwrap().iter().map(|c| c["discrepancy"].as_f64().unwrap()).collect();
    let max = per.iter().cloned().fold(0.0, f64::max);
    assert_eq!(v["max_discrepancy"].as_f64().unwrap(), max);
}

#[test]
fn validation_errors_exit_with_two() {
    for args in [
        vec!["gen", "--dim", "16", "--eps", "0.1", "--seed", "xyz"],
        vec!["gen", "--dim", "16", "--eps", "1.5", "--seed", "00"],
        vec!["gen", "--dim", "2", "--eps", "0.1", "--seed", "00"],
        vec!["seedlen", "--dim", "16"],
        vec!["verify", "caps", "--dim", "16", "--eps", "0.2", "--seed-mode", "sometimes"],
    ] {
        let out = capgen(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn resource_limits_exit_with_three() {
    let out = capgen(&["verify", "caps", "--dim", "256", "--eps", "0.1", "--seed-mode", "exhaustive"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let out = capgen(&["verify", "design", "--dim", "9", "--degree", "4", "--walk", "4", "--samples", "10"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bounds_csv_has_one_row_per_combination() {
    let out = capgen(&["bounds", "--k-list", "2,4", "--delta-list", "0.01,0.1", "--m", "10000", "--mtilde", "100"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "k,delta,eps_mom,bound,branch");
    assert_eq!(lines.count(), 4);
}

#[test]
fn moments_and_design_reports() {
    let v = stdout_json(&capgen(&["verify", "moments", "--dim", "16", "--order", "2", "--design-samples", "500"]));
    assert!((v["rows"][0]["oracle"].as_f64().unwrap() - 0.25).abs() < 1e-15);
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    let d = stdout_json(&capgen(&["verify", "design", "--dim", "3", "--degree", "1", "--walk", "8", "--samples", "256"]));
    assert!(d.is_object());
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn gw_demo_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let edge = write(dir.path(), "edge.txt", "0 1 2.5\nvec 0 1 0\nvec 1 -1 0\n");
    let v = stdout_json(&capgen(&["demo", "gw", "--graph", &edge, "--eps", "0.2", "--seeds", "50", "--baseline", "100"]));
    assert_eq!(v["best_cut"], 2.5);
    assert_eq!(v["mean_cut"], 2.5);

    let bad = write(dir.path(), "bad.txt", "0 1\n");
    assert_eq!(capgen(&["demo", "gw", "--graph", &bad, "--eps", "0.2"]).status.code(), Some(2));
    let missing = dir.path().join("nope.txt");
    assert_eq!(
        capgen(&["demo", "gw", "--graph", missing.to_str().unwrap(), "--eps", "0.2"]).status.code(),
        Some(2)
    );

    let cfg = write(dir.path(), "cfg.json", r#"{ "base_case_floor": 4 }"#);
    let v = stdout_json(&capgen(&["--config", &cfg, "seedlen", "--dim", "16", "--eps", "0.25"]));
    assert_eq!(v["ladder"], serde_json::json!([16, 4]));
    let unknown = write(dir.path(), "unknown.json", r#"{ "c_z": 1 }"#);
    assert_eq!(capgen(&["--config", &unknown, "seedlen", "--dim", "16", "--eps", "0.25"]).status.code(), Some(2));
}
