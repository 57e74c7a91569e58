use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn yles(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_yles"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&read(dir, "manifest.json")).unwrap()
}

#[test]
fn flag_overrides_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "L = 8\nhx = 1.5\ngamma-step = 0.05\n").unwrap();
    let out = tmp.path().join("out");
    let o = yles(&[
        "spectral-flow",
        "--config",
        cfg.to_str().unwrap(),
        "--L",
        "4",
        "--output-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(m["parameters"]["L"], 4);
    assert_eq!(m["parameters"]["gamma-step"], 0.05);
    assert_eq!(m["command"], "spectral-flow");
    assert!(m["version"].is_string());
    assert!(read(&out, "flow.csv").starts_with("gamma,re_e,im_e\n"));
}

#[test]
fn unknown_config_key_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.json");
    fs::write(&cfg, r#"{"L": 4, "colour": "red"}"#).unwrap();
    let o = yles(&["ed-scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
}

#[test]
fn type_error_names_the_flag() {
    let o = yles(&["ed-scan", "--L", "eight"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--L"));
}

#[test]
fn manifest_reruns_reproduce_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("a");
    let o = yles(&[
        "ed-scan",
        "--L",
        "4",
        "--gamma-step",
        "0.01",
        "--output-dir",
        first.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let o = yles(&["ed-scan", "--config", first.join("manifest.json").to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    // The manifest names its own output directory, so the rerun overwrites in place.
    let again = tmp.path().join("b");
    let o = yles(&[
        "ed-scan",
        "--config",
        first.join("manifest.json").to_str().unwrap(),
        "--output-dir",
        again.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    for name in ["scan.csv", "kink.json", "scan.svg"] {
        assert_eq!(read(&first, name), read(&again, name), "{name}");
    }
}

#[test]
fn scan_svg_marks_the_kink_once() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("s");
    let o = yles(&["ed-scan", "--L", "6", "--gamma-step", "0.01", "--output-dir", out.to_str().unwrap()]);
    assert!(o.status.success());
    let kink: serde_json::Value = serde_json::from_str(&read(&out, "kink.json")).unwrap();
    assert!(kink["kink_gamma"].is_number());
    assert_eq!(read(&out, "scan.svg").matches("stroke-dasharray").count(), 1);
}

#[test]
fn unbracketed_kink_exits_4_and_cleans_up() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("r");
    let o = yles(&[
        "response", "--L", "6", "--gamma-min", "0.3", "--gamma-max", "0.4", "--gamma-step", "0.01",
        "--output-dir", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert!(!out.exists());
}

#[test]
fn schedule_constraint_exits_2() {
    let o = yles(&["floquet", "--tau-j", "0.3", "--output-dir", "unused-floquet-dir"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("N = 50"));
    assert!(!Path::new("unused-floquet-dir").exists());
}

#[test]
fn scaling_from_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("pts.csv");
    let rows: String = [8, 10, 12, 14, 16]
        .iter()
        .map(|&l| format!("{l},{}\n", 0.139 + 5.0 * (l as f64).powf(-2.4)))
        .collect();
    fs::write(&csv, format!("L,gamma_yl\n{rows}")).unwrap();
    let out = tmp.path().join("s");
    let o = yles(&["scaling", "--input", csv.to_str().unwrap(), "--output-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let fit: serde_json::Value = serde_json::from_str(&read(&out, "scaling.json")).unwrap();
    for k in ["gamma_inf", "poly_degree", "alpha", "alpha_stderr", "r_squared", "cft_alpha"] {
        assert!(fit.get(k).is_some(), "{k}");
    }
    let svg = read(&out, "scaling.svg");
    assert!(svg.contains("1/L extrapolation") && svg.contains("log-log fit"));
}

#[test]
fn feasibility_writes_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("f");
    let o = yles(&["feasibility", "--output-dir", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = read(&out, "feasibility.txt");
    assert!(text.contains("Coupling strength, J0"));
    let report: serde_json::Value = serde_json::from_str(&read(&out, "feasibility.json")).unwrap();
    assert_eq!(report["echo_time"]["ok"], true);
}
