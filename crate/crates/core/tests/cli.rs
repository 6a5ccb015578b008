use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_popper-sim"))
}

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn run_kim_shih_reports_widths() {
    let out = bin().arg("run").arg(scenario("kim_shih.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let w = v["results"]["analytic"]["coincidence_fwhm_mm"].as_f64().unwrap();
    assert!((w - 0.657).abs() < 0.0066);
    assert!(v["convention"]["reduced_wavelength"].is_string());
    assert_eq!(v["results"]["provenance"], "both");
}

#[test]
fn run_with_oracle_reports_deltas() {
    let out = bin()
        .arg("run")
        .arg(scenario("popper_freespace.json"))
        .args(["--oracle", "--grid-n", "1024"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!(v["results"]["relative_deltas"]["coincidence_fwhm_mm"].as_f64().unwrap().abs() < 0.01);
    assert_eq!(v["results"]["oracle"]["grid_n"], 1024);
}

#[test]
fn output_is_byte_identical() {
    let a = bin().arg("run").arg(scenario("kim_shih.json")).output().unwrap();
    let b = bin().arg("run").arg(scenario("kim_shih.json")).arg("--seedless").output().unwrap();
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn missing_and_malformed_scenarios_exit_2() {
    assert_eq!(run(&["run", "missing.json"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"name\": \"x\",\n  oops\n}").unwrap();
    let out = bin().arg("run").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn resolution_errors_exit_3() {
    let out = bin()
        .arg("run")
        .arg(scenario("kim_shih.json"))
        .args(["--grid-n", "8192"])
        .env("POPPER_SIM_MAX_GRID", "4096")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn sweep_csv() {
    let out = bin()
        .arg("sweep")
        .arg(scenario("strekalov.json"))
        .args(["--param", "slit_full_width", "--from", "0.1", "--to", "1.0", "--steps", "10"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("slit_full_width_mm,fwhm_analytic_mm"));
    let fwhm: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(fwhm.len(), 10);
    assert!(fwhm.windows(2).all(|w| w[1] < w[0]));

    let out = bin()
        .arg("sweep")
        .arg(scenario("strekalov.json"))
        .args(["--from", "0.2", "--to", "1.0", "--steps", "2"])
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 3);

    let out = bin()
        .arg("sweep")
        .arg(scenario("strekalov.json"))
        .args(["--from", "1.0", "--to", "0.2", "--steps", "5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_with_oracle_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let mut scn: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(scenario("strekalov.json")).unwrap()).unwrap();
    scn["observed_fwhm_mm"] = 1.5.into();
    let path = dir.path().join("observed.json");
    std::fs::write(&path, scn.to_string()).unwrap();
    let csv = dir.path().join("curve.csv");
    let report = dir.path().join("curve.json");
    let out = bin()
        .arg("sweep")
        .arg(&path)
        .args(["--oracle", "--steps", "5"])
        .arg("--csv")
        .arg(&csv)
        .arg("--out")
        .arg(&report)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("slit_full_width_mm,fwhm_analytic_mm,fwhm_oracle_mm,fitted_a2_mm2,flag\n"));
    assert!(text.contains("slit_wider_than_localization"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["results"]["rows"].as_array().unwrap().len(), 5);
}

#[test]
fn spin_presets() {
    let v = json(&run(&["spin", "--preset", "eq2"]));
    assert_eq!(v["results"]["marginal_b_z"], serde_json::json!([0.05, 0.9, 0.05]));
    assert_eq!(v["results"]["conditional_on_a_x"][1]["b_z"], serde_json::json!([0.5, 0.0, 0.5]));

    let v = json(&run(&["spin", "--alpha", "0", "--beta", "1"]));
    assert_eq!(v["results"]["marginal_b_z"], serde_json::json!([0.0, 1.0, 0.0]));
    for c in v["results"]["conditional_on_a_x"].as_array().unwrap() {
        if !c["b_z"].is_null() {
            assert_eq!(c["b_z"], serde_json::json!([0.0, 1.0, 0.0]));
        }
    }

    let v = json(&run(&["spin", "--alpha", "0.70710678", "--beta", "0"]));
    assert_eq!(v["results"]["marginal_b_z"], serde_json::json!([0.5, 0.0, 0.5]));

    assert_eq!(run(&["spin", "--alpha", "0.5", "--beta", "0.5"]).status.code(), Some(2));
}

#[test]
fn fit_command() {
    let v = json(&run(&["fit", "--fwhm", "0.657", "--epsilon", "0.065", "--l2", "500"]));
    assert!((v["results"]["a2_mm2"].as_f64().unwrap() - 0.043).abs() < 0.0013);
    let v = json(&run(&["fit", "--fwhm", "2.0", "--distance", "500"]));
    assert!((v["results"]["epsilon_mm"].as_f64().unwrap() - 0.0658).abs() < 1e-4);
    assert_eq!(run(&["fit", "--fwhm", "0.3", "--epsilon", "0.065", "--l2", "500"]).status.code(), Some(2));
}

#[test]
fn oracle_check_passes() {
    let out = run(&["oracle-check", "--grid-n", "2048"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json(&out)["results"]["pass"], true);
}
