use std::ffi::OsString;

use monoscat::cli::{run, EXIT_DOMAIN, EXIT_USAGE};

fn call(args: &[&str]) -> (i32, String, String) {
    let argv: Vec<OsString> = std::iter::once("monoscat").chain(args.iter().copied()).map(OsString::from).collect();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn info_reports_critical_data() {
    let (code, out, _) = call(&["info", "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["p_c"].as_f64().unwrap() - 40f64.sqrt()).abs() < 1e-12);
    assert!((v["k_c"].as_f64().unwrap() - 40f64.sqrt() / 0.25).abs() < 1e-10);
}

#[test]
fn energy_and_momentum_inputs_agree() {
    let (_, by_p, _) = call(&["action", "--l", "1", "--p", "3"]);
    let (_, by_e, _) = call(&["action", "--l", "1", "--e", "4.5"]);
    assert_eq!(by_p, by_e);
}

#[test]
fn exit_codes() {
    assert_eq!(call(&["action", "--l", "0", "--p", "6.324555320336759"]).0, EXIT_DOMAIN);
    assert_eq!(call(&["action", "--l", "1", "--p=-3"]).0, EXIT_DOMAIN);
    assert_eq!(call(&["--a=-1", "info"]).0, EXIT_DOMAIN);
    assert_eq!(call(&["action", "--l", "1"]).0, EXIT_USAGE);
    assert_eq!(call(&["action", "--l", "1", "--p", "3", "--e", "2"]).0, EXIT_USAGE);
    assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(call(&["loop", "--waypoints", "1,2;x"]).0, EXIT_USAGE);
    let (code, out, _) = call(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("Usage"));
}

#[test]
fn grid_csv_shape() {
    let (code, out, _) = call(&["grid", "--lmin", "-1", "--lmax", "1", "--pmin", "2", "--pmax", "9", "--nl", "5", "--np", "4", "--quiet"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "l,p,value");
    assert_eq!(lines.len(), 21);
}

#[test]
fn loop_json_reports_one_winding() {
    let (code, out, _) = call(&["loop", "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["winding"], 1);
    assert!((v["holonomy"].as_f64().unwrap() - std::f64::consts::TAU).abs() < 1e-6);
    let (_, out, _) = call(&["loop", "--format", "json", "--reverse"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["holonomy"].as_f64().unwrap() + std::f64::consts::TAU).abs() < 1e-6);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# model\na = 10\nhbar = 0.5\nformat = json\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let (code, out, _) = call(&["--config", cfg, "info"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["e_c"].as_f64().unwrap() - 10.0).abs() < 1e-12);
    assert_eq!(v["hbar"].as_f64().unwrap(), 0.5);
    let (_, out, _) = call(&["--config", cfg, "--a", "30", "info"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["e_c"].as_f64().unwrap() - 30.0).abs() < 1e-12);
    assert_eq!(call(&["--config", "/nonexistent/x.conf", "info"]).0, EXIT_USAGE);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lattice.csv");
    let (code, out, _) = call(&["lattice", "--mmin", "-1", "--mmax", "1", "--kmax", "20", "--quiet", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("m,k\n"));
    assert!(text.lines().count() > 3);
}

#[test]
fn transport_default_loop() {
    let (code, out, _) = call(&["transport", "--quiet"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let m: [[i64; 2]; 2] = serde_json::from_value(v["matrix"].clone()).unwrap();
    assert_eq!(m[0][0] * m[1][1] - m[0][1] * m[1][0], 1);
    assert_eq!((m[0][1] + m[1][0]).abs(), 1);
    assert_eq!(v["winding"], 1);
    let (_, shape, _) = call(&["transport", "--quiet", "--shape", "diamond"]);
    let w: serde_json::Value = serde_json::from_str(&shape).unwrap();
    assert_eq!(v["matrix"], w["matrix"]);
}
