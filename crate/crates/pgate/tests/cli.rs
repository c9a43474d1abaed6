use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pgate::config::{RunConfig, SCHEMA};
use serde_json::Value;

fn pgate(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pgate")).args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

fn error_of(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str::<Value>(text.trim()).unwrap_or_else(|_| panic!("stderr is not JSON: {text}"))["error"].clone()
}

#[test]
fn modes_two_ions_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let out = pgate(&["modes"], dir.path());
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("modes.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config_sha256: "));
    assert_eq!(lines.next().unwrap(), "mode,freq_hz,ratio_to_com,zero_point_m,b_ion0,b_ion1");
    let stretch: Vec<&str> = lines.nth(1).unwrap().split(',').collect();
    let ratio: f64 = stretch[2].parse().unwrap();
    assert!((ratio - 3f64.sqrt()).abs() < 1e-10, "{ratio}");
}

#[test]
fn every_csv_has_hash_and_header() {
    let dir = tempfile::tempdir().unwrap();
    let hash = RunConfig::default().sha256();
    for (cmd, header) in [
        ("modes", "mode,freq_hz"),
        ("tones", "label,aom2_offset_hz,amplitude,phase_rad"),
        ("stark", "x_m,level0_hz,level1_hz,differential_hz"),
        ("scan", "x_m,p1,shots,fit_p1"),
        ("profile", "x_m,rabi_rad_s,fit_rad_s"),
    ] {
        let out = pgate(&[cmd], dir.path());
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        let text = fs::read_to_string(dir.path().join(format!("{cmd}.csv"))).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), format!("# config_sha256: {hash}"));
        let head = lines.next().unwrap();
        assert!(head.starts_with(header) && !head.contains(' '), "{cmd}: {head}");
        let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join(format!("{cmd}_summary.json"))).unwrap()).unwrap();
        assert_eq!(summary["config_sha256"], Value::from(hash.clone()));
    }
}

#[test]
fn fixed_seed_is_byte_identical_and_seed_matters() {
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    for (d, seed) in dirs.iter().zip(["5", "5", "6"]) {
        assert!(pgate(&["scan", "--seed", seed], d.path()).status.success());
        assert!(pgate(&["scan", "--seed", seed, "--format", "json"], d.path()).status.success());
    }
    for name in ["scan.csv", "scan_summary.json", "scan.json"] {
        let read = |i: usize| fs::read(dirs[i].path().join(name)).unwrap();
        assert_eq!(read(0), read(1), "{name}");
        assert_ne!(read(0), read(2), "{name}");
    }
}

#[test]
fn json_format_holds_columns_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    assert!(pgate(&["tones", "--format", "json"], dir.path()).status.success());
    let doc: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("tones.json")).unwrap()).unwrap();
    assert_eq!(doc["columns"][1], "aom2_offset_hz");
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    // Red and blue sidebands at ∓(stretch + gate detuning).
    let blue = rows[1][1].as_f64().unwrap();
    let expect = 287e3 * 3f64.sqrt() + 1.0 / 367e-6;
    assert!((blue - expect).abs() < 1e-6, "{blue}");
    assert_eq!(rows[0][1].as_f64().unwrap(), -blue);
}

#[test]
fn zeroed_noise_budget_rows_vanish() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"noise": {"t2_ms": null, "heating_qps": 0, "rabi_sigma": 0, "detuning_err_hz": 0, "carrier_ratio": 0, "thermal_scale": 0}}"#,
    );
    let out = pgate(&["budget", "--config", &cfg, "--format", "json"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("budget.json")).unwrap()).unwrap();
    let rows = doc["summary"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    for r in rows {
        assert!(r["infidelity"].as_f64().unwrap().abs() < 1e-8, "{r}");
    }
    assert!(doc["summary"]["total_joint"].as_f64().unwrap().abs() < 1e-8);
    assert!(doc["summary"]["numerical_floor"].as_f64().unwrap() < 1e-6);
    let table = fs::read_to_string(dir.path().join("budget.txt")).unwrap();
    for label in ["Mis-set Detuning", "Motional Dephasing", "Heating", "Rabi Frequency Fluctuation", "Carrier Excitation", "Thermal Errors"] {
        assert!(table.contains(label), "{label}");
    }
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"trap": {"com_freq": 287000}}"#);
    let out = pgate(&["modes", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = error_of(&out);
    assert_eq!(err["kind"], "config");
    assert!(err["message"].as_str().unwrap().contains("com_freq"));
}

#[test]
fn inconsistent_closure_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"gate": {"detuning_hz": 3000, "gate_time_us": 367}}"#);
    let out = pgate(&["tones", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_of(&out)["exit_code"], 2);
}

#[test]
fn detuning_alone_sets_gate_time() {
    let cfg = RunConfig::parse(r#"{"gate": {"detuning_hz": 2000, "loops": 2}}"#).unwrap();
    assert!((cfg.gate_time() - 1e-3).abs() < 1e-15);
}

#[test]
fn truncation_is_a_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"gate": {"fock_cut": 40, "trajectory_points": 3}}"#);
    let out = pgate(&["gate", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let err = error_of(&out);
    assert_eq!(err["kind"], "numerical");
    assert!(err["message"].as_str().unwrap().contains("truncation"));
}

#[test]
fn bad_flag_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = pgate(&["modes", "--format", "xml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_of(&out)["kind"], "config");
}

#[test]
fn seed_override_changes_the_hash() {
    let base = RunConfig::default();
    let other = RunConfig { seed: 2, ..base.clone() };
    assert_ne!(base.sha256(), other.sha256());
    assert_eq!(base.sha256(), RunConfig::parse("{}").unwrap().sha256());
}

fn same(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            (x - y).abs() <= 1e-12 * y.abs()
        }
        (Value::Array(x), Value::Array(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| same(p, q)),
        _ => a == b,
    }
}

// Walk the schema and the default config together: same keys, same defaults.
fn compare(schema: &Value, value: &Value, path: &str) {
    let props = schema["properties"].as_object().unwrap_or_else(|| panic!("{path}: no properties"));
    assert_eq!(schema["additionalProperties"], Value::Bool(false), "{path}");
    let obj = value.as_object().unwrap();
    let mut a: Vec<&String> = props.keys().filter(|k| !k.starts_with('$')).collect();
    let mut b: Vec<&String> = obj.keys().collect();
    a.sort();
    b.sort();
    assert_eq!(a, b, "{path}");
    for (k, v) in obj {
        let sub = &props[k];
        if v.is_object() {
            compare(sub, v, &format!("{path}.{k}"));
        } else {
            assert!(same(&sub["default"], v), "{path}.{k}: {} vs {v}", sub["default"]);
        }
    }
}

#[test]
fn schema_matches_defaults() {
    let schema: Value = serde_json::from_str(SCHEMA).unwrap();
    let defaults = serde_json::to_value(RunConfig::default()).unwrap();
    compare(&schema, &defaults, "$");
}

#[test]
fn schema_and_defaults_subcommands() {
    let out = Command::new(env!("CARGO_BIN_EXE_pgate")).arg("defaults").output().unwrap();
    assert!(out.status.success());
    let cfg = RunConfig::parse(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(cfg, RunConfig::default());
    let out = Command::new(env!("CARGO_BIN_EXE_pgate")).arg("schema").output().unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), SCHEMA);
}

#[test]
fn gate_trajectory_peaks_near_gate_time() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"gate": {"trajectory_points": 41}, "noise": {"nbar": 1}}"#);
    let out = pgate(&["gate", "--config", &cfg], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("gate.csv")).unwrap();
    assert_eq!(text.lines().nth(1).unwrap(), "t_s,P00,P01,P10,P11,parity,bell_fidelity");
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("gate_summary.json")).unwrap()).unwrap();
    let t = summary["summary"]["max_fidelity_time_s"].as_f64().unwrap();
    assert!((t - 367e-6).abs() < 0.05 * 367e-6, "{t}");
    assert!(summary["summary"]["max_fidelity"].as_f64().unwrap() > 0.95);
}
