//! End-to-end runs of the `nv-wgm` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nv-wgm"));
    c.env_remove("NV_WGM_OUTPUT_DIR").env("RUST_LOG", "warn");
    c
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, json).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

const ENTANGLE: &str = r#"{
    "schema_version": 1,
    "scenario": "entangle",
    "model": "effective_raman",
    "params": {"dimensionless": {}},
    "solver": {"kind": "unitary"},
    "grid": {"n_samples": 21},
    "output": "epr"
}"#;

const DECAY_MCWF: &str = r#"{
    "schema_version": 1,
    "scenario": "decay_check",
    "params": {"dimensionless": {"gamma_e0": 0.05}},
    "solver": {"kind": "mcwf", "n_traj": 50, "seed0": 1},
    "grid": {"n_samples": 11},
    "output": "decay"
}"#;

#[test]
fn run_writes_timeseries_and_meta() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "epr.json", ENTANGLE);
    let out_dir = dir.path().join("out");
    let o = run(&["run", cfg.to_str().unwrap(), "--output-dir", out_dir.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty(), "diagnostics belong on stderr");

    let csv = fs::read_to_string(out_dir.join("epr_timeseries.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,P10,P01,P+,P-,P00");
    assert_eq!(lines.count(), 21);
    assert!(!csv.contains('\r'));

    let meta: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("epr_meta.json")).unwrap()).unwrap();
    assert_eq!(meta["tool"], "nv-wgm");
    assert_eq!(meta["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(meta["params"]["delta"], 10.0);
    assert_eq!(meta["effective_rates"]["xi"], 0.001);
    assert_eq!(meta["solver"]["kind"], "unitary");
    let f = meta["results"]["epr_fidelity"].as_f64().unwrap();
    assert!((f - 1.0).abs() < 1e-4, "{f}");
}

#[test]
fn identical_inputs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "d.json", DECAY_MCWF);
    let outputs: Vec<(Vec<u8>, Vec<u8>)> = ["a", "b"]
        .iter()
        .map(|sub| {
            let out = dir.path().join(sub);
            let o = run(&["run", cfg.to_str().unwrap(), "--output-dir", out.to_str().unwrap(), "--threads", "2"]);
            assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
            (fs::read(out.join("decay_timeseries.csv")).unwrap(), fs::read(out.join("decay_meta.json")).unwrap())
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
    assert!(String::from_utf8_lossy(&outputs[0].0).starts_with("t,Pe,Pe_exact,Pe_stderr\n"));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "d.json", DECAY_MCWF);
    let read = |seed: &str| {
        let out = dir.path().join(format!("s{seed}"));
        let o = run(&["run", cfg.to_str().unwrap(), "--output-dir", out.to_str().unwrap(), "--seed", seed]);
        assert_eq!(code(&o), 0);
        let meta: Value = serde_json::from_str(&fs::read_to_string(out.join("decay_meta.json")).unwrap()).unwrap();
        (fs::read_to_string(out.join("decay_timeseries.csv")).unwrap(), meta["seed"].as_u64().unwrap())
    };
    let (a, seed_a) = read("1");
    let (b, seed_b) = read("2");
    assert_eq!((seed_a, seed_b), (1, 2));
    assert_ne!(a, b);
}

#[test]
fn output_dir_falls_back_to_env() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "epr.json", ENTANGLE);
    let out = dir.path().join("from_env");
    let o = bin().args(["run", cfg.to_str().unwrap()]).env("NV_WGM_OUTPUT_DIR", &out).output().unwrap();
    assert_eq!(code(&o), 0);
    assert!(out.join("epr_timeseries.csv").exists());
    assert!(out.join("epr_meta.json").exists());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let bad = write_config(dir.path(), "bad.json", &ENTANGLE.replace("\"output\"", "\"outptu\""));
    let lossy_unitary = write_config(
        dir.path(),
        "lossy.json",
        &ENTANGLE.replace(r#"{"dimensionless": {}}"#, r#"{"dimensionless": {"kappa": 0.001}}"#),
    );
    let sweep_via_run = write_config(
        dir.path(),
        "sweep.json",
        r#"{"schema_version": 1, "scenario": "regime_map", "params": {"dimensionless": {}},
            "sweep": {"axes": [{"field": "kappa", "values": [1e-4]}]}, "output": "r"}"#,
    );
    for args in [
        vec!["run", bad.to_str().unwrap(), "--output-dir", d],
        vec!["run", lossy_unitary.to_str().unwrap(), "--output-dir", d],
        vec!["run", sweep_via_run.to_str().unwrap(), "--output-dir", d],
        vec!["run", "/nonexistent/config.json", "--output-dir", d],
        vec!["validate", bad.to_str().unwrap()],
        vec!["run", bad.to_str().unwrap(), "--threads", "0"],
    ] {
        let o = run(&args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
    // nothing written on failure
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 3);
}

#[test]
fn validate_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "epr.json", ENTANGLE);
    let o = bin().args(["validate", cfg.to_str().unwrap()]).current_dir(dir.path()).output().unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn regime_map_sweep_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "map.json",
        r#"{"schema_version": 1, "scenario": "regime_map",
            "params": {"physical": {"g_over_2pi_hz": 1e9, "q_factor": 1e9, "mode_frequency_hz": 5e14,
                                    "gamma_over_2pi_hz": 1.3e7, "delta_over_g": 10, "omega_over_g": 0.01}},
            "sweep": {"axes": [{"field": "kappa_scale", "values": [1, 10, 100, 1000, 1e5]},
                               {"field": "gamma_scale", "values": [1, 1000]}]},
            "output": "map"}"#,
    );
    let o = run(&["sweep", cfg.to_str().unwrap(), "--output-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("map_sweep.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 10);
    let mut flags = Vec::new();
    for r in &rows {
        let kappa: f64 = r[col("kappa")].parse().unwrap();
        let gamma_c: f64 = r[col("gamma_c")].parse().unwrap();
        assert!((gamma_c - 1e-2 * kappa).abs() <= 1e-15 * kappa, "{gamma_c} vs {kappa}");
        flags.push(r[col("strong_coupling")] == "true");
    }
    // nominal point is strong, the largest losses are not
    assert!(flags[0]);
    assert!(!flags[flags.len() - 1]);
}

#[test]
fn single_point_sweep_equals_run() {
    let dir = tempfile::tempdir().unwrap();
    let base = r#"{"schema_version": 1, "scenario": "transfer", "model": "nine_level",
        "params": {"dimensionless": {"kappa": 5e-4, "gamma_e0": 0.013, "gamma_e1": 0.013, "gamma_10": 0.0026}},
        "grid": {"n_samples": 5}, "output": "t" SWEEP}"#;
    let cfg_run = write_config(dir.path(), "run.json", &base.replace(" SWEEP", ""));
    let cfg_sweep = write_config(
        dir.path(),
        "sweep.json",
        &base.replace(" SWEEP", r#", "sweep": {"axes": [{"field": "kappa_scale", "values": [1]}]}"#),
    );
    let d = dir.path().to_str().unwrap();
    assert_eq!(code(&run(&["run", cfg_run.to_str().unwrap(), "--output-dir", d])), 0);
    let meta: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("t_meta.json")).unwrap()).unwrap();
    assert_eq!(code(&run(&["sweep", cfg_sweep.to_str().unwrap(), "--output-dir", d])), 0);
    let csv = fs::read_to_string(dir.path().join("t_sweep.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let at = |name: &str| row[header.iter().position(|h| *h == name).unwrap()].parse::<f64>().unwrap();
    assert_eq!(at("transfer_fidelity"), meta["results"]["transfer_fidelity"].as_f64().unwrap());
    assert_eq!(at("transfer_fidelity_pre_gate"), meta["results"]["transfer_fidelity_pre_gate"].as_f64().unwrap());
}

#[test]
fn help_lists_verbs() {
    let o = run(&["--help"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    for verb in ["run", "sweep", "validate"] {
        assert!(text.contains(verb));
    }
}
