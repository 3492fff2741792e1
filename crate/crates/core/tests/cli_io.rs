//! Config validation, record persistence, sweeps and the `qfi` binary.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use tempfile::TempDir;

use qfi::config::RunConfig;
use qfi::estimate::Method;
use qfi::models::Discretization;
use qfi::record::{read_records, ResultRecord, Stderr, SCHEMA_VERSION};
use qfi::runner::{self, SweepTable};

const QUBIT_PLUS: &str = r#"{
  "model": { "id": "qubit_phase", "lambda": 0.0 },
  "state": { "kind": "bloch", "theta": 1.5707963267948966, "phi": 0.0 },
  "evolution": { "t": 1.0 },
  "method": { "route": "generator_variance" }
}"#;

fn qfi_bin(dir: &Path, config: &str, args: &[&str]) -> Output {
    let path = dir.join("config.json");
    std::fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_qfi"))
        .arg("--config")
        .arg(&path)
        .args(args)
        .output()
        .unwrap()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn qubit_generator_variance_run_writes_unit_qfi() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("out.jsonl");
    let out = qfi_bin(dir.path(), QUBIT_PLUS, &["--out", out_path.to_str().unwrap(), "run"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let records = read_records(&out_path).unwrap();
    assert_eq!(records.len(), 1);
    let r = &records[0];
    assert_eq!(r.method, Method::GeneratorVariance);
    assert_eq!(r.schema_version, SCHEMA_VERSION);
    assert!((r.qfi.unwrap() - 1.0).abs() < 5e-6, "{:?}", r.qfi);
}

#[test]
fn run_appends_instead_of_overwriting() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("out.jsonl");
    for _ in 0..2 {
        let out = qfi_bin(dir.path(), QUBIT_PLUS, &["--out", out_path.to_str().unwrap(), "run"]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(read_records(&out_path).unwrap().len(), 2);
}

#[test]
fn run_without_out_prints_the_record() {
    let dir = TempDir::new().unwrap();
    let out = qfi_bin(dir.path(), QUBIT_PLUS, &["run"]);
    assert_eq!(out.status.code(), Some(0));
    let line = String::from_utf8(out.stdout).unwrap();
    let r = ResultRecord::from_line(line.trim()).unwrap();
    assert!((r.qfi.unwrap() - 1.0).abs() < 5e-6);
}

#[test]
fn semiclassical_on_qubit_exits_2() {
    let dir = TempDir::new().unwrap();
    let cfg = QUBIT_PLUS.replace("generator_variance\" }", "semiclassical_mc\", \"seed\": 1 }");
    let out = qfi_bin(dir.path(), &cfg, &["run"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("model has no classical counterpart"), "{}", stderr_of(&out));
}

#[test]
fn missing_seed_for_semiclassical_exits_2() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{
  "model": { "id": "harmonic", "omega": 1.0, "force": 0.0 },
  "evolution": { "t": 1.0 },
  "method": { "route": "semiclassical_mc", "n_samples": 200 }
}"#;
    let out = qfi_bin(dir.path(), cfg, &["run"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("method.seed"), "{}", stderr_of(&out));
    // the global flag supplies it
    let out = qfi_bin(dir.path(), cfg, &["--seed", "4", "run"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
}

#[test]
fn unknown_key_names_section_key_and_line() {
    let cfg = r#"{
  "model": { "id": "harmonic", "omega": 1.0, "force": 0.0 },
  "evolution": { "t": 1.0 },
  "method": {
    "route": "overlap_fd",
    "d_lamda": 1e-4
  }
}"#;
    let err = RunConfig::from_json(cfg).unwrap_err();
    assert!(err.path.starts_with("method"), "{err}");
    assert_eq!(err.line, Some(6), "{err}");
    assert!(err.to_string().contains("d_lamda"), "{err}");
}

#[test]
fn bad_enum_value_names_its_key() {
    let cfg = r#"{
  "model": { "id": "harmonic", "omega": 1.0, "force": 0.0 },
  "evolution": { "t": 1.0 },
  "method": { "route": "telepathy" }
}"#;
    let err = RunConfig::from_json(cfg).unwrap_err();
    assert_eq!(err.path, "method.route", "{err}");
    assert_eq!(err.line, Some(4));
}

#[test]
fn unreadable_config_exits_2() {
    let dir = TempDir::new().unwrap();
    let out = qfi_bin(dir.path(), "{ not json", &["run"]);
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_qfi")).arg("run").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

fn force_sweep(times: &str) -> String {
    format!(
        r#"{{
  "model": {{ "id": "harmonic", "omega": 1.0, "force": 0.0 }},
  "parameters": {{ "target": "force" }},
  "evolution": {{ "t_grid": {times} }},
  "method": {{ "route": "generator_variance" }}
}}"#
    )
}

#[test]
fn force_sweep_follows_one_minus_cosine() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("sweep.csv");
    let times = format!("[{FRAC_PI_4}, {FRAC_PI_2}, {PI}]");
    let out = qfi_bin(dir.path(), &force_sweep(&times), &["--out", csv.to_str().unwrap(), "sweep"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let header = std::fs::read_to_string(&csv).unwrap();
    assert!(header.starts_with("t,lambda,method,qfi,stderr,error\n"));
    let table = SweepTable::read_csv(&csv).unwrap();
    let v: Vec<f64> = table.rows.iter().map(|r| r.qfi.unwrap()).collect();
    let oracle = [1.0 - FRAC_PI_4.cos(), 1.0, 2.0];
    for (x, want) in v.iter().zip(oracle) {
        let ratio = x / v[1];
        assert!((ratio - want).abs() / want < 1e-3, "{ratio} vs {want}");
    }
}

#[test]
fn empty_grid_exits_2() {
    let dir = TempDir::new().unwrap();
    let out = qfi_bin(dir.path(), &force_sweep("[]"), &["sweep"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr_of(&out));
}

fn omega_sweep(omegas: &str) -> String {
    format!(
        r#"{{
  "model": {{ "id": "harmonic", "omega": 1.0, "force": 0.0 }},
  "state": {{ "kind": "coherent", "re": 0.5 }},
  "parameters": {{ "target": "omega", "lambda_grid": {omegas} }},
  "evolution": {{ "t": 1.0 }},
  "method": {{ "route": "generator_variance" }}
}}"#
    )
}

#[test]
fn failed_points_land_in_the_error_column() {
    // a non-positive frequency only fails once the point is built
    let cfg = RunConfig::from_json(&omega_sweep("[1.0, -1.0]")).unwrap();
    let table = runner::sweep(&cfg).unwrap();
    assert!(table.rows[0].error.is_none());
    assert!(table.rows[1].error.is_some(), "{:?}", table.rows[1]);
    assert!(!table.all_failed());
    let cfg = RunConfig::from_json(&omega_sweep("[-1.0, -2.0]")).unwrap();
    assert!(runner::sweep(&cfg).unwrap().all_failed());
}

#[test]
fn all_failed_sweep_exits_3() {
    let dir = TempDir::new().unwrap();
    let out = qfi_bin(dir.path(), &omega_sweep("[-1.0, -2.0]"), &["sweep"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr_of(&out));
}

#[test]
fn seed_sweep_spread_matches_reported_stderr() {
    let seeds: Vec<String> = (1..=24).map(|s| s.to_string()).collect();
    let cfg = format!(
        r#"{{
  "model": {{ "id": "quartic", "omega": 1.0, "g": 0.1 }},
  "state": {{ "kind": "coherent", "re": 1.0 }},
  "evolution": {{ "t": 1.5 }},
  "method": {{ "route": "semiclassical_mc", "n_samples": 2000, "seeds": [{}] }}
}}"#,
        seeds.join(",")
    );
    let table = runner::sweep(&RunConfig::from_json(&cfg).unwrap()).unwrap();
    let v: Vec<f64> = table.rows.iter().map(|r| r.qfi.unwrap()).collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let se = table.rows.iter().map(|r| r.stderr.unwrap()).sum::<f64>() / n;
    let ratio = sd / se;
    assert!((0.5..=2.0).contains(&ratio), "sd {sd} stderr {se} ratio {ratio}");
}

#[test]
fn thread_count_does_not_change_records() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{
  "model": { "id": "quartic", "omega": 1.0, "g": 0.1 },
  "state": { "kind": "coherent", "re": 1.0 },
  "evolution": { "t": 1.0 },
  "method": { "route": "semiclassical_mc", "n_samples": 3000, "seed": 9 }
}"#;
    let mut records = Vec::new();
    for threads in ["1", "4"] {
        let out = qfi_bin(dir.path(), cfg, &["--threads", threads, "--quiet", "run"]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
        records.push(ResultRecord::from_line(String::from_utf8(out.stdout).unwrap().trim()).unwrap());
    }
    assert!(records[0].same_values(&records[1]));
}

#[test]
fn compare_reports_every_route() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{
  "model": { "id": "harmonic", "omega": 1.0, "force": 0.2 },
  "state": { "kind": "coherent", "re": 0.5 },
  "parameters": { "target": "force" },
  "evolution": { "t": 2.0 },
  "method": { "route": "generator_variance", "n_samples": 2000, "seed": 1 }
}"#;
    let out = qfi_bin(dir.path(), cfg, &["compare"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["routes"].as_array().unwrap().len(), 4);
}

#[test]
fn models_lists_the_catalog() {
    let out = Command::new(env!("CARGO_BIN_EXE_qfi")).arg("models").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for id in ["qubit_phase", "harmonic", "quartic", "driven_oscillator", "lattice_scalar"] {
        assert!(text.contains(id), "{text}");
    }
}

#[test]
fn verify_is_deterministic_and_mutation_exits_nonzero() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str, extra: &[&str]| {
        let path = dir.path().join(name);
        let mut args = vec!["--quiet", "--out", path.to_str().unwrap(), "verify"];
        args.extend_from_slice(extra);
        let out = Command::new(env!("CARGO_BIN_EXE_qfi")).args(&args).output().unwrap();
        (out.status.code(), std::fs::read_to_string(path).unwrap())
    };
    let (code_a, a) = run("a.json", &["--only", "3,4,8"]);
    let (code_b, b) = run("b.json", &["--only", "3,4,8"]);
    assert_eq!(code_a, Some(0));
    assert_eq!(code_b, Some(0));
    assert_eq!(a, b);
    let (code, _) = run("m.json", &["--only", "8", "--mutation", "flip-omega-lagrangian"]);
    assert_ne!(code, Some(0));
}

fn finite() -> impl Strategy<Value = f64> {
    -1e6..1e6f64
}

fn record() -> impl Strategy<Value = ResultRecord> {
    let method = prop::sample::select(Method::ALL.to_vec());
    let disc = prop_oneof![
        Just(None),
        (1usize..200).prop_map(|n| Some(Discretization::Fock { n_max: n })),
        (finite(), 1usize..512).prop_map(|(l, p)| Some(Discretization::Grid { half_width: l.abs(), points: p })),
    ];
    let values = prop_oneof![
        (finite(), prop::option::of(finite())).prop_map(|(q, s)| (Some(q), None, s.map(Stderr::Scalar))),
        prop::collection::vec(prop::collection::vec(finite(), 2), 2)
            .prop_map(|m| (None, Some(m.clone()), Some(Stderr::Matrix(m)))),
    ];
    (
        method,
        "[a-z_]{1,12}",
        prop::collection::vec(finite(), 0..4),
        finite(),
        values,
        prop::option::of((1usize..1_000_000, any::<u64>(), 1e-6..1.0f64)),
        disc,
        0.0..1e5f64,
        prop::collection::vec("[ -~]{0,20}", 0..3),
    )
        .prop_map(|(method, model, lambda, t, (qfi, qfim, stderr), mc, discretization, runtime_ms, warnings)| ResultRecord {
            schema_version: SCHEMA_VERSION,
            method,
            model,
            lambda,
            t,
            qfi,
            qfim,
            stderr,
            n_samples: mc.map(|m| m.0),
            seed: mc.map(|m| m.1),
            dt: mc.map(|m| m.2),
            discretization,
            runtime_ms,
            warnings,
        })
}

proptest! {
    #[test]
    fn records_round_trip(r in record()) {
        let back = ResultRecord::from_line(&r.to_line()).unwrap();
        prop_assert_eq!(back, r);
    }

    #[test]
    fn configs_round_trip(t in 0.01..50.0f64, omega in 0.1..5.0f64, seed in any::<u64>()) {
        let cfg = format!(
            r#"{{"model": {{"id": "harmonic", "omega": {omega}, "force": 0.0}}, "evolution": {{"t": {t}}}, "method": {{"route": "semiclassical_mc", "seed": {seed}}}}}"#
        );
        let parsed = RunConfig::from_json(&cfg).unwrap();
        let again = RunConfig::from_json(&parsed.to_json()).unwrap();
        prop_assert_eq!(again.to_json(), parsed.to_json());
        prop_assert_eq!(again.seed(), Some(seed));
    }
}
