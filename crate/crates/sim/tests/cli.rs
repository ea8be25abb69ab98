use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_protective");

const CONFIG: &str = r#"{
  "schema_version": 1,
  "total_time": 200.0,
  "profile": {"shape": "rectangular"},
  "tolerance": 1e-10,
  "system": {
    "hamiltonian": {"type": "spin", "axis": [-0.8660254037844386, 0.0, -0.5], "scale": 1.0},
    "observable": {"type": "spin", "axis": [0.0, 0.0, 1.0], "scale": 1.0}
  },
  "apparatus": {"type": "grid", "n_points": 256, "r_min": -4.0, "r_max": 4.0, "packet": {"center": 0.0, "width": 0.15}}
}"#;

fn protective(args: &[&str], dir: &Path) -> Output {
    Command::new(BIN).args(args).current_dir(dir).env("PROTECTIVE_WORKERS", "2").output().unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("config.json"), CONFIG).unwrap();
    dir
}

#[test]
fn run_is_byte_identical_across_invocations() {
    let dir = setup();
    for out in ["a", "b"] {
        for format in ["csv", "json"] {
            let o = protective(&["run", "--config", "config.json", "--seed", "4", "--out", out, "--format", format], dir.path());
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        }
    }
    for file in ["run.csv", "run.json"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
    let csv = fs::read_to_string(dir.path().join("a/run.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    let manifest = fs::read_to_string(dir.path().join("a/manifest.json")).unwrap();
    assert!(manifest.contains("\"seed\": 4"));
}

#[test]
fn sweep_then_fit() {
    let dir = setup();
    let o = protective(
        &["sweep", "--config", "config.json", "--t-min", "25", "--t-max", "2500", "--points", "21", "--out", "s", "--workers", "3"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("s/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 22);

    let o = protective(&["fit", "--in", "s/sweep.csv", "--tolerance", "1e-10"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let slope: f64 = text.lines().find_map(|l| l.strip_prefix("slope ")).unwrap().parse().unwrap();
    assert!((-2.3..=-1.7).contains(&slope), "{text}");
}

#[test]
fn mode_override_runs_strong() {
    let dir = setup();
    let o = protective(&["run", "--config", "config.json", "--mode", "strong", "--seed", "8", "--out", "o", "--format", "json"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json = fs::read_to_string(dir.path().join("o/run.json")).unwrap();
    assert!(json.contains("\"mode\": \"strong\"") && json.contains("\"collapse\": {"));
}

#[test]
fn exit_codes() {
    let dir = setup();
    fs::write(dir.path().join("bad.json"), r#"{"schema_version": 1, "surprise": true}"#).unwrap();
    assert_eq!(protective(&["run", "--config", "bad.json", "--out", "o"], dir.path()).status.code(), Some(2));
    assert_eq!(protective(&["run", "--config", "missing.json", "--out", "o"], dir.path()).status.code(), Some(4));
    assert_eq!(protective(&["run", "--bogus-flag"], dir.path()).status.code(), Some(2));

    let tight = CONFIG
        .replace("\"tolerance\": 1e-10", "\"tolerance\": 1e-14, \"max_steps\": 64")
        .replace("\"shape\": \"rectangular\"", "\"shape\": \"sine_squared\", \"ramp_fraction\": 0.2");
    fs::write(dir.path().join("tight.json"), tight).unwrap();
    assert_eq!(protective(&["run", "--config", "tight.json", "--out", "o"], dir.path()).status.code(), Some(3));

    fs::write(dir.path().join("blocker"), "x").unwrap();
    assert_eq!(protective(&["run", "--config", "config.json", "--out", "blocker/o"], dir.path()).status.code(), Some(4));

    fs::write(dir.path().join("short.csv"), "T,pointer_centroid,predicted_shift,centroid_error,disturbance,entropy_nats,validity,n_steps\n").unwrap();
    assert_eq!(protective(&["fit", "--in", "short.csv"], dir.path()).status.code(), Some(2));
}

#[test]
fn coldatom_analytic_summary() {
    let dir = setup();
    fs::write(dir.path().join("atom.json"), r#"{"schema_version": 1, "kind": "cold_atom"}"#).unwrap();
    let o = protective(&["coldatom", "--params", "atom.json", "--level", "analytic", "--out", "c"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let d = report["summary"]["drift_displacement"].as_f64().unwrap();
    assert!((d - 0.02).abs() < 1e-12);
    assert!(dir.path().join("c/coldatom.json").exists() && dir.path().join("c/manifest.json").exists());

    assert_eq!(protective(&["coldatom", "--params", "config.json"], dir.path()).status.code(), Some(2));
}
