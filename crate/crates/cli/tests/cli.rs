use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rmf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rmf"))
        .args(args)
        .env_remove("RMF_SEED")
        .output()
        .expect("run rmf")
}

fn json_of(args: &[&str]) -> Value {
    let out = rmf(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn schema(command: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("schemas/{command}.schema.json"));
    let s: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&s).expect("schema compiles")
}

/// One cheap invocation per subcommand.
const RUNS: &[&[&str]] = &[
    &["critical", "--theta", "0.3"],
    &["critical", "--m", "2", "--theta", "0.5"],
    &["bounds", "--m", "2", "--br", "2.5"],
    &["pathbound", "--h", "6", "--theta", "0.3", "--n", "2", "--m", "2", "--dim", "2"],
    &["tree-sim", "--theta", "0.3", "--horizon", "8", "--replicas", "50"],
    &["tree-sim", "--grid", "0.1:0.4:0.1", "--horizon", "8", "--replicas", "50"],
    &["tree-martingale", "--m", "3", "--theta", "0.3", "--horizon", "4", "--replicas", "50"],
    &["lattice-sim", "--theta", "0.35", "--radius", "15", "--replicas", "20"],
    &["lattice-sweep", "--grid", "0.2:0.5:0.15", "--radius", "15", "--replicas", "20", "--q", "2", "--mode", "all"],
    &["lattice-export", "--theta", "0.4", "--radius", "8"],
    &["lattice-export", "--grid", "0.2:0.6:0.2", "--radius", "8", "--orthant"],
    &["bricklayer", "--n-brick", "16", "--depth", "4", "--replicas", "5"],
    &["bricklayer-check", "--n-brick", "16", "--q", "2", "--depth", "3", "--theta", "0.91", "--replicas", "3"],
    &["bricklayer-check", "--n-brick", "10", "--depth", "3", "--theta", "0.995", "--replicas", "3"],
];

#[test]
fn every_subcommand_matches_its_schema() {
    for args in RUNS {
        let v = json_of(args);
        let validator = schema(args[0]);
        let errors: Vec<String> = validator.iter_errors(&v).map(|e| format!("{} at {}", e, e.instance_path)).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}");
        assert_eq!(v["command"], args[0]);
        assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
        assert_eq!(v["seed"], 2024);
    }
}

#[test]
fn replay_is_byte_identical() {
    for args in RUNS {
        let a = rmf(args);
        let b = rmf(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn seed_flag_and_env_agree() {
    let args = ["tree-sim", "--theta", "0.3", "--horizon", "8", "--replicas", "50"];
    let flag = rmf(&[&args[..], &["--seed", "77"]].concat());
    let env = Command::new(env!("CARGO_BIN_EXE_rmf")).args(args).env("RMF_SEED", "77").output().unwrap();
    assert_eq!(flag.stdout, env.stdout);
    let default = rmf(&args);
    assert_ne!(flag.stdout, default.stdout);
}

#[test]
fn documented_examples() {
    let v = json_of(&["critical", "--theta", "1.0"]);
    assert_eq!(v["m_c"].as_f64(), Some(1.0));

    let v = json_of(&["bounds", "--m", "2"]);
    assert!((v["lower"].as_f64().unwrap() - 0.18394).abs() < 1e-5);
    assert!((v["upper"].as_f64().unwrap() - 0.29289).abs() < 1e-5);
    // Independent 60-digit reference root.
    assert!((v["exact"].as_f64().unwrap() - 0.210592996505151).abs() < 1e-12);

    let v = json_of(&["pathbound", "--h", "4", "--theta", "0"]);
    assert!((v["bound"].as_f64().unwrap() - 1.0 / 120.0).abs() < 1e-18);
}

#[test]
fn floats_carry_seventeen_digits() {
    let out = rmf(&["pathbound", "--h", "4", "--theta", "0"]);
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.contains("\"bound\": 0.0083333333333333332"), "{s}");
}

#[test]
fn exit_codes() {
    assert_eq!(rmf(&["critical", "--theta", "1.5"]).status.code(), Some(2));
    assert_eq!(rmf(&["bounds", "--m", "0.5"]).status.code(), Some(2));
    assert_eq!(rmf(&["tree-sim", "--grid", "0.3:0.1:0.1"]).status.code(), Some(2));
    assert_eq!(rmf(&["bogus"]).status.code(), Some(2));
    assert_eq!(rmf(&["bricklayer", "--n-brick", "7"]).status.code(), Some(2));
    assert_eq!(rmf(&["critical", "--theta", "0.5", "--format", "csv"]).status.code(), Some(2));
    let guard = rmf(&["lattice-sim", "--theta", "0.3", "--radius", "20000", "--replicas", "1"]);
    assert_eq!(guard.status.code(), Some(3));
    let err = String::from_utf8(rmf(&["critical", "--theta", "1.5"]).stderr).unwrap();
    assert!(err.contains("theta"), "{err}");
}

#[test]
fn out_file_written_only_on_success() {
    let dir = tempfile::tempdir().unwrap();
    let ok = dir.path().join("ok.json");
    let st = rmf(&["bounds", "--m", "3", "--out", ok.to_str().unwrap()]);
    assert!(st.status.success());
    assert!(st.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&ok).unwrap()).unwrap();
    assert_eq!(v["params"]["m"], 3.0);

    let bad = dir.path().join("bad.json");
    let st = rmf(&["bounds", "--m", "-1", "--out", bad.to_str().unwrap()]);
    assert_eq!(st.status.code(), Some(2));
    assert!(!bad.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn csv_exports_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("set.csv");
    let args = ["lattice-export", "--theta", "0.4", "--radius", "8", "--seed", "5"];
    let st = rmf(&[&args[..], &["--format", "csv", "--out", path.to_str().unwrap()]].concat());
    assert!(st.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# command=lattice-export"));
    let records = rmf_core::lattice_sim::parse_csv(text.as_bytes()).unwrap();
    let v = json_of(&args);
    let sites = v["sites"].as_array().unwrap();
    assert_eq!(records.len(), sites.len());
    for (r, s) in records.iter().zip(sites) {
        assert_eq!(r.label, s["label"].as_f64().unwrap());
        let c: Vec<i64> = s["coords"].as_array().unwrap().iter().map(|x| x.as_i64().unwrap()).collect();
        assert_eq!(r.coords, c);
    }

    let sweep = rmf(&["lattice-sweep", "--grid", "0.2:0.4:0.1", "--radius", "10", "--replicas", "10", "--format", "csv"]);
    let text = String::from_utf8(sweep.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "theta,probability,stderr,samples");
    assert_eq!(rows.len(), 4);
}

#[test]
fn bricklayer_report_contents() {
    let v = json_of(&["bricklayer", "--n-brick", "32", "--depth", "6", "--replicas", "8"]);
    assert_eq!(v["all_paths_verified"], true);
    for r in v["replicas"].as_array().unwrap() {
        let map = r["good_map"].as_array().unwrap();
        assert_eq!(map.len(), 13);
        if r["percolates"] == true {
            let w = r["witness"].as_array().unwrap();
            assert_eq!(w[0], serde_json::json!([0.0, 0]));
            assert!(w.last().unwrap()[0].as_f64().unwrap() >= 6.0);
        }
    }
    let v = json_of(&["bricklayer-check", "--n-brick", "16", "--q", "2"]);
    assert_eq!(v["a_threshold"], 5);
    assert_eq!(v["passed"], true);
    assert!(v["open_implies_increasing"].is_null());
}
