use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nerf_cli::frame_file;
use tempfile::TempDir;

fn nerf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nerf"))
        .args(args)
        .env_remove("NERF_WORK_CAP")
        .output()
        .expect("run nerf")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn construct(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let out = path(dir, name);
    let mut all = vec!["construct"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", s(&out)]);
    let o = nerf(&all);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    out
}

fn report_section(path: &Path) -> serde_json::Value {
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v["report"].clone()
}

#[test]
fn construct_singer_etf() {
    let dir = TempDir::new().unwrap();
    let o = nerf(&["construct", "singer-etf", "--q", "3", "--out", s(&path(&dir, "s.frame"))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("4x13"), "{}", stdout(&o));
    let frame = frame_file::load(&path(&dir, "s.frame")).unwrap();
    assert_eq!((frame.dim(), frame.len()), (4, 13));
}

#[test]
fn construct_gaussian_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = construct(&dir, "a.frame", &["gaussian", "--m", "25", "--n", "500", "--seed", "7"]);
    let b = construct(&dir, "b.frame", &["gaussian", "--m", "25", "--n", "500", "--seed", "7"]);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn construct_mub_rejects_even_dimension() {
    let dir = TempDir::new().unwrap();
    let o = nerf(&["construct", "mub", "--m", "4", "--out", s(&path(&dir, "m.frame"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("M must be an odd prime"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(nerf(&["certify"]).status.code(), Some(1));
    assert_eq!(nerf(&["bogus"]).status.code(), Some(1));
    assert_eq!(nerf(&["--help"]).status.code(), Some(0));
}

#[test]
fn certify_singer_q2_exhaustive() {
    let dir = TempDir::new().unwrap();
    let f = construct(&dir, "s.frame", &["singer-etf", "--q", "2"]);
    let rep = path(&dir, "r.json");
    let o = nerf(&["certify", s(&f), "--p", "0.142857142857", "--c", "2", "--report", s(&rep)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("certified"), "{}", stdout(&o));
    let r = report_section(&rep);
    assert_eq!(r["certificate"]["verdict"], "certified");
    assert_eq!(r["certificate"]["worst"]["work"], 7);
    assert_eq!(r["certificate"]["worst"]["method"], "exhaustive");
    assert_eq!(r["certificate"]["analytic"][0]["bound"]["formula_id"], "singer-etf");
}

#[test]
fn certify_sign_matrix_is_refuted() {
    let dir = TempDir::new().unwrap();
    let f = construct(&dir, "pm.frame", &["sign", "--m", "4", "--n", "16", "--seed", "1"]);
    let rep = path(&dir, "r.json");
    let o = nerf(&["certify", s(&f), "--p", "0.5", "--c", "1000", "--mode", "attacks", "--report", s(&rep)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("refuted"));
    let r = report_section(&rep);
    assert_eq!(r["certificate"]["worst"]["cond"], "inf");
    let methods: Vec<String> = r["certificate"]["searches"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["method"].as_str().unwrap().to_owned())
        .collect();
    assert!(methods.contains(&"sign".to_owned()));
}

#[test]
fn certify_by_counting() {
    let dir = TempDir::new().unwrap();
    let f = construct(&dir, "s.frame", &["singer-etf", "--q", "2"]);
    let o = nerf(&["certify", s(&f), "--p", "0.8", "--c", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("refuted: rank-deficient by counting"), "{}", stdout(&o));
}

#[test]
fn work_cap_from_environment() {
    let dir = TempDir::new().unwrap();
    let f = construct(&dir, "s.frame", &["singer-etf", "--q", "3"]);
    let o = Command::new(env!("CARGO_BIN_EXE_nerf"))
        .args(["certify", s(&f), "--p", "0.16", "--c", "2"])
        .env("NERF_WORK_CAP", "10")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("work cap"), "{}", stderr(&o));
}

#[test]
fn reports_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let f = construct(&dir, "g.frame", &["gaussian", "--m", "3", "--n", "12", "--seed", "4", "--field", "complex"]);
    let (a, b) = (path(&dir, "a.json"), path(&dir, "b.json"));
    for (rep, workers) in [(&a, "1"), (&b, "4")] {
        let o = nerf(&["certify", s(&f), "--p", "0.5", "--c", "5", "--workers", workers, "--report", s(rep)]);
        assert!(o.status.code() == Some(0) || o.status.code() == Some(2), "{}", stderr(&o));
    }
    let (ra, rb) = (report_section(&a), report_section(&b));
    assert_eq!(serde_json::to_string(&ra).unwrap(), serde_json::to_string(&rb).unwrap());
    assert_eq!(ra["certificate"]["worst"]["work"], 924);
}

#[test]
fn attack_methods() {
    let dir = TempDir::new().unwrap();
    let pm = construct(&dir, "h.frame", &["sign", "--m", "2", "--n", "4", "--seed", "0"]);
    let o = nerf(&["attack", s(&pm), "--k", "2", "--method", "sign", "--c", "10"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stdout(&o).contains("inf"));

    let etf = construct(&dir, "s.frame", &["singer-etf", "--q", "3"]);
    let rep = path(&dir, "b.json");
    let o = nerf(&["attack", s(&etf), "--k", "5", "--method", "bicap", "--c", "1.5", "--seed", "3", "--report", s(&rep)]);
    assert!(o.status.code() == Some(0) || o.status.code() == Some(2));
    let r = report_section(&rep);
    assert!(r["attack"]["certificate_cond_lower"].is_number() || r["attack"]["certificate_cond_lower"] == "inf");
    assert_eq!(nerf(&["attack", s(&etf), "--k", "5", "--method", "bicap"]).status.code(), Some(1));

    let o = nerf(&["attack", s(&etf), "--k", "11", "--method", "greedy"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("work 25"), "{}", stdout(&o));
}

#[test]
fn bounds_examples() {
    let out = stdout(&nerf(&["bounds", "etf", "--c", "10"]));
    assert!(out.contains("0.49000"), "{out}");
    let out = stdout(&nerf(&["bounds", "threshold", "--c", "1"]));
    assert!(out.contains("0.68269"), "{out}");
    let o = nerf(&["bounds", "gaussian-max-p", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let p = v["report"][0]["value"].as_f64().unwrap();
    assert_eq!(format!("{p:.4}"), "0.1460");
    assert_eq!(v["report"][0]["formula_id"], "gaussian-max-erasure-rate");
    assert_eq!(nerf(&["bounds", "group", "--m", "5", "--c", "10"]).status.code(), Some(1));
}

#[test]
fn sweep_csv_round_trips() {
    let dir = TempDir::new().unwrap();
    let csv_path = path(&dir, "sweep.csv");
    let o = nerf(&["bounds", "sweep", "--c-min", "1", "--c-max", "10", "--steps", "9", "--csv", s(&csv_path)]);
    assert_eq!(o.status.code(), Some(0));
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(reader.headers().unwrap().get(1), Some("singer_etf"));
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 10);
    let table = nerf_cli::sweep_table(1.0, 10.0, 9, 7, 1.0).unwrap();
    for (row, expected) in rows.iter().zip(&table.rows) {
        for (a, b) in row.iter().zip(expected) {
            assert_eq!(a.parse::<f64>().unwrap().to_bits(), b.parse::<f64>().unwrap().to_bits());
        }
    }
}

#[test]
fn simulate_etf_channel() {
    let dir = TempDir::new().unwrap();
    let f = construct(&dir, "s.frame", &["singer-etf", "--q", "3"]);
    let (rep, csv_path) = (path(&dir, "r.json"), path(&dir, "t.csv"));
    let o = nerf(&[
        "simulate", s(&f), "--p", "0.1538461538", "--trials", "100", "--noise", "0.05", "--seed", "9", "--report",
        s(&rep), "--csv", s(&csv_path),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report_section(&rep);
    assert_eq!(r["k"], 11);
    assert!(r["max_excess"].as_f64().unwrap() <= 1e-9);
    let rows: Vec<csv::StringRecord> = csv::Reader::from_path(&csv_path).unwrap().records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 100);
    for row in rows {
        let err: f64 = row[4].parse().unwrap();
        let bound: f64 = row[5].parse().unwrap();
        assert!(err <= bound + 1e-9);
    }

    let o = nerf(&["simulate", s(&f), "--p", "0", "--trials", "10", "--noise", "0", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["report"]["max_error_ratio"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn simulate_tight_frame_full_pattern() {
    let dir = TempDir::new().unwrap();
    let f = construct(&dir, "s.frame", &["singer-etf", "--q", "2"]);
    let o = nerf(&["simulate", s(&f), "--p", "0", "--trials", "20", "--noise", "0.2", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for t in v["report"]["trials"].as_array().unwrap() {
        let snr = t["snr"].as_f64().unwrap();
        assert!(t["error_ratio"].as_f64().unwrap() <= 1.0 / snr + 1e-9);
    }
}
