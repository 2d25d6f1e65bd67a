use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_ucl-bandit");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write_config(dir: &TempDir, name: &str, json: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, json).unwrap();
    p.to_string_lossy().into_owned()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

fn read(p: &str) -> String {
    std::fs::read_to_string(Path::new(p)).unwrap()
}

#[test]
fn simulate_writes_the_regret_table() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", r#"{"run":{"runs":2}}"#);
    let out = path(&dir, "r.csv");
    let plot = path(&dir, "r.svg");
    let o = run(&["simulate", "--config", &cfg, "--out", &out, "--plot", &plot]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&out);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,mean_cum_regret,sem,lai_robbins_lb"));
    assert_eq!(lines.count(), 5000);
    assert!(read(&plot).contains("<polyline"));
}

#[test]
fn single_arm_has_zero_regret() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "c.json",
        r#"{"surface":{"rows":1,"cols":1,"base_value":0},"prior":{"variant":"uninformative"},"run":{"horizon":50,"runs":3}}"#,
    );
    let out = path(&dir, "r.csv");
    assert_eq!(run(&["simulate", "--config", &cfg, "--out", &out]).status.code(), Some(0));
    for line in read(&out).lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(&cols[1..], ["0", "0", "0"]);
    }
}

#[test]
fn bounds_table_and_admissibility() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "c.json",
        r#"{"means":[10,8,5],"prior":{"variant":"uncorrelated","mean":{"values":[11,7,4]}},"bound":{"a":4},"run":{"horizon":2000}}"#,
    );
    let out = path(&dir, "b.csv");
    assert_eq!(run(&["bounds", "--config", &cfg, "--out", &out]).status.code(), Some(0));
    let csv = read(&out);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "arm,delta_i,delta_m_i,case,eta_i,nhat_i,bound_total");
    // optimal arm 0 omitted
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1,2,1,case4,"));
    assert!(lines[2].starts_with("2,5,1,case4,"));

    let low = write_config(&dir, "low.json", r#"{"means":[10,8,5],"prior":{"variant":"uncorrelated","mean":{"values":[0,0,0]}}}"#);
    let o = run(&["bounds", "--config", &low, "--out", &out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("need a > 3.28"));
}

#[test]
fn verify_passes_on_a_small_problem() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "c.json",
        r#"{"means":[10,8,5],"prior":{"variant":"uncorrelated","mean":{"values":[10,8,5]}},"bound":{"a":4},"run":{"horizon":500,"runs":50}}"#,
    );
    let out = path(&dir, "v.csv");
    let o = run(&["verify", "--config", &cfg, "--out", &out, "--threads", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&out);
    assert_eq!(csv.lines().next(), Some("arm,empirical_n_i,bound,satisfied"));
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn config_errors_exit_one_and_name_the_key() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "x.csv");
    for (json, key) in [(r#"{"policy":{"K":0}}"#, "policy.K"), (r#"{"run":{"horizn":5}}"#, "run.horizn")] {
        let cfg = write_config(&dir, "bad.json", json);
        let o = run(&["simulate", "--config", &cfg, "--out", &out]);
        assert_eq!(o.status.code(), Some(1));
        assert!(String::from_utf8_lossy(&o.stderr).contains(key), "{json}");
    }
    let o = run(&["simulate", "--config", &path(&dir, "missing.json"), "--out", &out]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", r#"{"prior":{"variant":"uninformative"},"run":{"horizon":5,"runs":1}}"#);
    let out = path(&dir, "no/such/dir/x.csv");
    assert_eq!(run(&["simulate", "--config", &cfg, "--out", &out]).status.code(), Some(2));
}

#[test]
fn presets_change_the_prior() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", r#"{"prior":{"variant":"uncorrelated"},"run":{"horizon":300,"runs":2}}"#);
    let a = path(&dir, "a.csv");
    let b = path(&dir, "b.csv");
    assert_eq!(run(&["simulate", "--config", &cfg, "--preset", "well-informed", "--out", &a]).status.code(), Some(0));
    assert_eq!(run(&["simulate", "--config", &cfg, "--preset", "ill-informed", "--out", &b]).status.code(), Some(0));
    assert_ne!(read(&a), read(&b));
}

#[test]
fn check_reports_each_inequality() {
    let o = run(&["check", "--resolution", "200", "--samples", "1000"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).count(), 7);
    let code = o.status.code();
    assert!(code == Some(0) || code == Some(3));
    assert_eq!(code == Some(0), !text.contains("FAIL"));
}
