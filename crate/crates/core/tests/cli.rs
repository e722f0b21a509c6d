use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_grand-lebesgue"));
    c.current_dir(env!("CARGO_MANIFEST_DIR")).env_remove("GRAND_LEBESGUE_CONFIG");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn bracket(line: &str) -> (f64, f64) {
    let inner = line.split('[').nth(1).unwrap().trim_end_matches(']');
    let mut it = inner.split(", ").map(|s| s.parse::<f64>().unwrap());
    (it.next().unwrap(), it.next().unwrap())
}

#[test]
fn spike_grand_norm_is_psi_max() {
    let o = run(&["norm-seq", "--q", "1", "--theta", "1", "--input", "data/spike.seq"]);
    assert_eq!(o.status.code(), Some(0));
    let (lo, hi) = bracket(stdout(&o).trim());
    assert!((lo - 1.32110).abs() < 1e-5 && (hi - 1.32110).abs() < 1e-5, "{lo} {hi}");
}

#[test]
fn infinite_norm_exits_3() {
    let o = run(&["norm-seq", "--q", "2", "--theta", "0.5", "--input", "data/harmonic_root.seq"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("inf"));
    let o = run(&["norm-amalgam", "--p", "2", "--q", "2", "--theta", "1", "--input", "data/plateaus.step"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn powerlog_above_window_is_nonmember() {
    let o = run(&["membership", "--family", "powerlog", "--q", "2", "--theta", "1", "--a", "0.6"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("nonmember"));
}

#[test]
fn verify_holder_suite_passes() {
    let o = run(&["verify", "--suite", "holder_seq", "--seed", "42", "--cases", "1000"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains(" 0 fail"));
}

#[test]
fn records_output_is_deterministic() {
    let args = ["verify", "--suite", "norm_axioms", "--suite", "transfer", "--cases", "30", "--format", "records"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let last = text.lines().last().unwrap();
    let v: serde_json::Value = serde_json::from_str(last).unwrap();
    assert_eq!(v["suite"], "transfer");
    assert_eq!(v["summary"]["fail"], 0);
}

#[test]
fn small_norm_of_spike() {
    let o = run(&["norm-small", "--q", "1", "--theta", "1", "--input", "data/spike.seq", "--format", "records"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    let upper = v["bracket"]["upper"].as_f64().unwrap();
    assert!((upper - 0.7569451064575837).abs() < 1e-9);
}

#[test]
fn demo_writes_two_column_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ladder.tsv");
    let o = run(&["demo", "--family", "sparse-indicator", "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 14);
    assert!(rows.iter().all(|r| r.split('\t').count() == 2));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"theta": 0.5}"#).unwrap();
    let o = bin()
        .args(["norm-seq", "--q", "2", "--input", "data/harmonic_root.seq"])
        .env("GRAND_LEBESGUE_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    std::fs::write(&cfg, r#"{"thetta": 0.5}"#).unwrap();
    let o = bin().args(["verify", "--list"]).env("GRAND_LEBESGUE_CONFIG", &cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["norm-seq", "--q", "1"]).status.code(), Some(2));
    assert_eq!(run(&["norm-seq", "--q", "1", "--input", "data/missing.seq"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--suite", "no_such_suite"]).status.code(), Some(2));
}
