use std::fs;
use std::net::TcpListener;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_presgauge"));
    c.env_remove("PRESGAUGE_SCORER_URL");
    c
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn synth(dir: &Path, n: usize) {
    let o = run(&["synth", "--count", &n.to_string(), "--seed", "11"], dir);
    assert!(o.status.success());
    fs::write(dir.join("deck.jsonl"), &o.stdout).unwrap();
}

#[test]
fn schema_violation_exits_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("d.jsonl"),
        "{\"id\":\"a\",\"task\":\"scoring\",\"truth\":4.0,\"prediction\":4.5}\n\n{\"id\":\"b\",\"task\":\"comparison\",\"truth\":\"Slide C\",\"prediction\":\"A\"}\n",
    )
    .unwrap();
    let o = run(&["eval", "d.jsonl"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn empty_dataset_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("d.jsonl"), "\n\n").unwrap();
    assert_eq!(run(&["eval", "d.jsonl"], dir.path()).status.code(), Some(3));
    assert_eq!(run(&["reward", "d.jsonl"], dir.path()).status.code(), Some(3));
}

#[test]
fn unreachable_scorer_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 1);
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let url = format!("http://127.0.0.1:{port}/score");
    let o = bin()
        .args(["refine", "deck.jsonl", "--out-dir", "out"])
        .env("PRESGAUGE_SCORER_URL", &url)
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn perturb_is_deterministic_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 6);
    let a = run(&["perturb", "deck.jsonl", "--seed", "5"], dir.path());
    let b = run(&["perturb", "deck.jsonl", "--seed", "5"], dir.path());
    let c = run(&["perturb", "deck.jsonl", "--seed", "5", "--sequential"], dir.path());
    let d = run(&["perturb", "deck.jsonl", "--seed", "6"], dir.path());
    assert!(a.status.success());
    assert_eq!(stdout(&a).lines().count(), 18);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    assert_ne!(a.stdout, d.stdout);
}

#[test]
fn eval_report_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 4);
    let deck = fs::read_to_string(dir.path().join("deck.jsonl")).unwrap();
    let mut data = String::new();
    for (i, slide) in deck.lines().enumerate() {
        data += &format!("{{\"id\":\"s{i}\",\"task\":\"scoring\",\"truth\":9.0,\"deck\":\"d{}\",\"slide\":{slide}}}\n", i % 2);
        data += &format!("{{\"id\":\"f{i}\",\"task\":\"adjustment\",\"truth\":[\"no_deficiency\"],\"slide\":{slide}}}\n");
    }
    fs::write(dir.path().join("d.jsonl"), data).unwrap();
    let a = run(&["eval", "d.jsonl"], dir.path());
    let b = run(&["eval", "d.jsonl", "--sequential"], dir.path());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let report: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(report["corpus"]["records"], 8);
    assert!(report["scoring"]["mae"].is_number());
    assert_eq!(report["config_fingerprint"].as_str().unwrap().len(), 64);

    let md = run(&["eval", "d.jsonl", "--format", "md", "--task", "scoring"], dir.path());
    assert!(stdout(&md).contains("| Scoring | MAE"));
    assert!(!stdout(&md).contains("Adjustment"));
}

#[test]
fn refine_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 2);
    let o = run(&["refine", "deck.jsonl", "--out-dir", "out", "--max-iters", "3", "--threshold", "10.5"], dir.path());
    // a threshold above the scale is rejected by the checker
    assert!(!o.status.success());
    let o = run(&["refine", "deck.jsonl", "--out-dir", "out", "--max-iters", "3"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    assert_eq!(fs::read_to_string(out.join("refined.jsonl")).unwrap().lines().count(), 2);
    let trace: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("trace.json")).unwrap()).unwrap();
    assert_eq!(trace.as_array().unwrap().len(), 2);
    assert!(fs::read_dir(out.join("svg")).unwrap().count() >= 2);
}

#[test]
fn config_override_changes_fingerprint() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("d.jsonl"), "{\"id\":\"a\",\"task\":\"scoring\",\"truth\":4.0,\"prediction\":4.5}\n").unwrap();
    fs::write(dir.path().join("c.json"), "{\"reward\":{\"zeta\":0.5}}").unwrap();
    let a = run(&["eval", "d.jsonl"], dir.path());
    let b = run(&["eval", "d.jsonl", "--config", "c.json"], dir.path());
    assert!(b.status.success(), "{}", String::from_utf8_lossy(&b.stderr));
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn plan_and_render() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("m.json"),
        "{\"items\":[{\"kind\":\"text\",\"rank\":0,\"text\":\"Quarterly results\"},{\"kind\":\"image\",\"rank\":1,\"intrinsic_aspect\":1.5}]}",
    )
    .unwrap();
    let o = run(&["plan", "m.json"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    fs::write(dir.path().join("s.json"), &o.stdout).unwrap();
    let svg = run(&["render", "s.json", "--com"], dir.path());
    assert!(stdout(&svg).starts_with("<svg"));
    let score = run(&["score", "s.json"], dir.path());
    let v: serde_json::Value = serde_json::from_str(stdout(&score).trim()).unwrap();
    assert!(v["breakdown"]["final_score"].as_f64().unwrap() >= 8.0);
}
