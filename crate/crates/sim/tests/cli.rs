use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use adtn_sim::commands::{SweepRow, SWEEP_JSON};
use adtn_sim::Summary;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_adtn-sim"))
}

fn scenario(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("s.toml");
    fs::write(&path, body).unwrap();
    path
}

const SMALL: &str = r#"
seed = 1
ticks = 400

[world]
nodes = 8
arena = [250.0, 250.0]

[world.mobility]
model = "random_waypoint"

[group_layout]
size = 4

[node]
tx_period = 4

[workload]
messages = 5
interval = 40
payload_size = 32

[[adversaries]]
type = "passive"
name = "eve"
"#;

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn summary(dir: &Path) -> Summary {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn same_seed_gives_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let s = scenario(tmp.path(), SMALL);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["run", "--scenario", s.to_str().unwrap(), "--seed", "7", "--out", out.to_str().unwrap(), "--trace-frames"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 8);
    for name in names {
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?}");
    }
    assert_eq!(summary(&a).config.seed, 7);
}

#[test]
fn unknown_member_names_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let s = scenario(
        tmp.path(),
        "[world]\nnodes = 4\n[[groups]]\nname = \"a\"\nmembers = [0, 1, 9]\n[[groups]]\nname = \"b\"\nmembers = [2, 3]\n",
    );
    let o = run(&["run", "--scenario", s.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("groups[0].members"));
}

#[test]
fn typo_names_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let s = scenario(tmp.path(), "[node]\ntx_perod = 3\n");
    let o = run(&["run", "--scenario", s.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tx_perod"));
}

#[test]
fn unreadable_scenario_is_distinct_from_invalid() {
    let o = run(&["run", "--scenario", "/nonexistent/s.toml"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot read"));
    let o = run(&["attack", "--trace", "/nonexistent"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn overrides_are_echoed() {
    let tmp = tempfile::tempdir().unwrap();
    let s = scenario(tmp.path(), SMALL);
    let out = tmp.path().join("o");
    let o = run(&["run", "--scenario", s.to_str().unwrap(), "--set", "node.tx_period=5", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(summary(&out).config.node.tx_period, 5);
    let echoed: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(echoed["node"]["tx_period"], 5);
}

#[test]
fn sweep_rows_and_reproducibility() {
    let tmp = tempfile::tempdir().unwrap();
    let s = scenario(tmp.path(), SMALL);
    let out = tmp.path().join("sw");
    let o = run(&["sweep", "--scenario", s.to_str().unwrap(), "--grid", "node.tx_period=1,2,4", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);

    let o = run(&[
        "sweep", "--scenario", s.to_str().unwrap(),
        "--grid", "node.tx_period=2,4", "--grid", "group_layout.size=3,5",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let rows: Vec<SweepRow> = serde_json::from_str(&fs::read_to_string(out.join(SWEEP_JSON)).unwrap()).unwrap();
    assert_eq!(rows.len(), 4);
    for row in &rows {
        let point = tmp.path().join(format!("p{}", row.index));
        let mut args = vec!["run".to_string(), "--scenario".into(), s.to_str().unwrap().into(), "--seed".into(), row.seed.to_string()];
        for (path, value) in &row.parameters {
            args.push("--set".into());
            args.push(format!("{path}={value}"));
        }
        args.extend(["--out".into(), point.to_str().unwrap().into()]);
        assert!(bin().args(&args).output().unwrap().status.success());
        let single = summary(&point);
        assert_eq!(single.run_id, row.run_id);
        assert_eq!(single.metrics, row.metrics);
    }
}

#[test]
fn bad_grids_are_rejected_up_front() {
    let o = run(&["sweep"]);
    assert_eq!(o.status.code(), Some(6));
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty grid"));
    let o = run(&["sweep", "--grid", "node.retransmit_cap=1,2"]);
    assert_eq!(o.status.code(), Some(6));
    assert!(String::from_utf8_lossy(&o.stderr).contains("node.retransmit_cap"));
}

#[test]
fn attack_replays_a_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let s = scenario(tmp.path(), SMALL);
    let out = tmp.path().join("o");
    assert!(run(&["run", "--scenario", s.to_str().unwrap(), "--out", out.to_str().unwrap(), "--trace-frames"]).status.success());

    let o = run(&["attack", "--trace", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let reports: Vec<adtn_sim::report::AdversaryReport> =
        serde_json::from_str(&fs::read_to_string(out.join("anonymity.json")).unwrap()).unwrap();
    assert_eq!(reports, summary(&out).adversaries);

    let o = run(&["attack", "--trace", out.to_str().unwrap(), "--keys", "all", "--out", tmp.path().join("a").to_str().unwrap()]);
    assert!(o.status.success());
    let reports: Vec<adtn_sim::report::AdversaryReport> =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("a/anonymity.json")).unwrap()).unwrap();
    assert_eq!(reports[0].kind, "internal");
    assert!(reports[0].sound);
}

#[test]
fn attack_detects_mixed_up_traces() {
    let tmp = tempfile::tempdir().unwrap();
    let s = scenario(tmp.path(), SMALL);
    let out = tmp.path().join("o");
    assert!(run(&["run", "--scenario", s.to_str().unwrap(), "--out", out.to_str().unwrap()]).status.success());

    // frames were not traced
    let o = run(&["attack", "--trace", out.to_str().unwrap(), "--keys", "g0"]);
    assert_eq!(o.status.code(), Some(7));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--trace-frames"));

    let config = out.join("config.json");
    let edited = fs::read_to_string(&config).unwrap().replace("\"seed\": 1", "\"seed\": 2");
    fs::write(&config, edited).unwrap();
    let o = run(&["attack", "--trace", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(7));
    assert!(String::from_utf8_lossy(&o.stderr).contains("run id mismatch"));
}

#[test]
fn oracle_command_reports_a_match() {
    let tmp = tempfile::tempdir().unwrap();
    let s = scenario(
        tmp.path(),
        r#"
ticks = 300
[world]
nodes = 6
arena = [200.0, 200.0]
[node]
tx_period = 3
freshness_age = 10000
overheard_cap = 10000
retransmit_cap = 10000
seen_forget = 10000
[[traffic]]
tick = 0
node = 0
payload = "hi"
"#,
    );
    let o = run(&["oracle", "--scenario", s.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("verdict: match"));

    let o = run(&["oracle", "--scenario", s.to_str().unwrap(), "--set", "node.source_cache.enabled=true"]);
    assert_eq!(o.status.code(), Some(9));
}
