use std::fs;
use std::process::{Command, Output};

fn ntsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ntsim")).args(args).output().expect("binary runs")
}

#[test]
fn lists_builtins() {
    let out = ntsim(&["list-scenarios"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["fig5_multipath", "fig7_staggered", "fig7_failover", "flash_crowd"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing from {text}");
    }
}

#[test]
fn validate_exit_codes() {
    assert_eq!(ntsim(&["validate", "fig7_failover"]).status.code(), Some(0));
    assert_eq!(ntsim(&["validate", "no_such_scenario"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "name = \"x\"\n[sim]\nkind = \"multipath\"\nt_end_s = \"soon\"\n").unwrap();
    let out = ntsim(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn bad_override_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = ntsim(&["run", "fig7_failover", "--override", "consumer.window", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unfinished_download_exits_3_and_still_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = ntsim(&["run", "fig7_failover", "--override", "sim.t_end_s=2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let consumers = fs::read_to_string(dir.path().join("consumers.csv")).unwrap();
    assert!(consumers.contains("not finished"));
    assert!(dir.path().join("link_utilization.csv").exists());
}

#[test]
fn repetitions_write_per_rep_dirs_and_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let out = ntsim(&["run", "fig7_failover", "--reps", "2", "--seed", "7", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for k in 0..2 {
        let run = fs::read_to_string(dir.path().join(format!("rep{k}/run.txt"))).unwrap();
        assert!(run.contains(&format!("seed = {}", 7 + k)), "{run}");
    }
    let agg = fs::read_to_string(dir.path().join("aggregate.csv")).unwrap();
    assert!(agg.lines().count() > 1);
}
