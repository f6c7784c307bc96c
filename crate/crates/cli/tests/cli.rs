//! Exit codes and output shapes of the `mmm` commands.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mmm_env(args: &[&str], threshold: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mmm"));
    cmd.args(args).env_remove("MMM_THRESHOLD");
    if let Some(t) = threshold {
        cmd.env("MMM_THRESHOLD", t);
    }
    cmd.output().expect("mmm runs")
}

fn mmm(args: &[&str]) -> Output {
    mmm_env(args, None)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn traj_outputs_and_exit_codes() {
    let o = mmm(&["traj", "1/2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), r#"{"L":4,"m":"1/2"}"#);

    let o = mmm(&["traj", "7/12", "--emit-points"]);
    let v = json(&o);
    assert_eq!(v["points"].as_array().unwrap().len(), 9);
    assert_eq!(v["medians"][0], "7/12");

    assert_eq!(mmm(&["traj", "1"]).status.code(), Some(2));
    assert_eq!(mmm(&["traj", "0"]).status.code(), Some(2));
    assert_eq!(mmm(&["traj", "2/0"]).status.code(), Some(2));
    assert_eq!(mmm(&["traj", "x"]).status.code(), Some(2));
    assert_eq!(
        mmm(&["traj", "10/19", "--threshold", "3"]).status.code(),
        Some(2)
    );

    let o = mmm(&["traj", "10/19", "--threshold", "46"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no termination"));
    assert_eq!(
        mmm(&["traj", "10/19", "--threshold", "47"]).status.code(),
        Some(0)
    );
}

#[test]
fn threshold_comes_from_the_environment() {
    assert_eq!(
        mmm_env(&["traj", "10/19"], Some("20")).status.code(),
        Some(3)
    );
    assert_eq!(
        mmm_env(&["traj", "10/19"], Some("50")).status.code(),
        Some(0)
    );
    assert_eq!(
        mmm_env(&["traj", "10/19"], Some("many")).status.code(),
        Some(2)
    );
    // the flag wins over the environment
    let o = mmm_env(&["traj", "10/19", "--threshold", "100"], Some("20"));
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn sweep_summary_and_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.jsonl");
    let o = mmm(&[
        "sweep",
        "--seed",
        "1/2",
        "--max-atoms",
        "3",
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["stopped"], serde_json::json!(["max-atoms"]));
    assert_eq!(v["atoms"], 3);
    assert_eq!(v["subintervals"][1]["start"], "1/2");
    assert_eq!(v["subintervals"][1]["L"], 73);
    assert_eq!(v["len_changes"], serde_json::json!({"69": 1}));
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 4);
    assert!(dir.path().join("s.jsonl.journal").exists());

    // no stop condition, a seed outside (0, 1), a bad direction
    assert_eq!(mmm(&["sweep", "--seed", "1/2"]).status.code(), Some(2));
    assert_eq!(
        mmm(&["sweep", "--seed", "3/2", "--max-atoms", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        mmm(&[
            "sweep",
            "--seed",
            "1/2",
            "--max-atoms",
            "1",
            "--direction",
            "up"
        ])
        .status
        .code(),
        Some(2)
    );
    // resuming with a different configuration is refused
    let o = mmm(&[
        "sweep",
        "--seed",
        "1/3",
        "--max-atoms",
        "3",
        "--out",
        p(&out),
        "--resume",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("different configuration"));
    // resuming without a journal
    let fresh = dir.path().join("none.jsonl");
    let o = mmm(&[
        "sweep",
        "--seed",
        "1/2",
        "--max-atoms",
        "3",
        "--out",
        p(&fresh),
        "--resume",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn probe_step_underflow_exits_with_four() {
    let o = mmm(&[
        "sweep",
        "--seed",
        "5756575/11241454",
        "--max-segments",
        "4",
        "--eps-floor",
        "1/10000000",
    ]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn sweep_without_termination_exits_with_three() {
    let o = mmm(&[
        "sweep",
        "--seed",
        "1/2",
        "--max-atoms",
        "2",
        "--threshold",
        "60",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn both_directions_write_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.jsonl");
    let o = mmm(&[
        "sweep",
        "--seed",
        "7/12",
        "--direction",
        "both",
        "--max-atoms",
        "3",
        "--out",
        p(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v = json(&o);
    assert_eq!(v["atoms"], 6);
    assert_eq!(v["corners"], serde_json::json!(["7/12"]));
    let merged = fs::read_to_string(&out).unwrap();
    let left = fs::read_to_string(dir.path().join("b.jsonl.left")).unwrap();
    let right = fs::read_to_string(dir.path().join("b.jsonl.right")).unwrap();
    // the right side's seed point is owned by the left stream
    assert_eq!(
        merged.lines().count(),
        left.lines().count() + right.lines().count() - 1
    );

    let o = mmm(&[
        "corners",
        "--in",
        p(&dir.path().join("b.jsonl.right")),
        p(&dir.path().join("b.jsonl.left")),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let c = json(&o);
    assert_eq!(c["corners"], v["corners"]);
    assert_eq!(c["segments"][0]["m"]["a"], "-213");
    assert_eq!(c["segments"][1]["m"]["a"], "219");
}

#[test]
fn corners_without_a_file() {
    let o = mmm(&[
        "corners",
        "--seed",
        "2/3",
        "--direction",
        "both",
        "--max-atoms",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["corners"], serde_json::json!(["2/3"]));
    assert_eq!(
        v["segments"][1]["m"],
        serde_json::json!({"a": "231/2", "b": "-76"})
    );
    assert_eq!(mmm(&["corners"]).status.code(), Some(2));
}

#[test]
fn sigma_tables() {
    let dir = tempfile::tempdir().unwrap();
    let with = dir.path().join("d.jsonl");
    let bare = dir.path().join("n.jsonl");
    for (path, extra) in [(&with, Some("--with-driving")), (&bare, None)] {
        let mut args = vec![
            "sweep",
            "--seed",
            "1/2",
            "--max-atoms",
            "5",
            "--out",
            p(path),
        ];
        args.extend(extra);
        assert_eq!(mmm(&args).status.code(), Some(0));
    }

    let o = mmm(&["sigma", "--in", p(&with), "--subinterval", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "1\t(72,73)\n2\t(71,72)\n3\t(70,71)\n4\t(69,70)\n"
    );

    let o = mmm(&["sigma", "--in", p(&with), "--subinterval", "2", "--json"]);
    let first: Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    assert_eq!(first, serde_json::json!({"j": 1, "cycles": [[72, 73]]}));

    // the seed point alone: an empty table
    let o = mmm(&["sigma", "--in", p(&with), "--subinterval", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());

    assert_eq!(
        mmm(&["sigma", "--in", p(&bare), "--subinterval", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        mmm(&["sigma", "--in", p(&with), "--subinterval", "9"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        mmm(&[
            "sigma",
            "--in",
            p(&dir.path().join("missing")),
            "--subinterval",
            "1"
        ])
        .status
        .code(),
        Some(1)
    );
}

#[test]
fn verify_reports_failures_with_five() {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = dir.path().join("f.toml");
    fs::write(
        &fixtures,
        r#"
[[piece]]
id = "near-4/7-right"
anchor = "4/7"
side = "right"
interval = { lo = "4/7", hi = "44485228/77846827", lo_closed = true, hi_closed = true }
m = { a = "202033/16", b = "-7214" }
tier = "quick"

[[piece]]
id = "shifted"
anchor = "4/7"
side = "right"
interval = { lo = "4/7", hi = "44485228/77846827", lo_closed = true, hi_closed = true }
m = { a = "202033/16", b = "-7213" }
tier = "quick"
"#,
    )
    .unwrap();
    let report = dir.path().join("r.json");
    let o = mmm(&[
        "verify-paper",
        "--fixtures",
        p(&fixtures),
        "--report",
        p(&report),
    ]);
    assert_eq!(o.status.code(), Some(5));
    let text = stdout(&o);
    assert!(text
        .lines()
        .any(|l| l.starts_with("pass") && l.contains("near-4/7-right")));
    assert!(text
        .lines()
        .any(|l| l.starts_with("FAIL") && l.contains("shifted")));
    let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["failed"], 1);
    assert_eq!(v["fixtures"][1]["samples"][0]["ok"], false);

    fs::write(&fixtures, "[[piece]]\nid = 1\n").unwrap();
    assert_eq!(
        mmm(&["verify-paper", "--fixtures", p(&fixtures)])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        mmm(&["verify-paper", "--tier", "medium"]).status.code(),
        Some(2)
    );
}

#[test]
fn quick_tier_of_the_built_in_set_passes() {
    let o = mmm(&["verify-paper"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let summary = stdout(&o).lines().last().unwrap().to_string();
    assert!(summary.contains(" 0 failed, 5 skipped"), "{summary}");
}
