use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcf-forcing"))
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn parse_command() {
    let o = bin(&["parse", "w^2*3+w+4"]);
    assert_eq!(
        (o.status.code(), stdout(&o).as_str()),
        (Some(0), "w^2*3+w+4 (successor)\n")
    );
    let o = bin(&["parse", "w*2", "--fund", "3"]);
    assert_eq!(stdout(&o), "w+3\n");
    let o = bin(&["parse", "w+w"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains('^'));
}

#[test]
fn unknown_preset() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["build", "--preset", "nope", "--out", s(&dir.path().join("x.json"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown preset"));
}

#[test]
fn smoke_build_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    let o = bin(&["build", "--preset", "smoke", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["B"]["w"], serde_json::json!(["2", "w"]));
    assert_eq!(bin(&["verify", "--in", s(&out)]).status.code(), Some(0));
}

#[test]
fn w2_demo_round_trip_and_fault() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.json");
    let chain = dir.path().join("c.json");
    let o = bin(&[
        "build",
        "--preset",
        "w2-demo",
        "--out",
        s(&out),
        "--chain-out",
        s(&chain),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["chain_len"], 141);

    let o = bin(&["verify", "--in", s(&out), "--chain", s(&chain), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["checks"].as_array().unwrap().len(), 6);

    // hand edit: drop w from B[w]
    let mut edited = v.clone();
    let bw = edited["B"]["w"].as_array_mut().unwrap();
    bw.retain(|x| x != "w");
    let bad = dir.path().join("bad.json");
    fs::write(&bad, serde_json::to_string(&edited).unwrap()).unwrap();
    let o = bin(&["verify", "--in", s(&bad), "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["failures"][0]["name"], "a-max");
    assert_eq!(report["failures"][0]["witness"][0]["alpha"], "w");

    // a chain from a different schedule is an input error
    let smoke = dir.path().join("smoke-chain.json");
    bin(&[
        "build",
        "--preset",
        "smoke",
        "--out",
        s(&dir.path().join("sm.json")),
        "--chain-out",
        s(&smoke),
    ]);
    assert_eq!(
        bin(&["verify", "--in", s(&out), "--chain", s(&smoke)]).status.code(),
        Some(2)
    );
}

#[test]
fn schedule_file_build() {
    let dir = tempfile::tempdir().unwrap();
    let sched = dir.path().join("sched.json");
    fs::write(
        &sched,
        r#"{"ordinals": ["3", "w+1"], "colors": 2,
            "separations": [{"lambda": "w", "alpha": "w+1", "gamma": "1", "avoid": ["3"]}]}"#,
    )
    .unwrap();
    let out = dir.path().join("o.json");
    let o = bin(&["build", "--schedule", s(&sched), "--out", s(&out)]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}{}",
        stdout(&o),
        String::from_utf8_lossy(&o.stderr)
    );
    assert_eq!(bin(&["verify", "--in", s(&out)]).status.code(), Some(0));

    fs::write(&sched, "{not json").unwrap();
    assert_eq!(
        bin(&["build", "--schedule", s(&sched), "--out", s(&out)]).status.code(),
        Some(2)
    );
}

#[test]
fn verify_missing_file() {
    assert_eq!(
        bin(&["verify", "--in", "/nonexistent/missing.json"]).status.code(),
        Some(2)
    );
}

#[test]
fn oracle_command() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.json");
    let q = dir.path().join("q.json");
    fs::write(
        &p,
        r#"{"support": ["1", "w"], "color": {"1": 0, "w": 1}, "rel1": [["1","1"],["w","w"],["w","1"]], "bound": 2}"#,
    )
    .unwrap();
    fs::write(
        &q,
        r#"{"support": ["1"], "color": {"1": 0}, "rel1": [["1","1"]], "bound": 2}"#,
    )
    .unwrap();
    let o = bin(&["oracle", "--p", s(&p), "--q", s(&q)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["bound"], 2);

    fs::write(
        &q,
        r#"{"support": ["1"], "color": {"1": 1}, "rel1": [["1","1"]], "bound": 2}"#,
    )
    .unwrap();
    let o = bin(&["oracle", "--p", s(&p), "--q", s(&q)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn laws_command() {
    let o = bin(&["laws", "--samples", "500", "--seed", "9", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["pass"], true);
}
