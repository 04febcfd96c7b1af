use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn lspine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lspine")).args(args).output().expect("binary runs")
}

fn lspine_in(dir: &std::path::Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lspine")).current_dir(dir).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json report")
}

#[test]
fn classify_two_one() {
    let out = lspine(&["classify", "--n", "2", "--k", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("ends: INFINITE"), "{text}");
    assert!(text.contains("dim: 2"), "{text}");
    let v = json(&lspine(&["classify", "--n", "2", "--k", "1", "--format", "json"]));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["ends"], "INFINITE");
    assert_eq!(v["dim"], 2);
}

#[test]
fn norm_of_the_two_one_patch() {
    let patch = data("patch21.gog");
    let v = json(&lspine(&["norm", patch.to_str().unwrap(), "--format", "json"]));
    assert_eq!(v["norm"], 11);
    assert_eq!(v["norm_from_star"], "11");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(lspine(&["classify", "--n", "2", "--k", "1", "--frobnicate"]).status.code(), Some(2));
    assert_eq!(lspine(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(lspine(&["norm", "/definitely/not/here.gog"]).status.code(), Some(2));
    assert_eq!(lspine(&["verify-lemmas", "--lemma", "NOPE"]).status.code(), Some(2));
    let out = lspine(&["push", "--radius", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn reports_are_byte_identical() {
    let args = ["verify-lemmas", "--trials", "20", "--seed", "9", "--format", "json"];
    let a = lspine(&args);
    let b = lspine(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let mut wide = args.to_vec();
    wide.extend(["--jobs", "4"]);
    assert_eq!(lspine(&wide).stdout, a.stdout);

    let dir = tempfile::tempdir().unwrap();
    let seed = data("seed40.gog");
    let push = ["push", "--generate", seed.to_str().unwrap(), "--radius", "24", "--seed", "2", "--format", "json"];
    let x = lspine_in(dir.path(), &push);
    let cert = std::fs::read(dir.path().join("certificate.json")).unwrap();
    let y = lspine_in(dir.path(), &push);
    assert!(x.status.success(), "{}", String::from_utf8_lossy(&x.stderr));
    assert_eq!(x.stdout, y.stdout);
    assert_eq!(std::fs::read(dir.path().join("certificate.json")).unwrap(), cert);
}

#[test]
fn listed_norm_changes_match_applied_moves() {
    let patch = data("patch21.gog");
    let p = patch.to_str().unwrap();
    let list = json(&lspine(&["move", p, "--format", "json"]));
    let moves = list["moves"].as_array().unwrap();
    assert!(!moves.is_empty());
    for m in moves {
        let i = m["index"].to_string();
        let v = json(&lspine(&["move", p, "--apply", &i, "--format", "json"]));
        let change = v["to_norm"].as_i64().unwrap() - v["from_norm"].as_i64().unwrap();
        assert_eq!(change, m["norm_change"].as_i64().unwrap(), "move {i}");
    }
}

#[test]
fn pushed_paths_clear_the_ball_and_read_back() {
    let dir = tempfile::tempdir().unwrap();
    let seed = data("seed40.gog");
    let v = json(&lspine_in(
        dir.path(),
        &["push", "--generate", seed.to_str().unwrap(), "--radius", "28", "--seed", "3", "--output", "pushed.json", "--format", "json"],
    ));
    assert_eq!(v["replay"]["ok"], true);
    assert!(v["input_min_norm"].as_u64().unwrap() <= 28);
    assert!(v["pushed_min_norm"].as_u64().unwrap() > 28);
    let again = json(&lspine_in(dir.path(), &["push", "--input", "pushed.json", "--radius", "28", "--format", "json"]));
    assert_eq!(again["eliminations"], 0);
    assert_eq!(again["pushed_length"], v["pushed_length"]);
}

#[test]
fn loops_from_the_ray_push_out() {
    let dir = tempfile::tempdir().unwrap();
    let seed = data("seed40.gog");
    let s = seed.to_str().unwrap();
    let ray = json(&lspine_in(dir.path(), &["ray", s, "--length", "6", "--emit-loop", "3", "--output", "loop.json", "--format", "json"]));
    assert_eq!(ray["written"], "loop.json");
    let v = json(&lspine_in(dir.path(), &["push-loop", "--loop", "loop.json", "--k", "28", "--n", "158", "--format", "json"]));
    assert_eq!(v["replay"]["ok"], true);
    assert!(v["pushed_min_norm"].as_u64().unwrap() > 158);
    assert!(dir.path().join("certificate.json").exists());
    // A loop that dips into the ball is refused as bad input.
    let low = lspine_in(dir.path(), &["push-loop", "--loop", "loop.json", "--k", "100", "--n", "158"]);
    assert_eq!(low.status.code(), Some(2));
}

#[test]
fn presentation_failure_writes_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let ok = lspine_in(dir.path(), &["verify-presentation", "--a1", "2", "--a2", "3", "--format", "json"]);
    assert_eq!(json(&ok)["all_pass"], true);
    assert!(!dir.path().join("lspine-witness.json").exists());

    let s3 = data("s3.group");
    let bad = lspine_in(dir.path(), &["verify-presentation", "--a1", s3.to_str().unwrap(), "--a2", "2", "--witness", "w.json"]);
    assert_eq!(bad.status.code(), Some(1));
    let w: Value = serde_json::from_slice(&std::fs::read(dir.path().join("w.json")).unwrap()).unwrap();
    assert_eq!(w["failures"][0]["item"], "22");
}

#[test]
fn dot_output() {
    let patch = data("patch21.gog");
    let out = lspine(&["stargraph", patch.to_str().unwrap(), "--dot"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("graph star {"));
    assert_eq!(text.matches("subgraph cluster_").count(), 2);
    let ball = lspine(&["ball", patch.to_str().unwrap(), "--radius", "12", "--dot"]);
    assert!(String::from_utf8(ball.stdout).unwrap().contains(" -- "));
}
