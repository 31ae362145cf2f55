//! End-to-end runs of the `starwall` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = "97,96,-4,1,-8,8";

fn starwall(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_starwall"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn reports(dir: &Path) -> Vec<serde_json::Value> {
    serde_json::from_str(&fs::read_to_string(dir.join("reports.json")).unwrap()).unwrap()
}

#[test]
fn naive_residual_is_a_confirmed_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = starwall(&["residual-naive", "--E", "1"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("confirmed failure"));
    let r = reports(dir.path());
    assert_eq!(r[0]["pass"], false);
    assert_eq!(r[1]["pass"], true);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["wall-limit"][..],
        &["wigner", "--E", "-1"],
        &["wigner", "--format", "xml"],
        &["wigner", "--grid", "10,10,0"],
        &["wigner", "--grid", "97,96,1,-4,-8,8"],
    ] {
        let o = starwall(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn output_is_deterministic_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = starwall(&["wigner", "--grid", SMALL, "--threads", "1"], d.path());
        assert_eq!(o.status.code(), Some(0));
    }
    let name = "wigner_E1.csv";
    let (x, y) = (fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
    assert_eq!(x, y);
    let text = String::from_utf8(x).unwrap();
    assert_eq!(text.lines().next(), Some("x,p,re,im"));
    assert_eq!(text.lines().count(), 1 + 97 * 96);
}

#[test]
fn thread_count_does_not_change_output() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    starwall(&["wigner", "--grid", SMALL, "--threads", "1"], a.path());
    starwall(&["wigner", "--grid", SMALL, "--threads", "4"], b.path());
    let name = "wigner_E1.csv";
    assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
}

#[test]
fn json_format_writes_one_file_per_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = starwall(&["wigner", "--grid", SMALL, "--format", "json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("wigner_E1.json").exists());
    assert!(!dir.path().join("wigner_E1.csv").exists());
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("wigner_E1.json")).unwrap()).unwrap();
    assert_eq!(v["re"].as_array().unwrap().len(), 97 * 96);
}

#[test]
fn formulation_studies_pass_on_the_desk_grid() {
    for study in ["residual-dp", "residual-kw", "equivalence", "purestate", "dynamics"] {
        let dir = tempfile::tempdir().unwrap();
        let o = starwall(&[study, "--E", "1"], dir.path());
        assert_eq!(o.status.code(), Some(0), "{study}: {}", stdout(&o));
        assert!(reports(dir.path()).iter().all(|r| r["pass"].is_boolean()));
    }
}

#[test]
fn wall_limit_exit_code_matches_its_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = starwall(&["wall-limit", "--alphas", "1,2,4,8", "--grid", SMALL], dir.path());
    let all_pass = reports(dir.path()).iter().all(|r| r["pass"] == true);
    assert_eq!(o.status.code(), Some(if all_pass { 0 } else { 1 }));
    let table = fs::read_to_string(dir.path().join("wall_study.csv")).unwrap();
    assert_eq!(table.lines().next(), Some("alpha,sup_distance,phase_shift"));
    assert_eq!(table.lines().count(), 5);
}
