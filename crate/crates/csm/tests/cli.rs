//! End-to-end tests of the csm binary: every exit-code branch and each
//! subcommand's output contract.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_csm"))
}

fn stdlib_file(name: &str) -> String {
    format!("{}/stdlib/{}", env!("CARGO_MANIFEST_DIR"), name)
}

fn tmp(name: &str, content: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("csm-cli-{}-{}", std::process::id(), name));
    fs::write(&path, content).unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn check_clean_file_exits_zero_silently() {
    let out = bin().args(["check", &stdlib_file("counter.csml")]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{:?}", out);
    assert!(stdout(&out).is_empty());
    assert!(stderr(&out).is_empty());
}

#[test]
fn check_bad_file_exits_one_with_positioned_diagnostics() {
    let path = tmp("bad.csml", "MODULE M(in %x, out %x)\nAUTOMATON A\nSTATES (S/x)\nTRANS\nS --{ x }--> S\nEND\nEND\n");
    let out = bin().arg("check").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    // FILE:LINE:COL: CODE: message
    assert!(err.contains("E_DUP_FORMAL"), "{}", err);
    assert!(err.contains(&format!("{}:1:", path.display())), "{}", err);
}

#[test]
fn usage_error_exits_two() {
    let out = bin().args(["explore", "--depth", "3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["expand", "--bogus-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // missing file is a usage-level failure, not a diagnostic
    let out = bin().args(["check", "/nonexistent/x.csml"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn expand_flat_matches_size_law() {
    let out = bin()
        .args(["expand", &stdlib_file("counter.csml"), "--module", "COUNTER", "--bind", "N=3", "--format", "flat"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let trans_lines = text.lines().filter(|l| l.contains("--{")).count();
    assert_eq!(trans_lines, 11, "{}", text);
    assert!(text.contains("STATES (OVER/over, UNDER/under, s[0]/c[0], s[1]/c[1], s[2]/c[2])"));
}

#[test]
fn expand_writes_output_file() {
    let path = std::env::temp_dir().join(format!("csm-cli-{}-out.csmf", std::process::id()));
    let out = bin()
        .args(["expand", "--module", "COUNTER", "--bind", "N=2", "-o"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty());
    assert!(fs::read_to_string(&path).unwrap().contains("AUTOMATON COUNTER.AUTOMATON"));
}

#[test]
fn dot_subcommand_emits_digraph() {
    let out = bin().args(["dot", "--module", "ARBITER", "--bind", "N=2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("digraph {"));
    assert!(text.contains("\"ARBITER.AUTOMATON/IDLE\""));
}

#[test]
fn expand_system_file() {
    let sys = tmp(
        "counter.csms",
        "SYSTEM BUF\nINSTANCE C(2, inc, dec, under, over, c0, c1): COUNTER\nCNT: C.AUTOMATON\nEXTERNAL inc, dec\nEND\n",
    );
    let out = bin().arg("expand").arg("--system").arg(&sys).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{:?}", out);
    let text = stdout(&out);
    assert!(text.starts_with("EXTERNAL dec, inc\n"));
    assert!(text.contains("AUTOMATON C.AUTOMATON"));
    assert_eq!(text.lines().filter(|l| l.contains("--{")).count(), 8); // 3N+2 at N=2
}

#[test]
fn expand_header_only_module_fails() {
    let sys = tmp("x.csms", "SYSTEM\nINSTANCE G(d, e, m(a1), k(a2)): X\nEND\n");
    let out = bin().arg("expand").arg("--system").arg(&sys).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("E_HEADER_ONLY"));
}

#[test]
fn simulate_trace_file() {
    let sys = tmp(
        "sim.csms",
        "SYSTEM\nINSTANCE C(2, inc, dec, under, over, c0, c1): COUNTER\nEXTERNAL inc, dec\nEND\n",
    );
    // inc, inc, inc, blank (empty set), dec
    let trace = tmp("trace.txt", "inc\ninc\ninc\n\ndec\n");
    let out = bin().arg("simulate").arg("--system").arg(&sys).arg("--trace").arg(&trace).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{:?}", out);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines,
        vec![
            "STEP 1: (s[1]) emits {c1}",
            "STEP 2: (OVER) emits {over}",
            "STEP 3: (OVER) emits {over}",
            "STEP 4: (OVER) emits {over}",
            "STEP 5: (OVER) emits {over}",
        ]
    );
}

#[test]
fn simulate_rejects_undeclared_input() {
    let sys = tmp(
        "sim2.csms",
        "SYSTEM\nINSTANCE C(2, inc, dec, under, over, c0, c1): COUNTER\nEXTERNAL inc\nEND\n",
    );
    let trace = tmp("trace2.txt", "dec\n");
    let out = bin().arg("simulate").arg("--system").arg(&sys).arg("--trace").arg(&trace).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("E_NOT_EXTERNAL"));
}

#[test]
fn explore_report_lines() {
    let sys = tmp(
        "exp.csms",
        "SYSTEM\nINSTANCE C(2, inc, dec, under, over, c0, c1): COUNTER\nEXTERNAL inc, dec\nEND\n",
    );
    let out = bin()
        .arg("explore")
        .arg("--system")
        .arg(&sys)
        .args(["--depth", "6"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{:?}", out);
    let text = stdout(&out);
    let states: Vec<&str> = text.lines().filter(|l| l.starts_with("STATE ")).collect();
    assert_eq!(states, vec!["STATE (OVER)", "STATE (UNDER)", "STATE (s[0])", "STATE (s[1])"]);
    assert!(text.contains("EDGE (s[0]) --{inc}--> (s[1])"));
}

#[test]
fn explore_budget_exceeded() {
    let sys = tmp(
        "exp2.csms",
        "SYSTEM\nINSTANCE C(2, inc, dec, under, over, c0, c1): COUNTER\nEXTERNAL inc, dec\nEND\n",
    );
    let out = bin()
        .arg("explore")
        .arg("--system")
        .arg(&sys)
        .args(["--depth", "6", "--budget", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("E_BUDGET_EXCEEDED"));
}

#[test]
fn determinism_clean_module_exits_zero() {
    let out = bin()
        .args([
            "determinism",
            &stdlib_file("deterministic_counter.csml"),
            "--module",
            "DETERMINISTIC_COUNTER",
            "--bind",
            "N=2",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{:?}", out);
    assert!(stdout(&out).is_empty());
}

#[test]
fn determinism_reports_inc_vs_set_witness() {
    let out = bin()
        .args(["determinism", &stdlib_file("set_counter.csml"), "--module", "SET_COUNTER", "--bind", "N=2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(
        text.lines().any(|l| l.contains("inc*~dec") && l.contains("set[1]") && l.contains("witness {inc, set[1]}")),
        "{}",
        text
    );
}

#[test]
fn check_system_file_against_builtins() {
    let good = tmp("chk.csms", "SYSTEM\nINSTANCE C(2, inc, dec, under, over, c0, c1): COUNTER\nEND\n");
    let out = bin().arg("check").arg(&good).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{:?}", out);

    let bad = tmp("chk2.csms", "SYSTEM\nINSTANCE C(2, inc, inc, under, over, c0, c1): COUNTER\nEND\n");
    let out = bin().arg("check").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("E_DUP_ACTUAL"));
}
