use std::path::PathBuf;
use std::process::{Command, Output};

use scott_core::report::normalize_lines;

fn corpus_file(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/corpus").join(format!("{name}.poset"));
    p.to_string_lossy().into_owned()
}

fn golden(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(p).unwrap()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scottbench"))
        .args(args)
        .env_remove("SCOTT_LEVELS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn weak_one_step_failure_on_fig2() {
    let o = run(&["check", &corpus_file("fig2"), "--property", "weak-one-step"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("A=ℕ; x=(1,ω)"), "{}", stdout(&o));
}

#[test]
fn one_step_failure_on_fig3() {
    let o = run(&["check", &corpus_file("fig3"), "--property", "one-step", "--levels", "4,8,16", "--guard", "1", "--max-f-size", "3", "--seed", "0"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("A=ℕ; x=a"));
    let o = run(&["check", &corpus_file("fig3"), "--property", "weak-one-step"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn closure_of_empty_set() {
    let o = run(&["closure", &corpus_file("empty"), "--set", "{}"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("cl(A)  = {}"));
}

#[test]
fn closure_and_one_step_of_named_sets() {
    let o = run(&["closure", &corpus_file("fig3"), "--set", "ℕ"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("cl(A)  = {1, 2, 3, ω, a}"));
    let o = run(&["one-step", &corpus_file("fig3"), "--set", "ℕ"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("A′     = {1, 2, 3, ω}"));
    let o = run(&["one-step", &corpus_file("fig3"), "--set", "{2}"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn unstable_verdict_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("late.poset");
    std::fs::write(
        &path,
        "family late level N {
  elem [k | 1<=k<=N] ω; elem z for N>=6;
  le [k | 1<=k<=N] ω; le z ω for N>=6;
  chain [k | 1<=k<=N] -> ω as ℕ;
  set ℕ = [k | 1<=k<=N] tails ℕ;
}
",
    )
    .unwrap();
    let o = run(&["check", path.to_str().unwrap(), "--property", "one-step", "--levels", "4,6,8"]);
    assert_eq!(code(&o), 2, "{}", stdout(&o));
    let o = run(&["check", path.to_str().unwrap(), "--property", "one-step", "--levels", "8,12,16"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn errors_exit_with_three_and_carry_positions() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.poset");
    std::fs::write(&bad, "poset p {\n  elem a;\n  le a b;\n}\n").unwrap();
    let o = run(&["check", bad.to_str().unwrap(), "--property", "one-step"]);
    assert_eq!(code(&o), 3);
    let err = String::from_utf8_lossy(&o.stderr).into_owned();
    assert!(err.contains(":3:3:") && err.contains("unknown element `b`"), "{err}");
    let empty = dir.path().join("empty.poset");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(code(&run(&["closure", empty.to_str().unwrap(), "--set", "{}"])), 3);
    assert_eq!(code(&run(&["check", &corpus_file("fig1"), "--property", "nonsense"])), 3);
    assert_eq!(code(&run(&["check", "/no/such/file.poset", "--property", "one-step"])), 3);
}

fn dot_counts(dot: &str) -> (usize, usize, usize) {
    let edges: Vec<&str> = dot.lines().filter(|l| l.contains("->")).collect();
    let nodes = dot.lines().filter(|l| l.contains("[label=") && !l.contains("->")).count();
    let dashed = edges.iter().filter(|l| l.contains("style=dashed")).count();
    (nodes, edges.len() - dashed, dashed)
}

#[test]
fn dot_export_of_fig3_and_fig1() {
    let o = run(&["export-dot", &corpus_file("fig3")]);
    assert_eq!(code(&o), 0);
    assert_eq!(dot_counts(&stdout(&o)), (5, 4, 1));
    let o = run(&["export-dot", &corpus_file("fig1"), "--level", "3"]);
    assert_eq!(dot_counts(&stdout(&o)), (10, 9, 3));
    assert_eq!(stdout(&run(&["export-dot", &corpus_file("fig1")])), stdout(&o));
}

#[test]
fn reports_match_golden_files_modulo_timing() {
    for fig in ["fig1", "fig2", "fig3"] {
        let o = run(&["check", &corpus_file(fig), "--property", "all", "--json"]);
        assert_eq!(code(&o), 1, "{fig}");
        let got = normalize_lines(&stdout(&o)).unwrap();
        let want = normalize_lines(&golden(&format!("{fig}.jsonl"))).unwrap();
        assert_eq!(got, want, "{fig}");
    }
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("corpus.jsonl");
    let o = run(&["suite", "--corpus", "--report", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("0 violations"));
    assert!(stdout(&o).contains("limitation: Q(ℝ_l) is not constructed"));
    let got = normalize_lines(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(got, normalize_lines(&golden("corpus.jsonl")).unwrap());
}

#[test]
fn report_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.jsonl");
    let o = run(&["check", &corpus_file("fig3"), "--property", "exact", "--json", "--report", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let file = std::fs::read_to_string(&out).unwrap();
    assert_eq!(normalize_lines(&file).unwrap(), normalize_lines(&stdout(&o)).unwrap());
}

#[test]
fn levels_come_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_scottbench"))
        .args(["check", "corpus:fig3", "--property", "weak-one-step", "--json"])
        .env("SCOTT_LEVELS", "3,5,7")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("\"level\":[3,5,7]"));
}

#[test]
fn qspace_reports_checks_and_limitation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.poset");
    std::fs::write(&path, "space sierpinski { points 0 1; open 1; }\n").unwrap();
    let o = run(&["qspace", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let s = stdout(&o);
    assert!(s.contains("Q(X) (ordered by ⊇) has 3 members"));
    assert!(s.contains("upper Vietoris = Scott on Q(X): yes"));
    assert!(s.contains("Q(ℝ_l) is not constructed"));
    let o = run(&["qspace", &corpus_file("fig3")]);
    assert_eq!(code(&o), 0);
}

#[test]
fn search_with_zero_budget_is_exhausted() {
    let o = run(&["search", "--problem", "exact-not-continuous", "--budget", "0"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("no instance"));
    assert_eq!(code(&run(&["search", "--problem", "5.99", "--budget", "0"])), 3);
}

#[test]
fn export_reads_back_as_the_same_level() {
    let o = run(&["export", "corpus:fig2", "--level", "3"]);
    assert_eq!(code(&o), 0);
    let doc = scott_core::dsl::parse(&stdout(&o)).unwrap();
    let lvl = doc.level(None, 1).unwrap();
    let want = scott_core::corpus::fig2_level(3).unwrap();
    assert_eq!(lvl.dposet, want.dposet);
    assert_eq!(lvl.schema, want.schema);
}
