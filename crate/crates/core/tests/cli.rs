use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use normsel::document::parse_norm_net;
use normsel::fixtures::airport;
use normsel::ilp::{parse_lp, ProblemConfig, RepresentationChoice};
use normsel::norm_net::NormSystem;
use normsel::rational::{int, ratio};
use normsel::solve::{solve_problem, SolveOptions, SolveReport, SolveStatus};

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_normsel")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_inclusion_prints_n3() {
    let o = run(&["solve", path(&example("airport.json")), "--problem", "mnsp", "--representation", "inclusion"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("optimum: {n3}"), "{text}");
    assert!(text.contains("objective: 3 (3)"), "{text}");
}

#[test]
fn solve_generalisation_with_budget_prints_n1() {
    let airport = example("airport.json");
    let o = run(&[
        "solve", path(&airport), "--problem", "mnsplb", "--representation", "generalisation", "--budget", "5", "--weights", "0.5,0.5",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("optimum: {n1}"), "{}", stdout(&o));
}

#[test]
fn all_optima_are_listed() {
    let o = run(&["solve", path(&example("airport.json")), "--problem", "mnsp", "--representation", "generalisation", "--all-optima"]);
    let text = stdout(&o);
    assert!(text.contains("optima: 4\n  {n1,n4}\n  {n1,n5}\n  {n2,n4}\n  {n2,n5}\n"), "{text}");
    let o = run(&[
        "solve", path(&example("airport.json")), "--problem", "mnsp", "--representation", "generalisation", "--all-optima",
        "--max-optima", "2",
    ]);
    assert!(stdout(&o).contains("optima: 2, more exist"), "{}", stdout(&o));
}

#[test]
fn json_report_matches_the_library() {
    let o = run(&[
        "solve", path(&example("airport.json")), "--problem", "mnsplb", "--representation", "inclusion", "--budget", "10",
        "--weights", "0.5,0.5", "--all-optima", "--json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let cli: SolveReport = serde_json::from_str(&stdout(&o)).unwrap();
    let config = ProblemConfig::mnsplb(RepresentationChoice::Inclusion, int(10), ratio(1, 2), ratio(1, 2));
    let lib = solve_problem(&airport(), &config, &SolveOptions::default()).unwrap();
    assert_eq!(cli.without_timing(), lib.without_timing());
}

#[test]
fn conflicting_pins_exit_1() {
    let o = run(&[
        "solve", path(&example("conflicting-in-force.json")), "--problem", "mnsplb", "--representation", "generalisation",
        "--budget", "5", "--weights", "0.5,0.5", "--in-force", "preserve", "--json",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let report: SolveReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report.status, SolveStatus::Infeasible);
    assert_eq!(report.objective, None);
}

#[test]
fn preserve_mode_keeps_norms_in_force() {
    let o = run(&[
        "solve", path(&example("extended.json")), "--problem", "mnsplb", "--representation", "generalisation", "--budget", "5",
        "--weights", "0.5,0.5", "--in-force", "preserve", "--all-optima", "--json",
    ]);
    let report: SolveReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report.optima, [NormSystem::new(["n6", "n7"])]);
}

#[test]
fn broken_document_exits_2_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    let text = std::fs::read_to_string(example("airport.json")).unwrap().replacen("\"n2\"\n    ],", "\"ghost\"\n    ],", 1);
    std::fs::write(&broken, text).unwrap();
    let o = run(&["validate", path(&broken)]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("exclusivity[0]") && err.contains("ghost"), "{err}");

    let o = run(&["validate", path(&example("airport.json"))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("valid: 5 norms"), "{}", stdout(&o));
}

#[test]
fn usage_and_input_errors() {
    let airport = example("airport.json");
    assert_eq!(run(&["solve", path(&airport), "--problem", "nope", "--representation", "inclusion"]).status.code(), Some(3));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(run(&["solve", path(&airport), "--problem", "mnsp", "--representation", "inclusion", "--weights", "1"]).status.code(), Some(3));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    // missing budget, weights not summing to one, missing file
    assert_eq!(run(&["solve", path(&airport), "--problem", "mnsplb", "--representation", "inclusion"]).status.code(), Some(2));
    let o = run(&["solve", path(&airport), "--problem", "mnsplb", "--representation", "inclusion", "--budget", "5", "--weights", "0.5,0.6"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sum to 1"), "{}", stderr(&o));
    assert_eq!(run(&["validate", "/nonexistent/net.json"]).status.code(), Some(2));
}

#[test]
fn custom_representation_file() {
    let dir = tempfile::tempdir().unwrap();
    let power = dir.path().join("power.json");
    std::fs::write(&power, r#"{"power": {"n1": 1, "n2": 1, "n3": 10, "n4": 2, "n5": 2}}"#).unwrap();
    let spec = format!("custom:{}", path(&power));
    let o = run(&["solve", path(&example("airport.json")), "--problem", "mnsp", "--representation", &spec]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("optimum: {n3}"));

    std::fs::write(&power, r#"{"power": {"n1": 1, "n2": 1, "n3": 1, "n4": 2, "n5": 2}}"#).unwrap();
    let o = run(&["solve", path(&example("airport.json")), "--problem", "mnsp", "--representation", &spec]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn export_lp_writes_a_parseable_program() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("airport.lp");
    let o = run(&[
        "export-lp", path(&example("airport.json")), "--problem", "mnsplb", "--representation", "generalisation", "--budget", "5",
        "--weights", "0.5,0.5", "-o", path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let model = parse_lp(&text).unwrap();
    assert_eq!(model.variables.len(), 6);
    assert!(text.contains(" g3_n3: x_n4 + x_n5 <= 1\n"), "{text}");
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = run(&["gen", "--n", "12", "--depth", "3", "--branching", "3", "--px", "0.2", "--ps", "0.1", "--seed", "42", "-o", path(p)]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(parse_norm_net(&text).unwrap().len(), 12);
    assert_eq!(run(&["gen", "--n", "3", "--px", "2"]).status.code(), Some(2));
}

#[test]
fn budget_sweep_csv() {
    let o = run(&[
        "sweep", path(&example("airport-c1-6.json")), "--budget-range", "4:10:1", "--problem", "mnsplb", "--representation",
        "inclusion", "--weights", "0.5,0.5", "--all-optima",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut reader = csv::Reader::from_reader(o.stdout.as_slice());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, normsel::sweep::CSV_HEADER);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 7);
    let optima = |i: usize| rows[i].get(9).unwrap().to_string();
    assert_eq!(optima(0), "{n2};{n4};{n5}");
    assert_eq!(optima(6), "{n3}");
    assert_eq!(rows[6].get(7), Some("11/20"));
}

#[test]
fn single_point_sweep_equals_direct_solve() {
    let sweep = run(&[
        "sweep", path(&example("airport.json")), "--budget-range", "5:5:1", "--problem", "mnsplb", "--representation",
        "generalisation", "--weights", "0.5,0.5",
    ]);
    let solve = run(&[
        "solve", path(&example("airport.json")), "--problem", "mnsplb", "--representation", "generalisation", "--budget", "5",
        "--weights", "0.5,0.5", "--json",
    ]);
    let report: SolveReport = serde_json::from_str(&stdout(&solve)).unwrap();
    let mut reader = csv::Reader::from_reader(sweep.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].get(7).unwrap(), normsel::rational::format_exact(report.objective.as_ref().unwrap()));
    assert_eq!(rows[0].get(8).unwrap(), report.optima[0].to_string());
}

#[test]
fn weight_sweep_csv() {
    let o = run(&[
        "sweep", path(&example("airport.json")), "--weight-grid", "0.5", "--problem", "vmnsplb", "--representation",
        "generalisation", "--budget", "5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = csv::Reader::from_reader(o.stdout.as_slice()).records().count();
    assert_eq!(rows, 6);
    let o = run(&["sweep", path(&example("airport.json")), "--problem", "mnsp", "--representation", "inclusion"]);
    assert_eq!(o.status.code(), Some(3));
}
