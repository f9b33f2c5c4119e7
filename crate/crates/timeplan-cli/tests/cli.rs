//! End-to-end tests of the `timeplan` binary: exit codes are the verdict
//! channel (0 accepted, 1 rejected/none, 2 input error), artifacts go to
//! standard output.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const M1: &str = "\
init qi
halt qh
trans qi inc 1 q1
trans q1 dec 1 q2
trans q2 zero 1 qh
";

/// Increments forever; has no halting computation.
const M2: &str = "\
init qi
halt qh
trans qi inc 1 q1
trans q1 inc 1 q1
";

fn timeplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_timeplan"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).expect("write fixture");
    path
}

#[test]
fn witness_accepts_the_halting_machine_and_rejects_the_divergent_one() {
    let dir = TempDir::new().unwrap();
    let m1 = write(dir.path(), "m1.mach", M1);
    let m2 = write(dir.path(), "m2.mach", M2);

    let out = timeplan(&["witness", m1.to_str().unwrap(), "--future"]);
    assert_eq!(
        code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let plan = stdout(&out);
    assert!(plan.contains("\"timelines\""), "artifact on stdout: {plan}");

    let out = timeplan(&["witness", m2.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).is_empty(), "no artifact for a rejection");
}

#[test]
fn witness_validates_through_the_validate_subcommand() {
    let dir = TempDir::new().unwrap();
    let m1 = write(dir.path(), "m1.mach", M1);

    let domain_text = stdout(&timeplan(&["compile-minsky", m1.to_str().unwrap()]));
    let plan_text = stdout(&timeplan(&["witness", m1.to_str().unwrap(), "--future"]));
    let domain = write(dir.path(), "m1.domain.json", &domain_text);
    let plan = write(dir.path(), "m1.plan.json", &plan_text);

    for flags in [&["--future"][..], &[][..]] {
        let mut args = vec!["validate", domain.to_str().unwrap(), plan.to_str().unwrap()];
        args.extend_from_slice(flags);
        let out = timeplan(&args);
        assert_eq!(code(&out), 0, "{}", stdout(&out));
        assert!(
            stdout(&out).starts_with("verdict: accepted"),
            "{}",
            stdout(&out)
        );
    }

    // Stretching the very first token breaks the unit spacing of the
    // compiled rules: still parseable, but rejected.
    let mut doc: serde_json::Value = serde_json::from_str(&plan_text).unwrap();
    doc["timelines"][0]["tokens"][0]["duration"] = "5".into();
    let stretched = write(dir.path(), "stretched.json", &doc.to_string());
    let out = timeplan(&[
        "validate",
        domain.to_str().unwrap(),
        stretched.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    let report = stdout(&out);
    assert!(report.starts_with("verdict: rejected"), "{report}");
    assert!(report.contains("unsatisfied"), "{report}");
}

#[test]
fn input_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let m1 = write(dir.path(), "m1.mach", M1);
    let domain_text = stdout(&timeplan(&["compile-minsky", m1.to_str().unwrap()]));
    let domain = write(dir.path(), "m1.domain.json", &domain_text);

    // Missing file.
    let out = timeplan(&["validate", "nope.json", "also-nope.json"]);
    assert_eq!(code(&out), 2);

    // Bad machine line, with its position in the diagnostic.
    let bad = write(dir.path(), "bad.mach", "init a\nhalt b\ntrans a bump 1 b\n");
    let out = timeplan(&["simulate", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    // A plan that does not cover the domain's variables is ill-posed,
    // not merely rejected.
    let empty = write(dir.path(), "empty.json", "{\"timelines\": []}");
    let out = timeplan(&[
        "validate",
        domain.to_str().unwrap(),
        empty.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn simulate_prints_the_shortest_halting_computation() {
    let dir = TempDir::new().unwrap();
    let m1 = write(dir.path(), "m1.mach", M1);
    let out = timeplan(&["simulate", m1.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().map(str::trim).collect();
    assert_eq!(lines, ["qi 0 0", "q1 1 0", "q2 0 0", "qh 0 0"]);

    let m2 = write(dir.path(), "m2.mach", M2);
    let out = timeplan(&["simulate", m2.to_str().unwrap(), "--max-steps", "50"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("50 steps"));
}

#[test]
fn solve_finds_a_plan_for_the_halting_machine_only() {
    let dir = TempDir::new().unwrap();
    let m1 = write(dir.path(), "m1.mach", M1);
    let m2 = write(dir.path(), "m2.mach", M2);
    let d1 = write(
        dir.path(),
        "d1.json",
        &stdout(&timeplan(&["compile-minsky", m1.to_str().unwrap()])),
    );
    let d2 = write(
        dir.path(),
        "d2.json",
        &stdout(&timeplan(&["compile-minsky", m2.to_str().unwrap()])),
    );

    let out = timeplan(&["solve", d1.to_str().unwrap(), "--bound", "16", "--future"]);
    assert_eq!(
        code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let plan = write(dir.path(), "solved.json", &stdout(&out));
    let out = timeplan(&[
        "validate",
        d1.to_str().unwrap(),
        plan.to_str().unwrap(),
        "--future",
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));

    let out = timeplan(&["solve", d2.to_str().unwrap(), "--bound", "12"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn render_draws_one_labelled_rectangle_per_token() {
    let dir = TempDir::new().unwrap();
    let plan = write(
        dir.path(),
        "three.json",
        r#"{"timelines": [{"variable": "x", "tokens": [
            {"value": "a", "duration": "7"},
            {"value": "b", "duration": "3"},
            {"value": "c", "duration": "3.9"}
        ]}]}"#,
    );
    let out = timeplan(&["render", plan.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let svg = stdout(&out);
    let rects = svg.matches("stroke=\"#333\"").count();
    let token_rects = svg
        .lines()
        .filter(|l| l.contains("<rect") && l.contains("stroke"))
        .count();
    assert_eq!(token_rects, 3, "{rects} strokes\n{svg}");
    for value in ["a", "b", "c"] {
        assert!(
            svg.contains(&format!(">{value}</text>")),
            "label {value} present"
        );
    }
}

#[test]
fn artifacts_round_trip_through_their_parsers() {
    let dir = TempDir::new().unwrap();
    let m1 = write(dir.path(), "m1.mach", M1);
    let domain_text = stdout(&timeplan(&["compile-minsky", m1.to_str().unwrap()]));
    let plan_text = stdout(&timeplan(&["witness", m1.to_str().unwrap(), "--future"]));

    let domain = timeplan_cli::formats::parse_domain(&domain_text).expect("domain reparses");
    assert_eq!(
        timeplan_cli::formats::serialize_domain(&domain),
        domain_text
    );

    let plan = timeplan_cli::formats::parse_plan(&plan_text, &domain).expect("plan reparses");
    assert_eq!(timeplan_cli::formats::serialize_plan(&plan), plan_text);

    let machine = timeplan_cli::formats::parse_machine(M1).expect("machine parses");
    let serialized = timeplan_cli::formats::serialize_machine(&machine);
    assert_eq!(
        timeplan_cli::formats::parse_machine(&serialized).expect("round trip"),
        machine
    );
}
