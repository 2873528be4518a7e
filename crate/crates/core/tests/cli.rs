use std::fs;
use std::path::PathBuf;

use mixdag::cli::{run, CliOutput};
use serde_json::Value;

fn fixture(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("fixtures");
    p.push(format!("{name}.mg"));
    p.to_string_lossy().into_owned()
}

fn scratch(name: &str, contents: &str) -> String {
    let mut p = std::env::temp_dir();
    p.push(format!("mixdag-cli-{}-{name}", std::process::id()));
    fs::write(&p, contents).unwrap();
    p.to_string_lossy().into_owned()
}

fn mixdag(args: &[&str]) -> CliOutput {
    let argv: Vec<&str> = std::iter::once("mixdag")
        .chain(args.iter().copied())
        .collect();
    run(argv)
}

fn json(out: &CliOutput) -> Value {
    serde_json::from_str(&out.stdout).unwrap()
}

#[test]
fn msep_complex_is_separated() {
    let out = mixdag(&[
        "msep",
        &fixture("mg-complex"),
        "--a",
        "Xm",
        "--b",
        "Xk",
        "--c",
        "Xj,Xl",
    ]);
    assert_eq!(out.status, 0);
    assert_eq!(out.stdout, "separated\n");
}

#[test]
fn dsep_and_msep_disagree_on_ce() {
    let ce = fixture("mg-ce");
    let d = mixdag(&["dsep", &ce, "--a", "Xi", "--b", "Xk", "--c", "Xj"]);
    assert_eq!((d.status, d.stdout.as_str()), (0, "separated\n"));

    let m = mixdag(&[
        "msep",
        &ce,
        "--a",
        "Xi",
        "--b",
        "Xk",
        "--c",
        "Xj",
        "--witness",
    ]);
    assert_eq!(m.status, 1);
    assert_eq!(
        m.stdout,
        "connected\nwitness: Xi - Xj - Xk\n  Xj: cross-sub-DAG collider (sub-DAGs 1, 2)\n"
    );

    let j = json(&mixdag(&[
        "msep", &ce, "--a", "Xi", "--b", "Xk", "--c", "Xj", "--json",
    ]));
    assert_eq!(j["verdict"], "connected");
    assert_eq!(j["witness"]["path"], serde_json::json!(["Xi", "Xj", "Xk"]));
    assert_eq!(j["witness"]["triples"][0]["kind"], "cross_collider");
    assert_eq!(
        j["witness"]["triples"][0]["subdags"],
        serde_json::json!([1, 2])
    );
    assert_eq!(j["config"]["semantics"], "default");
}

#[test]
fn semantics_flag_switches_verdict() {
    let edge = fixture("mg-edge");
    let default = mixdag(&["msep", &edge, "--a", "Xi", "--b", "Xk"]);
    let literal = mixdag(&[
        "msep",
        &edge,
        "--a",
        "Xi",
        "--b",
        "Xk",
        "--semantics",
        "literal-collider",
    ]);
    assert_eq!(default.status, 1);
    assert_eq!(literal.status, 0);
}

#[test]
fn verify_ce_passes() {
    let out = mixdag(&[
        "verify",
        &fixture("mg-ce"),
        "--models",
        "100",
        "--semantics",
        "default",
    ]);
    assert_eq!(out.status, 0, "{}", out.stdout);
    assert!(out.stdout.contains("markov violations: 0"));
    assert!(out.stdout.ends_with("pass\n"));
}

#[test]
fn verify_literal_on_edge_reports_violations() {
    let out = mixdag(&[
        "verify",
        &fixture("mg-edge"),
        "--models",
        "10",
        "--semantics",
        "literal-collider",
        "--json",
    ]);
    assert_eq!(out.status, 1);
    let j = json(&out);
    assert_eq!(j["verdict"], "fail");
    assert!(!j["violations"].as_array().unwrap().is_empty());
}

#[test]
fn verify_random_suite_passes() {
    let out = mixdag(&["verify", "--random", "--graphs", "20", "--json"]);
    assert_eq!(out.status, 0);
    let j = json(&out);
    assert_eq!(j["config"]["graph_count"], 20);
    assert_eq!(j["violations"], serde_json::json!([]));
}

#[test]
fn enumerate_lists_statements() {
    let out = mixdag(&["enumerate", &fixture("mg-sep"), "--max-c", "1"]);
    assert_eq!((out.status, out.stdout.as_str()), (0, "Xi _||_ Xk\n"));
    let j = json(&mixdag(&[
        "enumerate",
        &fixture("mg-complex"),
        "--max-c",
        "2",
        "--json",
    ]));
    let statements = j["statements"].as_array().unwrap();
    assert!(statements.contains(&serde_json::json!({"a": "Xk", "b": "Xm", "c": ["Xj", "Xl"]})));
}

#[test]
fn validate_reports_stationary_set() {
    let out = mixdag(&["validate", &fixture("mg-ce")]);
    assert_eq!(out.status, 0);
    assert!(out.stdout.contains("stationary: {Xi, Xk}"));
}

#[test]
fn parse_errors_exit_with_two() {
    let undeclared = scratch("undeclared.mg", "vars Xi\nsubdag 1\nedge Xi -> Xq\n");
    let out = mixdag(&["validate", &undeclared]);
    assert_eq!(out.status, 2);
    assert!(out.stderr.contains("line 3"), "{}", out.stderr);

    let empty = scratch("empty.mg", "vars Xi\n");
    assert_eq!(mixdag(&["validate", &empty]).status, 2);

    let missing = mixdag(&["validate", "/nonexistent/graph.mg"]);
    assert_eq!(missing.status, 2);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(mixdag(&[]).status, 2);
    assert_eq!(mixdag(&["msep", &fixture("mg-ce"), "--a", "Xi"]).status, 2);
    assert_eq!(
        mixdag(&["msep", &fixture("mg-ce"), "--a", "Xi", "--b", "Xi"]).status,
        2
    );
    assert_eq!(
        mixdag(&["msep", &fixture("mg-ce"), "--a", "Xi", "--b", "Nope"]).status,
        2
    );
    assert_eq!(
        mixdag(&[
            "msep",
            &fixture("mg-ce"),
            "--a",
            "Xi",
            "--b",
            "Xk",
            "--semantics",
            "x"
        ])
        .status,
        2
    );
    assert_eq!(mixdag(&["verify"]).status, 2);
    let help = mixdag(&["--help"]);
    assert_eq!(help.status, 0);
    assert!(help.stdout.contains("msep"));
}

#[test]
fn random_graph_output_reparses() {
    let text = mixdag(&["random-graph", "--p", "4", "--q", "3", "--seed", "5"]);
    assert_eq!(text.status, 0);
    let path = scratch("random.mg", &text.stdout);
    assert_eq!(mixdag(&["validate", &path]).status, 0);

    let json_out = mixdag(&[
        "random-graph",
        "--p",
        "4",
        "--q",
        "3",
        "--seed",
        "5",
        "--json",
    ]);
    let path = scratch("random.json", &json_out.stdout);
    assert_eq!(mixdag(&["validate", &path]).status, 0);
}

#[test]
fn sample_from_model_file_matches_random_seed() {
    let ce = fixture("mg-ce");
    let model = mixdag(&["random-model", &ce, "--seed", "4"]);
    assert_eq!(model.status, 0);
    let path = scratch("model.json", &model.stdout);
    let from_file = mixdag(&["sample", &ce, "--model", &path, "--n", "20", "--seed", "1"]);
    let from_seed = mixdag(&[
        "sample",
        &ce,
        "--random-seed",
        "4",
        "--n",
        "20",
        "--seed",
        "1",
    ]);
    assert_eq!(from_file.status, 0);
    assert_eq!(from_file, from_seed);
    let mut lines = from_file.stdout.lines();
    assert_eq!(lines.next(), Some("Xi,Xj,Xk,component"));
    assert_eq!(lines.count(), 20);
    assert_eq!(mixdag(&["sample", &ce, "--n", "5"]).status, 2);
}
