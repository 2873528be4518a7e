//! Randomized verification over many seeded mother graphs.
//!
//! cargo run --release --example random_suite [graphs] [semantics]

use std::time::Instant;

use mixdag::separation::Semantics;
use mixdag::verify::{run_suite, SuiteConfig, ViolationKind};

fn main() {
    let mut args = std::env::args().skip(1);
    let graphs = args.next().and_then(|s| s.parse().ok()).unwrap_or(200);
    let semantics: Semantics = args
        .next()
        .map(|s| s.parse().expect("default, strict-def3 or literal-collider"))
        .unwrap_or_default();
    let config = SuiteConfig {
        graph_count: graphs,
        semantics,
        ..SuiteConfig::default()
    };
    let start = Instant::now();
    let report = run_suite(&config).unwrap();
    println!(
        "{} graphs ({} with reduced q), {} statements in {:.2?}",
        report.graphs_checked,
        report.graphs_with_reduced_q,
        report.statements_checked,
        start.elapsed()
    );
    println!(
        "semantics {semantics}: {} markov violations, {} lemma3 violations",
        report.count(ViolationKind::MarkovViolation),
        report.count(ViolationKind::Lemma3Violation)
    );
    if let Some(v) = report.violations.first() {
        println!(
            "first violation (graph seed {:?}):\n{}",
            v.graph_seed, v.graph
        );
    }
}
