//! Exact global Markov check: every m-d-separation statement must show up as a
//! conditional independence in random models drawn on the mother graph.
//!
//! cargo run --example markov_check [models]

use mixdag::fixtures;
use mixdag::separation::{enumerate_statements, Semantics};
use mixdag::verify::{check_global_markov, SuiteConfig};

fn main() {
    let models = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(100);
    let config = SuiteConfig {
        models_per_graph: models,
        ..SuiteConfig::default()
    };
    for name in ["mg-sep", "mg-complex"] {
        let doc = fixtures::load(name).unwrap();
        let statements =
            enumerate_statements(&doc.graph, config.max_conditioning_size, Semantics::Default);
        let violations = check_global_markov(&doc, &config).unwrap();
        println!(
            "{name}: {} statements x {models} models, {} violations",
            statements.len(),
            violations.len()
        );
        for s in statements.iter().take(5) {
            println!(
                "  {} _||_ {} | {}",
                doc.names.name(s.a),
                doc.names.name(s.b),
                doc.names.format_set(s.c)
            );
        }
    }
}
