//! Loads every bundled mother graph and answers the headline separation queries.
//!
//! cargo run --example fixture_tour

use mixdag::fixtures;
use mixdag::mgfile::MotherGraphDocument;
use mixdag::separation::{d_separated_mother, m_d_separated, Semantics, SeparationQuery};

fn check(doc: &MotherGraphDocument, a: &str, b: &str, c: &str) {
    let n = &doc.names;
    let (a, b, c) = (
        n.parse_set(a).unwrap(),
        n.parse_set(b).unwrap(),
        n.parse_set(c).unwrap(),
    );
    let d = d_separated_mother(&doc.graph, a, b, c).unwrap().separated;
    let q = SeparationQuery::new(a, b, c, Semantics::Default).unwrap();
    let m = m_d_separated(&doc.graph, &q).unwrap().separated;
    println!(
        "  {} vs {} given {}: d-sep {d}, m-d-sep {m}",
        n.format_set(a),
        n.format_set(b),
        n.format_set(c)
    );
}

fn main() {
    for (name, _) in fixtures::ALL {
        let doc = fixtures::load(name).unwrap();
        let g = &doc.graph;
        println!(
            "{name}: p={} q={} stationary={}",
            g.x_count(),
            g.q(),
            doc.names.format_set(g.stationary())
        );
        match name {
            "mg-mother" => check(&doc, "Xi", "Xk", ""),
            "mg-ce" => check(&doc, "Xi", "Xk", "Xj"),
            "mg-sep" => check(&doc, "Xi", "Xk", ""),
            "mg-complex" => check(&doc, "Xm", "Xk", "Xj,Xl"),
            "mg-edge" => check(&doc, "Xi", "Xk", ""),
            _ => {}
        }
    }
}
