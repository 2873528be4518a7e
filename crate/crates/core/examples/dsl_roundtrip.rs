//! The .mg text format and its JSON mirror.
//!
//! cargo run --example dsl_roundtrip

use mixdag::mgfile::{load_graph, parse_mother_file, MotherGraphDocument};
use mixdag::verify::random_mother_graph;

const TEXT: &str = "\
# a two-component mixture; T is implicit
vars Rain Sprinkler Grass
subdag 1
edge T -> Sprinkler
edge Rain -> Grass
edge Sprinkler -> Grass
subdag 2
edge T -> Sprinkler
edge Rain -> Sprinkler
edge Rain -> Grass
edge Sprinkler -> Grass
";

fn main() {
    let doc = parse_mother_file(TEXT).unwrap();
    println!("{}", doc.to_mg_text());
    let json = serde_json::to_string_pretty(&doc.to_json_value()).unwrap();
    println!("{json}");
    let back = load_graph(&json).unwrap();
    assert_eq!(back.graph, doc.graph);

    // T pointing into Rain in one sub-DAG only breaks the stationarity rules
    let bad = TEXT.replace("subdag 2\n", "subdag 2\nedge T -> Rain\n");
    println!("rejected: {}", parse_mother_file(&bad).unwrap_err());

    let generated = random_mother_graph(4, 3, 0.5, 11);
    let doc = MotherGraphDocument::with_numbered_names(generated.graph);
    let text = doc.to_mg_text();
    assert_eq!(parse_mother_file(&text).unwrap().to_mg_text(), text);
    print!("{text}");
}
