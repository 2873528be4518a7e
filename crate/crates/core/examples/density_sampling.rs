//! Hand-built mixture on mg-ce: exact joint, per-component joints, and sampling.
//!
//! cargo run --release --example density_sampling [n]

use mixdag::density::{build_model, CptTables};
use mixdag::fixtures;

fn main() {
    let n = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(100_000);
    let doc = fixtures::load("mg-ce").unwrap();
    // Xi and Xk are stationary; Xj follows Xi at time point 1 and Xk at time point 2.
    let model = build_model(
        &doc.graph,
        vec![2, 2, 2],
        vec![0, 1],
        vec![0.4, 0.6],
        vec![
            CptTables::Shared(vec![vec![0.3, 0.7]]),
            CptTables::PerTimePoint(vec![
                vec![vec![0.9, 0.1], vec![0.2, 0.8]],
                vec![vec![0.6, 0.4], vec![0.1, 0.9]],
            ]),
            CptTables::Shared(vec![vec![0.5, 0.5]]),
        ],
    )
    .unwrap();

    let joint = model.joint_table().unwrap();
    println!("total mass {:.15}", joint.total());
    for t in 0..model.time_points() {
        let c = model.component(t).joint_table().unwrap();
        println!("component {} mass {:.15}", t + 1, c.total());
    }

    let data = model.sample(n, 7);
    let tv = data.empirical_table().total_variation(&joint);
    println!("{n} samples, total variation to the exact joint {tv:.4}");

    let mut head = Vec::new();
    let mut small = data.clone();
    small.rows.truncate(5);
    small.components.truncate(5);
    small.write_csv(&mut head, doc.names.observed()).unwrap();
    print!("{}", String::from_utf8(head).unwrap());

    println!("{}", serde_json::to_string(&model.to_document()).unwrap());
}
