//! Two independent d-separation procedures checked against each other:
//! separation in the moralized ancestral graph, and reachability along active trails.
//!
//! cargo run --release --example dsep_oracles [dags]

use mixdag::graph::{VarSet, VariableId};
use mixdag::separation::{d_separated, d_separated_reachability};
use mixdag::verify::random_dag;

fn main() {
    let dags: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(100);
    let (mut queries, mut separated, mut disagreements) = (0, 0, 0);
    for seed in 0..dags {
        let n = 3 + (seed % 5) as usize;
        let dag = random_dag(n, 0.4, seed);
        for a in 0..n {
            for b in a + 1..n {
                let rest = VarSet::full(n)
                    .without(VariableId(a))
                    .without(VariableId(b));
                for bits in 0..1u64 << n {
                    let c = VarSet::from_bits(bits);
                    if !c.is_subset(rest) || c.len() > 3 {
                        continue;
                    }
                    let (sa, sb) = (
                        VarSet::singleton(VariableId(a)),
                        VarSet::singleton(VariableId(b)),
                    );
                    let moral = d_separated(&dag, sa, sb, c).unwrap().separated;
                    let reach = d_separated_reachability(&dag, sa, sb, c).unwrap();
                    queries += 1;
                    separated += moral as usize;
                    disagreements += (moral != reach) as usize;
                }
            }
        }
    }
    println!(
        "{queries} queries over {dags} DAGs: {separated} separated, {disagreements} disagreements"
    );
}
