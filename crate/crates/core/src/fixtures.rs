//! The canonical mother graphs, embedded from `fixtures/*.mg`.

use crate::mgfile::{parse_mother_file, MotherGraphDocument};

/// Two-variable feedback loop split into two sub-DAGs.
pub const MG_CYCLE: &str = include_str!("../fixtures/mg-cycle.mg");
/// Three sub-DAGs around a shared child `Xj`.
pub const MG_MOTHER: &str = include_str!("../fixtures/mg-mother.mg");
/// d-separation and m-d-separation disagree on `Xi, Xk | Xj`.
pub const MG_CE: &str = include_str!("../fixtures/mg-ce.mg");
/// `Xi` and `Xk` are m-d-separated marginally.
pub const MG_SEP: &str = include_str!("../fixtures/mg-sep.mg");
/// `Xm` and `Xk` are m-d-separated given `{Xj, Xl}`.
pub const MG_COMPLEX: &str = include_str!("../fixtures/mg-complex.mg");
/// `Xj` is a chain in one sub-DAG and a collider in the other.
pub const MG_EDGE: &str = include_str!("../fixtures/mg-edge.mg");

pub const ALL: [(&str, &str); 6] = [
    ("mg-cycle", MG_CYCLE),
    ("mg-mother", MG_MOTHER),
    ("mg-ce", MG_CE),
    ("mg-sep", MG_SEP),
    ("mg-complex", MG_COMPLEX),
    ("mg-edge", MG_EDGE),
];

/// Parses a fixture by name (`mg-ce`, `mg-sep`, ...).
pub fn load(name: &str) -> Option<MotherGraphDocument> {
    ALL.iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| parse_mother_file(text).expect("fixtures are valid"))
}
