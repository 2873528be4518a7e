//! d-separation on single DAGs and mother graphs, m-collider classification, and
//! m-d-separation by exhaustive path enumeration with witness extraction.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::{Dag, MotherGraph, VarSet, VariableId};

/// How m-colliders are classified and activated along an m-path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Semantics {
    /// Collider status per realization; a collider is active when its variable is
    /// in `Anc_M(C)`.
    #[default]
    Default,
    /// Collider status per realization; a collider is active only when its
    /// variable is in `C` itself.
    StrictDef3,
    /// A variable that is an m-collider anywhere in the mother graph is treated
    /// as a collider on every path, and is active only when it is in `C`.
    LiteralCollider,
}

impl Semantics {
    pub const ALL: [Semantics; 3] = [
        Semantics::Default,
        Semantics::StrictDef3,
        Semantics::LiteralCollider,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Semantics::Default => "default",
            Semantics::StrictDef3 => "strict-def3",
            Semantics::LiteralCollider => "literal-collider",
        }
    }
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Semantics {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "default" => Ok(Semantics::Default),
            "strict-def3" | "strict_def3" => Ok(Semantics::StrictDef3),
            "literal-collider" | "literal_collider" => Ok(Semantics::LiteralCollider),
            other => Err(format!(
                "unknown semantics `{other}` (expected default, strict-def3 or literal-collider)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("the {0} set must not be empty")]
    EmptySet(&'static str),
    #[error("the {0} and {1} sets overlap")]
    Overlap(&'static str, &'static str),
    #[error("variable index {0} out of range")]
    OutOfRange(usize),
    #[error("T may not be an endpoint of a separation query")]
    TimeVariableInEndpoint,
}

/// How a single interior triple of a path is realized in the mother graph.
///
/// Sub-DAG indices are zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Realization {
    /// `Zi -> Zj <- Zk` in sub-DAG `subdag`.
    Collider { subdag: usize },
    /// Both edges present in sub-DAG `subdag` without a collider at the middle.
    NonCollider { subdag: usize },
    /// `Xi -> Xj <- T` in sub-DAG `first` and `T -> Xj <- Xk` in sub-DAG `second`.
    CrossCollider { first: usize, second: usize },
}

impl Realization {
    pub fn is_collider(self) -> bool {
        !matches!(self, Realization::NonCollider { .. })
    }
}

/// Every way a triple `<Zi, Zj, Zk>` is realized across the sub-DAGs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TripleStatus {
    pub collider_subdags: Vec<usize>,
    pub noncollider_subdags: Vec<usize>,
    /// All ordered pairs `(a, b)`, `a != b`, with `Zi -> Zj <- T` in `a` and
    /// `T -> Zj <- Zk` in `b`. Only populated when all three are observed variables.
    pub cross_pairs: Vec<(usize, usize)>,
    cond2_witness: Option<(usize, usize)>,
}

impl TripleStatus {
    /// Witnessing pair for the cross-sub-DAG collider pattern, if it holds.
    ///
    /// Pairs where neither sub-DAG already realizes the plain collider are preferred.
    pub fn cond2(&self) -> Option<(usize, usize)> {
        self.cond2_witness
    }

    pub fn is_m_collider(&self) -> bool {
        !self.collider_subdags.is_empty() || self.cond2_witness.is_some()
    }

    /// The triple may appear on an m-path.
    pub fn is_path_step(&self) -> bool {
        self.is_m_collider() || !self.noncollider_subdags.is_empty()
    }
}

/// Classifies the triple `<zi, zj, zk>` against every sub-DAG.
///
/// Non-distinct or out-of-range triples have no realization.
pub fn triple_status(
    mg: &MotherGraph,
    zi: VariableId,
    zj: VariableId,
    zk: VariableId,
) -> TripleStatus {
    let n = mg.variable_count();
    let mut status = TripleStatus::default();
    if zi == zj || zj == zk || zi == zk || zi.0 >= n || zj.0 >= n || zk.0 >= n {
        return status;
    }
    for (k, g) in mg.sub_dags().iter().enumerate() {
        if !(g.adjacent(zi, zj) && g.adjacent(zj, zk)) {
            continue;
        }
        if g.has_edge(zi, zj) && g.has_edge(zk, zj) {
            status.collider_subdags.push(k);
        } else {
            status.noncollider_subdags.push(k);
        }
    }
    let t = mg.t();
    if zi != t && zj != t && zk != t {
        let into = |g: &Dag, from: VariableId| g.has_edge(from, zj) && g.has_edge(t, zj);
        let mut pure = None;
        for a in 0..mg.q() {
            if !into(mg.sub_dag(a), zi) {
                continue;
            }
            for b in (0..mg.q()).filter(|&b| b != a) {
                if into(mg.sub_dag(b), zk) {
                    status.cross_pairs.push((a, b));
                    if pure.is_none()
                        && !mg.sub_dag(a).has_edge(zk, zj)
                        && !mg.sub_dag(b).has_edge(zi, zj)
                    {
                        pure = Some((a, b));
                    }
                }
            }
        }
        status.cond2_witness = pure.or_else(|| status.cross_pairs.first().copied());
    }
    status
}

/// Observed variables that are m-colliders for at least one triple of the mother graph.
pub fn m_colliders(mg: &MotherGraph) -> VarSet {
    // Any two distinct parents in one sub-DAG form a collider triple, and the
    // cross pattern always implies one.
    mg.observed()
        .iter()
        .filter(|&v| mg.sub_dags().iter().any(|g| g.parents(v).len() >= 2))
        .collect()
}

/// An explicit connecting path with one realization per interior triple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub path: Vec<VariableId>,
    pub realizations: Vec<Realization>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparationVerdict {
    pub separated: bool,
    pub witness: Option<Witness>,
}

impl SeparationVerdict {
    fn from_witness(witness: Option<Witness>) -> Self {
        SeparationVerdict {
            separated: witness.is_none(),
            witness,
        }
    }
}

/// A validated `A ⊥ B | C` query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeparationQuery {
    pub a: VarSet,
    pub b: VarSet,
    pub c: VarSet,
    pub semantics: Semantics,
}

impl SeparationQuery {
    pub fn new(a: VarSet, b: VarSet, c: VarSet, semantics: Semantics) -> Result<Self, QueryError> {
        check_sets(a, b, c)?;
        Ok(SeparationQuery { a, b, c, semantics })
    }

    pub fn swapped(self) -> Self {
        SeparationQuery {
            a: self.b,
            b: self.a,
            ..self
        }
    }
}

fn check_sets(a: VarSet, b: VarSet, c: VarSet) -> Result<(), QueryError> {
    if a.is_empty() {
        return Err(QueryError::EmptySet("A"));
    }
    if b.is_empty() {
        return Err(QueryError::EmptySet("B"));
    }
    if !a.is_disjoint(b) {
        return Err(QueryError::Overlap("A", "B"));
    }
    if !a.is_disjoint(c) {
        return Err(QueryError::Overlap("A", "C"));
    }
    if !b.is_disjoint(c) {
        return Err(QueryError::Overlap("B", "C"));
    }
    Ok(())
}

fn check_range(sets: VarSet, n: usize) -> Result<(), QueryError> {
    match sets.max() {
        Some(v) if v.0 >= n => Err(QueryError::OutOfRange(v.0)),
        _ => Ok(()),
    }
}

/// Depth-first enumeration of simple paths from `a` to `b` whose interior avoids
/// `a ∪ b`. `step` decides whether the triple `(prev, mid, next)` may be traversed.
fn find_active_path<N, S>(a: VarSet, b: VarSet, neighbors: N, mut step: S) -> Option<Witness>
where
    N: Fn(VariableId) -> VarSet,
    S: FnMut(VariableId, VariableId, VariableId) -> Option<Realization>,
{
    struct Search<'a, N, S> {
        a: VarSet,
        b: VarSet,
        neighbors: &'a N,
        step: &'a mut S,
        path: Vec<VariableId>,
        on_path: VarSet,
        realizations: Vec<Realization>,
    }

    impl<N, S> Search<'_, N, S>
    where
        N: Fn(VariableId) -> VarSet,
        S: FnMut(VariableId, VariableId, VariableId) -> Option<Realization>,
    {
        fn extend(&mut self) -> bool {
            let w = self.path[self.path.len() - 1];
            let u = self.path[self.path.len() - 2];
            let candidates = (self.neighbors)(w)
                .difference(self.on_path)
                .difference(self.a);
            for x in candidates {
                let Some(r) = (self.step)(u, w, x) else {
                    continue;
                };
                self.path.push(x);
                self.realizations.push(r);
                if self.b.contains(x) {
                    return true;
                }
                self.on_path.insert(x);
                if self.extend() {
                    return true;
                }
                self.on_path.remove(x);
                self.path.pop();
                self.realizations.pop();
            }
            false
        }
    }

    for s in a {
        for w in neighbors(s).difference(a) {
            if b.contains(w) {
                return Some(Witness {
                    path: vec![s, w],
                    realizations: Vec::new(),
                });
            }
            let mut search = Search {
                a,
                b,
                neighbors: &neighbors,
                step: &mut step,
                path: vec![s, w],
                on_path: VarSet::singleton(s).with(w),
                realizations: Vec::new(),
            };
            if search.extend() {
                return Some(Witness {
                    path: search.path,
                    realizations: search.realizations,
                });
            }
        }
    }
    None
}

fn dag_path_witness(dag: &Dag, a: VarSet, b: VarSet, c: VarSet) -> Option<Witness> {
    let anc_c = dag.ancestors_of_set(c);
    find_active_path(
        a,
        b,
        |v| dag.neighbors(v),
        |u, w, x| {
            if dag.has_edge(u, w) && dag.has_edge(x, w) {
                anc_c
                    .contains(w)
                    .then_some(Realization::Collider { subdag: 0 })
            } else {
                (!c.contains(w)).then_some(Realization::NonCollider { subdag: 0 })
            }
        },
    )
}

/// Classical d-separation via the moral graph of `Anc(A ∪ B ∪ C)`.
///
/// A connected verdict carries a witness path whose realizations name sub-DAG 0.
pub fn d_separated(
    dag: &Dag,
    a: VarSet,
    b: VarSet,
    c: VarSet,
) -> Result<SeparationVerdict, QueryError> {
    check_sets(a, b, c)?;
    check_range(a.union(b).union(c), dag.variable_count())?;
    let moral = dag.moral_graph_of_ancestral_set(a.union(b).union(c));
    if moral.separated(a, b, c) {
        return Ok(SeparationVerdict {
            separated: true,
            witness: None,
        });
    }
    let witness = dag_path_witness(dag, a, b, c)
        .expect("moral-graph connection always has an active simple path");
    Ok(SeparationVerdict {
        separated: false,
        witness: Some(witness),
    })
}

/// Classical d-separation via collider-aware reachability over active trails.
///
/// Independent of [`d_separated`]; the two are checked against each other.
pub fn d_separated_reachability(
    dag: &Dag,
    a: VarSet,
    b: VarSet,
    c: VarSet,
) -> Result<bool, QueryError> {
    check_sets(a, b, c)?;
    check_range(a.union(b).union(c), dag.variable_count())?;
    let anc_c = dag.ancestors_of_set(c);
    // bit 0: arrived from a child (moving up), bit 1: arrived from a parent
    let mut visited = vec![0u8; dag.variable_count()];
    let mut stack: Vec<(VariableId, bool)> = a.iter().map(|v| (v, true)).collect();
    let mut reached = VarSet::EMPTY;
    while let Some((y, up)) = stack.pop() {
        let bit = if up { 1 } else { 2 };
        if visited[y.0] & bit != 0 {
            continue;
        }
        visited[y.0] |= bit;
        let observed = c.contains(y);
        if !observed {
            reached.insert(y);
        }
        if up && !observed {
            stack.extend(dag.parents(y).iter().map(|z| (z, true)));
            stack.extend(dag.children(y).iter().map(|z| (z, false)));
        } else if !up {
            if !observed {
                stack.extend(dag.children(y).iter().map(|z| (z, false)));
            }
            if anc_c.contains(y) {
                stack.extend(dag.parents(y).iter().map(|z| (z, true)));
            }
        }
    }
    Ok(reached.is_disjoint(b))
}

/// d-separation in the mother graph: separation must hold in every sub-DAG.
pub fn d_separated_mother(
    mg: &MotherGraph,
    a: VarSet,
    b: VarSet,
    c: VarSet,
) -> Result<SeparationVerdict, QueryError> {
    for (k, g) in mg.sub_dags().iter().enumerate() {
        let verdict = d_separated(g, a, b, c)?;
        if let Some(mut w) = verdict.witness {
            for r in &mut w.realizations {
                *r = match *r {
                    Realization::Collider { .. } => Realization::Collider { subdag: k },
                    _ => Realization::NonCollider { subdag: k },
                };
            }
            return Ok(SeparationVerdict {
                separated: false,
                witness: Some(w),
            });
        }
    }
    Ok(SeparationVerdict {
        separated: true,
        witness: None,
    })
}

fn choose_realization(
    status: &TripleStatus,
    collider_active: bool,
    in_c: bool,
) -> Option<Realization> {
    if collider_active {
        if let Some(&k) = status.collider_subdags.first() {
            return Some(Realization::Collider { subdag: k });
        }
        if let Some((first, second)) = status.cond2() {
            return Some(Realization::CrossCollider { first, second });
        }
    }
    if !in_c {
        if let Some(&k) = status.noncollider_subdags.first() {
            return Some(Realization::NonCollider { subdag: k });
        }
    }
    None
}

fn any_realization(status: &TripleStatus) -> Option<Realization> {
    choose_realization(status, true, false)
}

/// Decides m-d-separation of `query.a` and `query.b` given `query.c`.
pub fn m_d_separated(
    mg: &MotherGraph,
    query: &SeparationQuery,
) -> Result<SeparationVerdict, QueryError> {
    check_sets(query.a, query.b, query.c)?;
    check_range(query.a.union(query.b).union(query.c), mg.variable_count())?;
    let t = mg.t();
    if query.a.contains(t) || query.b.contains(t) {
        return Err(QueryError::TimeVariableInEndpoint);
    }
    let c = query.c;
    let anc_c = mg.ancestors_of_set(c);
    let global = m_colliders(mg);
    let witness = find_active_path(
        query.a,
        query.b,
        |v| mg.neighbors(v),
        |u, w, x| {
            let status = triple_status(mg, u, w, x);
            match query.semantics {
                Semantics::Default => choose_realization(&status, anc_c.contains(w), c.contains(w)),
                Semantics::StrictDef3 => choose_realization(&status, c.contains(w), c.contains(w)),
                Semantics::LiteralCollider => {
                    if global.contains(w) != c.contains(w) {
                        None
                    } else {
                        any_realization(&status)
                    }
                }
            }
        },
    );
    Ok(SeparationVerdict::from_witness(witness))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("witness path is too short")]
    TooShort,
    #[error("expected {expected} realizations, found {found}")]
    RealizationCount { expected: usize, found: usize },
    #[error("path must start in A and end in B")]
    Endpoints,
    #[error("vertex {0} repeats or is an interior member of A or B")]
    BadInterior(usize),
    #[error("{0} and {1} are not adjacent in any sub-DAG")]
    NotAdjacent(usize, usize),
    #[error("triple at position {0} does not hold as claimed in the named sub-DAG(s)")]
    RealizationMismatch(usize),
    #[error("triple at position {0} is blocked given the conditioning set")]
    Blocked(usize),
}

/// Re-validates a witness against the mother graph and the query's semantics.
pub fn replay_witness(
    mg: &MotherGraph,
    query: &SeparationQuery,
    witness: &Witness,
) -> Result<(), ReplayError> {
    let path = &witness.path;
    if path.len() < 2 {
        return Err(ReplayError::TooShort);
    }
    if witness.realizations.len() != path.len() - 2 {
        return Err(ReplayError::RealizationCount {
            expected: path.len() - 2,
            found: witness.realizations.len(),
        });
    }
    if !query.a.contains(path[0]) || !query.b.contains(path[path.len() - 1]) {
        return Err(ReplayError::Endpoints);
    }
    let mut seen = VarSet::EMPTY;
    for (i, &v) in path.iter().enumerate() {
        if v.0 >= mg.variable_count() || seen.contains(v) {
            return Err(ReplayError::BadInterior(v.0));
        }
        let interior = i > 0 && i + 1 < path.len();
        if interior && (query.a.contains(v) || query.b.contains(v)) {
            return Err(ReplayError::BadInterior(v.0));
        }
        seen.insert(v);
    }
    for pair in path.windows(2) {
        if !mg.adjacent(pair[0], pair[1]) {
            return Err(ReplayError::NotAdjacent(pair[0].0, pair[1].0));
        }
    }
    let t = mg.t();
    let anc_c = mg.ancestors_of_set(query.c);
    let global = m_colliders(mg);
    for (i, (triple, &r)) in path.windows(3).zip(&witness.realizations).enumerate() {
        let (u, w, x) = (triple[0], triple[1], triple[2]);
        let holds = match r {
            Realization::Collider { subdag } => {
                subdag < mg.q() && {
                    let g = mg.sub_dag(subdag);
                    g.has_edge(u, w) && g.has_edge(x, w)
                }
            }
            Realization::NonCollider { subdag } => {
                subdag < mg.q() && {
                    let g = mg.sub_dag(subdag);
                    g.adjacent(u, w) && g.adjacent(w, x) && !(g.has_edge(u, w) && g.has_edge(x, w))
                }
            }
            Realization::CrossCollider { first, second } => {
                first != second
                    && first < mg.q()
                    && second < mg.q()
                    && ![u, w, x].contains(&t)
                    && mg.sub_dag(first).has_edge(u, w)
                    && mg.sub_dag(first).has_edge(t, w)
                    && mg.sub_dag(second).has_edge(x, w)
                    && mg.sub_dag(second).has_edge(t, w)
            }
        };
        if !holds {
            return Err(ReplayError::RealizationMismatch(i));
        }
        let in_c = query.c.contains(w);
        let active = match query.semantics {
            Semantics::Default if r.is_collider() => anc_c.contains(w),
            Semantics::StrictDef3 if r.is_collider() => in_c,
            Semantics::Default | Semantics::StrictDef3 => !in_c,
            Semantics::LiteralCollider => global.contains(w) == in_c,
        };
        if !active {
            return Err(ReplayError::Blocked(i));
        }
    }
    Ok(())
}

/// A singleton-pair statement `a ⊥ b | c` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Statement {
    pub a: VariableId,
    pub b: VariableId,
    pub c: VarSet,
}

impl Statement {
    fn sort_key(&self) -> (usize, usize, Vec<usize>) {
        (self.a.0, self.b.0, self.c.iter().map(|v| v.0).collect())
    }
}

impl PartialOrd for Statement {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Statement {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

/// Every pair `a < b` of observed variables with every `C ⊆ X \ {a, b}`,
/// `|C| ≤ max_conditioning_size`, in lexicographic order.
pub fn candidate_statements(mg: &MotherGraph, max_conditioning_size: usize) -> Vec<Statement> {
    let p = mg.x_count();
    let mut out = Vec::new();
    for a in 0..p {
        for b in a + 1..p {
            let rest = mg.observed().without(VariableId(a)).without(VariableId(b));
            for c in subsets_up_to(rest, max_conditioning_size) {
                out.push(Statement {
                    a: VariableId(a),
                    b: VariableId(b),
                    c,
                });
            }
        }
    }
    out.sort_by_key(Statement::sort_key);
    out
}

fn subsets_up_to(base: VarSet, max_size: usize) -> Vec<VarSet> {
    let members = base.to_vec();
    let mut out = vec![VarSet::EMPTY];
    for &m in &members {
        let extended: Vec<VarSet> = out
            .iter()
            .filter(|s| s.len() < max_size)
            .map(|s| s.with(m))
            .collect();
        out.extend(extended);
    }
    out
}

/// All m-d-separation statements with singleton endpoints and `|C| ≤ max_conditioning_size`.
pub fn enumerate_statements(
    mg: &MotherGraph,
    max_conditioning_size: usize,
    semantics: Semantics,
) -> Vec<Statement> {
    candidate_statements(mg, max_conditioning_size)
        .into_iter()
        .filter(|s| {
            let q = SeparationQuery {
                a: VarSet::singleton(s.a),
                b: VarSet::singleton(s.b),
                c: s.c,
                semantics,
            };
            m_d_separated(mg, &q)
                .expect("enumerated queries are well formed")
                .separated
        })
        .collect()
}

/// All mother-graph d-separation statements with singleton endpoints.
pub fn enumerate_d_statements(mg: &MotherGraph, max_conditioning_size: usize) -> Vec<Statement> {
    candidate_statements(mg, max_conditioning_size)
        .into_iter()
        .filter(|s| {
            d_separated_mother(mg, VarSet::singleton(s.a), VarSet::singleton(s.b), s.c)
                .expect("enumerated queries are well formed")
                .separated
        })
        .collect()
}
