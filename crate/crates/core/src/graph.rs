//! Directed acyclic graphs, mother graphs and the structural queries built on them.
//!
//! Variables are dense indices `0..=p`. In a [`MotherGraph`] the indices `0..p`
//! are the observed variables and index `p` is the time variable `T`.

use std::fmt;

use thiserror::Error;

/// Largest number of vertices (observed variables plus `T`) a graph may hold.
pub const MAX_VERTICES: usize = 64;

/// Dense index of a variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VariableId(pub usize);

impl VariableId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A set of variables stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct VarSet(u64);

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);

    pub fn from_bits(bits: u64) -> Self {
        VarSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(v: VariableId) -> Self {
        VarSet(1u64 << v.0)
    }

    /// The set `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        if n >= 64 {
            VarSet(u64::MAX)
        } else {
            VarSet((1u64 << n) - 1)
        }
    }

    pub fn contains(self, v: VariableId) -> bool {
        v.0 < 64 && self.0 & (1u64 << v.0) != 0
    }

    pub fn insert(&mut self, v: VariableId) {
        self.0 |= 1u64 << v.0;
    }

    pub fn remove(&mut self, v: VariableId) {
        self.0 &= !(1u64 << v.0);
    }

    pub fn with(mut self, v: VariableId) -> Self {
        self.insert(v);
        self
    }

    pub fn without(mut self, v: VariableId) -> Self {
        self.remove(v);
        self
    }

    pub fn union(self, other: VarSet) -> VarSet {
        VarSet(self.0 | other.0)
    }

    pub fn intersection(self, other: VarSet) -> VarSet {
        VarSet(self.0 & other.0)
    }

    pub fn difference(self, other: VarSet) -> VarSet {
        VarSet(self.0 & !other.0)
    }

    pub fn is_disjoint(self, other: VarSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset(self, other: VarSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Members in increasing index order.
    pub fn iter(self) -> VarSetIter {
        VarSetIter(self.0)
    }

    pub fn to_vec(self) -> Vec<VariableId> {
        self.iter().collect()
    }

    /// Largest index in the set, if any.
    pub fn max(self) -> Option<VariableId> {
        if self.0 == 0 {
            None
        } else {
            Some(VariableId(63 - self.0.leading_zeros() as usize))
        }
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|v| v.0)).finish()
    }
}

impl FromIterator<VariableId> for VarSet {
    fn from_iter<I: IntoIterator<Item = VariableId>>(iter: I) -> Self {
        let mut s = VarSet::EMPTY;
        for v in iter {
            s.insert(v);
        }
        s
    }
}

impl IntoIterator for VarSet {
    type Item = VariableId;
    type IntoIter = VarSetIter;
    fn into_iter(self) -> VarSetIter {
        self.iter()
    }
}

pub struct VarSetIter(u64);

impl Iterator for VarSetIter {
    type Item = VariableId;

    fn next(&mut self) -> Option<VariableId> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(VariableId(i))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for VarSetIter {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph has {0} vertices; at most {MAX_VERTICES} are supported")]
    TooManyVariables(usize),
    #[error("a mother graph needs at least one observed variable")]
    NoVariables,
    #[error("invalid edge {from} -> {to}: {reason}")]
    InvalidEdge {
        from: usize,
        to: usize,
        reason: &'static str,
    },
    #[error("duplicate edge {from} -> {to}")]
    DuplicateEdge { from: usize, to: usize },
    #[error("graph contains a directed cycle")]
    CyclicGraph,
    #[error("variable index {0} out of range")]
    VariableOutOfRange(usize),
    #[error("a mother graph needs at least one sub-DAG")]
    NoSubDags,
    #[error("sub-DAG {} has {found} vertices, expected {expected}", .subdag + 1)]
    VariableCountMismatch {
        subdag: usize,
        expected: usize,
        found: usize,
    },
    #[error("sub-DAG {}: T must be a root but has parent #{parent}", .subdag + 1)]
    TNotRoot { subdag: usize, parent: usize },
    #[error("stationarity violation at variable #{variable}: {detail}")]
    StationarityViolation { variable: usize, detail: String },
    #[error("sub-DAGs {} and {} have identical edge sets", .first + 1, .second + 1)]
    DuplicateSubDag { first: usize, second: usize },
    #[error("sub-DAG {}: {source}", .subdag + 1)]
    InSubDag {
        subdag: usize,
        #[source]
        source: Box<GraphError>,
    },
}

/// A validated directed acyclic graph over `variable_count` vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    parents: Vec<VarSet>,
    children: Vec<VarSet>,
    order: Vec<VariableId>,
}

impl Dag {
    /// Builds a DAG, rejecting self-loops, out-of-range endpoints, duplicates and cycles.
    pub fn new<I>(variable_count: usize, edges: I) -> Result<Dag, GraphError>
    where
        I: IntoIterator<Item = (VariableId, VariableId)>,
    {
        if variable_count > MAX_VERTICES {
            return Err(GraphError::TooManyVariables(variable_count));
        }
        let mut parents = vec![VarSet::EMPTY; variable_count];
        let mut children = vec![VarSet::EMPTY; variable_count];
        for (from, to) in edges {
            if from.0 >= variable_count || to.0 >= variable_count {
                return Err(GraphError::InvalidEdge {
                    from: from.0,
                    to: to.0,
                    reason: "endpoint out of range",
                });
            }
            if from == to {
                return Err(GraphError::InvalidEdge {
                    from: from.0,
                    to: to.0,
                    reason: "self-loop",
                });
            }
            if parents[to.0].contains(from) {
                return Err(GraphError::DuplicateEdge {
                    from: from.0,
                    to: to.0,
                });
            }
            parents[to.0].insert(from);
            children[from.0].insert(to);
        }
        let order = topological_order(&parents).ok_or(GraphError::CyclicGraph)?;
        Ok(Dag {
            parents,
            children,
            order,
        })
    }

    pub fn variable_count(&self) -> usize {
        self.parents.len()
    }

    pub fn vertices(&self) -> VarSet {
        VarSet::full(self.variable_count())
    }

    pub fn parents(&self, v: VariableId) -> VarSet {
        self.parents[v.0]
    }

    pub fn children(&self, v: VariableId) -> VarSet {
        self.children[v.0]
    }

    pub fn neighbors(&self, v: VariableId) -> VarSet {
        self.parents[v.0].union(self.children[v.0])
    }

    /// Vertices sharing a child with `v`.
    pub fn spouses(&self, v: VariableId) -> VarSet {
        self.children[v.0]
            .iter()
            .fold(VarSet::EMPTY, |acc, c| acc.union(self.parents[c.0]))
            .without(v)
    }

    pub fn has_edge(&self, from: VariableId, to: VariableId) -> bool {
        self.parents[to.0].contains(from)
    }

    pub fn adjacent(&self, u: VariableId, v: VariableId) -> bool {
        self.has_edge(u, v) || self.has_edge(v, u)
    }

    /// Ancestors of `v`, including `v` itself.
    pub fn ancestors(&self, v: VariableId) -> VarSet {
        self.ancestors_of_set(VarSet::singleton(v))
    }

    /// Union of the (reflexive) ancestor sets of every member of `set`.
    pub fn ancestors_of_set(&self, set: VarSet) -> VarSet {
        let mut result = set;
        let mut frontier = set;
        while !frontier.is_empty() {
            let mut next = VarSet::EMPTY;
            for v in frontier {
                next = next.union(self.parents[v.0]);
            }
            frontier = next.difference(result);
            result = result.union(next);
        }
        result
    }

    pub fn descendants(&self, v: VariableId) -> VarSet {
        let mut result = VarSet::singleton(v);
        let mut frontier = result;
        while !frontier.is_empty() {
            let mut next = VarSet::EMPTY;
            for u in frontier {
                next = next.union(self.children[u.0]);
            }
            frontier = next.difference(result);
            result = result.union(next);
        }
        result
    }

    pub fn topological_order(&self) -> &[VariableId] {
        &self.order
    }

    /// All edges as `(parent, child)`, sorted.
    pub fn edges(&self) -> Vec<(VariableId, VariableId)> {
        let mut out = Vec::new();
        for from in 0..self.variable_count() {
            for to in self.children[from] {
                out.push((VariableId(from), to));
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(|p| p.len()).sum()
    }

    /// Moral graph of the subgraph induced by the ancestral closure of `set`.
    ///
    /// Vertices outside `Anc(set)` are kept but isolated.
    pub fn moral_graph_of_ancestral_set(&self, set: VarSet) -> UndirectedGraph {
        let keep = self.ancestors_of_set(set);
        let mut g = UndirectedGraph::empty(self.variable_count());
        for v in keep {
            let pa = self.parents[v.0].intersection(keep);
            for u in pa {
                g.add_edge(u, v);
            }
            let pa: Vec<_> = pa.to_vec();
            for (i, &a) in pa.iter().enumerate() {
                for &b in &pa[i + 1..] {
                    g.add_edge(a, b);
                }
            }
        }
        g
    }
}

fn topological_order(parents: &[VarSet]) -> Option<Vec<VariableId>> {
    let n = parents.len();
    let mut placed = VarSet::EMPTY;
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let ready = (0..n)
            .map(VariableId)
            .find(|&v| !placed.contains(v) && parents[v.0].is_subset(placed))?;
        placed.insert(ready);
        order.push(ready);
    }
    Some(order)
}

/// Simple undirected graph with symmetric adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    adjacency: Vec<VarSet>,
}

impl UndirectedGraph {
    pub fn empty(variable_count: usize) -> Self {
        UndirectedGraph {
            adjacency: vec![VarSet::EMPTY; variable_count],
        }
    }

    /// Adds `u - v`; self-loops are ignored.
    pub fn add_edge(&mut self, u: VariableId, v: VariableId) {
        if u == v {
            return;
        }
        self.adjacency[u.0].insert(v);
        self.adjacency[v.0].insert(u);
    }

    pub fn variable_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn adjacent(&self, u: VariableId, v: VariableId) -> bool {
        self.adjacency[u.0].contains(v)
    }

    pub fn neighbors(&self, v: VariableId) -> VarSet {
        self.adjacency[v.0]
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(VariableId, VariableId)> {
        let mut out = Vec::new();
        for (u, adj) in self.adjacency.iter().enumerate() {
            for v in adj.iter().filter(|v| v.0 > u) {
                out.push((VariableId(u), v));
            }
        }
        out
    }

    /// Vertices reachable from `from` by paths whose vertices all avoid `blocked`.
    pub fn reachable_avoiding(&self, from: VarSet, blocked: VarSet) -> VarSet {
        let start = from.difference(blocked);
        let mut seen = start;
        let mut frontier = start;
        while !frontier.is_empty() {
            let mut next = VarSet::EMPTY;
            for v in frontier {
                next = next.union(self.adjacency[v.0]);
            }
            frontier = next.difference(seen).difference(blocked);
            seen = seen.union(frontier);
        }
        seen
    }

    /// True when no path joins `a` to `b` without passing through `c`.
    pub fn separated(&self, a: VarSet, b: VarSet, c: VarSet) -> bool {
        self.reachable_avoiding(a, c).is_disjoint(b)
    }
}

/// Parents, children, spouses and ancestors of a variable in a mother graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Relations {
    pub parents: VarSet,
    pub children: VarSet,
    pub spouses: VarSet,
    pub ancestors: VarSet,
}

/// An ordered collection of distinct sub-DAGs over a shared variable set `X ∪ {T}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotherGraph {
    sub_dags: Vec<Dag>,
    stationary: VarSet,
}

impl MotherGraph {
    /// Validates the sub-DAGs and computes the stationary partition.
    ///
    /// Every sub-DAG must have `p + 1` vertices with `T` as the last one.
    pub fn new(sub_dags: Vec<Dag>) -> Result<MotherGraph, GraphError> {
        let first = sub_dags.first().ok_or(GraphError::NoSubDags)?;
        let n = first.variable_count();
        if n < 2 {
            return Err(GraphError::NoVariables);
        }
        for (k, g) in sub_dags.iter().enumerate() {
            if g.variable_count() != n {
                return Err(GraphError::VariableCountMismatch {
                    subdag: k,
                    expected: n,
                    found: g.variable_count(),
                });
            }
        }
        let t = VariableId(n - 1);
        for (k, g) in sub_dags.iter().enumerate() {
            if let Some(parent) = g.parents(t).iter().next() {
                return Err(GraphError::TNotRoot {
                    subdag: k,
                    parent: parent.0,
                });
            }
        }
        let mut stationary = VarSet::EMPTY;
        for v in (0..n - 1).map(VariableId) {
            let with_t: Vec<usize> = (0..sub_dags.len())
                .filter(|&k| sub_dags[k].has_edge(t, v))
                .collect();
            if with_t.len() == sub_dags.len() {
                continue;
            }
            if !with_t.is_empty() {
                return Err(GraphError::StationarityViolation {
                    variable: v.0,
                    detail: format!(
                        "T is a parent in sub-DAG {} but not in every sub-DAG",
                        with_t[0] + 1
                    ),
                });
            }
            let pa = sub_dags[0].parents(v);
            if let Some(k) = (1..sub_dags.len()).find(|&k| sub_dags[k].parents(v) != pa) {
                return Err(GraphError::StationarityViolation {
                    variable: v.0,
                    detail: format!(
                        "parent set differs between sub-DAG 1 and sub-DAG {} without T as a parent",
                        k + 1
                    ),
                });
            }
            stationary.insert(v);
        }
        for i in 0..sub_dags.len() {
            for j in i + 1..sub_dags.len() {
                if sub_dags[i] == sub_dags[j] {
                    return Err(GraphError::DuplicateSubDag {
                        first: i,
                        second: j,
                    });
                }
            }
        }
        Ok(MotherGraph {
            sub_dags,
            stationary,
        })
    }

    /// Builds a mother graph from per-sub-DAG edge lists over `p` observed variables.
    pub fn from_edge_lists(
        p: usize,
        edge_lists: &[Vec<(VariableId, VariableId)>],
    ) -> Result<MotherGraph, GraphError> {
        let dags = edge_lists
            .iter()
            .enumerate()
            .map(|(k, edges)| {
                Dag::new(p + 1, edges.iter().copied()).map_err(|e| GraphError::InSubDag {
                    subdag: k,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        MotherGraph::new(dags)
    }

    /// Number of observed variables `p`.
    pub fn x_count(&self) -> usize {
        self.sub_dags[0].variable_count() - 1
    }

    /// Number of vertices per sub-DAG, `p + 1`.
    pub fn variable_count(&self) -> usize {
        self.sub_dags[0].variable_count()
    }

    /// The time variable `T`.
    pub fn t(&self) -> VariableId {
        VariableId(self.x_count())
    }

    pub fn observed(&self) -> VarSet {
        VarSet::full(self.x_count())
    }

    pub fn q(&self) -> usize {
        self.sub_dags.len()
    }

    pub fn sub_dag(&self, k: usize) -> &Dag {
        &self.sub_dags[k]
    }

    pub fn sub_dags(&self) -> &[Dag] {
        &self.sub_dags
    }

    /// Variables whose parent set never includes `T` and never changes.
    pub fn stationary(&self) -> VarSet {
        self.stationary
    }

    pub fn non_stationary(&self) -> VarSet {
        self.observed().difference(self.stationary)
    }

    pub fn is_stationary(&self, v: VariableId) -> bool {
        self.stationary.contains(v)
    }

    fn check(&self, v: VariableId) -> Result<(), GraphError> {
        if v.0 < self.variable_count() {
            Ok(())
        } else {
            Err(GraphError::VariableOutOfRange(v.0))
        }
    }

    fn union_over<F: Fn(&Dag) -> VarSet>(&self, f: F) -> VarSet {
        self.sub_dags
            .iter()
            .fold(VarSet::EMPTY, |acc, g| acc.union(f(g)))
    }

    pub fn parents(&self, v: VariableId) -> VarSet {
        self.union_over(|g| g.parents(v))
    }

    pub fn children(&self, v: VariableId) -> VarSet {
        self.union_over(|g| g.children(v))
    }

    pub fn spouses(&self, v: VariableId) -> VarSet {
        self.union_over(|g| g.spouses(v))
    }

    pub fn neighbors(&self, v: VariableId) -> VarSet {
        self.union_over(|g| g.neighbors(v))
    }

    pub fn adjacent(&self, u: VariableId, v: VariableId) -> bool {
        self.sub_dags.iter().any(|g| g.adjacent(u, v))
    }

    /// `Anc_M(set)`: union of the reflexive ancestor sets in every sub-DAG.
    pub fn ancestors_of_set(&self, set: VarSet) -> VarSet {
        self.union_over(|g| g.ancestors_of_set(set))
    }

    /// Variable-level relations: a relation holds in `M` iff it holds in some sub-DAG.
    pub fn relations(&self, v: VariableId) -> Result<Relations, GraphError> {
        self.check(v)?;
        Ok(Relations {
            parents: self.parents(v),
            children: self.children(v),
            spouses: self.spouses(v),
            ancestors: self.ancestors_of_set(VarSet::singleton(v)),
        })
    }

    /// Parent set of a stationary variable (identical in every sub-DAG).
    pub fn stationary_parents(&self, v: VariableId) -> Option<VarSet> {
        self.is_stationary(v).then(|| self.sub_dags[0].parents(v))
    }
}
