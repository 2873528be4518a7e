//! Harnesses that check separation criteria against exact mixture densities.
//!
//! Random mother graphs come from our own generator (see [`random_mother_graph`]);
//! there is no standard random model for mixtures of DAGs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::density::{
    ci_test, random_model, DensityError, DEFAULT_DEPENDENCE_THRESHOLD,
    DEFAULT_INDEPENDENCE_THRESHOLD,
};
use crate::graph::{Dag, MotherGraph, VarSet, VariableId};
use crate::mgfile::{parse_mother_file, MotherGraphDocument};
use crate::separation::{
    candidate_statements, d_separated_mother, enumerate_statements, m_d_separated, Semantics,
    SeparationQuery, Statement,
};

const DUPLICATE_RETRIES: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("invalid suite configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error("cannot replay record: {0}")]
    Replay(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub graph_count: usize,
    pub max_p: usize,
    pub max_q: usize,
    pub edge_probability: f64,
    pub models_per_graph: usize,
    pub max_conditioning_size: usize,
    pub cardinality: usize,
    pub base_seed: u64,
    #[serde(serialize_with = "serialize_semantics")]
    pub semantics: Semantics,
    pub independence_threshold: f64,
    pub dependence_threshold: f64,
}

fn serialize_semantics<S: serde::Serializer>(s: &Semantics, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_str(s.as_str())
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            graph_count: 200,
            max_p: 4,
            max_q: 3,
            edge_probability: 0.5,
            models_per_graph: 3,
            max_conditioning_size: 2,
            cardinality: 2,
            base_seed: 0,
            semantics: Semantics::Default,
            independence_threshold: DEFAULT_INDEPENDENCE_THRESHOLD,
            dependence_threshold: DEFAULT_DEPENDENCE_THRESHOLD,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<(), VerifyError> {
        let bad = |m: &str| Err(VerifyError::InvalidConfig(m.to_string()));
        if self.max_p < 2 {
            return bad("max_p must be at least 2");
        }
        if self.max_p + 1 > crate::graph::MAX_VERTICES {
            return bad("max_p is too large");
        }
        if self.max_q < 1 {
            return bad("max_q must be at least 1");
        }
        if !(self.edge_probability > 0.0 && self.edge_probability < 1.0) {
            return bad("edge_probability must lie strictly between 0 and 1");
        }
        if self.cardinality < 2 {
            return bad("cardinality must be at least 2");
        }
        if !(self.independence_threshold > 0.0 && self.dependence_threshold > 0.0) {
            return bad("thresholds must be positive");
        }
        Ok(())
    }

    /// Seed of the `i`-th random model drawn for a graph.
    pub fn model_seed(&self, i: usize) -> u64 {
        self.base_seed.wrapping_add(i as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// A separation statement whose CI deviation exceeds the independence threshold.
    MarkovViolation,
    /// m-d-separated but d-connected in some sub-DAG.
    Lemma3Violation,
}

/// A single failed check, carrying enough to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct ViolationRecord {
    /// The mother graph in `.mg` text form.
    pub graph: String,
    pub graph_seed: Option<u64>,
    pub model_seed: Option<u64>,
    pub statement: Statement,
    pub kind: ViolationKind,
    pub semantics: Semantics,
    pub deviation: Option<f64>,
}

/// A generated mother graph and the number of sub-DAGs originally requested.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedGraph {
    pub graph: MotherGraph,
    pub requested_q: usize,
}

impl GeneratedGraph {
    /// Duplicate sub-DAGs kept recurring, so fewer than requested were produced.
    pub fn q_reduced(&self) -> bool {
        self.graph.q() < self.requested_q
    }
}

/// Seeded random mother graph over `p` observed variables with up to `q` sub-DAGs.
///
/// A random non-stationary subset (non-empty when `q > 1`) receives `T` as a parent
/// everywhere. Stationary variables get one parent set, drawn once from earlier
/// stationary variables. Each sub-DAG draws a random order, keeps the stationary
/// variables in their shared order, and adds each forward edge into a
/// non-stationary variable with `edge_probability`. Duplicate sub-DAGs are
/// redrawn a bounded number of times, after which generation stops early.
pub fn random_mother_graph(p: usize, q: usize, edge_probability: f64, seed: u64) -> GeneratedGraph {
    assert!(p >= 1 && q >= 1, "need p >= 1 and q >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = VariableId(p);
    let mut non_stationary: VarSet = (0..p)
        .map(VariableId)
        .filter(|_| rng.gen_bool(0.5))
        .collect();
    if q > 1 && non_stationary.is_empty() {
        non_stationary.insert(VariableId(rng.gen_range(0..p)));
    }
    let mut stationary_order: Vec<VariableId> = (0..p)
        .map(VariableId)
        .filter(|v| !non_stationary.contains(*v))
        .collect();
    stationary_order.shuffle(&mut rng);
    let mut shared_edges = Vec::new();
    for (i, &w) in stationary_order.iter().enumerate() {
        for &u in &stationary_order[..i] {
            if rng.gen_bool(edge_probability) {
                shared_edges.push((u, w));
            }
        }
    }

    let mut dags: Vec<Dag> = Vec::with_capacity(q);
    'outer: while dags.len() < q {
        for _ in 0..DUPLICATE_RETRIES {
            let mut order: Vec<VariableId> = (0..p).map(VariableId).collect();
            order.shuffle(&mut rng);
            let mut next_stationary = stationary_order.iter();
            for slot in order.iter_mut() {
                if !non_stationary.contains(*slot) {
                    *slot = *next_stationary.next().expect("same count");
                }
            }
            let mut edges = shared_edges.clone();
            for (i, &w) in order.iter().enumerate() {
                if !non_stationary.contains(w) {
                    continue;
                }
                for &u in &order[..i] {
                    if rng.gen_bool(edge_probability) {
                        edges.push((u, w));
                    }
                }
                edges.push((t, w));
            }
            let dag = Dag::new(p + 1, edges).expect("forward edges are acyclic");
            if !dags.contains(&dag) {
                dags.push(dag);
                continue 'outer;
            }
        }
        break;
    }
    GeneratedGraph {
        graph: MotherGraph::new(dags).expect("generator output satisfies the mother-graph rules"),
        requested_q: q,
    }
}

/// Seeded random DAG: a random order with each forward edge kept with `edge_probability`.
pub fn random_dag(n: usize, edge_probability: f64, seed: u64) -> Dag {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<VariableId> = (0..n).map(VariableId).collect();
    order.shuffle(&mut rng);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(edge_probability) {
                edges.push((order[i], order[j]));
            }
        }
    }
    Dag::new(n, edges).expect("forward edges are acyclic")
}

/// A single-sub-DAG mother graph in which `T` has no children, so `X^∅ = X`.
pub fn random_stationary_mother_graph(p: usize, edge_probability: f64, seed: u64) -> MotherGraph {
    let dag = random_dag(p, edge_probability, seed);
    let lifted = Dag::new(p + 1, dag.edges()).expect("adding an isolated vertex keeps a DAG");
    MotherGraph::new(vec![lifted]).expect("no T edges")
}

fn singleton_query(s: &Statement, semantics: Semantics) -> SeparationQuery {
    SeparationQuery {
        a: VarSet::singleton(s.a),
        b: VarSet::singleton(s.b),
        c: s.c,
        semantics,
    }
}

fn statement_deviation(
    mg: &MotherGraph,
    statement: &Statement,
    cardinality: usize,
    model_seed: u64,
) -> Result<f64, VerifyError> {
    let table = random_model(mg, cardinality, model_seed)?.joint_table()?;
    let r = ci_test(
        &table,
        VarSet::singleton(statement.a),
        VarSet::singleton(statement.b),
        statement.c,
        DEFAULT_INDEPENDENCE_THRESHOLD,
    )?;
    Ok(r.max_deviation)
}

/// Checks every enumerated m-d-separation statement against `models_per_graph`
/// random models. An empty result means the Markov property held everywhere.
pub fn check_global_markov(
    doc: &MotherGraphDocument,
    config: &SuiteConfig,
) -> Result<Vec<ViolationRecord>, VerifyError> {
    check_global_markov_seeded(doc, config, None)
}

fn check_global_markov_seeded(
    doc: &MotherGraphDocument,
    config: &SuiteConfig,
    graph_seed: Option<u64>,
) -> Result<Vec<ViolationRecord>, VerifyError> {
    let mg = &doc.graph;
    let statements = enumerate_statements(mg, config.max_conditioning_size, config.semantics);
    let graph_text = doc.to_mg_text();
    let mut out = Vec::new();
    for i in 0..config.models_per_graph {
        let seed = config.model_seed(i);
        let table = random_model(mg, config.cardinality, seed)?.joint_table()?;
        for s in &statements {
            let r = ci_test(
                &table,
                VarSet::singleton(s.a),
                VarSet::singleton(s.b),
                s.c,
                config.independence_threshold,
            )?;
            if !r.independent {
                out.push(ViolationRecord {
                    graph: graph_text.clone(),
                    graph_seed,
                    model_seed: Some(seed),
                    statement: *s,
                    kind: ViolationKind::MarkovViolation,
                    semantics: config.semantics,
                    deviation: Some(r.max_deviation),
                });
            }
        }
    }
    Ok(out)
}

/// Checks that every m-d-separated query is also d-separated in every sub-DAG.
pub fn check_lemma3(
    doc: &MotherGraphDocument,
    max_conditioning_size: usize,
    semantics: Semantics,
) -> Vec<ViolationRecord> {
    check_lemma3_seeded(doc, max_conditioning_size, semantics, None)
}

fn check_lemma3_seeded(
    doc: &MotherGraphDocument,
    max_conditioning_size: usize,
    semantics: Semantics,
    graph_seed: Option<u64>,
) -> Vec<ViolationRecord> {
    let mg = &doc.graph;
    let graph_text = doc.to_mg_text();
    enumerate_statements(mg, max_conditioning_size, semantics)
        .into_iter()
        .filter(|s| {
            !d_separated_mother(mg, VarSet::singleton(s.a), VarSet::singleton(s.b), s.c)
                .expect("well-formed query")
                .separated
        })
        .map(|s| ViolationRecord {
            graph: graph_text.clone(),
            graph_seed,
            model_seed: None,
            statement: s,
            kind: ViolationKind::Lemma3Violation,
            semantics,
            deviation: None,
        })
        .collect()
}

/// Recomputes a violation from its graph text and seeds.
///
/// Returns `None` if the check no longer fails.
pub fn replay_violation(
    record: &ViolationRecord,
    config: &SuiteConfig,
) -> Result<Option<ViolationRecord>, VerifyError> {
    let doc = parse_mother_file(&record.graph).map_err(|e| VerifyError::Replay(e.to_string()))?;
    let s = record.statement;
    let separated = m_d_separated(&doc.graph, &singleton_query(&s, record.semantics))
        .map_err(|e| VerifyError::Replay(e.to_string()))?
        .separated;
    if !separated {
        return Ok(None);
    }
    match record.kind {
        ViolationKind::MarkovViolation => {
            let seed = record
                .model_seed
                .ok_or_else(|| VerifyError::Replay("missing model seed".into()))?;
            let dev = statement_deviation(&doc.graph, &s, config.cardinality, seed)?;
            Ok(
                (dev > config.independence_threshold).then(|| ViolationRecord {
                    graph: doc.to_mg_text(),
                    deviation: Some(dev),
                    ..record.clone()
                }),
            )
        }
        ViolationKind::Lemma3Violation => {
            let connected = !d_separated_mother(
                &doc.graph,
                VarSet::singleton(s.a),
                VarSet::singleton(s.b),
                s.c,
            )
            .map_err(|e| VerifyError::Replay(e.to_string()))?
            .separated;
            Ok(connected.then(|| ViolationRecord {
                graph: doc.to_mg_text(),
                ..record.clone()
            }))
        }
    }
}

/// Summary of a randomized suite run.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub graphs_checked: usize,
    pub graphs_with_reduced_q: usize,
    pub statements_checked: usize,
    pub violations: Vec<ViolationRecord>,
}

impl SuiteReport {
    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

/// Graph `g` of a suite: seed `base_seed + g`, with `p` and `q` drawn from that seed.
pub fn suite_graph(config: &SuiteConfig, g: usize) -> (u64, GeneratedGraph) {
    let seed = config.base_seed.wrapping_add(g as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed_5eed_5eed);
    let p = rng.gen_range(2..=config.max_p);
    let q = rng.gen_range(1..=config.max_q);
    (
        seed,
        random_mother_graph(p, q, config.edge_probability, seed),
    )
}

/// Runs the Markov and m-d-separation ⇒ d-separation checks over `graph_count`
/// random mother graphs. Violations are ordered by graph seed, then model seed,
/// then statement.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport, VerifyError> {
    config.validate()?;
    let mut report = SuiteReport {
        config: *config,
        graphs_checked: 0,
        graphs_with_reduced_q: 0,
        statements_checked: 0,
        violations: Vec::new(),
    };
    for g in 0..config.graph_count {
        let (seed, generated) = suite_graph(config, g);
        if generated.q_reduced() {
            report.graphs_with_reduced_q += 1;
        }
        let doc = MotherGraphDocument::with_numbered_names(generated.graph);
        let graph_config = SuiteConfig {
            base_seed: seed.wrapping_mul(1_000_003),
            ..*config
        };
        report.statements_checked +=
            candidate_statements(&doc.graph, config.max_conditioning_size).len();
        report
            .violations
            .extend(check_global_markov_seeded(&doc, &graph_config, Some(seed))?);
        report.violations.extend(check_lemma3_seeded(
            &doc,
            config.max_conditioning_size,
            config.semantics,
            Some(seed),
        ));
        report.graphs_checked += 1;
    }
    Ok(report)
}

/// A statement that d-separation accepts but m-d-separation rejects, with the
/// measured dependence across random models.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleEntry {
    pub statement: Statement,
    pub models: usize,
    pub dependent_models: usize,
    pub max_deviation: f64,
}

impl CounterexampleEntry {
    pub fn dependent_fraction(&self) -> f64 {
        if self.models == 0 {
            0.0
        } else {
            self.dependent_models as f64 / self.models as f64
        }
    }
}

/// For every query where mother-graph d-separation says separated but default
/// m-d-separation says connected, measures how often random models are dependent.
pub fn dsep_counterexample_report(
    doc: &MotherGraphDocument,
    config: &SuiteConfig,
) -> Result<Vec<CounterexampleEntry>, VerifyError> {
    let mg = &doc.graph;
    let mut entries = Vec::new();
    for s in candidate_statements(mg, config.max_conditioning_size) {
        let d_sep = d_separated_mother(mg, VarSet::singleton(s.a), VarSet::singleton(s.b), s.c)
            .expect("well-formed query")
            .separated;
        if !d_sep {
            continue;
        }
        let md_sep = m_d_separated(mg, &singleton_query(&s, Semantics::Default))
            .expect("well-formed query")
            .separated;
        if md_sep {
            continue;
        }
        entries.push(CounterexampleEntry {
            statement: s,
            models: config.models_per_graph,
            dependent_models: 0,
            max_deviation: 0.0,
        });
    }
    if entries.is_empty() {
        return Ok(entries);
    }
    for i in 0..config.models_per_graph {
        let table = random_model(mg, config.cardinality, config.model_seed(i))?.joint_table()?;
        for e in &mut entries {
            let r = ci_test(
                &table,
                VarSet::singleton(e.statement.a),
                VarSet::singleton(e.statement.b),
                e.statement.c,
                config.dependence_threshold,
            )?;
            if !r.independent {
                e.dependent_models += 1;
            }
            e.max_deviation = e.max_deviation.max(r.max_deviation);
        }
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn fixture(name: &str) -> MotherGraphDocument {
        fixtures::load(name).unwrap()
    }

    fn config(models: usize, max_c: usize, semantics: Semantics) -> SuiteConfig {
        SuiteConfig {
            models_per_graph: models,
            max_conditioning_size: max_c,
            semantics,
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn tiny_generator_case() {
        let g = random_mother_graph(1, 1, 0.5, 0);
        assert_eq!(g.graph.x_count(), 1);
        assert_eq!(g.graph.q(), 1);
    }

    #[test]
    fn generator_is_seeded() {
        assert_eq!(
            random_mother_graph(4, 3, 0.5, 11),
            random_mother_graph(4, 3, 0.5, 11)
        );
        assert_eq!(random_dag(6, 0.4, 3), random_dag(6, 0.4, 3));
    }

    #[test]
    fn generator_output_revalidates() {
        for seed in 0..1000 {
            let g =
                random_mother_graph(1 + (seed as usize % 5), 1 + (seed as usize % 3), 0.5, seed);
            let rebuilt = MotherGraph::new(g.graph.sub_dags().to_vec()).unwrap();
            assert_eq!(rebuilt, g.graph);
        }
    }

    #[test]
    fn single_variable_with_several_sub_dags_reduces_q() {
        let g = random_mother_graph(1, 3, 0.5, 0);
        assert!(g.q_reduced());
        assert_eq!(g.graph.q(), 1);
    }

    #[test]
    fn markov_holds_on_separation_examples() {
        assert!(
            check_global_markov(&fixture("mg-sep"), &config(100, 2, Semantics::Default))
                .unwrap()
                .is_empty()
        );
        assert!(
            check_global_markov(&fixture("mg-complex"), &config(100, 2, Semantics::Default))
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn literal_reading_breaks_markov_on_divergence_graph() {
        let doc = fixture("mg-edge");
        let violations =
            check_global_markov(&doc, &config(10, 0, Semantics::LiteralCollider)).unwrap();
        assert!(!violations.is_empty());
        assert!(violations.iter().all(|v| v.deviation.unwrap() > 1e-6));
        let lemma = check_lemma3(&doc, 0, Semantics::LiteralCollider);
        assert_eq!(lemma.len(), 1);
        assert_eq!(lemma[0].statement.c, VarSet::EMPTY);
    }

    #[test]
    fn lemma3_holds_on_small_fixtures() {
        for name in ["mg-sep", "mg-ce"] {
            assert!(check_lemma3(&fixture(name), 1, Semantics::Default).is_empty());
        }
    }

    #[test]
    fn counterexample_report() {
        let ce = dsep_counterexample_report(&fixture("mg-ce"), &config(100, 1, Semantics::Default))
            .unwrap();
        assert_eq!(ce.len(), 1);
        let doc = fixture("mg-ce");
        assert_eq!(
            ce[0].statement.c,
            VarSet::singleton(doc.names.lookup("Xj").unwrap())
        );
        // flat-simplex draws occasionally land near independence
        assert!(ce[0].dependent_fraction() >= 0.95);
        assert!(ce[0].max_deviation > 1e-3);

        assert!(dsep_counterexample_report(
            &fixture("mg-sep"),
            &config(100, 1, Semantics::Default)
        )
        .unwrap()
        .is_empty());

        let chain = parse_mother_file("vars A B C\nsubdag 1\nedge A -> B\nedge B -> C\n").unwrap();
        assert!(
            dsep_counterexample_report(&chain, &config(5, 1, Semantics::Default))
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn violations_replay_exactly() {
        let cfg = config(10, 0, Semantics::LiteralCollider);
        let doc = fixture("mg-edge");
        let mut records = check_global_markov(&doc, &cfg).unwrap();
        records.extend(check_lemma3(&doc, 0, Semantics::LiteralCollider));
        for r in &records {
            assert_eq!(replay_violation(r, &cfg).unwrap().as_ref(), Some(r));
        }
    }

    #[test]
    fn config_validation() {
        assert!(SuiteConfig::default().validate().is_ok());
        let bad = SuiteConfig {
            edge_probability: 1.0,
            ..SuiteConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SuiteConfig {
            max_p: 1,
            ..SuiteConfig::default()
        };
        assert!(run_suite(&bad).is_err());
    }
}
