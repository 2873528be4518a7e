//! Discrete mixtures of DAGs: parameterization, exact joint tables, exact
//! conditional-independence tests and ancestral sampling.

use std::io;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{MotherGraph, VarSet, VariableId};

/// Tolerance for probability vectors and CPT rows summing to one.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;
/// Largest joint table [`MixtureModel::joint_table`] will materialize.
pub const DEFAULT_CELL_BUDGET: usize = 10_000_000;
/// Default threshold below which a CI deviation counts as independence.
pub const DEFAULT_INDEPENDENCE_THRESHOLD: f64 = 1e-9;
/// Default threshold above which a CI deviation counts as dependence.
pub const DEFAULT_DEPENDENCE_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DensityError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("{what} sums to {sum}, not 1")]
    NotNormalized { what: String, sum: f64 },
    #[error("{what} has a negative or non-finite entry")]
    InvalidProbability { what: String },
    #[error("time-point map does not reach sub-DAG {}", .0 + 1)]
    KappaNotSurjective(usize),
    #[error("variable #{variable} has cardinality {cardinality}; at least 2 is required")]
    InvalidCardinality { variable: usize, cardinality: usize },
    #[error("joint table needs {cells} cells, over the budget of {budget}")]
    BudgetExceeded { cells: usize, budget: usize },
    #[error("the {0} and {1} sets overlap")]
    Overlap(&'static str, &'static str),
    #[error("invalid CI query: {0}")]
    InvalidQuery(String),
    #[error("csv output failed: {0}")]
    Csv(String),
}

impl From<csv::Error> for DensityError {
    fn from(e: csv::Error) -> Self {
        DensityError::Csv(e.to_string())
    }
}

/// Conditional probability table of one variable given its observed parents.
///
/// Rows are indexed by parent configuration in row-major order over the parents
/// sorted by index (last parent fastest); each row is a distribution over the
/// variable's states.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    parents: Vec<VariableId>,
    parent_cards: Vec<usize>,
    rows: Vec<Vec<f64>>,
}

impl Cpt {
    pub fn parents(&self) -> &[VariableId] {
        &self.parents
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    fn row_index(&self, config: &[usize]) -> usize {
        self.parents
            .iter()
            .zip(&self.parent_cards)
            .fold(0, |acc, (p, &card)| acc * card + config[p.0])
    }

    /// Probability of `state` given the parent values found in the full configuration.
    pub fn prob(&self, state: usize, config: &[usize]) -> f64 {
        self.rows[self.row_index(config)][state]
    }
}

/// CPTs of one variable: shared for stationary variables, one per time point otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum VariableCpts {
    Shared(Cpt),
    PerTimePoint(Vec<Cpt>),
}

impl VariableCpts {
    pub fn at(&self, time_point: usize) -> &Cpt {
        match self {
            VariableCpts::Shared(cpt) => cpt,
            VariableCpts::PerTimePoint(cpts) => &cpts[time_point],
        }
    }
}

/// Raw CPT contents as accepted by [`build_model`] and the JSON model format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CptTables {
    Shared(Vec<Vec<f64>>),
    PerTimePoint(Vec<Vec<Vec<f64>>>),
}

/// A validated discrete mixture of the sub-DAGs of a mother graph.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureModel {
    mg: MotherGraph,
    cardinalities: Vec<usize>,
    kappa: Vec<usize>,
    mixing: Vec<f64>,
    cpts: Vec<VariableCpts>,
}

fn check_distribution(values: &[f64], what: impl Fn() -> String) -> Result<(), DensityError> {
    if values.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(DensityError::InvalidProbability { what: what() });
    }
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(DensityError::NotNormalized { what: what(), sum });
    }
    Ok(())
}

/// Validates and assembles a mixture model.
///
/// `kappa[t]` is the zero-based sub-DAG used at time point `t`; `mixing[t]` its weight.
/// `tables[i]` holds the CPTs of observed variable `i`.
pub fn build_model(
    mg: &MotherGraph,
    cardinalities: Vec<usize>,
    kappa: Vec<usize>,
    mixing: Vec<f64>,
    tables: Vec<CptTables>,
) -> Result<MixtureModel, DensityError> {
    let p = mg.x_count();
    if cardinalities.len() != p {
        return Err(DensityError::ShapeMismatch(format!(
            "{} cardinalities for {p} variables",
            cardinalities.len()
        )));
    }
    if let Some((i, &c)) = cardinalities.iter().enumerate().find(|(_, &c)| c < 2) {
        return Err(DensityError::InvalidCardinality {
            variable: i,
            cardinality: c,
        });
    }
    let m = kappa.len();
    if m == 0 || mixing.len() != m {
        return Err(DensityError::ShapeMismatch(format!(
            "{m} time points but {} mixing weights",
            mixing.len()
        )));
    }
    if let Some(&k) = kappa.iter().find(|&&k| k >= mg.q()) {
        return Err(DensityError::ShapeMismatch(format!(
            "time point mapped to sub-DAG {} of {}",
            k + 1,
            mg.q()
        )));
    }
    if let Some(k) = (0..mg.q()).find(|k| !kappa.contains(k)) {
        return Err(DensityError::KappaNotSurjective(k));
    }
    check_distribution(&mixing, || "mixing distribution".to_string())?;
    if tables.len() != p {
        return Err(DensityError::ShapeMismatch(format!(
            "{} CPT entries for {p} variables",
            tables.len()
        )));
    }

    let make_cpt = |i: usize, sub_dag: usize, rows: Vec<Vec<f64>>, label: String| {
        let parents = mg
            .sub_dag(sub_dag)
            .parents(VariableId(i))
            .without(mg.t())
            .to_vec();
        let parent_cards: Vec<usize> = parents.iter().map(|v| cardinalities[v.0]).collect();
        let expected_rows: usize = parent_cards.iter().product();
        if rows.len() != expected_rows {
            return Err(DensityError::ShapeMismatch(format!(
                "{label}: {} rows, expected {expected_rows} for parents {:?}",
                rows.len(),
                parents.iter().map(|v| v.0).collect::<Vec<_>>()
            )));
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cardinalities[i] {
                return Err(DensityError::ShapeMismatch(format!(
                    "{label}: row {r} has {} entries, expected {}",
                    row.len(),
                    cardinalities[i]
                )));
            }
            check_distribution(row, || format!("{label} row {r}"))?;
        }
        Ok(Cpt {
            parents,
            parent_cards,
            rows,
        })
    };

    let mut cpts = Vec::with_capacity(p);
    for (i, table) in tables.into_iter().enumerate() {
        let stationary = mg.is_stationary(VariableId(i));
        let entry = match (stationary, table) {
            (true, CptTables::Shared(rows)) => {
                VariableCpts::Shared(make_cpt(i, 0, rows, format!("CPT of #{i}"))?)
            }
            (false, CptTables::PerTimePoint(per_t)) => {
                if per_t.len() != m {
                    return Err(DensityError::ShapeMismatch(format!(
                        "variable #{i} has {} time-point CPTs, expected {m}",
                        per_t.len()
                    )));
                }
                let cpts = per_t
                    .into_iter()
                    .enumerate()
                    .map(|(t, rows)| {
                        make_cpt(
                            i,
                            kappa[t],
                            rows,
                            format!("CPT of #{i} at time point {}", t + 1),
                        )
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                VariableCpts::PerTimePoint(cpts)
            }
            (true, _) => {
                return Err(DensityError::ShapeMismatch(format!(
                    "stationary variable #{i} needs a single shared CPT"
                )))
            }
            (false, _) => {
                return Err(DensityError::ShapeMismatch(format!(
                    "non-stationary variable #{i} needs one CPT per time point"
                )))
            }
        };
        cpts.push(entry);
    }
    Ok(MixtureModel {
        mg: mg.clone(),
        cardinalities,
        kappa,
        mixing,
        cpts,
    })
}

fn flat_simplex(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..len)
        .map(|_| {
            let u: f64 = rng.sample(Open01);
            -u.ln()
        })
        .collect();
    let sum: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / sum).collect()
}

/// Draws a generic model with `m = q` time points and the identity time-point map.
///
/// Mixing weights and every CPT row come from the flat distribution on the simplex.
pub fn random_model(
    mg: &MotherGraph,
    cardinality: usize,
    seed: u64,
) -> Result<MixtureModel, DensityError> {
    let p = mg.x_count();
    if cardinality < 2 {
        return Err(DensityError::InvalidCardinality {
            variable: 0,
            cardinality,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = mg.q();
    let mixing = flat_simplex(&mut rng, q);
    let mut draw_rows = |i: usize, k: usize| -> Vec<Vec<f64>> {
        let parents = mg.sub_dag(k).parents(VariableId(i)).without(mg.t());
        let rows = cardinality.pow(parents.len() as u32);
        (0..rows)
            .map(|_| flat_simplex(&mut rng, cardinality))
            .collect()
    };
    let mut tables = Vec::with_capacity(p);
    for i in 0..p {
        if mg.is_stationary(VariableId(i)) {
            tables.push(CptTables::Shared(draw_rows(i, 0)));
        } else {
            tables.push(CptTables::PerTimePoint(
                (0..q).map(|k| draw_rows(i, k)).collect(),
            ));
        }
    }
    build_model(mg, vec![cardinality; p], (0..q).collect(), mixing, tables)
}

impl MixtureModel {
    pub fn mother_graph(&self) -> &MotherGraph {
        &self.mg
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cardinalities
    }

    pub fn time_points(&self) -> usize {
        self.kappa.len()
    }

    /// Zero-based sub-DAG index per time point.
    pub fn kappa(&self) -> &[usize] {
        &self.kappa
    }

    pub fn mixing(&self) -> &[f64] {
        &self.mixing
    }

    pub fn cpts(&self, v: VariableId) -> &VariableCpts {
        &self.cpts[v.0]
    }

    pub fn cell_count(&self) -> Option<usize> {
        self.cardinalities
            .iter()
            .try_fold(1usize, |acc, &c| acc.checked_mul(c))
    }

    /// Density of one full configuration given time point `t`.
    fn conditional_mass(&self, t: usize, config: &[usize]) -> f64 {
        self.cpts
            .iter()
            .enumerate()
            .map(|(i, c)| c.at(t).prob(config[i], config))
            .product()
    }

    /// The exact joint table, refusing tables above [`DEFAULT_CELL_BUDGET`] cells.
    pub fn joint_table(&self) -> Result<JointTable, DensityError> {
        self.joint_table_with_budget(DEFAULT_CELL_BUDGET)
    }

    /// `f(x) = Σ_t f(t) Π_i f(x_i | pa_i, t)` by full enumeration.
    ///
    /// Time points are summed in increasing order, so results are bit-reproducible.
    pub fn joint_table_with_budget(&self, budget: usize) -> Result<JointTable, DensityError> {
        let cells = self.cell_count().unwrap_or(usize::MAX);
        if cells > budget {
            return Err(DensityError::BudgetExceeded { cells, budget });
        }
        let mut table = JointTable::zeros(
            (0..self.cardinalities.len()).map(VariableId).collect(),
            self.cardinalities.clone(),
        );
        let mut config = vec![0usize; self.cardinalities.len()];
        for cell in 0..cells {
            table.decode_into(cell, &mut config);
            table.probs[cell] = self
                .mixing
                .iter()
                .enumerate()
                .map(|(t, w)| w * self.conditional_mass(t, &config))
                .sum();
        }
        Ok(table)
    }

    /// The single-DAG model of time point `t`: its sub-DAG alone, with weight one.
    pub fn component(&self, t: usize) -> MixtureModel {
        let k = self.kappa[t];
        let mg = MotherGraph::new(vec![self.mg.sub_dag(k).clone()])
            .expect("a single sub-DAG of a valid mother graph is valid");
        let cpts = self
            .cpts
            .iter()
            .map(|c| match c {
                VariableCpts::Shared(cpt) => VariableCpts::Shared(cpt.clone()),
                VariableCpts::PerTimePoint(per_t) => {
                    VariableCpts::PerTimePoint(vec![per_t[t].clone()])
                }
            })
            .collect();
        MixtureModel {
            mg,
            cardinalities: self.cardinalities.clone(),
            kappa: vec![0],
            mixing: vec![1.0],
            cpts,
        }
    }

    /// Draws `n` rows: a time point from the mixing weights, then ancestral
    /// sampling within its sub-DAG.
    pub fn sample(&self, n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = self.cardinalities.len();
        let mut rows = Vec::with_capacity(n);
        let mut components = Vec::with_capacity(n);
        for _ in 0..n {
            let t = categorical(&mut rng, &self.mixing);
            let mut config = vec![0usize; p];
            let dag = self.mg.sub_dag(self.kappa[t]);
            for &v in dag.topological_order() {
                if v == self.mg.t() {
                    continue;
                }
                let cpt = self.cpts[v.0].at(t);
                config[v.0] = categorical(&mut rng, &cpt.rows[cpt.row_index(&config)]);
            }
            rows.push(config);
            components.push(t);
        }
        Dataset {
            cardinalities: self.cardinalities.clone(),
            rows,
            components,
        }
    }

    /// JSON-facing representation (time points and sub-DAGs are one-based there).
    pub fn to_document(&self) -> ModelDocument {
        ModelDocument {
            cardinalities: self.cardinalities.clone(),
            kappa: self.kappa.iter().map(|k| k + 1).collect(),
            mixing: self.mixing.clone(),
            cpts: self
                .cpts
                .iter()
                .map(|c| match c {
                    VariableCpts::Shared(cpt) => CptTables::Shared(cpt.rows.clone()),
                    VariableCpts::PerTimePoint(per_t) => {
                        CptTables::PerTimePoint(per_t.iter().map(|c| c.rows.clone()).collect())
                    }
                })
                .collect(),
        }
    }

    pub fn from_document(mg: &MotherGraph, doc: ModelDocument) -> Result<Self, DensityError> {
        if doc.kappa.contains(&0) {
            return Err(DensityError::ShapeMismatch(
                "kappa entries are one-based sub-DAG indices".to_string(),
            ));
        }
        let kappa = doc.kappa.iter().map(|k| k - 1).collect();
        build_model(mg, doc.cardinalities, kappa, doc.mixing, doc.cpts)
    }
}

/// Serialized model: cardinalities, one-based time-point map, mixing weights and CPTs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub cardinalities: Vec<usize>,
    pub kappa: Vec<usize>,
    pub mixing: Vec<f64>,
    pub cpts: Vec<CptTables>,
}

fn categorical(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    // rounding left u above the running total
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Dense probability table over a set of variables, row-major with the last
/// variable varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    variables: Vec<VariableId>,
    cardinalities: Vec<usize>,
    probs: Vec<f64>,
}

impl JointTable {
    fn zeros(variables: Vec<VariableId>, cardinalities: Vec<usize>) -> Self {
        let cells = cardinalities.iter().product();
        JointTable {
            variables,
            cardinalities,
            probs: vec![0.0; cells],
        }
    }

    pub fn variables(&self) -> &[VariableId] {
        &self.variables
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cardinalities
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    fn decode_into(&self, mut cell: usize, out: &mut [usize]) {
        for (slot, &card) in out.iter_mut().zip(&self.cardinalities).rev() {
            *slot = cell % card;
            cell /= card;
        }
    }

    /// Probability of the configuration given in table-variable order.
    pub fn get(&self, states: &[usize]) -> f64 {
        let idx = states
            .iter()
            .zip(&self.cardinalities)
            .fold(0, |acc, (&s, &c)| acc * c + s);
        self.probs[idx]
    }

    fn position(&self, v: VariableId) -> Option<usize> {
        self.variables.iter().position(|&x| x == v)
    }

    pub fn variable_set(&self) -> VarSet {
        self.variables.iter().copied().collect()
    }

    /// Marginal over `keep` (which must be a subset of the table's variables),
    /// with variables in increasing index order.
    pub fn marginal(&self, keep: VarSet) -> JointTable {
        let vars: Vec<VariableId> = keep
            .iter()
            .filter(|v| self.position(*v).is_some())
            .collect();
        let positions: Vec<usize> = vars.iter().map(|&v| self.position(v).unwrap()).collect();
        let cards: Vec<usize> = positions.iter().map(|&i| self.cardinalities[i]).collect();
        let mut out = JointTable::zeros(vars, cards);
        let mut config = vec![0usize; self.variables.len()];
        for (cell, &prob) in self.probs.iter().enumerate() {
            self.decode_into(cell, &mut config);
            let idx = positions
                .iter()
                .zip(&out.cardinalities)
                .fold(0, |acc, (&i, &c)| acc * c + config[i]);
            out.probs[idx] += prob;
        }
        out
    }

    /// Half the L1 distance between two tables over the same variables.
    pub fn total_variation(&self, other: &JointTable) -> f64 {
        assert_eq!(
            self.cardinalities, other.cardinalities,
            "table shapes differ"
        );
        0.5 * self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }
}

/// Outcome of an exact conditional-independence test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiReport {
    pub independent: bool,
    pub max_deviation: f64,
    pub threshold: f64,
}

/// Tests `A ⊥ B | C` on an exact table.
///
/// The deviation is the largest `|f(a,b|c) - f(a|c) f(b|c)|` over contexts with
/// `f(c) > 0`; contexts of zero mass are skipped.
pub fn ci_test(
    table: &JointTable,
    a: VarSet,
    b: VarSet,
    c: VarSet,
    threshold: f64,
) -> Result<CiReport, DensityError> {
    if a.is_empty() || b.is_empty() {
        return Err(DensityError::InvalidQuery(
            "A and B must be non-empty".into(),
        ));
    }
    if !a.is_disjoint(b) {
        return Err(DensityError::Overlap("A", "B"));
    }
    if !a.is_disjoint(c) {
        return Err(DensityError::Overlap("A", "C"));
    }
    if !b.is_disjoint(c) {
        return Err(DensityError::Overlap("B", "C"));
    }
    if !a.union(b).union(c).is_subset(table.variable_set()) {
        return Err(DensityError::InvalidQuery(
            "variables outside the table".into(),
        ));
    }
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(DensityError::InvalidQuery(
            "threshold must be positive".into(),
        ));
    }
    let abc = table.marginal(a.union(b).union(c));
    let ac = table.marginal(a.union(c));
    let bc = table.marginal(b.union(c));
    let cm = table.marginal(c);
    let index_in = |sub: &JointTable, config: &[usize]| -> usize {
        sub.variables
            .iter()
            .zip(&sub.cardinalities)
            .fold(0, |acc, (v, &card)| {
                acc * card + config[abc.position(*v).unwrap()]
            })
    };
    let mut max_deviation: f64 = 0.0;
    let mut config = vec![0usize; abc.variables.len()];
    for (cell, &f_abc) in abc.probs.iter().enumerate() {
        abc.decode_into(cell, &mut config);
        let f_c = cm.probs[index_in(&cm, &config)];
        if f_c <= 0.0 {
            continue;
        }
        let f_ac = ac.probs[index_in(&ac, &config)];
        let f_bc = bc.probs[index_in(&bc, &config)];
        let dev = (f_abc / f_c - (f_ac / f_c) * (f_bc / f_c)).abs();
        max_deviation = max_deviation.max(dev);
    }
    Ok(CiReport {
        independent: max_deviation <= threshold,
        max_deviation,
        threshold,
    })
}

/// Sampled rows with the zero-based time point that generated each one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub cardinalities: Vec<usize>,
    pub rows: Vec<Vec<usize>>,
    pub components: Vec<usize>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// CSV with a header of variable names and a trailing one-based `component` column.
    pub fn write_csv<W: io::Write>(&self, writer: W, names: &[String]) -> Result<(), DensityError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = names.iter().map(String::as_str).collect();
        header.push("component");
        w.write_record(&header)?;
        for (row, t) in self.rows.iter().zip(&self.components) {
            let mut record: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            record.push((t + 1).to_string());
            w.write_record(&record)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Empirical frequencies as a table over all sampled variables.
    pub fn empirical_table(&self) -> JointTable {
        let mut table = JointTable::zeros(
            (0..self.cardinalities.len()).map(VariableId).collect(),
            self.cardinalities.clone(),
        );
        if self.rows.is_empty() {
            return table;
        }
        let weight = 1.0 / self.rows.len() as f64;
        for row in &self.rows {
            let idx = row
                .iter()
                .zip(&self.cardinalities)
                .fold(0, |acc, (&s, &c)| acc * c + s);
            table.probs[idx] += weight;
        }
        table
    }
}
