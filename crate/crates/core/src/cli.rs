//! Command-line front end. [`run`] is the whole program minus process I/O, so it
//! can be driven directly from tests.
//!
//! Exit status: 0 for separated / pass, 1 for connected / violations, 2 for usage,
//! I/O or parse errors.

use std::ffi::OsString;
use std::fs;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::density::{random_model, MixtureModel, ModelDocument};
use crate::graph::VarSet;
use crate::mgfile::{load_graph, MotherGraphDocument, NameTable};
use crate::separation::{
    d_separated_mother, enumerate_statements, m_d_separated, Realization, Semantics,
    SeparationQuery, SeparationVerdict, Statement,
};
use crate::verify::{
    check_global_markov, check_lemma3, dsep_counterexample_report, random_mother_graph, run_suite,
    SuiteConfig, ViolationKind, ViolationRecord,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CliOutput {
    pub status: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Parser, Debug)]
#[command(
    name = "mixdag",
    version,
    about = "Mother graphs, m-d-separation and exact CI checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and validate a mother-graph file.
    Validate {
        file: String,
        #[arg(long)]
        json: bool,
    },
    /// Decide m-d-separation.
    Msep(QueryArgs),
    /// Decide d-separation in the mother graph (every sub-DAG).
    Dsep(QueryArgs),
    /// List m-d-separation statements with singleton endpoints.
    Enumerate {
        file: String,
        #[arg(long = "max-c")]
        max_c: usize,
        #[arg(long, default_value = "default")]
        semantics: Semantics,
        #[arg(long)]
        json: bool,
    },
    /// Check the Markov property on a file or on random mother graphs.
    Verify(VerifyArgs),
    /// Print a random mother graph.
    RandomGraph {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
        #[arg(long = "edge-prob", default_value_t = 0.5)]
        edge_prob: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Print a random model for a mother graph as JSON.
    RandomModel {
        file: String,
        #[arg(long, default_value_t = 2)]
        cardinality: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Sample a labelled dataset as CSV.
    Sample {
        file: String,
        #[arg(long, conflicts_with = "random_seed")]
        model: Option<String>,
        #[arg(long = "random-seed")]
        random_seed: Option<u64>,
        #[arg(long, default_value_t = 2)]
        cardinality: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Debug)]
struct QueryArgs {
    file: String,
    #[arg(long)]
    a: String,
    #[arg(long)]
    b: String,
    #[arg(long, default_value = "")]
    c: String,
    #[arg(long, default_value = "default")]
    semantics: Semantics,
    #[arg(long)]
    witness: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(required_unless_present = "random", conflicts_with = "random")]
    file: Option<String>,
    #[arg(long)]
    random: bool,
    #[arg(long)]
    graphs: Option<usize>,
    #[arg(long = "max-p")]
    max_p: Option<usize>,
    #[arg(long = "max-q")]
    max_q: Option<usize>,
    #[arg(long = "edge-prob")]
    edge_prob: Option<f64>,
    #[arg(long)]
    models: Option<usize>,
    #[arg(long = "max-c")]
    max_c: Option<usize>,
    #[arg(long)]
    cardinality: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    semantics: Option<Semantics>,
    #[arg(long = "independence-threshold")]
    independence_threshold: Option<f64>,
    #[arg(long = "dependence-threshold")]
    dependence_threshold: Option<f64>,
    #[arg(long)]
    json: bool,
}

impl VerifyArgs {
    fn config(&self) -> SuiteConfig {
        let d = SuiteConfig::default();
        SuiteConfig {
            graph_count: self.graphs.unwrap_or(d.graph_count),
            max_p: self.max_p.unwrap_or(d.max_p),
            max_q: self.max_q.unwrap_or(d.max_q),
            edge_probability: self.edge_prob.unwrap_or(d.edge_probability),
            models_per_graph: self.models.unwrap_or(d.models_per_graph),
            max_conditioning_size: self.max_c.unwrap_or(d.max_conditioning_size),
            cardinality: self.cardinality.unwrap_or(d.cardinality),
            base_seed: self.seed.unwrap_or(d.base_seed),
            semantics: self.semantics.unwrap_or(d.semantics),
            independence_threshold: self
                .independence_threshold
                .unwrap_or(d.independence_threshold),
            dependence_threshold: self.dependence_threshold.unwrap_or(d.dependence_threshold),
        }
    }
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type CmdResult = Result<(i32, String), Failure>;

/// Parses `args` (including the program name) and executes the subcommand.
pub fn run<I, T>(args: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                CliOutput {
                    status: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                CliOutput {
                    status: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    match dispatch(cli.command) {
        Ok((status, stdout)) => CliOutput {
            status,
            stdout,
            stderr: String::new(),
        },
        Err(Failure(message)) => CliOutput {
            status: EXIT_USAGE,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        },
    }
}

fn read_graph(path: &str) -> Result<MotherGraphDocument, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(format!("{path}: {e}")))?;
    load_graph(&text).map_err(|e| Failure(format!("{path}: {e}")))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn dispatch(command: Command) -> CmdResult {
    match command {
        Command::Validate { file, json } => validate(&file, json),
        Command::Msep(args) => query(args, false),
        Command::Dsep(args) => query(args, true),
        Command::Enumerate {
            file,
            max_c,
            semantics,
            json,
        } => enumerate(&file, max_c, semantics, json),
        Command::Verify(args) => verify(args),
        Command::RandomGraph {
            p,
            q,
            edge_prob,
            seed,
            json,
        } => {
            if p == 0 || q == 0 {
                return Err(Failure("--p and --q must be at least 1".into()));
            }
            if !(edge_prob > 0.0 && edge_prob < 1.0) {
                return Err(Failure(
                    "--edge-prob must lie strictly between 0 and 1".into(),
                ));
            }
            let generated = random_mother_graph(p, q, edge_prob, seed);
            let doc = MotherGraphDocument::with_numbered_names(generated.graph);
            if json {
                Ok((EXIT_OK, to_json(&doc.to_json_value())))
            } else {
                let mut text = format!(
                    "# random mother graph: p={p} q={q} edge-prob={edge_prob} seed={seed}\n"
                );
                if generated.requested_q != doc.graph.q() {
                    text.push_str(&format!(
                        "# q reduced to {} after repeated duplicate sub-DAGs\n",
                        doc.graph.q()
                    ));
                }
                text.push_str(&doc.to_mg_text());
                Ok((EXIT_OK, text))
            }
        }
        Command::RandomModel {
            file,
            cardinality,
            seed,
            json: _,
        } => {
            let doc = read_graph(&file)?;
            let model = random_model(&doc.graph, cardinality, seed)?;
            Ok((EXIT_OK, to_json(&model.to_document())))
        }
        Command::Sample {
            file,
            model,
            random_seed,
            cardinality,
            n,
            seed,
            json,
        } => sample(&file, model, random_seed, cardinality, n, seed, json),
    }
}

fn validate(file: &str, json: bool) -> CmdResult {
    let doc = read_graph(file)?;
    let stationary = doc.names.names_of(doc.graph.stationary());
    if json {
        let value = json!({
            "verdict": "valid",
            "config": {
                "graph": doc.to_json_value(),
                "stationary": stationary,
            },
        });
        return Ok((EXIT_OK, to_json(&value)));
    }
    Ok((
        EXIT_OK,
        format!(
            "valid: {} variables, {} sub-DAGs\nstationary: {}\nnon-stationary: {}\n",
            doc.graph.x_count(),
            doc.graph.q(),
            doc.names.format_set(doc.graph.stationary()),
            doc.names.format_set(doc.graph.non_stationary()),
        ),
    ))
}

fn parse_sets(
    doc: &MotherGraphDocument,
    a: &str,
    b: &str,
    c: &str,
) -> Result<(VarSet, VarSet, VarSet), Failure> {
    Ok((
        doc.names.parse_set(a).map_err(Failure)?,
        doc.names.parse_set(b).map_err(Failure)?,
        doc.names.parse_set(c).map_err(Failure)?,
    ))
}

fn describe_realization(r: Realization) -> String {
    match r {
        Realization::Collider { subdag } => format!("collider in sub-DAG {}", subdag + 1),
        Realization::NonCollider { subdag } => format!("non-collider in sub-DAG {}", subdag + 1),
        Realization::CrossCollider { first, second } => format!(
            "cross-sub-DAG collider (sub-DAGs {}, {})",
            first + 1,
            second + 1
        ),
    }
}

fn realization_json(r: Realization) -> Value {
    match r {
        Realization::Collider { subdag } => json!({"kind": "collider", "subdags": [subdag + 1]}),
        Realization::NonCollider { subdag } => {
            json!({"kind": "non_collider", "subdags": [subdag + 1]})
        }
        Realization::CrossCollider { first, second } => {
            json!({"kind": "cross_collider", "subdags": [first + 1, second + 1]})
        }
    }
}

fn witness_json(names: &NameTable, verdict: &SeparationVerdict) -> Value {
    match &verdict.witness {
        None => Value::Null,
        Some(w) => json!({
            "path": w.path.iter().map(|&v| names.name(v)).collect::<Vec<_>>(),
            "triples": w.path.windows(3).zip(&w.realizations).map(|(t, &r)| {
                let mut value = realization_json(r);
                value["middle"] = json!(names.name(t[1]));
                value
            }).collect::<Vec<_>>(),
        }),
    }
}

fn query(args: QueryArgs, classical: bool) -> CmdResult {
    let doc = read_graph(&args.file)?;
    let (a, b, c) = parse_sets(&doc, &args.a, &args.b, &args.c)?;
    let verdict = if classical {
        d_separated_mother(&doc.graph, a, b, c)?
    } else {
        let q = SeparationQuery::new(a, b, c, args.semantics)?;
        m_d_separated(&doc.graph, &q)?
    };
    let status = if verdict.separated {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    };
    let word = if verdict.separated {
        "separated"
    } else {
        "connected"
    };
    if args.json {
        let mut config = json!({
            "criterion": if classical { "d-separation" } else { "m-d-separation" },
            "a": doc.names.names_of(a),
            "b": doc.names.names_of(b),
            "c": doc.names.names_of(c),
        });
        if !classical {
            config["semantics"] = json!(args.semantics.as_str());
        }
        let value = json!({
            "config": config,
            "verdict": word,
            "witness": witness_json(&doc.names, &verdict),
        });
        return Ok((status, to_json(&value)));
    }
    let mut out = format!("{word}\n");
    if args.witness {
        if let Some(w) = &verdict.witness {
            let path: Vec<&str> = w.path.iter().map(|&v| doc.names.name(v)).collect();
            out.push_str(&format!("witness: {}\n", path.join(" - ")));
            for (t, &r) in w.path.windows(3).zip(&w.realizations) {
                out.push_str(&format!(
                    "  {}: {}\n",
                    doc.names.name(t[1]),
                    describe_realization(r)
                ));
            }
        }
    }
    Ok((status, out))
}

fn statement_json(names: &NameTable, s: &Statement) -> Value {
    json!({
        "a": names.name(s.a),
        "b": names.name(s.b),
        "c": names.names_of(s.c),
    })
}

fn statement_text(names: &NameTable, s: &Statement) -> String {
    if s.c.is_empty() {
        format!("{} _||_ {}", names.name(s.a), names.name(s.b))
    } else {
        format!(
            "{} _||_ {} | {}",
            names.name(s.a),
            names.name(s.b),
            names.names_of(s.c).join(", ")
        )
    }
}

fn enumerate(file: &str, max_c: usize, semantics: Semantics, json: bool) -> CmdResult {
    let doc = read_graph(file)?;
    let statements = enumerate_statements(&doc.graph, max_c, semantics);
    if json {
        let value = json!({
            "config": {"max_c": max_c, "semantics": semantics.as_str()},
            "statements": statements.iter().map(|s| statement_json(&doc.names, s)).collect::<Vec<_>>(),
        });
        return Ok((EXIT_OK, to_json(&value)));
    }
    let mut out = String::new();
    for s in &statements {
        out.push_str(&statement_text(&doc.names, s));
        out.push('\n');
    }
    Ok((EXIT_OK, out))
}

fn kind_str(kind: ViolationKind) -> &'static str {
    match kind {
        ViolationKind::MarkovViolation => "markov_violation",
        ViolationKind::Lemma3Violation => "lemma3_violation",
    }
}

fn violation_json(v: &ViolationRecord) -> Value {
    // suite graphs use numbered names; parse them back for readable statements
    let names = load_graph(&v.graph)
        .map(|d| d.names)
        .expect("records carry valid graphs");
    json!({
        "kind": kind_str(v.kind),
        "semantics": v.semantics.as_str(),
        "graph_seed": v.graph_seed,
        "model_seed": v.model_seed,
        "statement": statement_json(&names, &v.statement),
        "deviation": v.deviation,
        "graph": v.graph,
    })
}

fn verify(args: VerifyArgs) -> CmdResult {
    let config = args.config();
    config.validate()?;
    let (violations, extra) = match &args.file {
        Some(file) => {
            let doc = read_graph(file)?;
            let mut violations = check_global_markov(&doc, &config)?;
            violations.extend(check_lemma3(
                &doc,
                config.max_conditioning_size,
                config.semantics,
            ));
            let report = dsep_counterexample_report(&doc, &config)?;
            let mut lines = String::new();
            for e in &report {
                lines.push_str(&format!(
                    "d-separation only: {} (dependent in {}/{} models, max deviation {:.3e})\n",
                    statement_text(&doc.names, &e.statement),
                    e.dependent_models,
                    e.models,
                    e.max_deviation
                ));
            }
            (violations, lines)
        }
        None => {
            let report = run_suite(&config)?;
            let lines = format!(
                "graphs: {} ({} with reduced q), statements: {}\n",
                report.graphs_checked, report.graphs_with_reduced_q, report.statements_checked
            );
            (report.violations, lines)
        }
    };
    let status = if violations.is_empty() {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    };
    if args.json {
        let value = json!({
            "config": config,
            "verdict": if violations.is_empty() { "pass" } else { "fail" },
            "violations": violations.iter().map(violation_json).collect::<Vec<_>>(),
        });
        return Ok((status, to_json(&value)));
    }
    let markov = violations
        .iter()
        .filter(|v| v.kind == ViolationKind::MarkovViolation)
        .count();
    let mut out = format!(
        "semantics: {}\n{extra}markov violations: {markov}\nlemma3 violations: {}\n",
        config.semantics,
        violations.len() - markov
    );
    for v in &violations {
        let names = load_graph(&v.graph).expect("valid").names;
        out.push_str(&format!(
            "  {}: {} (graph seed {:?}, model seed {:?}, deviation {:?})\n",
            kind_str(v.kind),
            statement_text(&names, &v.statement),
            v.graph_seed,
            v.model_seed,
            v.deviation
        ));
    }
    out.push_str(if violations.is_empty() {
        "pass\n"
    } else {
        "fail\n"
    });
    Ok((status, out))
}

fn sample(
    file: &str,
    model_path: Option<String>,
    random_seed: Option<u64>,
    cardinality: usize,
    n: usize,
    seed: u64,
    json: bool,
) -> CmdResult {
    let doc = read_graph(file)?;
    let model = match (model_path, random_seed) {
        (Some(path), _) => {
            let text = fs::read_to_string(&path).map_err(|e| Failure(format!("{path}: {e}")))?;
            let parsed: ModelDocument =
                serde_json::from_str(&text).map_err(|e| Failure(format!("{path}: {e}")))?;
            MixtureModel::from_document(&doc.graph, parsed)?
        }
        (None, Some(s)) => random_model(&doc.graph, cardinality, s)?,
        (None, None) => {
            return Err(Failure(
                "either --model or --random-seed is required".into(),
            ))
        }
    };
    let data = model.sample(n, seed);
    if json {
        let mut columns = doc.names.observed().to_vec();
        columns.push("component".to_string());
        let rows: Vec<Vec<usize>> = data
            .rows
            .iter()
            .zip(&data.components)
            .map(|(r, &t)| {
                let mut row = r.clone();
                row.push(t + 1);
                row
            })
            .collect();
        let value = json!({
            "config": {"n": n, "seed": seed},
            "columns": columns,
            "rows": rows,
        });
        return Ok((EXIT_OK, to_json(&value)));
    }
    let mut buf = Vec::new();
    data.write_csv(&mut buf, doc.names.observed())?;
    Ok((
        EXIT_OK,
        String::from_utf8(buf).expect("csv output is utf-8"),
    ))
}
