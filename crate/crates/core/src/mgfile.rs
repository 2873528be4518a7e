//! The line-oriented `.mg` mother-graph format and its JSON mirror.
//!
//! ```text
//! # comment
//! vars Xi Xj Xk
//! subdag 1
//! edge Xi -> Xj
//! edge T -> Xj
//! subdag 2
//! edge Xk -> Xj
//! edge T -> Xj
//! ```
//!
//! `vars` must be the first meaningful line and appear once. Sub-DAG headers are
//! numbered consecutively from 1. `T` is reserved: it may appear in edges but is
//! never declared.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Dag, GraphError, MotherGraph, VarSet, VariableId};

pub const TIME_NAME: &str = "T";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: undeclared variable `{name}`")]
    UndeclaredVariable { line: usize, name: String },
    #[error("{message}")]
    Graph {
        message: String,
        #[source]
        source: GraphError,
    },
    #[error("invalid JSON graph: {0}")]
    Json(String),
}

/// Names of the observed variables, in index order. `T` is implicit and last.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameTable {
    names: Vec<String>,
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl NameTable {
    pub fn new(names: Vec<String>) -> Result<Self, String> {
        for (i, n) in names.iter().enumerate() {
            if !valid_name(n) {
                return Err(format!("invalid variable name `{n}`"));
            }
            if n == TIME_NAME {
                return Err("`T` is reserved and cannot be declared".to_string());
            }
            if names[..i].contains(n) {
                return Err(format!("variable `{n}` declared twice"));
            }
        }
        Ok(NameTable { names })
    }

    /// `X1 .. Xp`.
    pub fn numbered(p: usize) -> Self {
        NameTable {
            names: (1..=p).map(|i| format!("X{i}")).collect(),
        }
    }

    pub fn observed(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, v: VariableId) -> &str {
        if v.0 == self.names.len() {
            TIME_NAME
        } else {
            &self.names[v.0]
        }
    }

    pub fn lookup(&self, name: &str) -> Option<VariableId> {
        if name == TIME_NAME {
            return Some(VariableId(self.names.len()));
        }
        self.names.iter().position(|n| n == name).map(VariableId)
    }

    /// Parses a comma-separated list such as `Xj,Xl`. An empty string is the empty set.
    pub fn parse_set(&self, list: &str) -> Result<VarSet, String> {
        let mut set = VarSet::EMPTY;
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let v = self
                .lookup(name)
                .ok_or_else(|| format!("unknown variable `{name}`"))?;
            set.insert(v);
        }
        Ok(set)
    }

    pub fn names_of(&self, set: VarSet) -> Vec<String> {
        set.iter().map(|v| self.name(v).to_string()).collect()
    }

    pub fn format_set(&self, set: VarSet) -> String {
        format!("{{{}}}", self.names_of(set).join(", "))
    }
}

/// A mother graph together with the names of its variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotherGraphDocument {
    pub names: NameTable,
    pub graph: MotherGraph,
}

fn describe(err: &GraphError, names: &NameTable) -> String {
    let name = |i: usize| names.name(VariableId(i)).to_string();
    match err {
        GraphError::TNotRoot { subdag, parent } => format!(
            "sub-DAG {}: T must be a root but has parent {}",
            subdag + 1,
            name(*parent)
        ),
        GraphError::StationarityViolation { variable, detail } => {
            format!("stationarity violation at {}: {detail}", name(*variable))
        }
        GraphError::InSubDag { subdag, source } => {
            format!("sub-DAG {}: {}", subdag + 1, describe(source, names))
        }
        GraphError::CyclicGraph => "directed cycle".to_string(),
        other => other.to_string(),
    }
}

/// Parses `.mg` text.
pub fn parse_mother_file(text: &str) -> Result<MotherGraphDocument, ParseError> {
    let syntax = |line: usize, message: &str| ParseError::Syntax {
        line,
        message: message.to_string(),
    };
    let mut names: Option<NameTable> = None;
    let mut blocks: Vec<Vec<(VariableId, VariableId)>> = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let Some(&keyword) = tokens.first() else {
            continue;
        };
        match keyword {
            "vars" => {
                if names.is_some() {
                    return Err(syntax(line, "`vars` may appear only once"));
                }
                if tokens.len() < 2 {
                    return Err(syntax(line, "`vars` needs at least one name"));
                }
                let table = NameTable::new(tokens[1..].iter().map(|s| s.to_string()).collect())
                    .map_err(|m| syntax(line, &m))?;
                names = Some(table);
            }
            _ if names.is_none() => {
                return Err(syntax(line, "the first line must be `vars <name>+`"));
            }
            "subdag" => {
                let expected = blocks.len() + 1;
                let k: Option<usize> = match tokens.as_slice() {
                    [_, k] => k.parse().ok(),
                    _ => None,
                };
                if k != Some(expected) {
                    return Err(syntax(line, &format!("expected `subdag {expected}`")));
                }
                blocks.push(Vec::new());
            }
            "edge" => {
                let table = names.as_ref().expect("checked above");
                let [_, from, arrow, to] = tokens.as_slice() else {
                    return Err(syntax(line, "expected `edge <name> -> <name>`"));
                };
                if *arrow != "->" {
                    return Err(syntax(line, "expected `->` between edge endpoints"));
                }
                let resolve = |name: &str| {
                    table
                        .lookup(name)
                        .ok_or_else(|| ParseError::UndeclaredVariable {
                            line,
                            name: name.to_string(),
                        })
                };
                let (a, b) = (resolve(from)?, resolve(to)?);
                let Some(block) = blocks.last_mut() else {
                    return Err(syntax(line, "edge before any `subdag` header"));
                };
                if a == b {
                    return Err(syntax(line, "self-loop"));
                }
                if block.contains(&(a, b)) {
                    return Err(syntax(line, "duplicate edge"));
                }
                block.push((a, b));
            }
            other => return Err(syntax(line, &format!("unknown keyword `{other}`"))),
        }
    }
    let names = names.ok_or_else(|| syntax(last_line.max(1), "missing `vars` line"))?;
    if blocks.is_empty() {
        return Err(syntax(
            last_line.max(1),
            "at least one `subdag` block is required",
        ));
    }
    build(names, blocks)
}

fn build(
    names: NameTable,
    blocks: Vec<Vec<(VariableId, VariableId)>>,
) -> Result<MotherGraphDocument, ParseError> {
    let n = names.len() + 1;
    let dags = blocks
        .into_iter()
        .enumerate()
        .map(|(k, edges)| {
            Dag::new(n, edges).map_err(|e| GraphError::InSubDag {
                subdag: k,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .and_then(MotherGraph::new)
        .map_err(|e| ParseError::Graph {
            message: describe(&e, &names),
            source: e,
        })?;
    Ok(MotherGraphDocument { names, graph: dags })
}

impl MotherGraphDocument {
    pub fn with_numbered_names(graph: MotherGraph) -> Self {
        MotherGraphDocument {
            names: NameTable::numbered(graph.x_count()),
            graph,
        }
    }

    /// `.mg` text with edges listed in index order within each sub-DAG.
    pub fn to_mg_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "vars {}", self.names.observed().join(" ")).unwrap();
        for (k, g) in self.graph.sub_dags().iter().enumerate() {
            writeln!(out, "subdag {}", k + 1).unwrap();
            for (a, b) in g.edges() {
                writeln!(out, "edge {} -> {}", self.names.name(a), self.names.name(b)).unwrap();
            }
        }
        out
    }

    pub fn to_json_value(&self) -> GraphJson {
        GraphJson {
            variables: self.names.observed().to_vec(),
            subdags: self
                .graph
                .sub_dags()
                .iter()
                .map(|g| {
                    g.edges()
                        .into_iter()
                        .map(|(a, b)| {
                            [
                                self.names.name(a).to_string(),
                                self.names.name(b).to_string(),
                            ]
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_json_value(json: GraphJson) -> Result<Self, ParseError> {
        let names = NameTable::new(json.variables).map_err(ParseError::Json)?;
        if json.subdags.is_empty() {
            return Err(ParseError::Json("at least one sub-DAG is required".into()));
        }
        let mut blocks = Vec::new();
        for edges in json.subdags {
            let mut block = Vec::new();
            for [from, to] in edges {
                let a = names
                    .lookup(&from)
                    .ok_or_else(|| ParseError::Json(format!("undeclared variable `{from}`")))?;
                let b = names
                    .lookup(&to)
                    .ok_or_else(|| ParseError::Json(format!("undeclared variable `{to}`")))?;
                block.push((a, b));
            }
            blocks.push(block);
        }
        build(names, blocks)
    }
}

/// JSON mirror of a `.mg` file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub variables: Vec<String>,
    pub subdags: Vec<Vec<[String; 2]>>,
}

/// Parses either `.mg` text or its JSON mirror (detected by a leading `{`).
pub fn load_graph(text: &str) -> Result<MotherGraphDocument, ParseError> {
    if text.trim_start().starts_with('{') {
        let json: GraphJson =
            serde_json::from_str(text).map_err(|e| ParseError::Json(e.to_string()))?;
        MotherGraphDocument::from_json_value(json)
    } else {
        parse_mother_file(text)
    }
}
