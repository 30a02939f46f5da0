//! JSON instance files.
//!
//! ```json
//! {
//!   "version": 1,
//!   "model": "tabular",
//!   "n": 2,
//!   "m": 2,
//!   "cost_params": { "table": [[0.2, 0.5], [0.3, 0.4]] },
//!   "strategies": [[[0], [1]], [[0], [1]]]
//! }
//! ```
//!
//! Resource, node and player indices are 0-based. Network instances replace
//! `strategies` with `"network": {"nodes", "edges": [[tail, head]], "od_pairs": [[o, d]]}`;
//! `m` is then the number of edges and `n` the number of od pairs. Floats are
//! written in shortest round-trip form and read back bit-exact.

use std::fmt;
use std::path::{Path, PathBuf};

use brdlab_core::{
    CostModel, CostSharingCosts, Edge, Game64, ModelKind, NetworkSpec, PolynomialCosts,
    StepFunctionCosts, Strategy, StrategySpace, TabularCosts, Violation,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum InstanceError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Schema(SchemaError),
    #[error("unsupported instance version {found}, expected {FORMAT_VERSION}")]
    Version { found: u32 },
    #[error(
        "unknown model `{0}`, expected one of tabular, step_function, polynomial, cost_sharing"
    )]
    UnknownModel(String),
    #[error("invalid instance:{}", list(.0))]
    Invalid(Vec<Violation>),
}

fn list(violations: &[Violation]) -> String {
    violations.iter().map(|v| format!("\n  {v}")).collect()
}

/// A deserialization failure with its position and field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaError {
    pub line: usize,
    pub column: usize,
    pub field: String,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)?;
        if !self.field.is_empty() && self.field != "." {
            write!(f, ", field `{}`", self.field)?;
        }
        write!(f, ": {}", self.message)
    }
}

/// Parses `text` as `T`, keeping the line and field of the first error.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, SchemaError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let field = e.path().to_string();
        schema_error(e.into_inner(), field)
    })?;
    de.end().map_err(|e| schema_error(e, String::new()))?;
    Ok(value)
}

fn schema_error(e: serde_json::Error, field: String) -> SchemaError {
    let message = e.to_string();
    // serde_json appends " at line L column C"; the position is kept separately.
    let message = match message.rfind(" at line ") {
        Some(at) => message[..at].to_string(),
        None => message,
    };
    SchemaError {
        line: e.line(),
        column: e.column(),
        field,
        message,
    }
}

#[derive(Deserialize)]
struct Header {
    version: u32,
    model: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document<P> {
    version: u32,
    model: String,
    n: usize,
    m: usize,
    cost_params: P,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    strategies: Option<Vec<Vec<Vec<usize>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    network: Option<NetworkDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    nodes: usize,
    edges: Vec<(usize, usize)>,
    od_pairs: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TabularDoc {
    table: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepDoc {
    breaks: Vec<Vec<usize>>,
    jumps: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolynomialDoc {
    degree: usize,
    coefficients: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CostSharingDoc {
    fixed: Vec<f64>,
}

impl From<TabularDoc> for CostModel<f64> {
    fn from(d: TabularDoc) -> Self {
        CostModel::Tabular(TabularCosts { table: d.table })
    }
}

impl From<StepDoc> for CostModel<f64> {
    fn from(d: StepDoc) -> Self {
        CostModel::StepFunction(StepFunctionCosts {
            breaks: d.breaks,
            jumps: d.jumps,
        })
    }
}

impl From<PolynomialDoc> for CostModel<f64> {
    fn from(d: PolynomialDoc) -> Self {
        CostModel::Polynomial(PolynomialCosts {
            degree: d.degree,
            coefficients: d.coefficients,
        })
    }
}

impl From<CostSharingDoc> for CostModel<f64> {
    fn from(d: CostSharingDoc) -> Self {
        CostModel::CostSharing(CostSharingCosts { fixed: d.fixed })
    }
}

fn game_violation(message: String) -> InstanceError {
    InstanceError::Invalid(vec![Violation::new(brdlab_core::Subject::Game, message)])
}

fn build<P: DeserializeOwned + Into<CostModel<f64>>>(text: &str) -> Result<Game64, InstanceError> {
    let doc: Document<P> = parse_json(text).map_err(InstanceError::Schema)?;
    let space = match (doc.strategies, doc.network) {
        (Some(sets), None) => StrategySpace::Explicit(
            sets.into_iter()
                .map(|set| set.into_iter().map(Strategy::new).collect())
                .collect(),
        ),
        (None, Some(net)) => {
            if net.edges.len() != doc.m {
                return Err(game_violation(format!(
                    "m = {} but the network has {} edges",
                    doc.m,
                    net.edges.len()
                )));
            }
            StrategySpace::Network(NetworkSpec {
                nodes: net.nodes,
                edges: net
                    .edges
                    .into_iter()
                    .map(|(tail, head)| Edge { tail, head })
                    .collect(),
                od_pairs: net.od_pairs,
            })
        }
        (Some(_), Some(_)) => {
            return Err(game_violation(
                "give either `strategies` or `network`, not both".into(),
            ))
        }
        (None, None) => return Err(game_violation("missing `strategies` or `network`".into())),
    };
    if space.players() != doc.n {
        return Err(game_violation(format!(
            "n = {} but {} players are described",
            doc.n,
            space.players()
        )));
    }
    Game64::new(doc.m, space, doc.cost_params.into()).map_err(|e| match e {
        brdlab_core::Error::InvalidGame(v) => InstanceError::Invalid(v),
        other => game_violation(other.to_string()),
    })
}

/// Parses and validates an instance document.
pub fn parse_instance(text: &str) -> Result<Game64, InstanceError> {
    let header: Header = parse_json(text).map_err(InstanceError::Schema)?;
    if header.version != FORMAT_VERSION {
        return Err(InstanceError::Version {
            found: header.version,
        });
    }
    let kind: ModelKind = header
        .model
        .parse()
        .map_err(|_| InstanceError::UnknownModel(header.model.clone()))?;
    match kind {
        ModelKind::Tabular => build::<TabularDoc>(text),
        ModelKind::StepFunction => build::<StepDoc>(text),
        ModelKind::Polynomial => build::<PolynomialDoc>(text),
        ModelKind::CostSharing => build::<CostSharingDoc>(text),
    }
}

pub fn load_instance(path: &Path) -> Result<Game64, InstanceError> {
    let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_instance(&text)
}

fn document<P: Serialize>(game: &Game64, cost_params: P) -> String {
    let (strategies, network) = match game.strategy_space() {
        StrategySpace::Explicit(sets) => (
            Some(
                sets.iter()
                    .map(|set| set.iter().map(|s| s.resources().to_vec()).collect())
                    .collect(),
            ),
            None,
        ),
        StrategySpace::Network(net) => (
            None,
            Some(NetworkDoc {
                nodes: net.nodes,
                edges: net.edges.iter().map(|e| (e.tail, e.head)).collect(),
                od_pairs: net.od_pairs.clone(),
            }),
        ),
    };
    let doc = Document {
        version: FORMAT_VERSION,
        model: game.kind().to_string(),
        n: game.players(),
        m: game.resources(),
        cost_params,
        strategies,
        network,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("instance documents serialize");
    text.push('\n');
    text
}

pub fn instance_to_string(game: &Game64) -> String {
    match game.costs() {
        CostModel::Tabular(t) => document(
            game,
            TabularDoc {
                table: t.table.clone(),
            },
        ),
        CostModel::StepFunction(s) => document(
            game,
            StepDoc {
                breaks: s.breaks.clone(),
                jumps: s.jumps.clone(),
            },
        ),
        CostModel::Polynomial(p) => document(
            game,
            PolynomialDoc {
                degree: p.degree,
                coefficients: p.coefficients.clone(),
            },
        ),
        CostModel::CostSharing(c) => document(
            game,
            CostSharingDoc {
                fixed: c.fixed.clone(),
            },
        ),
    }
}

pub fn save_instance(game: &Game64, path: &Path) -> Result<(), InstanceError> {
    std::fs::write(path, instance_to_string(game)).map_err(|source| InstanceError::Io {
        path: path.to_path_buf(),
        source,
    })
}
