//! Graph description files.
//!
//! ```json
//! {
//!   "vertices": [
//!     {"id": 0, "kind": "input"},
//!     {"id": 1, "kind": "erosion", "params": {"se": ["010", "1O1", "010"]}},
//!     {"id": 2, "kind": "output"}
//!   ],
//!   "edges": [[0, 1], [1, 2]]
//! }
//! ```
//!
//! Structuring elements and interval extremities are grids in the
//! [`crate::lattice::text`] form; the grid's non-`.` cells are the declared
//! window. Vertex ids are arbitrary distinct integers.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::lattice::text::{parse_set_rows, set_rows};
use crate::lattice::{Interval, PixelSet, Window};

use super::{MCGraph, McgError, Operator, StructOp, VertexKind};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    vertices: Vec<VertexEntry>,
    edges: Vec<(u64, u64)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexEntry {
    id: u64,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<Value>,
}

/// A parsed graph file. `ids[v]` is the file id of vertex `v`.
#[derive(Clone, Debug)]
pub struct GraphDocument {
    pub graph: MCGraph,
    pub ids: Vec<u64>,
}

/// Grid rows for `set` over `window`.
pub fn grid(set: &PixelSet, window: &Window) -> Vec<String> {
    set_rows(set, window)
}

pub fn parse_grid(rows: &[String]) -> Result<(Window, PixelSet), McgError> {
    Ok(parse_set_rows(rows, 0)?)
}

pub fn interval_grids(i: &Interval) -> (Vec<String>, Vec<String>) {
    (grid(i.left(), i.window()), grid(i.right(), i.window()))
}

pub fn parse_interval_grids(a: &[String], b: &[String]) -> Result<Interval, McgError> {
    let (wa, left) = parse_grid(a)?;
    let (wb, right) = parse_grid(b)?;
    if wa != wb {
        return Err(McgError::Format(
            "interval extremities are drawn on different windows".into(),
        ));
    }
    Ok(Interval::new(left, right, wa)?)
}

fn params_of(op: &Operator) -> Option<Value> {
    match op {
        Operator::Identity | Operator::Complement | Operator::ConstEmpty => None,
        Operator::Erosion(s)
        | Operator::Dilation(s)
        | Operator::Opening(s)
        | Operator::Closing(s)
        | Operator::Asf(s) => Some(json!({ "se": grid(s.se(), s.window()) })),
        Operator::SupGen(i) | Operator::InfGen(i) => {
            let (a, b) = interval_grids(i);
            Some(json!({ "a": a, "b": b }))
        }
    }
}

fn rows_field(params: &Value, key: &str) -> Result<Vec<String>, String> {
    let v = params
        .get(key)
        .ok_or_else(|| format!("missing params.{key}"))?;
    serde_json::from_value(v.clone()).map_err(|e| format!("params.{key}: {e}"))
}

fn parse_vertex(e: &VertexEntry) -> Result<VertexKind, String> {
    let no_params = |k: VertexKind| -> Result<VertexKind, String> {
        match &e.params {
            None | Some(Value::Null) => Ok(k),
            Some(Value::Object(m)) if m.is_empty() => Ok(k),
            Some(_) => Err(format!("kind '{}' takes no params", e.kind)),
        }
    };
    let params = || e.params.as_ref().ok_or_else(|| format!("kind '{}' requires params", e.kind));
    let se = || -> Result<StructOp, String> {
        let rows = rows_field(params()?, "se")?;
        let (w, s) = parse_set_rows(&rows, 0).map_err(|e| format!("params.se: {e}"))?;
        StructOp::new(s, w).map_err(|e| e.to_string())
    };
    let interval = || -> Result<Interval, String> {
        let p = params()?;
        parse_interval_grids(&rows_field(p, "a")?, &rows_field(p, "b")?).map_err(|e| e.to_string())
    };
    Ok(match e.kind.as_str() {
        "input" => no_params(VertexKind::Input)?,
        "output" => no_params(VertexKind::Output)?,
        "sup" => no_params(VertexKind::Sup)?,
        "inf" => no_params(VertexKind::Inf)?,
        "identity" => no_params(Operator::Identity.into())?,
        "complement" => no_params(Operator::Complement.into())?,
        "const_empty" => no_params(Operator::ConstEmpty.into())?,
        "erosion" => Operator::Erosion(se()?).into(),
        "dilation" => Operator::Dilation(se()?).into(),
        "opening" => Operator::Opening(se()?).into(),
        "closing" => Operator::Closing(se()?).into(),
        "asf" => Operator::Asf(se()?).into(),
        "supgen" => Operator::SupGen(interval()?).into(),
        "infgen" => Operator::InfGen(interval()?).into(),
        other => return Err(format!("unknown vertex kind '{other}'")),
    })
}

pub fn graph_from_json(text: &str) -> Result<GraphDocument, McgError> {
    let file: GraphFile =
        serde_json::from_str(text).map_err(|e| McgError::Format(e.to_string()))?;
    let mut index = HashMap::new();
    let mut graph = MCGraph::new();
    let mut ids = Vec::with_capacity(file.vertices.len());
    for (pos, e) in file.vertices.iter().enumerate() {
        if index.insert(e.id, pos).is_some() {
            return Err(McgError::Format(format!("duplicate vertex id {}", e.id)));
        }
        let kind = parse_vertex(e)
            .map_err(|m| McgError::Format(format!("/vertices/{pos} (id {}): {m}", e.id)))?;
        graph.add_vertex(kind);
        ids.push(e.id);
    }
    for (k, (a, b)) in file.edges.iter().enumerate() {
        let look = |id: &u64| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| McgError::Format(format!("/edges/{k}: unknown vertex id {id}")))
        };
        graph.add_edge(look(a)?, look(b)?);
    }
    Ok(GraphDocument { graph, ids })
}

/// Pretty JSON, using vertex indices as ids.
pub fn graph_to_json(g: &MCGraph) -> String {
    let file = GraphFile {
        vertices: g
            .vertices()
            .iter()
            .enumerate()
            .map(|(i, k)| VertexEntry {
                id: i as u64,
                kind: k.name().to_string(),
                params: match k {
                    VertexKind::Operator(op) => params_of(op),
                    _ => None,
                },
            })
            .collect(),
        edges: g.edges().iter().map(|&(a, b)| (a as u64, b as u64)).collect(),
    };
    serde_json::to_string_pretty(&file).expect("graph serializes")
}
