//! JSON algorithm files.
//!
//! ```json
//! {"encoding": "discrete", "entry": 0,
//!  "vertices": [{"id": 0, "component": "choose_nich", "params": {}, "loop_count": 1}],
//!  "edges": [[0, 1]]}
//! ```
//!
//! Numbers are written as shortest round-trip decimals, so every `f64`
//! survives a write/read cycle bit-exactly.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::catalog::{Component, Encoding};
use crate::graph::{AlgorithmGraph, Vertex};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormatError {
    #[error("malformed JSON at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("schema error at `{field}`: {reason}")]
    Schema { field: String, reason: String },
}

impl FormatError {
    fn schema(field: impl Into<String>, reason: impl Into<String>) -> Self {
        FormatError::Schema { field: field.into(), reason: reason.into() }
    }

    /// The offending field for schema errors.
    pub fn field(&self) -> Option<&str> {
        match self {
            FormatError::Schema { field, .. } => Some(field),
            FormatError::Parse { .. } => None,
        }
    }
}

#[derive(Serialize)]
struct VertexFile<'a> {
    id: usize,
    component: Component,
    params: &'a BTreeMap<String, f64>,
    loop_count: u32,
}

#[derive(Serialize)]
struct GraphFile<'a> {
    encoding: Encoding,
    entry: usize,
    vertices: Vec<VertexFile<'a>>,
    edges: Vec<[usize; 2]>,
}

pub fn to_json(graph: &AlgorithmGraph) -> String {
    let mut g = graph.clone();
    g.normalize();
    let file = GraphFile {
        encoding: g.encoding,
        entry: g.entry,
        vertices: g
            .vertices
            .iter()
            .map(|v| VertexFile {
                id: v.id,
                component: v.component,
                params: &v.params,
                loop_count: v.loop_count,
            })
            .collect(),
        edges: g.edges.iter().map(|&(a, b)| [a, b]).collect(),
    };
    serde_json::to_string_pretty(&file).expect("graph serializes")
}

pub fn serialize(graph: &AlgorithmGraph) -> Vec<u8> {
    to_json(graph).into_bytes()
}

pub fn deserialize(bytes: &[u8]) -> Result<AlgorithmGraph, FormatError> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| FormatError::Parse {
        offset: byte_offset(bytes, e.line(), e.column()),
        message: e.to_string(),
    })?;
    let top = value.as_object().ok_or_else(|| FormatError::schema("$", "expected an object"))?;
    exact_keys(top, &["encoding", "entry", "vertices", "edges"], "")?;

    let encoding = top["encoding"]
        .as_str()
        .ok_or_else(|| FormatError::schema("encoding", "expected a string"))?
        .parse::<Encoding>()
        .map_err(|e| FormatError::schema("encoding", e.to_string()))?;
    let entry = as_index(&top["entry"], "entry")?;

    let vertices = top["vertices"]
        .as_array()
        .ok_or_else(|| FormatError::schema("vertices", "expected an array"))?
        .iter()
        .enumerate()
        .map(|(i, v)| parse_vertex(v, i))
        .collect::<Result<Vec<_>, _>>()?;

    let edges = top["edges"]
        .as_array()
        .ok_or_else(|| FormatError::schema("edges", "expected an array"))?
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let field = format!("edges[{i}]");
            match e.as_array().map(|a| a.as_slice()) {
                Some([a, b]) => Ok((as_index(a, &field)?, as_index(b, &field)?)),
                _ => Err(FormatError::schema(field, "expected [from, to]")),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(AlgorithmGraph { encoding, entry, vertices, edges })
}

fn parse_vertex(v: &Value, i: usize) -> Result<Vertex, FormatError> {
    let prefix = format!("vertices[{i}].");
    let obj = v
        .as_object()
        .ok_or_else(|| FormatError::schema(format!("vertices[{i}]"), "expected an object"))?;
    exact_keys(obj, &["id", "component", "params", "loop_count"], &prefix)?;
    let id = as_index(&obj["id"], &format!("{prefix}id"))?;
    let component = obj["component"]
        .as_str()
        .ok_or_else(|| FormatError::schema(format!("{prefix}component"), "expected a string"))?
        .parse::<Component>()
        .map_err(|e| FormatError::schema(format!("{prefix}component"), e.to_string()))?;
    let params = obj["params"]
        .as_object()
        .ok_or_else(|| FormatError::schema(format!("{prefix}params"), "expected an object"))?
        .iter()
        .map(|(k, x)| {
            x.as_f64()
                .map(|f| (k.clone(), f))
                .ok_or_else(|| FormatError::schema(format!("{prefix}params.{k}"), "expected a number"))
        })
        .collect::<Result<BTreeMap<_, _>, _>>()?;
    let loop_count = as_index(&obj["loop_count"], &format!("{prefix}loop_count"))?;
    let loop_count = u32::try_from(loop_count)
        .map_err(|_| FormatError::schema(format!("{prefix}loop_count"), "too large"))?;
    Ok(Vertex { id, component, params, loop_count })
}

fn exact_keys(obj: &Map<String, Value>, keys: &[&str], prefix: &str) -> Result<(), FormatError> {
    for k in keys {
        if !obj.contains_key(*k) {
            return Err(FormatError::schema(format!("{prefix}{k}"), "missing field"));
        }
    }
    if let Some(extra) = obj.keys().find(|k| !keys.contains(&k.as_str())) {
        return Err(FormatError::schema(format!("{prefix}{extra}"), "unknown field"));
    }
    Ok(())
}

fn as_index(v: &Value, field: &str) -> Result<usize, FormatError> {
    v.as_u64()
        .and_then(|x| usize::try_from(x).ok())
        .ok_or_else(|| FormatError::schema(field, "expected a non-negative integer"))
}

// serde_json reports 1-based line and column; the column counts bytes.
fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = bytes
        .split_inclusive(|&b| b == b'\n')
        .take(line - 1)
        .map(|l| l.len())
        .sum();
    (line_start + column.saturating_sub(1)).min(bytes.len())
}
