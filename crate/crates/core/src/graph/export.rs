//! DOT and JSON serialisation of a [`NodalGraph`].
//!
//! Vertex coordinates are exact: `(tx, ty)` over the denominator `mn`, in
//! units of `pi`. The anchor has no position and is written with `null`
//! coordinates in JSON.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use super::NodalGraph;
use crate::error::{NodalError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphFormat {
    Dot,
    Json,
}

impl FromStr for GraphFormat {
    type Err = NodalError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dot" => Ok(GraphFormat::Dot),
            "json" => Ok(GraphFormat::Json),
            _ => Err(NodalError::UnknownFormat(s.to_string())),
        }
    }
}

#[derive(Serialize)]
struct JsonNode {
    id: usize,
    tx: Option<u64>,
    ty: Option<u64>,
    anchor: bool,
}

#[derive(Serialize)]
struct JsonEdge {
    u: usize,
    v: usize,
    cell: usize,
}

#[derive(Serialize)]
struct JsonGraph {
    m: u64,
    n: u64,
    denominator: u64,
    nodes: Vec<JsonNode>,
    edges: Vec<JsonEdge>,
}

pub fn export_graph(g: &NodalGraph, format: GraphFormat) -> Result<Vec<u8>> {
    match format {
        GraphFormat::Dot => Ok(to_dot(g).into_bytes()),
        GraphFormat::Json => {
            let mut out = serde_json::to_vec_pretty(&json_view(g))?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

fn json_view(g: &NodalGraph) -> JsonGraph {
    let mut nodes = Vec::with_capacity(g.node_count());
    nodes.push(JsonNode {
        id: NodalGraph::ANCHOR,
        tx: None,
        ty: None,
        anchor: true,
    });
    nodes.extend(g.vertices.iter().enumerate().map(|(i, p)| JsonNode {
        id: i + 1,
        tx: Some(p.tx),
        ty: Some(p.ty),
        anchor: false,
    }));
    JsonGraph {
        m: g.mode.m(),
        n: g.mode.n(),
        denominator: g.mode.m() * g.mode.n(),
        nodes,
        edges: g
            .edges
            .iter()
            .map(|e| JsonEdge {
                u: e.u,
                v: e.v,
                cell: e.cell,
            })
            .collect(),
    }
}

fn to_dot(g: &NodalGraph) -> String {
    let mut s = String::new();
    let (m, n) = (g.mode.m(), g.mode.n());
    // Writing into a String cannot fail.
    let _ = writeln!(s, "graph nodal_{m}_{n} {{");
    let _ = writeln!(s, "  // coordinates are pi * (tx, ty) / {}", m * n);
    let _ = writeln!(s, "  0 [label=\"anchor\", shape=box, anchor=true];");
    for (i, p) in g.vertices.iter().enumerate() {
        let _ = writeln!(
            s,
            "  {} [label=\"({}, {})\", tx={}, ty={}, anchor=false];",
            i + 1,
            p.tx,
            p.ty,
            p.tx,
            p.ty
        );
    }
    for e in &g.edges {
        let _ = writeln!(s, "  {} -- {} [cell={}];", e.u, e.v, e.cell);
    }
    s.push_str("}\n");
    s
}
