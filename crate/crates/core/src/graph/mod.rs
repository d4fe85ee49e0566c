//! Nodal connectivity multigraph `G_{m,n}` and the counts read off it.
//!
//! Vertices are the lattice points `V_{m,n}` where both checkerboard factors
//! vanish, plus one anchor vertex (id `0`) standing for the whole boundary.
//! Every shaded cell contributes zero, one or two edges. Contracting the
//! boundary to the anchor turns the triangle into a sphere, so Euler's formula
//! gives `nu = E - |V| + c` with `|V|` excluding the anchor.

mod cells;
pub mod export;
pub mod render;

use rayon::prelude::*;
use serde::Serialize;

pub use cells::{
    build_cells, v_points, vertex_count, BoundarySide, Cell, CellEdges, CellShape, Corner,
    CornerPos, Family, GraphEdge, GridPoint, Lattice,
};

use crate::error::{NodalError, Result};
use crate::modes::{reduce, ModePair};
use crate::recursion::{Method, NodalSummary};
use crate::unionfind::UnionFind;

/// Below this many intervals the cell scan runs on the calling thread.
const PARALLEL_INTERVALS: usize = 256;

/// Diagnostics gathered while scanning the cells.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BuildStats {
    pub cells: usize,
    pub shaded: usize,
    pub four_corner: usize,
    /// Four-corner centres whose sign needed multi-precision evaluation.
    pub extended: usize,
    /// Shaded boundary rectangles without any `V` point.
    pub empty_boundary: usize,
}

impl BuildStats {
    fn merge(mut self, other: BuildStats) -> BuildStats {
        self.cells += other.cells;
        self.shaded += other.shaded;
        self.four_corner += other.four_corner;
        self.extended += other.extended;
        self.empty_boundary += other.empty_boundary;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NodalGraph {
    pub mode: ModePair,
    /// `V_{m,n}`; vertex id `i + 1` is `vertices[i]`.
    pub vertices: Vec<GridPoint>,
    /// In cell scan order; parallel edges and anchor self-pairs are kept.
    pub edges: Vec<GraphEdge>,
    pub stats: BuildStats,
}

impl NodalGraph {
    pub const ANCHOR: usize = 0;

    /// Number of graph vertices including the anchor.
    pub fn node_count(&self) -> usize {
        self.vertices.len() + 1
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count()];
        for e in &self.edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.node_count()];
        for e in &self.edges {
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        deg
    }
}

fn scan_column(lattice: &Lattice, a: usize) -> Result<(Vec<GraphEdge>, BuildStats)> {
    let mut edges = Vec::new();
    let mut stats = BuildStats::default();
    for b in 0..=a {
        let cell = lattice.cell(a, b);
        stats.cells += 1;
        if !cell.shaded {
            continue;
        }
        stats.shaded += 1;
        let out = lattice.edges_for_cell(&cell)?;
        stats.four_corner += out.four_corner as usize;
        stats.extended += out.extended as usize;
        stats.empty_boundary += out.empty_boundary as usize;
        edges.extend(out.edges);
    }
    Ok((edges, stats))
}

/// Builds `G_{m,n}` for a non-tiling mode.
pub fn build_graph(mode: ModePair) -> Result<NodalGraph> {
    let lattice = Lattice::new(mode)?;
    let k = lattice.intervals();
    let columns: Vec<(Vec<GraphEdge>, BuildStats)> = if k >= PARALLEL_INTERVALS {
        (0..k)
            .into_par_iter()
            .map(|a| scan_column(&lattice, a))
            .collect::<Result<_>>()?
    } else {
        (0..k)
            .map(|a| scan_column(&lattice, a))
            .collect::<Result<_>>()?
    };
    let mut edges = Vec::new();
    let mut stats = BuildStats::default();
    for (e, s) in columns {
        edges.extend(e);
        stats = stats.merge(s);
    }
    let graph = NodalGraph {
        mode,
        vertices: v_points(mode)?,
        edges,
        stats,
    };
    check_degrees(&graph)?;
    Ok(graph)
}

/// A nodal line passes through each `V` point exactly once, so every vertex
/// other than the anchor has degree two. Anything else would be a crossing.
fn check_degrees(graph: &NodalGraph) -> Result<()> {
    for (id, d) in graph.degrees().into_iter().enumerate().skip(1) {
        if d != 2 {
            return Err(NodalError::CellAssertion {
                m: graph.mode.m(),
                n: graph.mode.n(),
                cell: usize::MAX,
                reason: format!("vertex {id} has degree {d}"),
            });
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GraphCounts {
    pub nu: u64,
    pub eta: u64,
    pub loops: u64,
    pub edge_count: u64,
    /// Components including the one holding the anchor.
    pub component_count: u64,
}

pub fn counts_from_graph(g: &NodalGraph) -> GraphCounts {
    let nodes = g.node_count();
    let mut uf = UnionFind::new(nodes);
    for e in &g.edges {
        uf.union(e.u, e.v);
    }
    let anchor_root = uf.find(NodalGraph::ANCHOR);
    let mut components = 0u64;
    let mut anchor_nodes = 0u64;
    for x in 0..nodes {
        let r = uf.find(x);
        if r == x {
            components += 1;
        }
        if r == anchor_root {
            anchor_nodes += 1;
        }
    }
    let anchor_edges = g
        .edges
        .iter()
        .filter(|e| uf.find(e.u) == anchor_root)
        .count() as u64;
    let e = g.edges.len() as u64;
    let v = g.vertices.len() as u64;
    GraphCounts {
        nu: e + components - v,
        eta: 2 * (anchor_edges + 1 - anchor_nodes),
        loops: components - 1,
        edge_count: e,
        component_count: components,
    }
}

/// Nodal counts of any mode via the graph of its reduced pattern.
pub fn graph_summary(mode: ModePair) -> Result<NodalSummary> {
    let red = reduce(mode);
    let counts = counts_from_graph(&build_graph(red.reduced)?);
    Ok(NodalSummary {
        mode,
        reduced: red.reduced,
        nu: red.tiles * counts.nu,
        eta: counts.eta,
        loops: counts.loops,
        tiles: red.tiles,
        method: Method::Graph,
    })
}
