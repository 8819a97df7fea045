//! Benchmark instances: Gaussian-blob and Gset MaxCut graphs, and the
//! antenna placement problem.

mod app;
mod maxcut;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use app::{app_to_qubo, generate_app, scale_radius, AppInstance};
pub use maxcut::{cut_value, generate_blob_graph, maxcut_to_qubo, parse_gset, write_gset};

/// Undirected weighted graph as an edge list with `i < j` and no duplicates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile")]
pub struct WeightedGraph {
    node_count: usize,
    edges: Vec<(usize, usize, f64)>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    node_count: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl TryFrom<GraphFile> for WeightedGraph {
    type Error = Error;

    fn try_from(f: GraphFile) -> Result<Self> {
        WeightedGraph::new(f.node_count, f.edges)
    }
}

impl From<WeightedGraph> for GraphFile {
    fn from(g: WeightedGraph) -> Self {
        GraphFile {
            node_count: g.node_count,
            edges: g.edges,
        }
    }
}

impl WeightedGraph {
    /// Edges are normalized to `i < j`; self-loops, duplicates (in either
    /// orientation) and non-finite weights are rejected.
    pub fn new(node_count: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        let mut out = Vec::with_capacity(edges.len());
        for (i, j, w) in edges {
            for v in [i, j] {
                if v >= node_count {
                    return Err(Error::IndexOutOfRange { index: v, len: node_count });
                }
            }
            if i == j {
                return Err(Error::InvalidProblem(format!("self-loop at node {i}")));
            }
            if !w.is_finite() {
                return Err(Error::InvalidProblem(format!("non-finite weight on edge ({i}, {j})")));
            }
            let (a, b) = (i.min(j), i.max(j));
            if !seen.insert((a, b)) {
                return Err(Error::InvalidProblem(format!("duplicate edge ({a}, {b})")));
            }
            out.push((a, b, w));
        }
        Ok(WeightedGraph {
            node_count,
            edges: out,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }
}
