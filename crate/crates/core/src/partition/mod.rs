//! Interaction graph of a program and its partition into `k` subgraphs.

mod greedy;
mod spectral;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qp::QuadraticProgram;

pub use greedy::partition_greedy;
pub use spectral::{partition_spectral, partition_spectral_with, SpectralOptions, DEFAULT_DENSE_LIMIT};

/// Undirected weighted graph with `|Q_ij|` edge weights, stored as CSR.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionGraph {
    offsets: Vec<usize>,
    adjacency: Vec<(usize, f64)>,
}

impl InteractionGraph {
    /// Builds from undirected edges; weights of repeated pairs are summed.
    pub fn from_edges(node_count: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); node_count];
        for &(i, j, w) in edges {
            if i >= node_count || j >= node_count {
                return Err(Error::IndexOutOfRange {
                    index: i.max(j),
                    len: node_count,
                });
            }
            if i == j {
                return Err(Error::InvalidParameter(format!("self-loop on node {i}")));
            }
            rows[i].push((j, w));
            rows[j].push((i, w));
        }
        let mut offsets = vec![0];
        let mut adjacency = Vec::new();
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (j, w) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += w,
                    _ => merged.push((j, w)),
                }
            }
            merged.retain(|e| e.1 != 0.0);
            adjacency.extend(merged);
            offsets.push(adjacency.len());
        }
        Ok(InteractionGraph { offsets, adjacency })
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn weighted_degree(&self, i: usize) -> f64 {
        self.neighbors(i).iter().map(|e| e.1).sum()
    }

    pub fn total_weight(&self) -> f64 {
        (0..self.node_count())
            .flat_map(|i| self.neighbors(i).iter().filter(move |e| e.0 > i))
            .map(|e| e.1)
            .sum()
    }

    /// Each undirected edge once, as `(i, j, w)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.node_count()).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .filter(move |e| e.0 > i)
                .map(move |&(j, w)| (i, j, w))
        })
    }
}

/// Graph of a program: an edge for every stored off-diagonal coefficient,
/// weighted by its magnitude.
pub fn build_graph(qp: &QuadraticProgram) -> InteractionGraph {
    let mut offsets = Vec::with_capacity(qp.n() + 1);
    offsets.push(0);
    let mut adjacency = Vec::with_capacity(2 * qp.num_terms());
    for i in 0..qp.n() {
        adjacency.extend(qp.neighbors(i).iter().map(|&(j, v)| (j, v.abs())));
        offsets.push(adjacency.len());
    }
    InteractionGraph { offsets, adjacency }
}

/// Node-to-part assignment with materialized, sorted member lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    assignment: Vec<usize>,
    members: Vec<Vec<usize>>,
}

impl Partition {
    /// Validates that labels are dense in `[0, k)` with no empty part.
    pub fn from_assignment(assignment: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("partition needs at least one part".into()));
        }
        let mut members = vec![Vec::new(); k];
        for (node, &part) in assignment.iter().enumerate() {
            if part >= k {
                return Err(Error::InvalidParameter(format!(
                    "node {node} assigned to part {part} but k = {k}"
                )));
            }
            members[part].push(node);
        }
        if let Some(empty) = members.iter().position(Vec::is_empty) {
            return Err(Error::InvalidParameter(format!("part {empty} is empty")));
        }
        Ok(Partition { assignment, members })
    }

    pub fn single(n: usize) -> Self {
        Partition {
            assignment: vec![0; n],
            members: vec![(0..n).collect()],
        }
    }

    /// Relabels parts in order of their smallest member.
    pub(crate) fn canonical(labels: &[usize], k: usize) -> Result<Self> {
        let mut remap = vec![usize::MAX; k];
        let mut next = 0;
        let mut assignment = Vec::with_capacity(labels.len());
        for &l in labels {
            if remap[l] == usize::MAX {
                remap[l] = next;
                next += 1;
            }
            assignment.push(remap[l]);
        }
        Partition::from_assignment(assignment, k)
    }

    pub fn k(&self) -> usize {
        self.members.len()
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    #[inline]
    pub fn part_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn members(&self, part: usize) -> &[usize] {
        &self.members[part]
    }

    pub fn parts(&self) -> impl Iterator<Item = &[usize]> {
        self.members.iter().map(Vec::as_slice)
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    /// Position of each node inside its part's member list.
    pub fn local_indices(&self) -> Vec<usize> {
        let mut local = vec![0; self.n()];
        for m in &self.members {
            for (pos, &node) in m.iter().enumerate() {
                local[node] = pos;
            }
        }
        local
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;

    fn try_from(assignment: Vec<usize>) -> Result<Self> {
        let k = assignment.iter().max().map_or(0, |m| m + 1);
        Partition::from_assignment(assignment, k)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.assignment
    }
}

/// Total weight of edges whose endpoints lie in different parts.
pub fn cut_weight(g: &InteractionGraph, p: &Partition) -> f64 {
    g.edges()
        .filter(|&(i, j, _)| p.part_of(i) != p.part_of(j))
        .map(|e| e.2)
        .sum()
}

pub(crate) fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "number of parts k = {k} must lie in [1, {n}]"
        )));
    }
    Ok(())
}


#[cfg(test)]
mod tests {
    use super::test_graphs::*;
    use super::*;

    #[test]
    fn graph_uses_coefficient_magnitudes() {
        let qp = QuadraticProgram::new(2, vec![0.0; 2], vec![(0, 1, -3.0)], vec![]).unwrap();
        let g = build_graph(&qp);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.neighbors(0), &[(1, 3.0)]);
        assert_eq!(g.neighbors(1), &[(0, 3.0)]);
    }

    #[test]
    fn empty_program_gives_isolated_nodes() {
        let qp = QuadraticProgram::new(5, vec![1.0; 5], vec![], vec![]).unwrap();
        let g = build_graph(&qp);
        assert_eq!(g.node_count(), 5);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn partition_rejects_empty_parts_and_bad_labels() {
        assert!(Partition::from_assignment(vec![0, 0, 2], 3).is_err());
        assert!(Partition::from_assignment(vec![0, 3], 2).is_err());
        assert!(Partition::from_assignment(vec![], 0).is_err());
        let p = Partition::from_assignment(vec![1, 0, 1], 2).unwrap();
        assert_eq!(p.members(1), &[0, 2]);
        assert_eq!(p.local_indices(), vec![0, 0, 1]);
    }

    #[test]
    fn partition_json_is_label_array() {
        let p = Partition::from_assignment(vec![0, 1, 1, 0], 2).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, "[0,1,1,0]");
        let back: Partition = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<Partition>("[0,2]").is_err());
    }

    #[test]
    fn cut_weight_examples() {
        let g = two_cliques(4);
        assert_eq!(cut_weight(&g, &Partition::single(8)), 0.0);
        let cliques = Partition::from_assignment(vec![0, 0, 0, 0, 1, 1, 1, 1], 2).unwrap();
        assert_eq!(cut_weight(&g, &cliques), 1.0);
        let singletons = Partition::from_assignment((0..8).collect(), 8).unwrap();
        assert_eq!(cut_weight(&g, &singletons), g.total_weight());
        assert_eq!(brute_min_balanced_cut(&g), 1.0);
    }
}
