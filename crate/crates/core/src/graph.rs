//! Undirected graphs, canonical orientation and incidence matrices.

use std::collections::{BTreeSet, VecDeque};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;

/// A directed edge of an oriented graph, `tail -> head`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
}

/// Simple undirected graph on vertices `0..n`.
///
/// Edges are kept both as a sorted list of `(min, max)` pairs and as
/// adjacency sets. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<BTreeSet<usize>>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicates (in either
    /// direction) and out-of-range vertices.
    pub fn new(n: usize, edge_list: &[(usize, usize)]) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewVertices(n));
        }
        let mut adjacency = vec![BTreeSet::new(); n];
        let mut edges = Vec::with_capacity(edge_list.len());
        for &(i, j) in edge_list {
            for v in [i, j] {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            if !adjacency[i].insert(j) {
                return Err(Error::DuplicateEdge(i, j));
            }
            adjacency[j].insert(i);
            edges.push((i.min(j), i.max(j)));
        }
        edges.sort_unstable();
        Ok(Graph { n, edges, adjacency })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Undirected edges as `(min, max)` pairs in lexicographic order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n && self.adjacency[i].contains(&j)
    }

    pub fn neighbors(&self, i: usize) -> Result<&BTreeSet<usize>> {
        self.adjacency
            .get(i)
            .ok_or(Error::VertexOutOfRange { vertex: i, n: self.n })
    }

    pub fn degree(&self, i: usize) -> Result<usize> {
        self.neighbors(i).map(BTreeSet::len)
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.n
    }

    /// Canonical orientation: `tail = min`, `head = max`, edges sorted.
    pub fn orient(&self) -> OrientedGraph {
        OrientedGraph {
            base: self.clone(),
            edges: self
                .edges
                .iter()
                .map(|&(tail, head)| Edge { tail, head })
                .collect(),
        }
    }
}

/// A graph with one direction assigned to every edge. Edge `k` of the
/// orientation is row `k` of the incidence matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientedGraph {
    base: Graph,
    edges: Vec<Edge>,
}

impl OrientedGraph {
    pub fn graph(&self) -> &Graph {
        &self.base
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.base.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Re-orienting an already oriented graph yields the same orientation.
    pub fn orient(&self) -> OrientedGraph {
        self.base.orient()
    }

    pub fn incidence_matrix(&self) -> IncidenceMatrix {
        let mut h = DMatrix::zeros(self.edges.len(), self.base.n);
        for (k, e) in self.edges.iter().enumerate() {
            h[(k, e.tail)] = -1;
            h[(k, e.head)] = 1;
        }
        IncidenceMatrix(h)
    }
}

/// The `m x n` incidence matrix: `-1` at the tail, `+1` at the head.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix(DMatrix<i32>);

impl IncidenceMatrix {
    pub fn as_matrix(&self) -> &DMatrix<i32> {
        &self.0
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        self.0.map(f64::from)
    }

    /// `H ⊗ I_d`, mapping stacked positions to stacked edge vectors.
    pub fn kron_identity(&self, d: usize) -> DMatrix<f64> {
        linalg::kron_identity(&self.to_f64(), d)
    }

    /// `H · 1` in exact integer arithmetic.
    pub fn row_sums(&self) -> Vec<i32> {
        self.0.row_iter().map(|r| r.sum()).collect()
    }

    pub fn rank(&self, rel_tol: f64) -> usize {
        linalg::numeric_rank(&self.to_f64(), rel_tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::new(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn smallest_graph() {
        let g = Graph::new(2, &[(0, 1)]).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.orient().incidence_matrix().as_matrix(), &DMatrix::from_row_slice(1, 2, &[-1, 1]));
    }

    #[test]
    fn construction_errors() {
        assert_eq!(Graph::new(3, &[(1, 1)]), Err(Error::SelfLoop(1)));
        assert_eq!(Graph::new(3, &[(0, 1), (1, 0)]), Err(Error::DuplicateEdge(1, 0)));
        assert_eq!(
            Graph::new(3, &[(0, 3)]),
            Err(Error::VertexOutOfRange { vertex: 3, n: 3 })
        );
        assert_eq!(Graph::new(1, &[]), Err(Error::TooFewVertices(1)));
    }

    #[test]
    fn triangle_orientation_is_canonical() {
        let og = Graph::new(3, &[(2, 1), (1, 0), (2, 0)]).unwrap().orient();
        let pairs: Vec<_> = og.edges().iter().map(|e| (e.tail, e.head)).collect();
        assert_eq!(pairs, vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(og.orient(), og);
    }

    #[test]
    fn triangle_incidence() {
        let h = triangle().orient().incidence_matrix();
        assert_eq!(h.row_sums(), vec![0, 0, 0]);
        assert_eq!(h.rank(1e-8), 2);
    }

    #[test]
    fn neighbor_queries() {
        assert_eq!(triangle().neighbors(0).unwrap(), &BTreeSet::from([1, 2]));
        let path = Graph::new(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(path.neighbors(1).unwrap(), &BTreeSet::from([0, 2]));
        assert!(matches!(path.neighbors(5), Err(Error::VertexOutOfRange { .. })));
    }

    #[test]
    fn connectivity() {
        assert!(triangle().is_connected());
        assert!(!Graph::new(4, &[(0, 1), (2, 3)]).unwrap().is_connected());
    }
}
