//! Immutable undirected graphs on dense node ids.
//!
//! Node ids are `0..node_count`. Edges are stored once, normalised so that
//! `u < v`, in ascending lexicographic order; the position of an edge in that
//! order is its *edge id*. Adjacency is a CSR table whose neighbour lists are
//! sorted by node id and carry the edge id alongside each neighbour, so edge
//! masks can be applied during traversal without rebuilding the graph.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;

pub type NodeId = u32;
pub type EdgeId = u32;

/// An undirected edge, always stored with the smaller endpoint first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge(NodeId, NodeId);

impl Edge {
    /// Normalises the endpoint order. Self-loops are representable here but
    /// rejected by [`Graph::from_edges`].
    pub fn new(a: NodeId, b: NodeId) -> Self {
        if a <= b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn u(self) -> NodeId {
        self.0
    }

    pub fn v(self) -> NodeId {
        self.1
    }

    /// The endpoint opposite to `x`, or `None` if `x` is not an endpoint.
    pub fn other(self, x: NodeId) -> Option<NodeId> {
        if x == self.0 {
            Some(self.1)
        } else if x == self.1 {
            Some(self.0)
        } else {
            None
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.0, self.1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
    neighbors: Vec<NodeId>,
    neighbor_edges: Vec<EdgeId>,
}

impl Graph {
    /// Builds a graph from an arbitrary edge iterator. Endpoint order does not
    /// matter; self-loops, duplicates and out-of-range endpoints are errors.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut list = Vec::new();
        for (a, b) in edges {
            for x in [a, b] {
                if x as usize >= node_count {
                    return Err(GraphError::NodeOutOfRange { node: x as u64, node_count });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            list.push(Edge::new(a, b));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateEdge(w[0]));
        }
        Ok(Self::from_sorted_edges(node_count, list))
    }

    /// Assumes `edges` is sorted, duplicate-free, loop-free and in range.
    fn from_sorted_edges(node_count: usize, edges: Vec<Edge>) -> Self {
        assert!(edges.len() < EdgeId::MAX as usize, "edge ids must fit in u32");
        let mut degree = vec![0usize; node_count + 1];
        for e in &edges {
            degree[e.0 as usize] += 1;
            degree[e.1 as usize] += 1;
        }
        let mut offsets = vec![0usize; node_count + 1];
        for v in 0..node_count {
            offsets[v + 1] = offsets[v] + degree[v];
        }
        let mut cursor = offsets.clone();
        let mut neighbors = vec![0 as NodeId; 2 * edges.len()];
        let mut neighbor_edges = vec![0 as EdgeId; 2 * edges.len()];
        // Scanning edges in lexicographic order fills every list in ascending
        // neighbour order: for node v, edges (w, v) with w < v come first in
        // ascending w, then edges (v, w) in ascending w.
        for (id, e) in edges.iter().enumerate() {
            let (a, b) = (e.0 as usize, e.1 as usize);
            neighbors[cursor[a]] = e.1;
            neighbor_edges[cursor[a]] = id as EdgeId;
            cursor[a] += 1;
            neighbors[cursor[b]] = e.0;
            neighbor_edges[cursor[b]] = id as EdgeId;
            cursor[b] += 1;
        }
        Graph { node_count, edges, offsets, neighbors, neighbor_edges }
    }

    pub fn empty(node_count: usize) -> Self {
        Self::from_sorted_edges(node_count, Vec::new())
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in ascending order; the index of an edge is its id.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> Edge {
        self.edges[id as usize]
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        let v = v as usize;
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Neighbours of `v` paired with the id of the connecting edge.
    pub fn incident(&self, v: NodeId) -> impl Iterator<Item = (NodeId, EdgeId)> + '_ {
        let v = v as usize;
        let range = self.offsets[v]..self.offsets[v + 1];
        self.neighbors[range.clone()].iter().copied().zip(self.neighbor_edges[range].iter().copied())
    }

    pub fn degree(&self, v: NodeId) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn edge_id(&self, a: NodeId, b: NodeId) -> Option<EdgeId> {
        if a as usize >= self.node_count || b as usize >= self.node_count {
            return None;
        }
        let start = self.offsets[a as usize];
        self.neighbors(a).binary_search(&b).ok().map(|i| self.neighbor_edges[start + i])
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.edge_id(a, b).is_some()
    }

    pub fn check_node(&self, v: NodeId) -> Result<(), GraphError> {
        if (v as usize) < self.node_count {
            Ok(())
        } else {
            Err(GraphError::NodeOutOfRange { node: v as u64, node_count: self.node_count })
        }
    }

    /// Returns a new graph on the same node set without `removed`. Every
    /// removed edge must exist; a missing one is reported rather than ignored.
    pub fn delete_edges(&self, removed: &[Edge]) -> Result<Graph, GraphError> {
        let mut drop = vec![false; self.edges.len()];
        for e in removed {
            match self.edge_id(e.0, e.1) {
                Some(id) => drop[id as usize] = true,
                None => return Err(GraphError::MissingEdge(*e)),
            }
        }
        let kept = self
            .edges
            .iter()
            .zip(&drop)
            .filter(|(_, d)| !**d)
            .map(|(e, _)| *e)
            .collect();
        Ok(Self::from_sorted_edges(self.node_count, kept))
    }

    /// Materialises the subgraph selected by `mask`.
    pub fn restrict(&self, mask: &EdgeMask) -> Graph {
        let kept = self
            .edges
            .iter()
            .enumerate()
            .filter(|(id, _)| mask.contains(*id as EdgeId))
            .map(|(_, e)| *e)
            .collect();
        Self::from_sorted_edges(self.node_count, kept)
    }
}

/// A subset of a host graph's edges, addressed by edge id.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EdgeMask {
    bits: Vec<u64>,
    len: usize,
}

impl EdgeMask {
    pub fn full(len: usize) -> Self {
        let mut bits = vec![u64::MAX; len.div_ceil(64)];
        if !len.is_multiple_of(64) {
            if let Some(last) = bits.last_mut() {
                *last = (1u64 << (len % 64)) - 1;
            }
        }
        EdgeMask { bits, len }
    }

    pub fn none(len: usize) -> Self {
        EdgeMask { bits: vec![0; len.div_ceil(64)], len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn contains(&self, id: EdgeId) -> bool {
        let id = id as usize;
        self.bits[id / 64] >> (id % 64) & 1 == 1
    }

    pub fn insert(&mut self, id: EdgeId) {
        let id = id as usize;
        self.bits[id / 64] |= 1 << (id % 64);
    }

    pub fn remove(&mut self, id: EdgeId) {
        let id = id as usize;
        self.bits[id / 64] &= !(1 << (id % 64));
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.len as EdgeId).filter(|&id| self.contains(id))
    }

    /// True when every edge kept here is also kept by `other`.
    pub fn is_subset_of(&self, other: &EdgeMask) -> bool {
        self.len == other.len && self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }
}

/// A walk given by its node sequence; only edge validity is required.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Path(pub Vec<NodeId>);

impl Path {
    pub fn nodes(&self) -> &[NodeId] {
        &self.0
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn first(&self) -> Option<NodeId> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<NodeId> {
        self.0.last().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.0.windows(2).map(|w| Edge::new(w[0], w[1]))
    }

    /// Consecutive node triples, i.e. the 2-paths of the walk.
    pub fn two_paths(&self) -> impl Iterator<Item = [NodeId; 3]> + '_ {
        self.0.windows(3).map(|w| [w[0], w[1], w[2]])
    }

    pub fn validate(&self, g: &Graph) -> Result<(), GraphError> {
        for &v in &self.0 {
            g.check_node(v)?;
        }
        for w in self.0.windows(2) {
            if !g.has_edge(w[0], w[1]) {
                return Err(GraphError::BrokenPath { from: w[0], to: w[1] });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::from_edges(3, [(0, 1), (2, 1), (0, 2)]).unwrap()
    }

    #[test]
    fn adjacency_mirrors_edges() {
        let g = Graph::from_edges(5, [(3, 1), (0, 4), (1, 0), (4, 2), (1, 4)]).unwrap();
        assert_eq!(g.edges(), &[Edge(0, 1), Edge(0, 4), Edge(1, 3), Edge(1, 4), Edge(2, 4)]);
        for v in 0..5 {
            let nb = g.neighbors(v);
            assert!(nb.windows(2).all(|w| w[0] < w[1]));
            for (w, id) in g.incident(v) {
                assert_eq!(g.edge(id), Edge::new(v, w));
            }
        }
        let from_edges: usize = (0..5).map(|v| g.degree(v)).sum();
        assert_eq!(from_edges, 2 * g.edge_count());
    }

    #[test]
    fn rejects_bad_edges() {
        assert_eq!(Graph::from_edges(3, [(1, 1)]), Err(GraphError::SelfLoop(1)));
        assert_eq!(
            Graph::from_edges(3, [(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(Edge(0, 1)))
        );
        assert!(matches!(
            Graph::from_edges(3, [(0, 3)]),
            Err(GraphError::NodeOutOfRange { node: 3, .. })
        ));
    }

    #[test]
    fn delete_nothing_is_identity() {
        let g = triangle();
        assert_eq!(g.delete_edges(&[]).unwrap(), g);
    }

    #[test]
    fn triangle_minus_edge_is_path() {
        let g = triangle().delete_edges(&[Edge::new(2, 0)]).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edges(), &[Edge(0, 1), Edge(1, 2)]);
    }

    #[test]
    fn deleting_absent_edge_fails() {
        let g = triangle().delete_edges(&[Edge::new(0, 1)]).unwrap();
        assert_eq!(g.delete_edges(&[Edge::new(1, 0)]), Err(GraphError::MissingEdge(Edge(0, 1))));
    }

    #[test]
    fn mask_restrict_matches_delete() {
        let g = triangle();
        let mut mask = EdgeMask::full(g.edge_count());
        mask.remove(g.edge_id(0, 2).unwrap());
        assert_eq!(g.restrict(&mask), g.delete_edges(&[Edge::new(0, 2)]).unwrap());
        assert_eq!(mask.count(), 2);
        assert!(mask.is_subset_of(&EdgeMask::full(3)));
        assert!(!EdgeMask::full(3).is_subset_of(&mask));
    }

    #[test]
    fn path_validation() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        assert!(Path(vec![0, 1, 2, 1]).validate(&g).is_ok());
        assert_eq!(
            Path(vec![0, 2]).validate(&g),
            Err(GraphError::BrokenPath { from: 0, to: 2 })
        );
        let p = Path(vec![0, 1, 2, 3]);
        assert_eq!(p.len(), 3);
        assert_eq!(p.two_paths().count(), 2);
    }
}
