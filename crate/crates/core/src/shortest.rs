//! Breadth-first search machinery: distances, saturated shortest-path
//! counts, masked and depth-bounded searches, and path recovery.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;
use crate::graph::{EdgeMask, Graph, NodeId, Path};

/// Sentinel for an unreached node in raw distance arrays.
pub const UNREACHABLE: u32 = u32::MAX;

/// Number of shortest paths, saturated at two.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Multiplicity {
    Zero,
    One,
    Many,
}

impl Multiplicity {
    fn from_count(c: u8) -> Self {
        match c {
            0 => Multiplicity::Zero,
            1 => Multiplicity::One,
            _ => Multiplicity::Many,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathCount {
    pub dist: Option<u32>,
    pub multiplicity: Multiplicity,
}

/// Exact unweighted distances from `source`; `None` marks unreachable nodes.
pub fn bfs_distances(g: &Graph, source: NodeId) -> Result<Vec<Option<u32>>, GraphError> {
    g.check_node(source)?;
    let mut bfs = Bfs::new(g.node_count());
    bfs.run(g, source, None, None, None);
    Ok((0..g.node_count()).map(|v| bfs.dist(v as NodeId)).collect())
}

/// Distance from `s` to `t` and whether the shortest path is unique.
pub fn count_shortest_paths(g: &Graph, s: NodeId, t: NodeId) -> Result<PathCount, GraphError> {
    g.check_node(s)?;
    g.check_node(t)?;
    let mut bfs = Bfs::new(g.node_count());
    bfs.run_counting(g, s, None);
    Ok(bfs.path_count(t))
}

/// Recovers the shortest `s`–`t` path when it is unique.
pub fn unique_shortest_path(g: &Graph, s: NodeId, t: NodeId) -> Result<Option<Path>, GraphError> {
    g.check_node(s)?;
    g.check_node(t)?;
    let mut bfs = Bfs::new(g.node_count());
    bfs.run_counting(g, s, None);
    Ok(bfs.unique_path_to(g, t))
}

/// Reusable BFS scratch space. Only the nodes touched by the previous run
/// are reset, so repeated searches on large sparse graphs stay cheap.
#[derive(Clone, Debug)]
pub struct Bfs {
    dist: Vec<u32>,
    count: Vec<u8>,
    parent: Vec<NodeId>,
    order: Vec<NodeId>,
}

impl Bfs {
    pub fn new(node_count: usize) -> Self {
        Bfs {
            dist: vec![UNREACHABLE; node_count],
            count: vec![0; node_count],
            parent: vec![NodeId::MAX; node_count],
            order: Vec::new(),
        }
    }

    fn reset(&mut self, node_count: usize) {
        if self.dist.len() != node_count {
            *self = Bfs::new(node_count);
            return;
        }
        for &v in &self.order {
            self.dist[v as usize] = UNREACHABLE;
            self.count[v as usize] = 0;
            self.parent[v as usize] = NodeId::MAX;
        }
        self.order.clear();
    }

    /// Plain BFS. `mask` restricts the usable edges, `target` stops the
    /// search once that node is dequeued and `max_depth` stops expanding
    /// past that distance. Parents are the first discoverer, which under
    /// sorted adjacency is the lowest-id node of the previous layer.
    pub fn run(
        &mut self,
        g: &Graph,
        source: NodeId,
        mask: Option<&EdgeMask>,
        target: Option<NodeId>,
        max_depth: Option<u32>,
    ) {
        self.reset(g.node_count());
        self.dist[source as usize] = 0;
        self.order.push(source);
        let mut head = 0;
        while head < self.order.len() {
            let v = self.order[head];
            head += 1;
            if Some(v) == target {
                break;
            }
            let dv = self.dist[v as usize];
            if max_depth.is_some_and(|m| dv >= m) {
                continue;
            }
            for (w, id) in g.incident(v) {
                if mask.is_some_and(|m| !m.contains(id)) {
                    continue;
                }
                if self.dist[w as usize] == UNREACHABLE {
                    self.dist[w as usize] = dv + 1;
                    self.parent[w as usize] = v;
                    self.order.push(w);
                }
            }
        }
    }

    /// BFS that also counts shortest paths, saturating at two, by dynamic
    /// programming over the layered shortest-path DAG.
    pub fn run_counting(&mut self, g: &Graph, source: NodeId, mask: Option<&EdgeMask>) {
        self.reset(g.node_count());
        self.dist[source as usize] = 0;
        self.count[source as usize] = 1;
        self.order.push(source);
        let mut head = 0;
        while head < self.order.len() {
            let v = self.order[head];
            head += 1;
            let dv = self.dist[v as usize];
            let cv = self.count[v as usize];
            for (w, id) in g.incident(v) {
                if mask.is_some_and(|m| !m.contains(id)) {
                    continue;
                }
                let dw = &mut self.dist[w as usize];
                if *dw == UNREACHABLE {
                    *dw = dv + 1;
                    self.count[w as usize] = cv;
                    self.parent[w as usize] = v;
                    self.order.push(w);
                } else if *dw == dv + 1 {
                    self.count[w as usize] = (self.count[w as usize] + cv).min(2);
                }
            }
        }
    }

    pub fn dist(&self, v: NodeId) -> Option<u32> {
        match self.dist[v as usize] {
            UNREACHABLE => None,
            d => Some(d),
        }
    }

    pub fn raw_dist(&self) -> &[u32] {
        &self.dist
    }

    /// Only meaningful after [`Bfs::run_counting`].
    pub fn path_count(&self, v: NodeId) -> PathCount {
        PathCount {
            dist: self.dist(v),
            multiplicity: Multiplicity::from_count(self.count[v as usize]),
        }
    }

    /// Nodes reached by the last run, in BFS order.
    pub fn visited(&self) -> &[NodeId] {
        &self.order
    }

    /// Path from the last source to `t` along first-discoverer parents.
    pub fn path_to(&self, t: NodeId) -> Option<Path> {
        self.dist(t)?;
        let mut nodes = vec![t];
        let mut v = t;
        while self.dist[v as usize] > 0 {
            v = self.parent[v as usize];
            nodes.push(v);
        }
        nodes.reverse();
        Some(Path(nodes))
    }

    /// After [`Bfs::run_counting`], the shortest path to `t` if it is unique.
    /// With a single shortest path every node on it has exactly one
    /// predecessor one layer closer to the source.
    pub fn unique_path_to(&self, g: &Graph, t: NodeId) -> Option<Path> {
        if self.path_count(t).multiplicity != Multiplicity::One {
            return None;
        }
        let mut nodes = vec![t];
        let mut v = t;
        while self.dist[v as usize] > 0 {
            let want = self.dist[v as usize] - 1;
            v = *g.neighbors(v).iter().find(|&&w| self.dist[w as usize] == want)?;
            nodes.push(v);
        }
        nodes.reverse();
        Some(Path(nodes))
    }
}

/// Distance from `s` to `t` in the masked graph, or `None` if it exceeds
/// `limit` (or `t` is unreachable).
pub fn masked_distance(
    bfs: &mut Bfs,
    g: &Graph,
    s: NodeId,
    t: NodeId,
    mask: Option<&EdgeMask>,
    limit: Option<u32>,
) -> Option<u32> {
    bfs.run(g, s, mask, Some(t), limit);
    bfs.dist(t)
}

/// Plain BFS distances used by callers that want a dense array with
/// [`UNREACHABLE`] sentinels.
pub fn distance_row(g: &Graph, source: NodeId, mask: Option<&EdgeMask>) -> Vec<u32> {
    let mut dist = vec![UNREACHABLE; g.node_count()];
    let mut queue = VecDeque::new();
    dist[source as usize] = 0;
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        let dv = dist[v as usize];
        for (w, id) in g.incident(v) {
            if mask.is_some_and(|m| !m.contains(id)) {
                continue;
            }
            if dist[w as usize] == UNREACHABLE {
                dist[w as usize] = dv + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn path_graph(n: u32) -> Graph {
        Graph::from_edges(n as usize, (0..n - 1).map(|i| (i, i + 1))).unwrap()
    }

    fn cycle(n: u32) -> Graph {
        Graph::from_edges(n as usize, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    #[test]
    fn line_graph_distances() {
        let g = path_graph(3);
        assert_eq!(bfs_distances(&g, 0).unwrap(), vec![Some(0), Some(1), Some(2)]);
    }

    #[test]
    fn source_out_of_range() {
        let g = path_graph(3);
        assert!(matches!(bfs_distances(&g, 3), Err(GraphError::NodeOutOfRange { .. })));
        assert!(count_shortest_paths(&g, 0, 7).is_err());
    }

    #[test]
    fn unreachable_is_none() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let d = bfs_distances(&g, 0).unwrap();
        assert_eq!(d[2], None);
        assert_eq!(
            count_shortest_paths(&g, 0, 3).unwrap(),
            PathCount { dist: None, multiplicity: Multiplicity::Zero }
        );
    }

    #[test]
    fn four_cycle_has_two_paths() {
        let pc = count_shortest_paths(&cycle(4), 0, 2).unwrap();
        assert_eq!(pc, PathCount { dist: Some(2), multiplicity: Multiplicity::Many });
        assert_eq!(unique_shortest_path(&cycle(4), 0, 2).unwrap(), None);
    }

    #[test]
    fn path_endpoints_unique() {
        let g = path_graph(6);
        let pc = count_shortest_paths(&g, 0, 5).unwrap();
        assert_eq!(pc, PathCount { dist: Some(5), multiplicity: Multiplicity::One });
        assert_eq!(unique_shortest_path(&g, 0, 5).unwrap(), Some(Path(vec![0, 1, 2, 3, 4, 5])));
    }

    #[test]
    fn counts_saturate_without_overflow() {
        // A chain of 40 diamonds has 2^40 shortest paths.
        let mut edges = Vec::new();
        for i in 0..40u32 {
            let (a, b, c, d) = (3 * i, 3 * i + 1, 3 * i + 2, 3 * i + 3);
            edges.extend([(a, b), (a, c), (b, d), (c, d)]);
        }
        let g = Graph::from_edges(121, edges).unwrap();
        let pc = count_shortest_paths(&g, 0, 120).unwrap();
        assert_eq!(pc, PathCount { dist: Some(80), multiplicity: Multiplicity::Many });
    }

    #[test]
    fn masked_and_bounded_search() {
        let g = cycle(6);
        let mut bfs = Bfs::new(6);
        assert_eq!(masked_distance(&mut bfs, &g, 0, 1, None, None), Some(1));
        let mut mask = EdgeMask::full(g.edge_count());
        mask.remove(g.edge_id(0, 1).unwrap());
        assert_eq!(masked_distance(&mut bfs, &g, 0, 1, Some(&mask), None), Some(5));
        assert_eq!(masked_distance(&mut bfs, &g, 0, 1, Some(&mask), Some(4)), None);
        let removed = g.delete_edges(&[Edge::new(0, 1)]).unwrap();
        assert_eq!(distance_row(&removed, 0, None), distance_row(&g, 0, Some(&mask)));
    }

    #[test]
    fn parents_prefer_lowest_id() {
        let g = cycle(4);
        let mut bfs = Bfs::new(4);
        bfs.run(&g, 0, None, None, None);
        assert_eq!(bfs.path_to(2), Some(Path(vec![0, 1, 2])));
    }
}
