//! Path compression: the two-coordinate product of a host whose pairs have
//! unique, edge-disjoint shortest paths.
//!
//! Nodes are triples `(u1, u2, i)` with `i ∈ {1, 2}`. From slot 1 an edge
//! advances the first coordinate along a forward host edge and moves to
//! slot 2; from slot 2 an edge advances the second coordinate and returns
//! to slot 1. Pairs are all ordered pairs of host pairs, and each canonical
//! path alternates one step in each coordinate, for length `2Δ`.

use serde::{Deserialize, Serialize};

use crate::error::{ConstructionError, GraphError};
use crate::graph::{EdgeId, Graph, NodeId, Path};
use crate::labels::{NodeLabelTable, NodeRole};
use crate::pairs::{self, Pair, PairFinding, PairSet, PairTag, TwoPathOverlap};
use crate::params::ConstructionParams;

/// Direction of one host edge, taken from the unique pair whose canonical
/// path uses it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Forward {
    pub from: NodeId,
    pub to: NodeId,
    pub pair: usize,
}

/// Per host edge id, the forward direction if the edge lies on a canonical
/// path; `None` otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForwardOrientation {
    pub directions: Vec<Option<Forward>>,
}

impl ForwardOrientation {
    pub fn oriented(&self) -> impl Iterator<Item = (EdgeId, Forward)> + '_ {
        self.directions.iter().enumerate().filter_map(|(id, f)| f.map(|f| (id as EdgeId, f)))
    }

    pub fn oriented_count(&self) -> usize {
        self.directions.iter().filter(|f| f.is_some()).count()
    }
}

/// Orients every canonical-path edge from `s` towards `t`. An edge claimed
/// by two pairs has no consistent direction and is an error.
pub fn orient(host: &Graph, set: &PairSet) -> Result<ForwardOrientation, ConstructionError> {
    let mut directions: Vec<Option<Forward>> = vec![None; host.edge_count()];
    for (pair, path) in set.paths.iter().enumerate() {
        for w in path.nodes().windows(2) {
            let id = host
                .edge_id(w[0], w[1])
                .ok_or(GraphError::BrokenPath { from: w[0], to: w[1] })?;
            match directions[id as usize] {
                Some(prev) if prev.pair != pair => {
                    return Err(ConstructionError::SharedEdge {
                        edge: host.edge(id),
                        first: prev.pair,
                        second: pair,
                    });
                }
                _ => directions[id as usize] = Some(Forward { from: w[0], to: w[1], pair }),
            }
        }
    }
    Ok(ForwardOrientation { directions })
}

#[derive(Clone, Debug)]
pub struct CompressedGraph {
    pub graph: Graph,
    pub labels: NodeLabelTable,
    pub pairs: PairSet,
    pub params: ConstructionParams,
    /// Node count of the host.
    pub host_nodes: usize,
    /// Number of oriented host edges.
    pub forward_edges: usize,
}

impl CompressedGraph {
    pub fn node(&self, u1: NodeId, u2: NodeId, slot: u8) -> NodeId {
        product_id(self.host_nodes, u1, u2, slot)
    }

    /// The generic upper bound `2n³` obtained from "every node has at most
    /// `2n` neighbours", next to the realised edge count.
    pub fn loose_edge_bound(&self) -> u128 {
        2 * (self.host_nodes as u128).pow(3)
    }

    /// Nodes reachable from some pair endpoint and the subgraph they
    /// induce, with the map from new ids to product ids. Visualisation
    /// aid only; the canonical graph keeps every triple.
    pub fn reachable_core(&self) -> (Graph, Vec<NodeId>) {
        let n = self.graph.node_count();
        let mut seen = vec![false; n];
        let mut stack: Vec<NodeId> = Vec::new();
        for p in &self.pairs.pairs {
            for v in [p.s, p.t] {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    stack.push(v);
                }
            }
        }
        while let Some(v) = stack.pop() {
            for &w in self.graph.neighbors(v) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    stack.push(w);
                }
            }
        }
        let kept: Vec<NodeId> = (0..n as NodeId).filter(|&v| seen[v as usize]).collect();
        let mut new_id = vec![NodeId::MAX; n];
        for (i, &v) in kept.iter().enumerate() {
            new_id[v as usize] = i as NodeId;
        }
        let edges = self
            .graph
            .edges()
            .iter()
            .filter(|e| seen[e.u() as usize])
            .map(|e| (new_id[e.u() as usize], new_id[e.v() as usize]));
        let core = Graph::from_edges(kept.len(), edges).expect("induced subgraph of a valid graph");
        (core, kept)
    }
}

fn product_id(n: usize, u1: NodeId, u2: NodeId, slot: u8) -> NodeId {
    ((u1 as usize * n + u2 as usize) * 2 + (slot as usize - 1)) as NodeId
}

/// Default ceiling on product node counts.
pub const DEFAULT_NODE_CEILING: u128 = 10_000_000;

/// Builds the product graph, its pair set and all canonical paths.
pub fn compress(
    host: &Graph,
    set: &PairSet,
    orientation: &ForwardOrientation,
    params: &ConstructionParams,
    node_ceiling: u128,
) -> Result<CompressedGraph, ConstructionError> {
    let n = host.node_count();
    let nodes = 2 * (n as u128) * (n as u128);
    if nodes > node_ceiling || nodes >= u32::MAX as u128 {
        return Err(ConstructionError::TooLarge {
            what: "compressed graph",
            nodes,
            ceiling: node_ceiling.min(u32::MAX as u128 - 1),
        });
    }
    let delta = params
        .pair_distance
        .ok_or_else(|| ConstructionError::Degenerate("host pair distance is not recorded".into()))?;
    for (i, path) in set.paths.iter().enumerate() {
        if path.len() != delta as usize {
            return Err(ConstructionError::HostPathLength { pair: i, found: path.len(), expected: delta });
        }
    }

    let mut roles = Vec::with_capacity(nodes as usize);
    for u1 in 0..n as NodeId {
        for u2 in 0..n as NodeId {
            roles.push(NodeRole::Product { u1, u2, slot: 1 });
            roles.push(NodeRole::Product { u1, u2, slot: 2 });
        }
    }

    let forward: Vec<Forward> = orientation.oriented().map(|(_, f)| f).collect();
    let mut edges = Vec::with_capacity(2 * n * forward.len());
    for f in &forward {
        for other in 0..n as NodeId {
            edges.push((product_id(n, f.from, other, 1), product_id(n, f.to, other, 2)));
            edges.push((product_id(n, other, f.from, 2), product_id(n, other, f.to, 1)));
        }
    }
    let graph = Graph::from_edges(nodes as usize, edges)?;

    let mut pairs = PairSet::default();
    for (i1, p1) in set.pairs.iter().enumerate() {
        for (i2, p2) in set.pairs.iter().enumerate() {
            pairs.pairs.push(Pair {
                s: product_id(n, p1.s, p2.s, 1),
                t: product_id(n, p1.t, p2.t, 1),
                tag: PairTag::Product { first: i1, second: i2 },
            });
            pairs.paths.push(build_rho(n, &set.paths[i1], &set.paths[i2]));
        }
    }

    let mut params = params.clone();
    params.pair_distance = Some(2 * delta);
    Ok(CompressedGraph {
        graph,
        labels: NodeLabelTable::from_layout(roles),
        pairs,
        params,
        host_nodes: n,
        forward_edges: forward.len(),
    })
}

/// The alternating canonical path: from `(v1_j, v2_j, 1)` step the first
/// coordinate to `(v1_{j+1}, v2_j, 2)`, then the second to
/// `(v1_{j+1}, v2_{j+1}, 1)`.
pub fn build_rho(host_nodes: usize, first: &Path, second: &Path) -> Path {
    let (v1, v2) = (first.nodes(), second.nodes());
    debug_assert_eq!(v1.len(), v2.len());
    let mut nodes = Vec::with_capacity(2 * v1.len() - 1);
    nodes.push(product_id(host_nodes, v1[0], v2[0], 1));
    for j in 0..v1.len() - 1 {
        nodes.push(product_id(host_nodes, v1[j + 1], v2[j], 2));
        nodes.push(product_id(host_nodes, v1[j + 1], v2[j + 1], 1));
    }
    Path(nodes)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompressedAudit {
    pub unique_sp_failures: Vec<PairFinding>,
    pub distance_failures: Vec<PairFinding>,
    pub two_path_violations: Vec<TwoPathOverlap>,
}

impl CompressedAudit {
    pub fn is_clean(&self) -> bool {
        self.unique_sp_failures.is_empty()
            && self.distance_failures.is_empty()
            && self.two_path_violations.is_empty()
    }
}

/// Every pair at distance `2Δ` with `ρ` as its unique shortest path, and no
/// 2-path shared by the canonical paths of two pairs.
pub fn audit_compressed(cg: &CompressedGraph) -> CompressedAudit {
    let expected = cg.params.pair_distance.unwrap_or(0);
    let findings = pairs::measure_pairs(&cg.graph, &cg.pairs, &|_| expected);
    let (unique_sp_failures, distance_failures) = pairs::classify(findings, true);
    CompressedAudit {
        unique_sp_failures,
        distance_failures,
        two_path_violations: pairs::two_path_overlaps(&cg.pairs.paths),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::avgfree::AvgFreeSet;
    use crate::base::{build_base, LayeredGraph};

    fn base(n: u64, k: u32, a: &[u64]) -> (LayeredGraph, PairSet) {
        build_base(&AvgFreeSet::from_elements(n, k, a.to_vec()).unwrap()).unwrap()
    }

    fn compressed(n: u64, k: u32, a: &[u64]) -> CompressedGraph {
        let (g, set) = base(n, k, a);
        let o = orient(&g.graph, &set).unwrap();
        compress(&g.graph, &set, &o, &g.params, DEFAULT_NODE_CEILING).unwrap()
    }

    #[test]
    fn orient_single_edge() {
        let (g, set) = base(1, 1, &[1]);
        let o = orient(&g.graph, &set).unwrap();
        let f: Vec<Forward> = o.oriented().map(|(_, f)| f).collect();
        assert_eq!(f, vec![Forward { from: g.node(1, 0), to: g.node(2, 1), pair: 0 }]);
    }

    #[test]
    fn orient_fixture() {
        let (g, set) = base(2, 2, &[1, 2]);
        let o = orient(&g.graph, &set).unwrap();
        assert_eq!(o.oriented_count(), 8);
        assert_eq!(o.directions.len() - o.oriented_count(), 10);
        for (_, f) in o.oriented() {
            assert_eq!(g.layer(f.to), g.layer(f.from) + 1);
        }
    }

    #[test]
    fn orient_rejects_shared_edge() {
        let (g, mut set) = base(2, 2, &[1, 2]);
        set.paths[1] = set.paths[0].clone();
        let err = orient(&g.graph, &set).unwrap_err();
        assert!(matches!(err, ConstructionError::SharedEdge { first: 0, second: 1, .. }));
    }

    #[test]
    fn smallest_product() {
        let cg = compressed(1, 1, &[1]);
        assert_eq!(cg.graph.node_count(), 32);
        assert_eq!(cg.pairs.len(), 1);
        let (g, set) = base(1, 1, &[1]);
        let (s, t) = (set.pairs[0].s, set.pairs[0].t);
        assert_eq!((s, t), (g.node(1, 0), g.node(2, 1)));
        let expect = Path(vec![cg.node(s, s, 1), cg.node(t, s, 2), cg.node(t, t, 1)]);
        assert_eq!(cg.pairs.paths[0], expect);
        assert!(audit_compressed(&cg).is_clean());
    }

    #[test]
    fn fixture_product() {
        let cg = compressed(2, 2, &[1, 2]);
        assert_eq!(cg.graph.node_count(), 648);
        assert_eq!(cg.pairs.len(), 16);
        assert_eq!(cg.params.pair_distance, Some(4));
        // every forward edge yields one edge per passive node in each slot
        assert_eq!(cg.graph.edge_count(), 2 * 18 * 8);
        assert!(cg.graph.edge_count() as u128 <= cg.loose_edge_bound());
        for p in &cg.pairs.paths {
            assert_eq!(p.len(), 4);
            assert!(p.validate(&cg.graph).is_ok());
        }
        assert!(audit_compressed(&cg).is_clean());
    }

    #[test]
    fn edges_change_one_coordinate_and_toggle_slot() {
        let cg = compressed(2, 2, &[1, 2]);
        for e in cg.graph.edges() {
            let (a, b) = (cg.labels.role(e.u()), cg.labels.role(e.v()));
            let (NodeRole::Product { u1: a1, u2: a2, slot: sa }, NodeRole::Product { u1: b1, u2: b2, slot: sb }) =
                (a, b)
            else {
                panic!("non-product label");
            };
            assert_ne!(sa, sb);
            assert!((a1 == b1) != (a2 == b2));
        }
    }

    #[test]
    fn cutting_a_rho_edge_lengthens_its_pair() {
        let cg = compressed(2, 2, &[1, 2]);
        for (i, path) in cg.pairs.paths.iter().enumerate() {
            for e in path.edges() {
                let g = cg.graph.delete_edges(&[e]).unwrap();
                let pair = cg.pairs.pairs[i];
                let d = crate::shortest::bfs_distances(&g, pair.s).unwrap()[pair.t as usize];
                assert!(d.is_none_or(|d| d >= 5), "pair {i} edge {e}");
            }
        }
    }

    #[test]
    fn reachable_core_keeps_pair_paths() {
        let cg = compressed(2, 2, &[1, 2]);
        let (core, kept) = cg.reachable_core();
        assert!(core.node_count() < cg.graph.node_count());
        for p in &cg.pairs.paths {
            for v in p.nodes() {
                assert!(kept.binary_search(v).is_ok());
            }
        }
    }

    #[test]
    fn ceiling_refuses_large_products() {
        let (g, set) = base(2, 2, &[1, 2]);
        let o = orient(&g.graph, &set).unwrap();
        let err = compress(&g.graph, &set, &o, &g.params, 100).unwrap_err();
        assert!(matches!(err, ConstructionError::TooLarge { nodes: 648, .. }));
    }
}
