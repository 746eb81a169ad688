//! The obstacle product: every host edge becomes a path of length `ℓ`, then
//! every host node `v` becomes a clique on `deg(v)` nodes, one per incident
//! edge. Each host pair `(s, t)` with canonical path `s = u_0, …, u_Δ = t`
//! over edges `e_1, …, e_Δ` yields the pair `(K(s, e_1), K(t, e_Δ))` and the
//! certificate of clique edges `{K(u_i, e_i), K(u_i, e_{i+1})}`,
//! `i = 1..Δ−1`.
//!
//! Layout: path interiors first (`ℓ − 1` nodes per host edge, ordered from
//! the smaller endpoint), then cliques grouped by host node with members in
//! neighbour order.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{ConstructionError, GraphError};
use crate::graph::{Edge, EdgeId, EdgeMask, Graph, NodeId, Path};
use crate::labels::{NodeLabelTable, NodeRole};
use crate::pairs::{self, EdgeOverlap, Pair, PairFinding, PairSet, PairTag};
use crate::par;
use crate::params::ConstructionParams;
use crate::shortest::Bfs;

/// A host with each edge subdivided into a path of length `ell`. Host nodes
/// keep their ids; interior nodes follow.
#[derive(Clone, Debug)]
pub struct ExtendedEdges {
    pub graph: Graph,
    pub host_nodes: usize,
    pub ell: u32,
    /// Interior nodes of each host edge, listed from its smaller endpoint.
    pub interior: Vec<Vec<NodeId>>,
}

pub fn extend_edges(host: &Graph, ell: u32) -> ExtendedEdges {
    assert!(ell >= 1, "ell must be positive");
    let n = host.node_count();
    let inner = (ell - 1) as usize;
    let mut edges = Vec::with_capacity(host.edge_count() * ell as usize);
    let mut interior = Vec::with_capacity(host.edge_count());
    for (id, e) in host.edges().iter().enumerate() {
        let nodes: Vec<NodeId> = (0..inner).map(|i| (n + id * inner + i) as NodeId).collect();
        let mut prev = e.u();
        for &x in &nodes {
            edges.push((prev, x));
            prev = x;
        }
        edges.push((prev, e.v()));
        interior.push(nodes);
    }
    let graph = Graph::from_edges(n + host.edge_count() * inner, edges).expect("subdivision of a simple graph");
    ExtendedEdges { graph, host_nodes: n, ell, interior }
}

#[derive(Clone, Debug)]
pub struct ObstacleGraph {
    pub graph: Graph,
    pub labels: NodeLabelTable,
    pub params: ConstructionParams,
    pub host: Graph,
    pub host_pairs: PairSet,
    pub pairs: PairSet,
    /// Clique edges per pair, in path order.
    pub certificates: Vec<Vec<Edge>>,
    /// First clique node of each host node; `clique_offset[n]` is the node
    /// count.
    pub clique_offset: Vec<NodeId>,
    pub ell: u32,
    pub warnings: Vec<String>,
}

impl ObstacleGraph {
    /// `K(v, e)` for host node `v` and incident host edge `e`.
    pub fn clique_node(&self, v: NodeId, e: EdgeId) -> NodeId {
        let other = self.host.edge(e).other(v).expect("edge incident to v");
        let pos = self.host.neighbors(v).binary_search(&other).expect("edge incident to v");
        self.clique_offset[v as usize] + pos as NodeId
    }

    /// Host node whose clique contains `x`, if `x` is a clique node.
    pub fn host_of(&self, x: NodeId) -> Option<NodeId> {
        if x < self.clique_offset[0] {
            return None;
        }
        let i = self.clique_offset.partition_point(|&o| o <= x);
        Some((i - 1) as NodeId)
    }

    pub fn is_clique_edge(&self, e: Edge) -> bool {
        matches!((self.host_of(e.u()), self.host_of(e.v())), (Some(a), Some(b)) if a == b)
    }

    /// Total clique edges, `Σ_v C(deg v, 2)`.
    pub fn clique_edge_count(&self) -> usize {
        (0..self.host.node_count() as NodeId)
            .map(|v| {
                let d = self.host.degree(v);
                d * d.saturating_sub(1) / 2
            })
            .sum()
    }

    pub fn op_distance(&self) -> u32 {
        self.params.op_distance.unwrap_or(0)
    }

    /// `k = Δ − 1`.
    pub fn k(&self) -> u32 {
        self.params.pair_distance.unwrap_or(1) - 1
    }

    /// Host nodes whose cliques a path enters, consecutive repeats merged.
    pub fn clique_sequence(&self, path: &Path) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = Vec::new();
        for &x in path.nodes() {
            if let Some(v) = self.host_of(x) {
                if out.last() != Some(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    /// Edge mask with every certificate edge of the given pairs removed.
    /// Certificate edges absent from the graph (possible for artifacts read
    /// from disk) are skipped.
    pub fn mask_without(&self, pairs: impl IntoIterator<Item = usize>) -> EdgeMask {
        let mut mask = EdgeMask::full(self.graph.edge_count());
        for p in pairs {
            for e in &self.certificates[p] {
                if let Some(id) = self.graph.edge_id(e.u(), e.v()) {
                    mask.remove(id);
                }
            }
        }
        mask
    }

    /// Certificate edges that are not edges of the graph, as
    /// `(pair, edge)`.
    pub fn missing_certificate_edges(&self) -> Vec<(usize, Edge)> {
        let mut out = Vec::new();
        for (i, cert) in self.certificates.iter().enumerate() {
            for &e in cert {
                if !self.graph.has_edge(e.u(), e.v()) {
                    out.push((i, e));
                }
            }
        }
        out
    }
}

/// Turns host nodes into cliques and attaches each path end to the clique
/// node of its edge. Pairs and certificates are left empty.
pub fn replace_cliques(ext: &ExtendedEdges, host: &Graph) -> ObstacleGraph {
    let n = ext.host_nodes;
    let inner = (ext.ell - 1) as usize;
    let path_total = host.edge_count() * inner;
    let mut clique_offset = Vec::with_capacity(n + 1);
    let mut next = path_total as NodeId;
    let mut warnings = Vec::new();
    for v in 0..n as NodeId {
        clique_offset.push(next);
        next += host.degree(v) as NodeId;
        if host.degree(v) == 0 {
            warnings.push(format!("host node {v} is isolated and has no clique"));
        }
    }
    clique_offset.push(next);

    let mut roles = Vec::with_capacity(next as usize);
    for e in 0..host.edge_count() {
        for i in 1..=inner {
            roles.push(NodeRole::PathNode { edge: e as u32, index: i as u32 });
        }
    }
    for v in 0..n as NodeId {
        for (_, e) in host.incident(v) {
            roles.push(NodeRole::Clique { node: v, edge: e });
        }
    }

    let clique = |v: NodeId, other: NodeId| -> NodeId {
        clique_offset[v as usize] + host.neighbors(v).binary_search(&other).expect("neighbour") as NodeId
    };
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    for v in 0..n as NodeId {
        let (lo, hi) = (clique_offset[v as usize], clique_offset[v as usize + 1]);
        for a in lo..hi {
            for b in a + 1..hi {
                edges.push((a, b));
            }
        }
    }
    for (id, e) in host.edges().iter().enumerate() {
        // interior ids in the extended graph start at n; here at 0
        let mut prev = clique(e.u(), e.v());
        for &x in &ext.interior[id] {
            let x = x - n as NodeId;
            edges.push((prev, x));
            prev = x;
        }
        edges.push((prev, clique(e.v(), e.u())));
    }
    let graph = Graph::from_edges(next as usize, edges).expect("obstacle layout is simple");
    ObstacleGraph {
        graph,
        labels: NodeLabelTable::from_layout(roles),
        params: ConstructionParams::handcrafted(0, 1),
        host: host.clone(),
        host_pairs: PairSet::default(),
        pairs: PairSet::default(),
        certificates: Vec::new(),
        clique_offset,
        ell: ext.ell,
        warnings,
    }
}

/// Full obstacle product over a host whose pairs all sit at distance
/// `delta` with the given canonical paths.
pub fn build_op(
    host: &Graph,
    host_pairs: &PairSet,
    delta: u32,
    params: &ConstructionParams,
    node_ceiling: u128,
) -> Result<ObstacleGraph, ConstructionError> {
    if delta < 2 {
        return Err(ConstructionError::Degenerate(format!(
            "host pair distance {delta} gives k = {} and no separation",
            delta.saturating_sub(1)
        )));
    }
    let ell = 3 * delta;
    let nodes = (ell as u128 + 1) * host.edge_count() as u128;
    if nodes > node_ceiling || nodes >= u32::MAX as u128 {
        return Err(ConstructionError::TooLarge {
            what: "obstacle product",
            nodes,
            ceiling: node_ceiling.min(u32::MAX as u128 - 1),
        });
    }
    for (i, path) in host_pairs.paths.iter().enumerate() {
        if path.len() != delta as usize {
            return Err(ConstructionError::HostPathLength { pair: i, found: path.len(), expected: delta });
        }
        path.validate(host)?;
    }
    for f in pairs::measure_pairs(host, host_pairs, &|_| delta) {
        if f.dist != Some(delta) {
            return Err(ConstructionError::HostDistance { pair: f.pair, found: f.dist, expected: delta });
        }
    }

    let mut og = replace_cliques(&extend_edges(host, ell), host);
    og.params = params.clone().with_obstacle(delta);
    og.host_pairs = host_pairs.clone();

    for (i, hp) in host_pairs.paths.iter().enumerate() {
        let v = hp.nodes();
        let eid = |j: usize| host.edge_id(v[j], v[j + 1]).ok_or(GraphError::BrokenPath { from: v[j], to: v[j + 1] });
        let mut nodes = Vec::with_capacity(og.op_distance() as usize + 1);
        let mut cert = Vec::with_capacity(delta as usize - 1);
        for j in 0..delta as usize {
            let e = eid(j)?;
            let start = og.clique_node(v[j], e);
            if j > 0 {
                cert.push(Edge::new(*nodes.last().unwrap(), start));
            }
            nodes.push(start);
            let inner = og.edge_interior(e);
            if v[j] < v[j + 1] {
                nodes.extend(inner);
            } else {
                nodes.extend(inner.rev());
            }
            nodes.push(og.clique_node(v[j + 1], e));
        }
        let s = nodes[0];
        let t = *nodes.last().unwrap();
        og.pairs.pairs.push(Pair { s, t, tag: PairTag::Obstacle { host_pair: i } });
        og.pairs.paths.push(Path(nodes));
        og.certificates.push(cert);
    }
    Ok(og)
}

impl ObstacleGraph {
    fn edge_interior(&self, e: EdgeId) -> std::ops::Range<NodeId> {
        let inner = self.ell - 1;
        e * inner..(e + 1) * inner
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetourFailure {
    pub pair: usize,
    /// Distance after deleting the pair's certificate, when below `required`.
    pub dist: Option<u32>,
    pub required: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollateralFailure {
    /// Pair whose certificate was deleted.
    pub deleted: usize,
    /// Pair whose canonical path lost an edge.
    pub affected: usize,
    pub edge: Edge,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstacleAudit {
    pub distance_failures: Vec<PairFinding>,
    pub certificate_disjointness_violations: Vec<EdgeOverlap>,
    pub detour_failures: Vec<DetourFailure>,
    pub collateral_failures: Vec<CollateralFailure>,
}

impl ObstacleAudit {
    pub fn is_clean(&self) -> bool {
        self.distance_failures.is_empty()
            && self.certificate_disjointness_violations.is_empty()
            && self.detour_failures.is_empty()
            && self.collateral_failures.is_empty()
    }
}

/// Distance of `pair` once the certificates of `deleted` are removed,
/// searching no deeper than `limit` when given.
pub fn distance_without(og: &ObstacleGraph, pair: usize, deleted: &[usize], limit: Option<u32>) -> Option<u32> {
    let mask = og.mask_without(deleted.iter().copied());
    let p = og.pairs.pairs[pair];
    let mut bfs = Bfs::new(og.graph.node_count());
    bfs.run(&og.graph, p.s, Some(&mask), Some(p.t), limit);
    bfs.dist(p.t)
}

/// Certificate disjointness plus every distance claim that can be checked
/// pair by pair:
///
/// - every pair at distance exactly `D`;
/// - deleting a pair's certificate leaves it at distance at least `D + k`;
/// - no certificate edge lies on another pair's canonical path, so every
///   other pair keeps an intact path of length `D` (deletions never shorten
///   distances, so it stays at exactly `D`).
pub fn audit_op(og: &ObstacleGraph) -> ObstacleAudit {
    let d = og.op_distance();
    let findings = pairs::measure_pairs(&og.graph, &og.pairs, &|_| d);
    let (_, distance_failures) = pairs::classify(findings, false);

    let mut owner: HashMap<Edge, usize> = HashMap::new();
    let mut certificate_disjointness_violations = Vec::new();
    for (i, cert) in og.certificates.iter().enumerate() {
        for &e in cert {
            if let Some(&j) = owner.get(&e) {
                certificate_disjointness_violations.push(EdgeOverlap { edge: e, first: j, second: i });
            } else {
                owner.insert(e, i);
            }
        }
    }

    let mut collateral_failures = Vec::new();
    for (q, path) in og.pairs.paths.iter().enumerate() {
        for e in path.edges() {
            if let Some(&p) = owner.get(&e) {
                if p != q {
                    collateral_failures.push(CollateralFailure { deleted: p, affected: q, edge: e });
                }
            }
        }
    }

    let required = d + og.k();
    let detours = par::map_range_init(
        og.pairs.len(),
        || Bfs::new(og.graph.node_count()),
        |bfs, i| {
            let mask = og.mask_without([i]);
            let p = og.pairs.pairs[i];
            bfs.run(&og.graph, p.s, Some(&mask), Some(p.t), Some(required - 1));
            bfs.dist(p.t).map(|dist| DetourFailure { pair: i, dist: Some(dist), required })
        },
    );
    ObstacleAudit {
        distance_failures,
        certificate_disjointness_violations,
        detour_failures: detours.into_iter().flatten().collect(),
        collateral_failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::avgfree::AvgFreeSet;
    use crate::base::build_base;
    use crate::compress::{self, DEFAULT_NODE_CEILING};
    use crate::shortest::bfs_distances;

    fn base_op() -> ObstacleGraph {
        let a = AvgFreeSet::from_elements(2, 2, vec![1, 2]).unwrap();
        let (g, set) = build_base(&a).unwrap();
        build_op(&g.graph, &set, 2, &g.params, DEFAULT_NODE_CEILING).unwrap()
    }

    fn compressed_op() -> ObstacleGraph {
        let a = AvgFreeSet::from_elements(2, 2, vec![1, 2]).unwrap();
        let (g, set) = build_base(&a).unwrap();
        let o = compress::orient(&g.graph, &set).unwrap();
        let cg = compress::compress(&g.graph, &set, &o, &g.params, DEFAULT_NODE_CEILING).unwrap();
        build_op(&cg.graph, &cg.pairs, 4, &cg.params, DEFAULT_NODE_CEILING).unwrap()
    }

    #[test]
    fn single_edge_extension() {
        let host = Graph::from_edges(2, [(0, 1)]).unwrap();
        let ext = extend_edges(&host, 3);
        assert_eq!(ext.graph.node_count(), 4);
        assert_eq!(ext.graph.edge_count(), 3);
        assert_eq!(bfs_distances(&ext.graph, 0).unwrap()[1], Some(3));
        assert_eq!(ext.interior, vec![vec![2, 3]]);
    }

    #[test]
    fn star_cliques() {
        let host = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let og = replace_cliques(&extend_edges(&host, 1), &host);
        assert_eq!(og.graph.node_count(), 6);
        // triangle at the centre plus three attachment edges
        assert_eq!(og.graph.edge_count(), 6);
        assert_eq!(og.clique_edge_count(), 3);
        for x in og.clique_offset[0]..og.clique_offset[1] {
            assert_eq!(og.graph.degree(x), 3);
        }
        assert!(og.warnings.is_empty());
    }

    #[test]
    fn isolated_host_node_warns() {
        let host = Graph::from_edges(3, [(0, 1)]).unwrap();
        let og = replace_cliques(&extend_edges(&host, 2), &host);
        assert_eq!(og.warnings.len(), 1);
        assert_eq!(og.host_of(og.graph.node_count() as NodeId - 1), Some(1));
    }

    #[test]
    fn base_host_instance() {
        let og = base_op();
        assert_eq!((og.ell, og.op_distance(), og.k()), (6, 13, 1));
        assert_eq!(og.graph.node_count(), 7 * 18);
        assert_eq!(og.pairs.len(), 4);
        for c in &og.certificates {
            assert_eq!(c.len(), 1);
            assert!(og.is_clique_edge(c[0]));
        }
        let clique_edges = og.graph.edges().iter().filter(|&&e| og.is_clique_edge(e)).count();
        assert_eq!(clique_edges, og.clique_edge_count());
        for x in og.clique_offset[0]..og.graph.node_count() as NodeId {
            let v = og.host_of(x).unwrap();
            assert_eq!(og.graph.degree(x), og.host.degree(v));
        }
        let audit = audit_op(&og);
        assert!(audit.distance_failures.is_empty());
        assert!(audit.certificate_disjointness_violations.is_empty());
        assert!(audit.collateral_failures.is_empty());
    }

    #[test]
    fn canonical_paths_follow_host_paths() {
        let og = base_op();
        for (i, p) in og.pairs.paths.iter().enumerate() {
            assert_eq!(p.len(), 13);
            p.validate(&og.graph).unwrap();
            assert_eq!(og.clique_sequence(p), og.host_pairs.paths[i].nodes());
        }
    }

    #[test]
    fn compressed_host_instance() {
        let og = compressed_op();
        assert_eq!((og.ell, og.op_distance(), og.k()), (12, 51, 3));
        assert_eq!(og.pairs.len(), 16);
        assert_eq!(og.graph.node_count(), 13 * og.host.edge_count());
        assert!(og.certificates.iter().all(|c| c.len() == 3));
        let audit = audit_op(&og);
        assert!(audit.distance_failures.is_empty());
        assert!(audit.certificate_disjointness_violations.is_empty());
        assert!(audit.collateral_failures.is_empty());
    }

    #[test]
    fn deleting_a_certificate_costs_at_least_k() {
        for og in [base_op(), compressed_op()] {
            let d = og.op_distance();
            for i in 0..og.pairs.len() {
                let after = distance_without(&og, i, &[i], None);
                assert!(after.is_none_or(|x| x >= d + og.k()), "pair {i}: {after:?}");
            }
        }
    }

    #[test]
    fn rejects_short_hosts() {
        let a = AvgFreeSet::from_elements(1, 1, vec![1]).unwrap();
        let (g, set) = build_base(&a).unwrap();
        let err = build_op(&g.graph, &set, 1, &g.params, DEFAULT_NODE_CEILING).unwrap_err();
        assert!(matches!(err, ConstructionError::Degenerate(_)));
    }

    #[test]
    fn rejects_wrong_host_distance() {
        let a = AvgFreeSet::from_elements(2, 2, vec![1, 2]).unwrap();
        let (g, set) = build_base(&a).unwrap();
        let mut set2 = set.clone();
        set2.pairs[0].t = set.pairs[0].s;
        let err = build_op(&g.graph, &set2, 2, &g.params, DEFAULT_NODE_CEILING).unwrap_err();
        assert!(matches!(err, ConstructionError::HostDistance { pair: 0, .. }));
    }
}
