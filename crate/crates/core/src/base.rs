//! The layered base graph: nodes `(x, j)` for `x ∈ [(k+1)N]`, `j ∈ 0..=k`,
//! and an edge `(x, j) – (x + a, j + 1)` for every `a ∈ A`. Each pair
//! `(x, 0) → (x + k·a, k)` with `x ∈ [N]` has the straight path of `k`
//! steps of size `a` as its unique shortest path exactly when `A` is
//! k-average-free, and these paths are pairwise edge-disjoint.

use serde::{Deserialize, Serialize};

use crate::avgfree::{AvgFreeSet, Provenance};
use crate::error::ConstructionError;
use crate::graph::{Graph, NodeId, Path};
use crate::labels::{NodeLabelTable, NodeRole};
use crate::pairs::{self, EdgeOverlap, Pair, PairFinding, PairSet, PairTag};
use crate::par;
use crate::params::ConstructionParams;
use crate::shortest::{Bfs, Multiplicity};

#[derive(Clone, Debug)]
pub struct LayeredGraph {
    pub graph: Graph,
    pub labels: NodeLabelTable,
    pub params: ConstructionParams,
    pub avgfree: AvgFreeSet,
}

impl LayeredGraph {
    pub fn k(&self) -> u32 {
        self.params.k
    }

    /// Number of integer positions per layer, `(k+1)N`.
    pub fn width(&self) -> u64 {
        (self.params.k as u64 + 1) * self.params.universe
    }

    /// `id = (x − 1)(k + 1) + j`.
    pub fn node(&self, x: u64, layer: u32) -> NodeId {
        node_id(self.params.k, x, layer)
    }

    pub fn layer(&self, v: NodeId) -> u32 {
        v % (self.params.k + 1)
    }

    pub fn position(&self, v: NodeId) -> u64 {
        (v / (self.params.k + 1)) as u64 + 1
    }
}

fn node_id(k: u32, x: u64, layer: u32) -> NodeId {
    ((x - 1) * (k as u64 + 1) + layer as u64) as NodeId
}

/// Parameters implied by a set's provenance, with `Δ = k`.
pub fn params_for(a: &AvgFreeSet) -> ConstructionParams {
    let mut params = match a.provenance {
        Provenance::Shell { p, d, r_star, .. } => {
            let mut params = ConstructionParams::shell(p, d, a.k);
            params.r_star = Some(r_star);
            params
        }
        Provenance::Handcrafted => ConstructionParams::handcrafted(a.universe, a.k),
    };
    params.pair_distance = Some(a.k);
    params
}

/// Builds the layered graph and its pair set. Edges are admitted for all
/// positions in `[(k+1)N]` so every canonical path stays inside the node set.
pub fn build_base(a: &AvgFreeSet) -> Result<(LayeredGraph, PairSet), ConstructionError> {
    let k = a.k;
    if k == 0 {
        return Err(ConstructionError::Degenerate("base path length k must be at least 1".into()));
    }
    let width = (k as u64 + 1) * a.universe;
    let node_count = width as u128 * (k as u128 + 1);
    if node_count >= u32::MAX as u128 {
        return Err(ConstructionError::TooLarge {
            what: "base graph",
            nodes: node_count,
            ceiling: u32::MAX as u128,
        });
    }

    let mut roles = Vec::with_capacity(node_count as usize);
    for x in 1..=width {
        for layer in 0..=k {
            roles.push(NodeRole::Base { x, layer });
        }
    }
    let mut edges = Vec::new();
    for x in 1..=width {
        for layer in 0..k {
            for &step in &a.elements {
                let y = x + step;
                if y > width {
                    break;
                }
                edges.push((node_id(k, x, layer), node_id(k, y, layer + 1)));
            }
        }
    }
    let graph = Graph::from_edges(node_count as usize, edges)?;

    let mut set = PairSet::default();
    for x in 1..=a.universe {
        for &step in &a.elements {
            let nodes: Vec<NodeId> = (0..=k).map(|j| node_id(k, x + j as u64 * step, j)).collect();
            set.pairs.push(Pair {
                s: nodes[0],
                t: nodes[k as usize],
                tag: PairTag::Base { start_x: x, witness_a: step },
            });
            set.paths.push(Path(nodes));
        }
    }

    let layered = LayeredGraph {
        graph,
        labels: NodeLabelTable::from_layout(roles),
        params: params_for(a),
        avgfree: a.clone(),
    };
    Ok((layered, set))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseAudit {
    pub unique_sp_failures: Vec<PairFinding>,
    pub distance_failures: Vec<PairFinding>,
    pub edge_disjoint_violations: Vec<EdgeOverlap>,
}

impl BaseAudit {
    pub fn is_clean(&self) -> bool {
        self.unique_sp_failures.is_empty()
            && self.distance_failures.is_empty()
            && self.edge_disjoint_violations.is_empty()
    }
}

/// Checks that every pair is at distance exactly `k` with a unique shortest
/// path equal to its canonical path, and that canonical paths share no edge.
///
/// When every edge joins consecutive layers, any walk of length `k` from
/// layer 0 to layer `k` climbs one layer per step, so shortest paths are
/// counted by a forward sweep over upward edges only (one sweep per source
/// node). Pairs that sweep cannot reach, and graphs that are not layered,
/// fall back to a full counting BFS.
pub fn audit_base(g: &LayeredGraph, set: &PairSet) -> BaseAudit {
    let k = g.k();
    let layered = g
        .graph
        .edges()
        .iter()
        .all(|e| g.layer(e.v()) == g.layer(e.u()) + 1 && g.layer(e.u()) < k);
    let findings = if layered {
        measure_layered(g, set)
    } else {
        pairs::measure_pairs(&g.graph, set, &|_| k)
    };
    let (unique_sp_failures, distance_failures) = pairs::classify(findings, true);
    BaseAudit {
        unique_sp_failures,
        distance_failures,
        edge_disjoint_violations: pairs::edge_overlaps(&set.paths),
    }
}

struct Sweep {
    count: Vec<u8>,
    frontier: Vec<NodeId>,
    next: Vec<NodeId>,
    touched: Vec<NodeId>,
    bfs: Option<Bfs>,
}

fn measure_layered(g: &LayeredGraph, set: &PairSet) -> Vec<PairFinding> {
    let k = g.k();
    let graph = &g.graph;
    let n = graph.node_count();
    let groups = set.by_source();
    let per_group = par::map_range_init(
        groups.len(),
        || Sweep { count: vec![0; n], frontier: Vec::new(), next: Vec::new(), touched: Vec::new(), bfs: None },
        |sw, gi| {
            let (s, members) = &groups[gi];
            upward_counts(g, *s, sw);
            let out = members
                .iter()
                .map(|&i| {
                    let pair = &set.pairs[i];
                    let canonical_ok = pairs::canonical_ok(graph, pair, set.paths.get(i), k);
                    let c = sw.count[pair.t as usize];
                    if g.layer(pair.s) == 0 && g.layer(pair.t) == k && c > 0 {
                        PairFinding {
                            pair: i,
                            expected: k,
                            dist: Some(k),
                            multiplicity: if c == 1 { Multiplicity::One } else { Multiplicity::Many },
                            canonical_ok,
                        }
                    } else {
                        let bfs = sw.bfs.get_or_insert_with(|| Bfs::new(n));
                        bfs.run_counting(graph, pair.s, None);
                        let pc = bfs.path_count(pair.t);
                        PairFinding { pair: i, expected: k, dist: pc.dist, multiplicity: pc.multiplicity, canonical_ok }
                    }
                })
                .collect::<Vec<_>>();
            for &v in &sw.touched {
                sw.count[v as usize] = 0;
            }
            sw.touched.clear();
            out
        },
    );
    let mut out: Vec<PairFinding> = per_group.into_iter().flatten().collect();
    out.sort_by_key(|f| f.pair);
    out
}

/// Saturated counts of upward paths from `s` to every node `k − layer(s)`
/// layers above it.
fn upward_counts(g: &LayeredGraph, s: NodeId, sw: &mut Sweep) {
    let graph = &g.graph;
    sw.frontier.clear();
    sw.frontier.push(s);
    sw.count[s as usize] = 1;
    sw.touched.push(s);
    for _ in g.layer(s)..g.k() {
        sw.next.clear();
        for &v in &sw.frontier {
            let cv = sw.count[v as usize];
            for &w in graph.neighbors(v) {
                if w <= v {
                    continue;
                }
                let cw = &mut sw.count[w as usize];
                if *cw == 0 {
                    sw.next.push(w);
                    sw.touched.push(w);
                }
                *cw = (*cw + cv).min(2);
            }
        }
        // Only the top layer's counts are read; lower layers stay touched
        // for the reset but must not be mistaken for targets.
        std::mem::swap(&mut sw.frontier, &mut sw.next);
    }
}
