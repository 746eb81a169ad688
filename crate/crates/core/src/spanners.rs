//! Baseline spanners: additive +2, additive +6 and the greedy
//! multiplicative `(2t−1)`-spanner, with exact stretch audits.
//!
//! All tie-breaks go to the lowest node id and edges are scanned in sorted
//! order, so outputs are deterministic.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{EdgeMask, Graph, NodeId};
use crate::pairs::Pair;
use crate::par;
use crate::shortest::{Bfs, UNREACHABLE};
use crate::verify::Stretch;

/// Above this many nodes audits switch from all pairs to sampled pairs.
pub const ALL_PAIRS_LIMIT: usize = 1500;
/// Random pairs drawn by a sampled audit.
pub const SAMPLED_PAIRS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Plus2,
    Plus6,
    GreedyMult,
}

/// A spanner before auditing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spanner {
    pub algo: Algorithm,
    pub params: BTreeMap<String, u64>,
    pub kept: EdgeMask,
}

impl Spanner {
    pub fn graph(&self, g: &Graph) -> Graph {
        g.restrict(&self.kept)
    }
}

fn ceil_root(n: usize, root: u32) -> usize {
    let mut r = (n as f64).powf(1.0 / root as f64).round() as usize;
    while r.pow(root) < n {
        r += 1;
    }
    while r > 1 && (r - 1).pow(root) >= n {
        r -= 1;
    }
    r.max(1)
}

fn keep_light_edges(g: &Graph, threshold: usize, kept: &mut EdgeMask) {
    for (id, e) in g.edges().iter().enumerate() {
        if g.degree(e.u()) < threshold || g.degree(e.v()) < threshold {
            kept.insert(id as u32);
        }
    }
}

/// Greedy set cover of `targets` by closed neighbourhoods; a node may be its
/// own center. Ties go to the lowest id.
fn dominating_centers(g: &Graph, targets: &[bool]) -> Vec<NodeId> {
    let n = g.node_count();
    let mut uncovered = targets.to_vec();
    let mut left = uncovered.iter().filter(|&&b| b).count();
    let gain = |c: NodeId, uncovered: &[bool]| {
        uncovered[c as usize] as usize + g.neighbors(c).iter().filter(|&&w| uncovered[w as usize]).count()
    };
    let mut centers = Vec::new();
    while left > 0 {
        let (best, _) = (0..n as NodeId)
            .map(|c| (c, gain(c, &uncovered)))
            .max_by_key(|&(c, k)| (k, std::cmp::Reverse(c)))
            .expect("non-empty graph");
        for w in std::iter::once(best).chain(g.neighbors(best).iter().copied()) {
            if uncovered[w as usize] {
                uncovered[w as usize] = false;
                left -= 1;
            }
        }
        centers.push(best);
    }
    centers
}

/// BFS tree from `root`; each node's parent is its lowest-id neighbour one
/// layer closer.
fn add_bfs_tree(g: &Graph, bfs: &mut Bfs, root: NodeId, kept: &mut EdgeMask) {
    bfs.run(g, root, None, None, None);
    let dist = bfs.raw_dist();
    for &w in bfs.visited() {
        let dw = dist[w as usize];
        if dw == 0 {
            continue;
        }
        let (_, id) = g.incident(w).find(|&(x, _)| dist[x as usize] == dw - 1).expect("bfs parent");
        kept.insert(id);
    }
}

/// Additive +2: edges at light nodes (degree below `threshold`, default
/// `⌈√n⌉`), a dominating set of centers for the heavy nodes, and a full BFS
/// tree from each center.
pub fn spanner_plus2(g: &Graph, threshold: Option<usize>) -> Spanner {
    let n = g.node_count();
    let threshold = threshold.unwrap_or_else(|| ceil_root(n, 2));
    let mut kept = EdgeMask::none(g.edge_count());
    keep_light_edges(g, threshold, &mut kept);
    let heavy: Vec<bool> = (0..n as NodeId).map(|v| g.degree(v) >= threshold).collect();
    let centers = dominating_centers(g, &heavy);
    let mut bfs = Bfs::new(n);
    for &c in &centers {
        add_bfs_tree(g, &mut bfs, c, &mut kept);
    }
    let params = BTreeMap::from([("threshold".into(), threshold as u64), ("centers".into(), centers.len() as u64)]);
    Spanner { algo: Algorithm::Plus2, params, kept }
}

/// Additive +6 by clustering plus path buying: light edges (degree below
/// `⌈n^{1/3}⌉`) and a star from every heavy node to a center, then for each
/// pair `u < v` still stretched beyond 6, the shortest `G`-path that adds
/// the fewest new edges.
pub fn spanner_plus6(g: &Graph) -> Spanner {
    let n = g.node_count();
    let threshold = ceil_root(n, 3);
    let mut kept = EdgeMask::none(g.edge_count());
    keep_light_edges(g, threshold, &mut kept);
    let heavy: Vec<bool> = (0..n as NodeId).map(|v| g.degree(v) >= threshold).collect();
    let centers = dominating_centers(g, &heavy);
    let mut is_center = vec![false; n];
    for &c in &centers {
        is_center[c as usize] = true;
    }
    for v in 0..n as NodeId {
        if heavy[v as usize] && !is_center[v as usize] {
            let (_, id) = g.incident(v).find(|&(w, _)| is_center[w as usize]).expect("dominated");
            kept.insert(id);
        }
    }

    let mut full = Bfs::new(n);
    let mut sub = Bfs::new(n);
    let mut bought = 0u64;
    let mut cost = vec![u32::MAX; n];
    let mut via = vec![u32::MAX; n];
    for u in 0..n as NodeId {
        full.run(g, u, None, None, None);
        sub.run(g, u, Some(&kept), None, None);
        let dg = full.raw_dist().to_vec();
        let order = full.visited().to_vec();
        for v in u + 1..n as NodeId {
            let d = dg[v as usize];
            if d == UNREACHABLE || sub.raw_dist()[v as usize] <= d + 6 {
                continue;
            }
            // fewest missing edges over the shortest-path DAG of G from u
            for &w in &order {
                cost[w as usize] = if w == u { 0 } else { u32::MAX };
                if w == u {
                    continue;
                }
                let dw = dg[w as usize];
                for (x, id) in g.incident(w) {
                    if dg[x as usize] + 1 == dw {
                        let c = cost[x as usize] + (!kept.contains(id)) as u32;
                        if c < cost[w as usize] {
                            cost[w as usize] = c;
                            via[w as usize] = id;
                        }
                    }
                }
            }
            let mut w = v;
            while w != u {
                let id = via[w as usize];
                kept.insert(id);
                w = g.edge(id).other(w).expect("dag edge");
            }
            bought += 1;
            sub.run(g, u, Some(&kept), None, None);
        }
    }
    let params = BTreeMap::from([
        ("threshold".into(), threshold as u64),
        ("centers".into(), centers.len() as u64),
        ("bought_paths".into(), bought),
    ]);
    Spanner { algo: Algorithm::Plus6, params, kept }
}

/// Greedy multiplicative spanner: scan edges in sorted order and keep
/// `{u, v}` when the spanner built so far has no `u`–`v` path of length at
/// most `2t − 1`.
pub fn spanner_greedy_mult(g: &Graph, t: u32) -> Spanner {
    assert!(t >= 1, "t must be positive");
    let bound = 2 * t - 1;
    let mut kept = EdgeMask::none(g.edge_count());
    let mut bfs = Bfs::new(g.node_count());
    for (id, e) in g.edges().iter().enumerate() {
        bfs.run(g, e.u(), Some(&kept), Some(e.v()), Some(bound));
        if bfs.dist(e.v()).is_none() {
            kept.insert(id as u32);
        }
    }
    Spanner { algo: Algorithm::GreedyMult, params: BTreeMap::from([("t".into(), t as u64)]), kept }
}

/// Length of a shortest cycle, `None` for forests.
pub fn girth(g: &Graph) -> Option<u32> {
    let n = g.node_count();
    let best = par::map_range_init(
        n,
        || (vec![UNREACHABLE; n], vec![NodeId::MAX; n], Vec::new()),
        |(dist, parent, order), root| {
            for &v in order.iter() {
                dist[v as usize] = UNREACHABLE;
                parent[v as usize] = NodeId::MAX;
            }
            order.clear();
            let root = root as NodeId;
            dist[root as usize] = 0;
            order.push(root);
            let mut best = u32::MAX;
            let mut head = 0;
            while head < order.len() {
                let v = order[head];
                head += 1;
                let dv = dist[v as usize];
                if 2 * dv + 1 >= best {
                    break;
                }
                for &w in g.neighbors(v) {
                    if dist[w as usize] == UNREACHABLE {
                        dist[w as usize] = dv + 1;
                        parent[w as usize] = v;
                        order.push(w);
                    } else if parent[v as usize] != w {
                        best = best.min(dv + dist[w as usize] + 1);
                    }
                }
            }
            best
        },
    );
    best.into_iter().min().filter(|&b| b != u32::MAX)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuditMode {
    AllPairs,
    Sampled,
}

/// Worst stretch found by an audit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Additive(Stretch),
    Multiplicative(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpannerResult {
    pub algo: Algorithm,
    pub params: BTreeMap<String, u64>,
    pub n: usize,
    pub m_in: usize,
    pub m_out: usize,
    pub verified_bound: Bound,
    pub audit_mode: AuditMode,
    pub pairs_checked: u64,
}

/// Per source, the worst additive excess and multiplicative ratio over the
/// given targets (all nodes when `targets` is `None`).
fn worst_from(
    g: &Graph,
    kept: &EdgeMask,
    s: NodeId,
    targets: Option<&[NodeId]>,
    bfs: &mut (Bfs, Bfs),
) -> (Stretch, f64, u64) {
    bfs.0.run(g, s, None, None, None);
    bfs.1.run(g, s, Some(kept), None, None);
    let (mut add, mut mul, mut checked) = (Stretch::Finite(0), 1.0f64, 0u64);
    let mut visit = |t: NodeId| {
        let Some(d) = bfs.0.dist(t) else { return };
        if t == s {
            return;
        }
        checked += 1;
        let sub = bfs.1.dist(t);
        add = add.max(Stretch::between(d, sub));
        mul = mul.max(sub.map_or(f64::INFINITY, |x| x as f64 / d as f64));
    };
    match targets {
        Some(ts) => ts.iter().for_each(|&t| visit(t)),
        None => (0..g.node_count() as NodeId).for_each(&mut visit),
    }
    (add, mul, checked)
}

/// Exact stretch of the spanner over all pairs when `n ≤ 1500`, otherwise
/// over `extra` plus 10^4 seeded random pairs.
pub fn audit_spanner(g: &Graph, sp: &Spanner, extra: &[Pair], seed: u64) -> SpannerResult {
    let n = g.node_count();
    let (mode, groups): (AuditMode, Vec<(NodeId, Option<Vec<NodeId>>)>) = if n <= ALL_PAIRS_LIMIT {
        (AuditMode::AllPairs, (0..n as NodeId).map(|s| (s, None)).collect())
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pairs: Vec<(NodeId, NodeId)> = extra.iter().map(|p| (p.s, p.t)).collect();
        pairs.extend((0..SAMPLED_PAIRS).map(|_| (rng.random_range(0..n as NodeId), rng.random_range(0..n as NodeId))));
        pairs.sort_unstable();
        pairs.dedup();
        let mut groups: Vec<(NodeId, Option<Vec<NodeId>>)> = Vec::new();
        for (s, t) in pairs {
            match groups.last_mut() {
                Some((x, Some(ts))) if *x == s => ts.push(t),
                _ => groups.push((s, Some(vec![t]))),
            }
        }
        (AuditMode::Sampled, groups)
    };
    let rows = par::map_range_init(
        groups.len(),
        || (Bfs::new(n), Bfs::new(n)),
        |bfs, i| worst_from(g, &sp.kept, groups[i].0, groups[i].1.as_deref(), bfs),
    );
    let (mut add, mut mul, mut checked) = (Stretch::Finite(0), 1.0f64, 0u64);
    for (a, m, c) in rows {
        add = add.max(a);
        mul = mul.max(m);
        checked += c;
    }
    let verified_bound = match sp.algo {
        Algorithm::GreedyMult => Bound::Multiplicative(mul),
        _ => Bound::Additive(add),
    };
    SpannerResult {
        algo: sp.algo,
        params: sp.params.clone(),
        n,
        m_in: g.edge_count(),
        m_out: sp.kept.count(),
        verified_bound,
        audit_mode: mode,
        pairs_checked: checked,
    }
}

/// Random graph with exactly `m` edges, seeded.
pub fn random_graph(n: usize, m: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max = n * (n - 1) / 2;
    let m = m.min(max);
    let mut seen = std::collections::HashSet::new();
    while seen.len() < m {
        let a = rng.random_range(0..n as NodeId);
        let b = rng.random_range(0..n as NodeId);
        if a != b {
            seen.insert((a.min(b), a.max(b)));
        }
    }
    Graph::from_edges(n, seen).expect("simple random graph")
}

pub fn complete_graph(n: usize) -> Graph {
    let edges = (0..n as NodeId).flat_map(|a| (a + 1..n as NodeId).map(move |b| (a, b)));
    Graph::from_edges(n, edges).expect("complete graph")
}
