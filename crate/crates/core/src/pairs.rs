//! Designated node pairs with their canonical paths, and the audits shared
//! by every stage: exact pair distances with uniqueness, edge overlap and
//! 2-path overlap between canonical paths.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::graph::{Edge, Graph, NodeId, Path};
use crate::par;
use crate::shortest::{Bfs, Multiplicity, PathCount};

/// How a pair was generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairTag {
    /// `s = (start_x, 0)`, `t = (start_x + k·witness_a, k)`.
    Base { start_x: u64, witness_a: u64 },
    /// Ordered pair of base pair indices.
    Product { first: usize, second: usize },
    /// Index of the host pair this obstacle-product pair came from.
    Obstacle { host_pair: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pair {
    pub s: NodeId,
    pub t: NodeId,
    pub tag: PairTag,
}

/// Pairs and one canonical path per pair (same index).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PairSet {
    pub pairs: Vec<Pair>,
    pub paths: Vec<Path>,
}

impl PairSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pair indices grouped by source node, sources ascending.
    pub fn by_source(&self) -> Vec<(NodeId, Vec<usize>)> {
        group_by_source(&self.pairs)
    }
}

pub(crate) fn group_by_source(pairs: &[Pair]) -> Vec<(NodeId, Vec<usize>)> {
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by_key(|&i| (pairs[i].s, i));
    let mut groups: Vec<(NodeId, Vec<usize>)> = Vec::new();
    for i in order {
        match groups.last_mut() {
            Some((s, members)) if *s == pairs[i].s => members.push(i),
            _ => groups.push((pairs[i].s, vec![i])),
        }
    }
    groups
}

/// The measured state of one pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairFinding {
    pub pair: usize,
    pub expected: u32,
    pub dist: Option<u32>,
    pub multiplicity: Multiplicity,
    /// Whether the stored canonical path is a valid path of the expected
    /// length between the pair's endpoints.
    pub canonical_ok: bool,
}

impl PairFinding {
    pub fn distance_ok(&self) -> bool {
        self.dist == Some(self.expected) && self.canonical_ok
    }
}

/// Splits findings into (uniqueness failures, distance failures). A pair at
/// the wrong distance is reported only as a distance failure.
pub fn classify(findings: Vec<PairFinding>, require_unique: bool) -> (Vec<PairFinding>, Vec<PairFinding>) {
    let mut unique = Vec::new();
    let mut distance = Vec::new();
    for f in findings {
        if !f.distance_ok() {
            distance.push(f);
        } else if require_unique && f.multiplicity != Multiplicity::One {
            unique.push(f);
        }
    }
    (unique, distance)
}

pub(crate) fn canonical_ok(g: &Graph, pair: &Pair, path: Option<&Path>, expected: u32) -> bool {
    match path {
        Some(p) => {
            p.len() == expected as usize
                && p.first() == Some(pair.s)
                && p.last() == Some(pair.t)
                && p.validate(g).is_ok()
        }
        None => true,
    }
}

/// Runs one counting BFS per distinct source and measures every pair.
/// `expected` gives the target distance of each pair.
pub fn measure_pairs(g: &Graph, set: &PairSet, expected: &(dyn Fn(usize) -> u32 + Sync)) -> Vec<PairFinding> {
    let groups = set.by_source();
    let per_group = par::map_range_init(
        groups.len(),
        || Bfs::new(g.node_count()),
        |bfs, gi| {
            let (s, members) = &groups[gi];
            bfs.run_counting(g, *s, None);
            members
                .iter()
                .map(|&i| {
                    let pair = &set.pairs[i];
                    let PathCount { dist, multiplicity } = bfs.path_count(pair.t);
                    PairFinding {
                        pair: i,
                        expected: expected(i),
                        dist,
                        multiplicity,
                        canonical_ok: canonical_ok(g, pair, set.paths.get(i), expected(i)),
                    }
                })
                .collect::<Vec<_>>()
        },
    );
    let mut out: Vec<PairFinding> = per_group.into_iter().flatten().collect();
    out.sort_by_key(|f| f.pair);
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeOverlap {
    pub edge: Edge,
    pub first: usize,
    pub second: usize,
}

/// Every edge that appears on the canonical paths of two different pairs.
pub fn edge_overlaps(paths: &[Path]) -> Vec<EdgeOverlap> {
    let mut owner: HashMap<Edge, usize> = HashMap::new();
    let mut out = Vec::new();
    for (i, p) in paths.iter().enumerate() {
        for e in p.edges() {
            match owner.get(&e) {
                Some(&j) if j != i => out.push(EdgeOverlap { edge: e, first: j, second: i }),
                Some(_) => {}
                None => {
                    owner.insert(e, i);
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoPathOverlap {
    pub two_path: [NodeId; 3],
    pub first: usize,
    pub second: usize,
}

/// Orientation-free key of a 2-path.
pub fn two_path_key(t: [NodeId; 3]) -> [NodeId; 3] {
    let rev = [t[2], t[1], t[0]];
    t.min(rev)
}

/// Every 2-path (two consecutive edges) shared by the canonical paths of
/// two different pairs. Per-path extraction runs in parallel; the registry
/// is merged by a single writer.
pub fn two_path_overlaps(paths: &[Path]) -> Vec<TwoPathOverlap> {
    let extracted = par::map_range(paths.len(), |i| {
        paths[i].two_paths().map(two_path_key).collect::<Vec<_>>()
    });
    let mut owner: HashMap<[NodeId; 3], usize> = HashMap::new();
    let mut out = Vec::new();
    for (i, keys) in extracted.into_iter().enumerate() {
        for key in keys {
            match owner.get(&key) {
                Some(&j) if j != i => out.push(TwoPathOverlap { two_path: key, first: j, second: i }),
                Some(_) => {}
                None => {
                    owner.insert(key, i);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlaps_are_found_once_per_repeat() {
        let paths = vec![Path(vec![0, 1, 2]), Path(vec![3, 1, 2]), Path(vec![2, 1, 0])];
        let e = edge_overlaps(&paths);
        assert_eq!(
            e,
            vec![
                EdgeOverlap { edge: Edge::new(1, 2), first: 0, second: 1 },
                EdgeOverlap { edge: Edge::new(1, 2), first: 0, second: 2 },
                EdgeOverlap { edge: Edge::new(0, 1), first: 0, second: 2 },
            ]
        );
        let t = two_path_overlaps(&paths);
        assert_eq!(t, vec![TwoPathOverlap { two_path: [0, 1, 2], first: 0, second: 2 }]);
    }

    #[test]
    fn sharing_a_node_is_not_an_overlap() {
        let paths = vec![Path(vec![0, 1, 2]), Path(vec![3, 1, 4])];
        assert!(edge_overlaps(&paths).is_empty());
        assert!(two_path_overlaps(&paths).is_empty());
    }

    #[test]
    fn measure_flags_wrong_distance() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let set = PairSet {
            pairs: vec![
                Pair { s: 0, t: 2, tag: PairTag::Obstacle { host_pair: 0 } },
                Pair { s: 0, t: 1, tag: PairTag::Obstacle { host_pair: 1 } },
            ],
            paths: vec![Path(vec![0, 1, 2]), Path(vec![0, 1])],
        };
        let found = measure_pairs(&g, &set, &|i| [2, 2][i]);
        let (unique, distance) = classify(found, true);
        assert_eq!(unique.len(), 1);
        assert_eq!(unique[0].multiplicity, Multiplicity::Many);
        assert_eq!(distance.len(), 1);
        assert_eq!((distance[0].pair, distance[0].dist), (1, Some(1)));
    }
}
