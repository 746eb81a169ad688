//! Adversary and incompressibility checks on obstacle products.
//!
//! Certificates are pairwise disjoint, so a subgraph that keeps fewer clique
//! edges than there are pairs must miss some pair's whole certificate, and
//! that pair is stretched by at least `k`. The family `G_T` (remove the
//! certificates of every pair in `T`) has `2^|P|` members told apart by
//! their pair distances, so no map to fewer than `|P|` bits is injective on
//! it.

use std::collections::HashMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::VerifyError;
use crate::graph::{Edge, EdgeMask, Graph, NodeId};
use crate::obstacle::ObstacleGraph;
use crate::pairs::Pair;
use crate::par;
use crate::shortest::Bfs;

/// Additive stretch; unreachable pairs have infinite stretch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stretch {
    Finite(u32),
    Infinite,
}

impl Stretch {
    pub fn between(base: u32, sub: Option<u32>) -> Stretch {
        match sub {
            Some(d) => Stretch::Finite(d.saturating_sub(base)),
            None => Stretch::Infinite,
        }
    }

    pub fn at_least(self, bound: u32) -> bool {
        match self {
            Stretch::Finite(s) => s >= bound,
            Stretch::Infinite => true,
        }
    }
}

impl fmt::Display for Stretch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stretch::Finite(s) => write!(f, "{s}"),
            Stretch::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Stretch {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Stretch::Finite(x) => s.serialize_u32(*x),
            Stretch::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Stretch {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u32),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(x) => Ok(Stretch::Finite(x)),
            Raw::S(s) if s == "inf" => Ok(Stretch::Infinite),
            Raw::S(s) => Err(serde::de::Error::custom(format!("bad stretch {s:?}"))),
        }
    }
}

/// A subgraph given as the set of kept host edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgraphMask {
    pub kept: EdgeMask,
    pub note: String,
}

impl SubgraphMask {
    pub fn full(g: &Graph) -> Self {
        SubgraphMask { kept: EdgeMask::full(g.edge_count()), note: "full graph".into() }
    }

    /// Every edge except `removed`; edges not in `g` are ignored.
    pub fn without(g: &Graph, removed: &[Edge], note: impl Into<String>) -> Self {
        let mut kept = EdgeMask::full(g.edge_count());
        for e in removed {
            if let Some(id) = g.edge_id(e.u(), e.v()) {
                kept.remove(id);
            }
        }
        SubgraphMask { kept, note: note.into() }
    }

    /// Mask of a subgraph `h` of `g` on the same node ids.
    pub fn from_subgraph(g: &Graph, h: &Graph, note: impl Into<String>) -> Self {
        let mut kept = EdgeMask::none(g.edge_count());
        for e in h.edges() {
            if let Some(id) = g.edge_id(e.u(), e.v()) {
                kept.insert(id);
            }
        }
        SubgraphMask { kept, note: note.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StretchRow {
    pub pair: usize,
    pub base_dist: Option<u32>,
    pub sub_dist: Option<u32>,
    pub stretch: Stretch,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StretchReport {
    pub rows: Vec<StretchRow>,
    pub max_stretch: Stretch,
    pub witness: Option<usize>,
    pub kept_edges: usize,
    pub kept_clique_edges: usize,
}

impl StretchReport {
    /// `pair_index,base_dist,sub_dist,stretch`, unreachable written as `inf`.
    pub fn to_csv(&self) -> String {
        let opt = |d: Option<u32>| d.map_or("inf".to_string(), |d| d.to_string());
        let mut out = String::from("pair_index,base_dist,sub_dist,stretch\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.pair, opt(r.base_dist), opt(r.sub_dist), r.stretch));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    AllPairs,
    Sample { count: usize, seed: u64 },
}

fn pick(n: usize, scope: Scope) -> Vec<usize> {
    match scope {
        Scope::AllPairs => (0..n).collect(),
        Scope::Sample { count, seed } if count < n => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut v = rand::seq::index::sample(&mut rng, n, count).into_vec();
            v.sort_unstable();
            v
        }
        Scope::Sample { .. } => (0..n).collect(),
    }
}

/// Exact distances of the chosen pairs in `g` and in the masked subgraph.
pub fn stretch_rows(g: &Graph, pairs: &[Pair], kept: &EdgeMask, scope: Scope) -> Vec<StretchRow> {
    let chosen = pick(pairs.len(), scope);
    let sub: Vec<Pair> = chosen.iter().map(|&i| pairs[i]).collect();
    let groups = crate::pairs::group_by_source(&sub);
    let per_group = par::map_range_init(
        groups.len(),
        || (Bfs::new(g.node_count()), Bfs::new(g.node_count())),
        |(full, masked), gi| {
            let (s, members) = &groups[gi];
            full.run(g, *s, None, None, None);
            masked.run(g, *s, Some(kept), None, None);
            members
                .iter()
                .map(|&j| {
                    let t = sub[j].t;
                    let (b, d) = (full.dist(t), masked.dist(t));
                    let stretch = match b {
                        Some(b) => Stretch::between(b, d),
                        None => Stretch::Finite(0),
                    };
                    StretchRow { pair: chosen[j], base_dist: b, sub_dist: d, stretch }
                })
                .collect::<Vec<_>>()
        },
    );
    let mut rows: Vec<StretchRow> = per_group.into_iter().flatten().collect();
    rows.sort_by_key(|r| r.pair);
    rows
}

pub fn stretch_audit(og: &ObstacleGraph, h: &SubgraphMask, scope: Scope) -> StretchReport {
    let rows = stretch_rows(&og.graph, &og.pairs.pairs, &h.kept, scope);
    let (max_stretch, witness) = rows
        .iter()
        .map(|r| (r.stretch, r.pair))
        .max_by_key(|&(s, p)| (s, std::cmp::Reverse(p)))
        .map_or((Stretch::Finite(0), None), |(s, p)| (s, Some(p)));
    let kept_clique_edges = h.kept.ids().filter(|&id| og.is_clique_edge(og.graph.edge(id))).count();
    StretchReport { rows, max_stretch, witness, kept_edges: h.kept.count(), kept_clique_edges }
}

fn pair_distance(bfs: &mut Bfs, g: &Graph, p: Pair, mask: Option<&EdgeMask>, limit: Option<u32>) -> Option<u32> {
    bfs.run(g, p.s, mask, Some(p.t), limit);
    bfs.dist(p.t)
}

/// The lowest-index pair whose certificate is missing from `h` entirely,
/// with its BFS-measured stretch. No guarantee is checked.
pub fn uncertified_pair(og: &ObstacleGraph, h: &SubgraphMask) -> Option<(usize, Stretch)> {
    let absent = |e: &Edge| og.graph.edge_id(e.u(), e.v()).is_none_or(|id| !h.kept.contains(id));
    let pair = (0..og.pairs.len()).find(|&i| og.certificates[i].iter().all(absent))?;
    let mut bfs = Bfs::new(og.graph.node_count());
    let p = og.pairs.pairs[pair];
    let base = pair_distance(&mut bfs, &og.graph, p, None, None).expect("pair endpoints are connected");
    Some((pair, Stretch::between(base, pair_distance(&mut bfs, &og.graph, p, Some(&h.kept), None))))
}

/// [`uncertified_pair`], re-verified against the guarantee that a pair
/// without any certificate edge is stretched by at least `k`.
///
/// # Panics
///
/// If such a pair is stretched by less than `k`: the build is broken.
pub fn counting_adversary(og: &ObstacleGraph, h: &SubgraphMask) -> Option<(usize, Stretch)> {
    let (pair, stretch) = uncertified_pair(og, h)?;
    assert!(
        stretch.at_least(og.k()),
        "construction integrity: pair {pair} lost its certificate but is stretched by only {stretch}"
    );
    Some((pair, stretch))
}

/// Every certificate edge removed, then `keep` of them put back, chosen
/// uniformly. All other edges are kept.
pub fn random_certificate_mask(og: &ObstacleGraph, keep: usize, rng: &mut impl Rng) -> SubgraphMask {
    let mut all: Vec<Edge> = og.certificates.iter().flatten().copied().collect();
    all.shuffle(rng);
    let removed = &all[keep.min(all.len())..];
    SubgraphMask::without(&og.graph, removed, format!("certificates with {keep} edges kept"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyMember {
    /// Pair indices whose certificates are removed, ascending.
    pub t: Vec<usize>,
    pub removed: Vec<Edge>,
    pub kept: EdgeMask,
}

impl FamilyMember {
    pub fn graph(&self, og: &ObstacleGraph) -> Graph {
        og.graph.restrict(&self.kept)
    }

    pub fn bits(&self) -> u64 {
        self.t.iter().fold(0, |acc, &i| acc | 1 << i)
    }
}

pub fn build_family_member(og: &ObstacleGraph, t: &[usize]) -> FamilyMember {
    let mut t = t.to_vec();
    t.sort_unstable();
    t.dedup();
    let removed: Vec<Edge> = t.iter().flat_map(|&i| og.certificates[i].iter().copied()).collect();
    FamilyMember { kept: og.mask_without(t.iter().copied()), t, removed }
}

fn member_of_bits(og: &ObstacleGraph, bits: u64) -> FamilyMember {
    let t: Vec<usize> = (0..og.pairs.len()).filter(|&i| bits >> i & 1 == 1).collect();
    build_family_member(og, &t)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyAudit {
    pub members: u64,
    /// `(T, pair)` with the pair outside `T` but not at distance `D`.
    pub outside_failures: Vec<(u64, usize, Option<u32>)>,
    /// `(T, pair)` with the pair inside `T` and distance below `separation`.
    pub inside_failures: Vec<(u64, usize, Option<u32>)>,
    pub separation: u32,
    /// Smallest distance seen for a pair inside its `T`.
    pub inside_min: Option<u32>,
}

/// Checks every family member (bitmask over pairs): pairs outside `T` sit at
/// exactly `D`, pairs inside `T` at `separation` or more.
pub fn audit_family(og: &ObstacleGraph, separation: u32, max_pairs: usize) -> Result<FamilyAudit, VerifyError> {
    let n = og.pairs.len();
    if n > max_pairs || n >= 63 {
        return Err(VerifyError::FamilyTooLarge { pairs: n });
    }
    let d = og.op_distance();
    let members = 1u64 << n;
    type Row = (Vec<(u64, usize, Option<u32>)>, Vec<(u64, usize, Option<u32>)>, Option<u32>);
    let rows: Vec<Row> = par::map_range_init(
        members as usize,
        || Bfs::new(og.graph.node_count()),
        |bfs, bits| {
            let bits = bits as u64;
            let m = member_of_bits(og, bits);
            let (mut outside, mut inside, mut min) = (Vec::new(), Vec::new(), None::<u32>);
            for (i, &p) in og.pairs.pairs.iter().enumerate() {
                if bits >> i & 1 == 1 {
                    let dist = pair_distance(bfs, &og.graph, p, Some(&m.kept), Some(separation));
                    if let Some(x) = dist {
                        min = Some(min.map_or(x, |m| m.min(x)));
                        if x < separation {
                            inside.push((bits, i, dist));
                        }
                    }
                } else {
                    let dist = pair_distance(bfs, &og.graph, p, Some(&m.kept), Some(d + 1));
                    if dist != Some(d) {
                        outside.push((bits, i, dist));
                    }
                }
            }
            (outside, inside, min)
        },
    );
    let mut audit = FamilyAudit { members, separation, ..Default::default() };
    for (o, i, m) in rows {
        audit.outside_failures.extend(o);
        audit.inside_failures.extend(i);
        if let Some(m) = m {
            audit.inside_min = Some(audit.inside_min.map_or(m, |x: u32| x.min(m)));
        }
    }
    Ok(audit)
}

/// A deterministic map from family graphs to short bit strings.
pub trait Compressor: Sync {
    fn name(&self) -> String;
    /// Output length in bits, at most 64.
    fn bits(&self) -> u32;
    fn compress(&self, og: &ObstacleGraph, kept: &EdgeMask) -> u64;
}

/// Records whether the first certificate edge of each of the first `bits`
/// pairs survives.
pub struct CertificateBitmap {
    pub bits: u32,
}

impl Compressor for CertificateBitmap {
    fn name(&self) -> String {
        format!("certificate-bitmap/{}", self.bits)
    }

    fn bits(&self) -> u32 {
        self.bits
    }

    fn compress(&self, og: &ObstacleGraph, kept: &EdgeMask) -> u64 {
        let mut out = 0;
        for (i, cert) in og.certificates.iter().take(self.bits as usize).enumerate() {
            let e = cert[0];
            if og.graph.edge_id(e.u(), e.v()).is_some_and(|id| kept.contains(id)) {
                out |= 1 << i;
            }
        }
        out
    }
}

/// A seeded linear hash over GF(2): each edge id gets a random word, the
/// code is the XOR of the words of the removed edges, truncated.
pub struct UniversalHash {
    pub bits: u32,
    pub words: Vec<u64>,
}

impl UniversalHash {
    pub fn new(edge_count: usize, bits: u32, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        UniversalHash { bits, words: (0..edge_count).map(|_| rng.random()).collect() }
    }
}

impl Compressor for UniversalHash {
    fn name(&self) -> String {
        format!("universal-hash/{}", self.bits)
    }

    fn bits(&self) -> u32 {
        self.bits
    }

    fn compress(&self, og: &ObstacleGraph, kept: &EdgeMask) -> u64 {
        let mut h = 0u64;
        for id in 0..og.graph.edge_count() as u32 {
            if !kept.contains(id) {
                h ^= self.words[id as usize];
            }
        }
        if self.bits >= 64 { h } else { h & ((1 << self.bits) - 1) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    Exhaustive,
    Sampled { samples: u64, seed: u64 },
}

impl SearchMode {
    /// Exhaustive up to 20 pairs, sampled above.
    pub fn auto(pairs: usize, seed: u64) -> Self {
        if pairs <= 20 { SearchMode::Exhaustive } else { SearchMode::Sampled { samples: 1 << 20, seed } }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollisionWitness {
    pub compressor: String,
    pub code: u64,
    pub t1: Vec<usize>,
    pub t2: Vec<usize>,
    /// Pair in the symmetric difference with the largest distance gap.
    pub pair: usize,
    /// Distance in the member whose `T` contains the pair.
    pub dist_inside: Option<u32>,
    /// Distance in the other member.
    pub dist_outside: Option<u32>,
    pub gap: Stretch,
    pub searched: u64,
}

/// Finds two family members with the same code and the pair that tells
/// them apart by the widest margin.
pub fn pigeonhole_demo(
    og: &ObstacleGraph,
    bit_budget: u32,
    compressor: &dyn Compressor,
    mode: SearchMode,
) -> Result<CollisionWitness, VerifyError> {
    if compressor.bits() > bit_budget {
        return Err(VerifyError::OverBudget { bits: compressor.bits(), budget: bit_budget });
    }
    let n = og.pairs.len();
    if n >= 64 {
        return Err(VerifyError::FamilyTooLarge { pairs: n });
    }
    let candidates: Vec<u64> = match mode {
        SearchMode::Exhaustive => {
            if n > 30 {
                return Err(VerifyError::FamilyTooLarge { pairs: n });
            }
            (0..1u64 << n).collect()
        }
        SearchMode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let top = if n == 0 { 0 } else { u64::MAX >> (64 - n) };
            (0..samples).map(|_| rng.random::<u64>() & top).collect()
        }
    };
    let codes = par::map_range(candidates.len(), |i| {
        compressor.compress(og, &member_of_bits(og, candidates[i]).kept)
    });
    let mut seen: HashMap<u64, u64> = HashMap::new();
    let mut collision = None;
    for (searched, (&bits, &code)) in candidates.iter().zip(&codes).enumerate() {
        match seen.get(&code) {
            Some(&other) if other != bits => {
                collision = Some((other, bits, code, searched as u64 + 1));
                break;
            }
            Some(_) => {}
            None => {
                seen.insert(code, bits);
            }
        }
    }
    let Some((b1, b2, code, searched)) = collision else {
        return Err(VerifyError::Inconclusive { searched: candidates.len() as u64 });
    };

    let (m1, m2) = (member_of_bits(og, b1), member_of_bits(og, b2));
    let mut bfs = Bfs::new(og.graph.node_count());
    let mut best: Option<(Stretch, usize, Option<u32>, Option<u32>)> = None;
    for i in 0..n {
        let (in1, in2) = (b1 >> i & 1 == 1, b2 >> i & 1 == 1);
        if in1 == in2 {
            continue;
        }
        let (inside, outside) = if in1 { (&m1, &m2) } else { (&m2, &m1) };
        let p = og.pairs.pairs[i];
        let din = pair_distance(&mut bfs, &og.graph, p, Some(&inside.kept), None);
        let dout = pair_distance(&mut bfs, &og.graph, p, Some(&outside.kept), None);
        let gap = Stretch::between(dout.unwrap_or(0), din);
        if best.is_none_or(|(g, ..)| gap > g) {
            best = Some((gap, i, din, dout));
        }
    }
    let (gap, pair, dist_inside, dist_outside) = best.expect("distinct members differ in some pair");
    Ok(CollisionWitness {
        compressor: compressor.name(),
        code,
        t1: m1.t,
        t2: m2.t,
        pair,
        dist_inside,
        dist_outside,
        gap,
        searched,
    })
}

/// Node ids of the canonical path of a pair, for display.
pub fn canonical_nodes(og: &ObstacleGraph, pair: usize) -> &[NodeId] {
    og.pairs.paths[pair].nodes()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::avgfree::AvgFreeSet;
    use crate::base::build_base;
    use crate::compress::DEFAULT_NODE_CEILING;
    use crate::obstacle::build_op;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn op() -> &'static ObstacleGraph {
        static OP: OnceLock<ObstacleGraph> = OnceLock::new();
        OP.get_or_init(|| {
            let a = AvgFreeSet::from_elements(2, 2, vec![1, 2]).unwrap();
            let (g, set) = build_base(&a).unwrap();
            build_op(&g.graph, &set, 2, &g.params, DEFAULT_NODE_CEILING).unwrap()
        })
    }

    #[test]
    fn identity_mask_has_no_stretch() {
        let og = op();
        let r = stretch_audit(og, &SubgraphMask::full(&og.graph), Scope::AllPairs);
        assert_eq!(r.max_stretch, Stretch::Finite(0));
        assert!(r.rows.iter().all(|row| row.base_dist == Some(13)));
        assert_eq!(r.kept_clique_edges, og.clique_edge_count());
    }

    #[test]
    fn removing_a_certificate_stretches_only_its_pair() {
        let og = op();
        let h = SubgraphMask::without(&og.graph, &og.certificates[0], "pair 0");
        let r = stretch_audit(og, &h, Scope::AllPairs);
        assert!(r.rows[0].stretch.at_least(og.k()));
        assert!(r.rows[1..].iter().all(|row| row.stretch == Stretch::Finite(0)));
        assert_eq!(r.witness, Some(0));
        assert!(r.to_csv().starts_with("pair_index,base_dist,sub_dist,stretch\n0,13,"));
    }

    #[test]
    fn removing_a_non_certificate_clique_edge_is_harmless() {
        let og = op();
        let certs: Vec<Edge> = og.certificates.iter().flatten().copied().collect();
        let e = *og.graph.edges().iter().find(|&&e| og.is_clique_edge(e) && !certs.contains(&e)).unwrap();
        let r = stretch_audit(og, &SubgraphMask::without(&og.graph, &[e], "one"), Scope::AllPairs);
        assert_eq!(r.max_stretch, Stretch::Finite(0));
    }

    #[test]
    fn adversary_finds_a_pair_without_certificate() {
        let og = op();
        let none = SubgraphMask::without(&og.graph, &og.certificates.concat(), "no certificates");
        let (_, s) = counting_adversary(og, &none).unwrap();
        assert!(s.at_least(og.k()));
        assert_eq!(counting_adversary(og, &SubgraphMask::full(&og.graph)), None);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let h = random_certificate_mask(og, og.pairs.len() - 1, &mut rng);
            assert!(counting_adversary(og, &h).is_some());
        }
    }

    #[test]
    fn family_member_edges() {
        let og = op();
        assert_eq!(build_family_member(og, &[]).kept, EdgeMask::full(og.graph.edge_count()));
        let m = build_family_member(og, &[2, 0]);
        assert_eq!(m.t, vec![0, 2]);
        assert_eq!(m.removed.len(), 2 * og.k() as usize);
        assert_eq!(m.graph(og).edge_count(), og.graph.edge_count() - m.removed.len());
        assert_eq!(m.bits(), 0b101);
    }

    #[test]
    fn family_outside_pairs_stay_at_d() {
        let og = op();
        let audit = audit_family(og, og.op_distance() + og.k(), 20).unwrap();
        assert_eq!(audit.members, 16);
        assert!(audit.outside_failures.is_empty());
        assert!(audit.inside_failures.is_empty());
    }

    #[test]
    fn truncated_bitmap_collides() {
        let og = op();
        let w = pigeonhole_demo(og, 2, &CertificateBitmap { bits: 2 }, SearchMode::Exhaustive).unwrap();
        assert_eq!(w.code, 0b11);
        assert_eq!((w.t1.clone(), w.t2.clone()), (vec![], vec![2]));
        assert!(w.gap.at_least(og.k()));
        assert_eq!(w.dist_outside, Some(og.op_distance()));
    }

    #[test]
    fn identity_compressor_is_inconclusive() {
        let og = op();
        let n = og.pairs.len() as u32;
        let r = pigeonhole_demo(og, n, &CertificateBitmap { bits: n }, SearchMode::Exhaustive);
        assert_eq!(r, Err(VerifyError::Inconclusive { searched: 16 }));
        let r = pigeonhole_demo(og, 1, &CertificateBitmap { bits: 2 }, SearchMode::Exhaustive);
        assert!(matches!(r, Err(VerifyError::OverBudget { .. })));
    }

    #[test]
    fn hash_compressor_collides() {
        let og = op();
        let h = UniversalHash::new(og.graph.edge_count(), 3, 7);
        let w = pigeonhole_demo(og, 3, &h, SearchMode::Exhaustive).unwrap();
        assert_ne!(w.t1, w.t2);
        assert!(w.searched <= 9);
    }

    #[test]
    fn stretch_serde() {
        let s = serde_json::to_string(&[Stretch::Finite(3), Stretch::Infinite]).unwrap();
        assert_eq!(s, r#"[3,"inf"]"#);
        let back: Vec<Stretch> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![Stretch::Finite(3), Stretch::Infinite]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn deletions_commute(a in 0u64..16, b in 0u64..16) {
            let og = op();
            let union = member_of_bits(og, a | b);
            let mut stepwise = member_of_bits(og, a).kept;
            let other = member_of_bits(og, b);
            for id in 0..og.graph.edge_count() as u32 {
                if !other.kept.contains(id) {
                    stepwise.remove(id);
                }
            }
            prop_assert_eq!(union.kept, stepwise);
        }

        #[test]
        fn stretch_is_monotone(seed in any::<u64>(), drop in 1usize..40) {
            let og = op();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut ids: Vec<u32> = (0..og.graph.edge_count() as u32).collect();
            ids.shuffle(&mut rng);
            let mut small = EdgeMask::full(og.graph.edge_count());
            let mut smaller = small.clone();
            for (j, &id) in ids.iter().take(drop * 2).enumerate() {
                smaller.remove(id);
                if j < drop {
                    small.remove(id);
                }
            }
            let r1 = stretch_rows(&og.graph, &og.pairs.pairs, &small, Scope::AllPairs);
            let r2 = stretch_rows(&og.graph, &og.pairs.pairs, &smaller, Scope::AllPairs);
            for (x, y) in r1.iter().zip(&r2) {
                prop_assert!(x.stretch <= y.stretch);
            }
        }

        #[test]
        fn pairs_outside_t_keep_distance_d(bits in 0u64..16) {
            let og = op();
            let m = member_of_bits(og, bits);
            let mut bfs = Bfs::new(og.graph.node_count());
            for (i, &p) in og.pairs.pairs.iter().enumerate() {
                let d = pair_distance(&mut bfs, &og.graph, p, Some(&m.kept), None);
                if bits >> i & 1 == 0 {
                    prop_assert_eq!(d, Some(og.op_distance()));
                } else {
                    prop_assert!(d.is_none_or(|d| d >= og.op_distance() + og.k()));
                }
            }
        }
    }
}
