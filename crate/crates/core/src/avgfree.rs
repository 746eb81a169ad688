//! k-average-free integer sets from constant-norm lattice shells.
//!
//! The vectors of `[p]^d` are grouped by squared Euclidean norm. One shell
//! (all vectors of a fixed norm) is encoded digit-wise in base `q = (k+1)p`.
//! A sum of at most `k` shell vectors has coordinates below `q`, so the
//! encoding carries no digits and sums commute with it; since the average
//! of distinct points on a sphere lies strictly inside it, no non-constant
//! k-multiset of the shell averages to a shell point.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::AvgFreeError;
use crate::par;

/// Refuse to enumerate lattice cubes larger than this.
pub const MAX_CUBE: u64 = 50_000_000;

/// Default tuple budget for exhaustive verification.
pub const DEFAULT_TUPLE_BUDGET: u128 = 100_000_000;

/// At most this many violations are collected before stopping.
pub const MAX_REPORTED_VIOLATIONS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shell {
    pub p: u64,
    pub d: u32,
    pub r_star: u64,
    pub vectors: Vec<Vec<u64>>,
    /// Shell size for every squared norm that occurs.
    pub sizes: BTreeMap<u64, usize>,
}

/// Picks the most populated squared-norm shell of `[p]^d` (coordinates
/// `1..=p`), breaking ties towards the smallest norm.
pub fn build_shell(p: u64, d: u32) -> Result<Shell, AvgFreeError> {
    if p < 1 || d < 1 {
        return Err(AvgFreeError::InvalidParameter(format!("need p >= 1, d >= 1 (p={p}, d={d})")));
    }
    let cube = p.checked_pow(d).filter(|&c| c <= MAX_CUBE).ok_or_else(|| {
        AvgFreeError::InvalidParameter(format!("[{p}]^{d} has more than {MAX_CUBE} vectors"))
    })?;
    let mut sizes = BTreeMap::new();
    let mut v = vec![1u64; d as usize];
    for _ in 0..cube {
        *sizes.entry(norm2(&v)).or_insert(0usize) += 1;
        advance(&mut v, p);
    }
    let (&r_star, _) = sizes
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .expect("cube is non-empty");
    let mut vectors = Vec::with_capacity(sizes[&r_star]);
    let mut v = vec![1u64; d as usize];
    for _ in 0..cube {
        if norm2(&v) == r_star {
            vectors.push(v.clone());
        }
        advance(&mut v, p);
    }
    Ok(Shell { p, d, r_star, vectors, sizes })
}

fn norm2(v: &[u64]) -> u64 {
    v.iter().map(|x| x * x).sum()
}

/// Odometer over `[1, p]^d`, first coordinate fastest.
fn advance(v: &mut [u64], p: u64) {
    for x in v.iter_mut() {
        if *x < p {
            *x += 1;
            return;
        }
        *x = 1;
    }
}

/// `f(v) = Σ v_j q^{j−1}` with `q = (k+1)p`.
pub fn encode_vector(v: &[u64], k: u32, p: u64) -> Result<u64, AvgFreeError> {
    let q = (k as u64 + 1) * p;
    let mut out = 0u64;
    let mut place = 1u64;
    for (index, &value) in v.iter().enumerate() {
        if value < 1 || value > p {
            return Err(AvgFreeError::CoordinateOutOfRange { index, value, p });
        }
        out += value * place;
        place = place.saturating_mul(q);
    }
    Ok(out)
}

/// Where a set came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Shell { p: u64, d: u32, r_star: u64, q: u64 },
    Handcrafted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AvgFreeSet {
    pub universe: u64,
    pub k: u32,
    pub elements: Vec<u64>,
    pub provenance: Provenance,
}

/// JSON form: `{N, k, p, d, r_star, elements}` (shell fields null for
/// handcrafted sets).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AvgFreeJson {
    #[serde(rename = "N")]
    pub universe: u64,
    pub k: u32,
    pub p: Option<u64>,
    pub d: Option<u32>,
    pub r_star: Option<u64>,
    pub elements: Vec<u64>,
}

impl AvgFreeSet {
    /// A handcrafted set; elements are sorted and must be distinct and lie
    /// in `[1, universe]`.
    pub fn from_elements(universe: u64, k: u32, mut elements: Vec<u64>) -> Result<Self, AvgFreeError> {
        if k < 1 {
            return Err(AvgFreeError::InvalidParameter("k must be at least 1".into()));
        }
        elements.sort_unstable();
        if elements.windows(2).any(|w| w[0] == w[1]) {
            return Err(AvgFreeError::InvalidParameter("elements must be distinct".into()));
        }
        if let Some(&bad) = elements.iter().find(|&&x| x < 1 || x > universe) {
            return Err(AvgFreeError::InvalidParameter(format!("{bad} outside [1, {universe}]")));
        }
        Ok(AvgFreeSet { universe, k, elements, provenance: Provenance::Handcrafted })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    pub fn to_json(&self) -> AvgFreeJson {
        let (p, d, r_star) = match self.provenance {
            Provenance::Shell { p, d, r_star, .. } => (Some(p), Some(d), Some(r_star)),
            Provenance::Handcrafted => (None, None, None),
        };
        AvgFreeJson { universe: self.universe, k: self.k, p, d, r_star, elements: self.elements.clone() }
    }
}

/// Encodes the largest shell of `[p]^d` into `[((k+1)p)^d]`. `size_cap`
/// optionally keeps only the smallest elements; any subset of an
/// average-free set is average-free.
pub fn build_avgfree(p: u64, d: u32, k: u32, size_cap: Option<usize>) -> Result<AvgFreeSet, AvgFreeError> {
    if p < 2 || k < 1 {
        return Err(AvgFreeError::InvalidParameter(format!("need p >= 2, k >= 1 (p={p}, k={k})")));
    }
    let q = (k as u64 + 1) * p;
    let universe = q.checked_pow(d).ok_or_else(|| {
        AvgFreeError::InvalidParameter(format!("universe ({q})^{d} overflows"))
    })?;
    let shell = build_shell(p, d)?;
    let mut elements = shell
        .vectors
        .iter()
        .map(|v| encode_vector(v, k, p))
        .collect::<Result<Vec<_>, _>>()?;
    elements.sort_unstable();
    if let Some(cap) = size_cap {
        elements.truncate(cap);
    }
    Ok(AvgFreeSet {
        universe,
        k,
        elements,
        provenance: Provenance::Shell { p, d, r_star: shell.r_star, q },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyMode {
    Exhaustive { budget: u128 },
    Sampled { trials: u64, seed: u64 },
}

impl VerifyMode {
    pub fn exhaustive() -> Self {
        VerifyMode::Exhaustive { budget: DEFAULT_TUPLE_BUDGET }
    }
}

/// A k-multiset of elements, not all equal, whose mean is an element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub tuple: Vec<u64>,
    pub mean: u64,
}

/// Searches for non-constant k-multisets whose mean lies in the set.
/// Exhaustive mode is exact but refuses when `|A|^k` exceeds the budget.
pub fn verify_avgfree(a: &AvgFreeSet, mode: VerifyMode) -> Result<Vec<Violation>, AvgFreeError> {
    let k = a.k as usize;
    let n = a.elements.len();
    if n == 0 || k == 0 {
        return Ok(Vec::new());
    }
    match mode {
        VerifyMode::Exhaustive { budget } => {
            let required = (n as u128).checked_pow(a.k).unwrap_or(u128::MAX);
            if required > budget {
                return Err(AvgFreeError::BudgetExceeded { required, budget });
            }
            let per_first = par::map_range(n, |first| {
                let mut found = Vec::new();
                let mut idx = vec![first; k];
                multisets_from(a, &mut idx, 1, a.elements[first], &mut found);
                found
            });
            let mut out: Vec<Violation> = per_first.into_iter().flatten().collect();
            out.truncate(MAX_REPORTED_VIOLATIONS);
            Ok(out)
        }
        VerifyMode::Sampled { trials, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut out = Vec::new();
            let mut tuple = vec![0u64; k];
            for _ in 0..trials {
                for x in tuple.iter_mut() {
                    *x = a.elements[rng.random_range(0..n)];
                }
                if let Some(mean) = violating_mean(a, &tuple) {
                    let mut sorted = tuple.clone();
                    sorted.sort_unstable();
                    let v = Violation { tuple: sorted, mean };
                    if !out.contains(&v) {
                        out.push(v);
                        if out.len() >= MAX_REPORTED_VIOLATIONS {
                            break;
                        }
                    }
                }
            }
            Ok(out)
        }
    }
}

/// Enumerates non-decreasing index tuples with `idx[0]` fixed.
fn multisets_from(a: &AvgFreeSet, idx: &mut [usize], pos: usize, sum: u64, found: &mut Vec<Violation>) {
    if found.len() >= MAX_REPORTED_VIOLATIONS {
        return;
    }
    if pos == idx.len() {
        let k = idx.len() as u64;
        if sum.is_multiple_of(k) && idx[0] != idx[idx.len() - 1] && a.contains(sum / k) {
            found.push(Violation { tuple: idx.iter().map(|&i| a.elements[i]).collect(), mean: sum / k });
        }
        return;
    }
    for i in idx[pos - 1]..a.elements.len() {
        idx[pos] = i;
        multisets_from(a, idx, pos + 1, sum + a.elements[i], found);
    }
}

fn violating_mean(a: &AvgFreeSet, tuple: &[u64]) -> Option<u64> {
    let k = tuple.len() as u64;
    let sum: u64 = tuple.iter().sum();
    let all_equal = tuple.iter().all(|&x| x == tuple[0]);
    (!all_equal && sum.is_multiple_of(k) && a.contains(sum / k)).then_some(sum / k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(universe: u64, k: u32, elements: &[u64]) -> AvgFreeSet {
        AvgFreeSet::from_elements(universe, k, elements.to_vec()).unwrap()
    }

    #[test]
    fn shell_p2_d3() {
        let s = build_shell(2, 3).unwrap();
        assert_eq!(s.sizes, BTreeMap::from([(3, 1), (6, 3), (9, 3), (12, 1)]));
        assert_eq!(s.r_star, 6);
        assert_eq!(s.vectors.len(), 3);
    }

    #[test]
    fn shell_degenerate_p1() {
        let s = build_shell(1, 4).unwrap();
        assert_eq!(s.vectors, vec![vec![1, 1, 1, 1]]);
    }

    #[test]
    fn shell_p3_d2() {
        let s = build_shell(3, 2).unwrap();
        assert_eq!(s.r_star, 5);
        assert_eq!(s.vectors, vec![vec![2, 1], vec![1, 2]]);
    }

    #[test]
    fn encode_examples() {
        assert_eq!(encode_vector(&[1, 1, 1], 2, 2).unwrap(), 43);
        assert_eq!(encode_vector(&[2, 2], 2, 2).unwrap(), 14);
        assert_eq!(
            encode_vector(&[1, 3], 2, 2),
            Err(AvgFreeError::CoordinateOutOfRange { index: 1, value: 3, p: 2 })
        );
        assert!(encode_vector(&[0], 2, 2).is_err());
    }

    #[test]
    fn build_small_sets() {
        let a = build_avgfree(2, 3, 2, None).unwrap();
        assert_eq!((a.len(), a.universe), (3, 216));
        let b = build_avgfree(2, 2, 2, None).unwrap();
        assert_eq!((b.elements.clone(), b.universe), (vec![8, 13], 36));
        assert_eq!(b.provenance, Provenance::Shell { p: 2, d: 2, r_star: 5, q: 6 });
        let capped = build_avgfree(2, 3, 2, Some(2)).unwrap();
        assert_eq!(capped.elements, a.elements[..2]);
    }

    #[test]
    fn verify_examples() {
        assert!(verify_avgfree(&set(2, 2, &[1, 2]), VerifyMode::exhaustive()).unwrap().is_empty());
        let bad = verify_avgfree(&set(3, 2, &[1, 2, 3]), VerifyMode::exhaustive()).unwrap();
        assert_eq!(bad, vec![Violation { tuple: vec![1, 3], mean: 2 }]);
        for k in 1..6 {
            assert!(verify_avgfree(&set(9, k, &[7]), VerifyMode::exhaustive()).unwrap().is_empty());
        }
    }

    #[test]
    fn sampled_finds_dense_violations() {
        let a = set(10, 2, &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10]);
        let found = verify_avgfree(&a, VerifyMode::Sampled { trials: 200, seed: 7 }).unwrap();
        assert!(!found.is_empty());
        for v in found {
            assert_eq!(v.tuple.iter().sum::<u64>(), 2 * v.mean);
        }
    }

    #[test]
    fn budget_refusal() {
        let a = build_avgfree(6, 3, 5, None).unwrap();
        let err = verify_avgfree(&a, VerifyMode::Exhaustive { budget: 10 }).unwrap_err();
        assert!(matches!(err, AvgFreeError::BudgetExceeded { budget: 10, .. }));
    }

    #[test]
    fn handcrafted_validation() {
        assert!(AvgFreeSet::from_elements(2, 2, vec![1, 3]).is_err());
        assert!(AvgFreeSet::from_elements(5, 2, vec![2, 2]).is_err());
        assert!(AvgFreeSet::from_elements(5, 0, vec![2]).is_err());
        assert_eq!(set(5, 2, &[4, 1]).elements, vec![1, 4]);
    }

    #[test]
    fn json_shape() {
        let j = serde_json::to_value(build_avgfree(2, 2, 2, None).unwrap().to_json()).unwrap();
        assert_eq!(
            j,
            serde_json::json!({"N": 36, "k": 2, "p": 2, "d": 2, "r_star": 5, "elements": [8, 13]})
        );
    }
}
