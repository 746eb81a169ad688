//! Text and JSON artifact formats.
//!
//! - `graph.edges`: `n <count>`, then one `u v` line per edge with `u < v`,
//!   ascending.
//! - `labels.json`: object from node id to role string (`B:x:j`,
//!   `P:u1:u2:i`, `E:e:i`, `K:v:e`).
//! - `pairs.txt`: `s t` followed by the pair's tag fields: `a x` for base
//!   pairs, `first second` for product pairs, `host_pair` for obstacle
//!   pairs.
//! - `certificates.txt`: `pair_index : u1 v1 ; u2 v2 ; …`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path as FsPath;

use sha2::{Digest, Sha256};

use crate::error::FormatError;
use crate::graph::{Edge, Graph, NodeId};
use crate::labels::{NodeLabelTable, NodeRole};
use crate::pairs::{Pair, PairTag};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn read_text(path: &FsPath) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.display().to_string(), source })
}

pub fn write_text(path: &FsPath, text: &str) -> Result<(), FormatError> {
    fs::write(path, text).map_err(|source| FormatError::Io { path: path.display().to_string(), source })
}

pub fn write_edges(g: &Graph) -> String {
    let mut out = String::with_capacity(16 * g.edge_count() + 16);
    out.push_str(&format!("n {}\n", g.node_count()));
    for e in g.edges() {
        out.push_str(&format!("{} {}\n", e.u(), e.v()));
    }
    out
}

fn numbers<T: std::str::FromStr>(file: &str, line: usize, text: &str) -> Result<Vec<T>, FormatError> {
    text.split_whitespace()
        .map(|tok| tok.parse().map_err(|_| FormatError::parse(file, line, format!("bad number {tok:?}"))))
        .collect()
}

/// Parses an edge list. Edges may appear in any order; the header must
/// come first.
pub fn parse_edges(file: &str, text: &str) -> Result<Graph, FormatError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| FormatError::parse(file, 1, "missing `n <count>` header"))?;
    let n: usize = header
        .strip_prefix("n ")
        .and_then(|rest| rest.trim().parse().ok())
        .ok_or_else(|| FormatError::parse(file, 1, "missing `n <count>` header"))?;
    let mut edges = Vec::new();
    for (i, line) in lines {
        match numbers::<NodeId>(file, i + 1, line)?.as_slice() {
            &[u, v] => edges.push((u, v)),
            _ => return Err(FormatError::parse(file, i + 1, "expected `u v`")),
        }
    }
    Ok(Graph::from_edges(n, edges)?)
}

pub fn write_labels(labels: &NodeLabelTable) -> String {
    let mut s = serde_json::to_string(&labels.to_json_map()).expect("string map serialises");
    s.push('\n');
    s
}

pub fn parse_labels(file: &str, text: &str, node_count: usize) -> Result<NodeLabelTable, FormatError> {
    let map: BTreeMap<NodeId, String> =
        serde_json::from_str(text).map_err(|source| FormatError::Json { file: file.to_string(), source })?;
    if map.len() != node_count || map.keys().enumerate().any(|(i, &k)| i as NodeId != k) {
        return Err(FormatError::parse(file, 1, format!("labels must cover ids 0..{node_count} exactly")));
    }
    let roles = map
        .iter()
        .map(|(id, s)| s.parse::<NodeRole>().map_err(|e| FormatError::parse(file, 1, format!("node {id}: {}", e.0))))
        .collect::<Result<Vec<_>, _>>()?;
    NodeLabelTable::new(roles).map_err(|(a, b)| FormatError::parse(file, 1, format!("nodes {a} and {b} share a label")))
}

pub fn write_pairs(pairs: &[Pair]) -> String {
    let mut out = String::new();
    for p in pairs {
        let tag = match p.tag {
            PairTag::Base { start_x, witness_a } => format!("{witness_a} {start_x}"),
            PairTag::Product { first, second } => format!("{first} {second}"),
            PairTag::Obstacle { host_pair } => format!("{host_pair}"),
        };
        out.push_str(&format!("{} {} {}\n", p.s, p.t, tag));
    }
    out
}

/// The kind of tag carried by a pairs file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairKind {
    Base,
    Product,
    Obstacle,
}

pub fn parse_pairs(file: &str, text: &str, kind: PairKind) -> Result<Vec<Pair>, FormatError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let nums = numbers::<u64>(file, i + 1, line)?;
        let node = |x: u64| NodeId::try_from(x).map_err(|_| FormatError::parse(file, i + 1, "node id too large"));
        let tag = match (kind, nums.as_slice()) {
            (PairKind::Base, &[_, _, a, x]) => PairTag::Base { start_x: x, witness_a: a },
            (PairKind::Product, &[_, _, f, s]) => PairTag::Product { first: f as usize, second: s as usize },
            (PairKind::Obstacle, &[_, _, h]) => PairTag::Obstacle { host_pair: h as usize },
            _ => return Err(FormatError::parse(file, i + 1, "wrong number of fields")),
        };
        out.push(Pair { s: node(nums[0])?, t: node(nums[1])?, tag });
    }
    Ok(out)
}

pub fn write_certificates(certs: &[Vec<Edge>]) -> String {
    let mut out = String::new();
    for (i, c) in certs.iter().enumerate() {
        let body: Vec<String> = c.iter().map(|e| format!("{} {}", e.u(), e.v())).collect();
        out.push_str(&format!("{i} : {}\n", body.join(" ; ")));
    }
    out
}

pub fn parse_certificates(file: &str, text: &str) -> Result<Vec<Vec<Edge>>, FormatError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let (idx, body) = line.split_once(':').ok_or_else(|| FormatError::parse(file, i + 1, "missing `:`"))?;
        let idx: usize = idx.trim().parse().map_err(|_| FormatError::parse(file, i + 1, "bad pair index"))?;
        if idx != out.len() {
            return Err(FormatError::parse(file, i + 1, format!("expected pair index {}", out.len())));
        }
        let mut cert = Vec::new();
        for part in body.split(';').filter(|p| !p.trim().is_empty()) {
            match numbers::<NodeId>(file, i + 1, part)?.as_slice() {
                &[u, v] if u != v => cert.push(Edge::new(u, v)),
                _ => return Err(FormatError::parse(file, i + 1, "expected `u v` edge")),
            }
        }
        out.push(cert);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edges_round_trip() {
        let g = Graph::from_edges(4, [(2, 1), (0, 3), (0, 1)]).unwrap();
        let text = write_edges(&g);
        assert_eq!(text, "n 4\n0 1\n0 3\n1 2\n");
        assert_eq!(parse_edges("g", &text).unwrap(), g);
    }

    #[test]
    fn edge_errors() {
        assert!(matches!(parse_edges("g", "0 1\n"), Err(FormatError::Parse { line: 1, .. })));
        assert!(matches!(parse_edges("g", "n 2\n0 x\n"), Err(FormatError::Parse { line: 2, .. })));
        assert!(matches!(parse_edges("g", "n 2\n0 2\n"), Err(FormatError::Graph(_))));
    }

    #[test]
    fn labels_round_trip() {
        let t = NodeLabelTable::new(vec![
            NodeRole::Base { x: 1, layer: 0 },
            NodeRole::Clique { node: 4, edge: 2 },
            NodeRole::PathNode { edge: 0, index: 3 },
        ])
        .unwrap();
        let text = write_labels(&t);
        assert_eq!(text, "{\"0\":\"B:1:0\",\"1\":\"K:4:2\",\"2\":\"E:0:3\"}\n");
        assert_eq!(parse_labels("l", &text, 3).unwrap(), t);
        assert!(parse_labels("l", &text, 4).is_err());
    }

    #[test]
    fn pairs_and_certificates_round_trip() {
        let pairs = vec![
            Pair { s: 0, t: 5, tag: PairTag::Base { start_x: 1, witness_a: 2 } },
            Pair { s: 1, t: 7, tag: PairTag::Base { start_x: 2, witness_a: 1 } },
        ];
        let text = write_pairs(&pairs);
        assert_eq!(text, "0 5 2 1\n1 7 1 2\n");
        assert_eq!(parse_pairs("p", &text, PairKind::Base).unwrap(), pairs);
        assert!(parse_pairs("p", &text, PairKind::Obstacle).is_err());

        let certs = vec![vec![Edge::new(3, 1), Edge::new(4, 5)], vec![]];
        let text = write_certificates(&certs);
        assert_eq!(text, "0 : 1 3 ; 4 5\n1 : \n");
        assert_eq!(parse_certificates("c", &text).unwrap(), certs);
    }

    #[test]
    fn digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
