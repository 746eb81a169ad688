//! Structured node names for every construction stage.
//!
//! Role strings, as written to `labels.json`:
//!
//! | role | string | meaning |
//! |------|--------|---------|
//! | base | `B:<x>:<j>` | integer position `x` (1-based) on layer `j` |
//! | product | `P:<u1>:<u2>:<i>` | base nodes `u1`, `u2`, step slot `i ∈ {1,2}` |
//! | path | `E:<e>:<i>` | `i`-th interior node of the extension of host edge id `e` |
//! | clique | `K:<v>:<e>` | copy of host node `v` owned by incident host edge id `e` |

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::graph::NodeId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeRole {
    Base { x: u64, layer: u32 },
    Product { u1: NodeId, u2: NodeId, slot: u8 },
    PathNode { edge: u32, index: u32 },
    Clique { node: NodeId, edge: u32 },
}

impl fmt::Display for NodeRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            NodeRole::Base { x, layer } => write!(f, "B:{x}:{layer}"),
            NodeRole::Product { u1, u2, slot } => write!(f, "P:{u1}:{u2}:{slot}"),
            NodeRole::PathNode { edge, index } => write!(f, "E:{edge}:{index}"),
            NodeRole::Clique { node, edge } => write!(f, "K:{node}:{edge}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoleParseError(pub String);

impl fmt::Display for RoleParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "malformed role string {:?}", self.0)
    }
}

impl std::error::Error for RoleParseError {}

impl FromStr for NodeRole {
    type Err = RoleParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || RoleParseError(s.to_string());
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| parts.get(i).and_then(|p| p.parse::<u64>().ok()).ok_or_else(err);
        let role = match (parts.first().copied(), parts.len()) {
            (Some("B"), 3) => NodeRole::Base { x: num(1)?, layer: num(2)? as u32 },
            (Some("P"), 4) => {
                let slot = num(3)?;
                if slot != 1 && slot != 2 {
                    return Err(err());
                }
                NodeRole::Product { u1: num(1)? as NodeId, u2: num(2)? as NodeId, slot: slot as u8 }
            }
            (Some("E"), 3) => NodeRole::PathNode { edge: num(1)? as u32, index: num(2)? as u32 },
            (Some("K"), 3) => NodeRole::Clique { node: num(1)? as NodeId, edge: num(2)? as u32 },
            _ => return Err(err()),
        };
        Ok(role)
    }
}

/// One role per node id, with a lazily built inverse index.
#[derive(Debug, Default)]
pub struct NodeLabelTable {
    roles: Vec<NodeRole>,
    inverse: OnceLock<HashMap<NodeRole, NodeId>>,
}

impl Clone for NodeLabelTable {
    fn clone(&self) -> Self {
        NodeLabelTable { roles: self.roles.clone(), inverse: OnceLock::new() }
    }
}

impl PartialEq for NodeLabelTable {
    fn eq(&self, other: &Self) -> bool {
        self.roles == other.roles
    }
}

impl NodeLabelTable {
    /// Fails with the offending pair of ids if two nodes share a role.
    pub fn new(roles: Vec<NodeRole>) -> Result<Self, (NodeId, NodeId)> {
        let table = NodeLabelTable { roles, inverse: OnceLock::new() };
        let mut seen = HashMap::with_capacity(table.roles.len());
        for (id, role) in table.roles.iter().enumerate() {
            if let Some(prev) = seen.insert(*role, id as NodeId) {
                return Err((prev, id as NodeId));
            }
        }
        let _ = table.inverse.set(seen);
        Ok(table)
    }

    /// For constructions whose id layout is a bijection by formula; the
    /// inverse index is built on first lookup.
    pub(crate) fn from_layout(roles: Vec<NodeRole>) -> Self {
        NodeLabelTable { roles, inverse: OnceLock::new() }
    }

    pub fn len(&self) -> usize {
        self.roles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }

    pub fn role(&self, id: NodeId) -> NodeRole {
        self.roles[id as usize]
    }

    pub fn roles(&self) -> &[NodeRole] {
        &self.roles
    }

    pub fn id_of(&self, role: &NodeRole) -> Option<NodeId> {
        self.inverse
            .get_or_init(|| self.roles.iter().enumerate().map(|(i, r)| (*r, i as NodeId)).collect())
            .get(role)
            .copied()
    }

    /// The `labels.json` document: node id → role string.
    pub fn to_json_map(&self) -> BTreeMap<NodeId, String> {
        self.roles.iter().enumerate().map(|(i, r)| (i as NodeId, r.to_string())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn role_strings_round_trip() {
        let roles = [
            NodeRole::Base { x: 17, layer: 3 },
            NodeRole::Product { u1: 4, u2: 0, slot: 2 },
            NodeRole::PathNode { edge: 9, index: 11 },
            NodeRole::Clique { node: 5, edge: 12 },
        ];
        for r in roles {
            assert_eq!(r.to_string().parse::<NodeRole>().unwrap(), r);
        }
        assert_eq!(roles[1].to_string(), "P:4:0:2");
        for bad in ["", "B:1", "P:1:2:3", "Q:1:2", "K:a:1"] {
            assert!(bad.parse::<NodeRole>().is_err(), "{bad}");
        }
    }

    #[test]
    fn table_is_a_bijection() {
        let t = NodeLabelTable::new(vec![
            NodeRole::Base { x: 1, layer: 0 },
            NodeRole::Base { x: 1, layer: 1 },
        ])
        .unwrap();
        assert_eq!(t.id_of(&NodeRole::Base { x: 1, layer: 1 }), Some(1));
        assert_eq!(t.id_of(&NodeRole::Base { x: 2, layer: 1 }), None);
        let dup = NodeLabelTable::new(vec![NodeRole::Base { x: 1, layer: 0 }; 2]);
        assert_eq!(dup.unwrap_err(), (0, 1));
    }
}
