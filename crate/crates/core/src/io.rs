//! JSON schemas for instances, profiles and traces.
//!
//! Instance files name nodes by strings; edge records carry explicit dense
//! 0-based ids so priority lists and walks can reference them stably.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Edge, EdgeId, GameInstance, PriorityScheme, StrategyProfile, Walk};

#[derive(Debug, Serialize, Deserialize)]
struct EdgeRecord {
    id: usize,
    tail: String,
    head: String,
    capacity: u32,
    transit: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum PriorityRecord {
    Global { order: Vec<EdgeId> },
    // JSON object keys are strings; edge ids are parsed on load
    Local { lists: BTreeMap<String, Vec<EdgeId>> },
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceRecord {
    nodes: Vec<String>,
    edges: Vec<EdgeRecord>,
    source: String,
    sink: String,
    players: usize,
    priority: PriorityRecord,
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub fn instance_to_json(instance: &GameInstance) -> String {
    let record = InstanceRecord {
        nodes: instance.node_names.clone(),
        edges: instance
            .edges
            .iter()
            .enumerate()
            .map(|(id, e)| EdgeRecord {
                id,
                tail: instance.node_names[e.tail].clone(),
                head: instance.node_names[e.head].clone(),
                capacity: e.capacity,
                transit: e.transit,
            })
            .collect(),
        source: instance.node_names[instance.source].clone(),
        sink: instance.node_names[instance.sink].clone(),
        players: instance.players,
        priority: match &instance.priority {
            PriorityScheme::Global(order) => PriorityRecord::Global { order: order.clone() },
            PriorityScheme::Local(lists) => PriorityRecord::Local {
                lists: lists.iter().enumerate().map(|(e, l)| (e.to_string(), l.clone())).collect(),
            },
        },
    };
    serde_json::to_string_pretty(&record).expect("instance serialization cannot fail")
}

pub fn instance_from_json(text: &str) -> Result<GameInstance> {
    let record: InstanceRecord =
        serde_json::from_str(text).map_err(|e| malformed(format!("bad instance JSON: {e}")))?;
    let mut node_index = BTreeMap::new();
    for (i, name) in record.nodes.iter().enumerate() {
        if node_index.insert(name.clone(), i).is_some() {
            return Err(malformed(format!("duplicate node name {name:?}")));
        }
    }
    let look = |name: &str| -> Result<usize> {
        node_index.get(name).copied().ok_or_else(|| malformed(format!("unknown node {name:?}")))
    };
    let mut edges = vec![None; record.edges.len()];
    for rec in &record.edges {
        if rec.id >= edges.len() || edges[rec.id].is_some() {
            return Err(malformed("edge ids must be dense, unique and 0-based"));
        }
        edges[rec.id] = Some(Edge {
            tail: look(&rec.tail)?,
            head: look(&rec.head)?,
            capacity: rec.capacity,
            transit: rec.transit,
        });
    }
    let edges: Vec<Edge> = edges.into_iter().map(Option::unwrap).collect();
    let priority = match record.priority {
        PriorityRecord::Global { order } => PriorityScheme::Global(order),
        PriorityRecord::Local { lists } => {
            let mut full = vec![Vec::new(); edges.len()];
            for (key, list) in lists {
                let e: usize = key
                    .parse()
                    .map_err(|_| malformed(format!("priority list key {key:?} is not an edge id")))?;
                if e >= edges.len() {
                    return Err(malformed(format!("priority list for unknown edge {e}")));
                }
                full[e] = list;
            }
            PriorityScheme::Local(full)
        }
    };
    Ok(GameInstance {
        node_names: record.nodes,
        edges,
        source: look(&record.source)?,
        sink: look(&record.sink)?,
        players: record.players,
        priority,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct ProfileRecord {
    walks: Vec<Vec<EdgeId>>,
}

pub fn profile_to_json(profile: &StrategyProfile) -> String {
    let record = ProfileRecord { walks: profile.walks.iter().map(|w| w.0.clone()).collect() };
    serde_json::to_string_pretty(&record).expect("profile serialization cannot fail")
}

pub fn profile_from_json(text: &str) -> Result<StrategyProfile> {
    let record: ProfileRecord =
        serde_json::from_str(text).map_err(|e| malformed(format!("bad profile JSON: {e}")))?;
    Ok(StrategyProfile::new(record.walks.into_iter().map(Walk).collect()))
}

/// FNV-1a over the canonical instance JSON; reports carry it for provenance.
pub fn instance_hash(instance: &GameInstance) -> String {
    let text = instance_to_json(instance);
    let mut hash: u64 = 0xcbf29ce484222325;
    for b in text.as_bytes() {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_round_trip() {
        let inst = GameInstance {
            node_names: vec!["s".into(), "v".into(), "t".into()],
            edges: vec![
                Edge { tail: 0, head: 1, capacity: 2, transit: 0 },
                Edge { tail: 1, head: 2, capacity: 1, transit: 3 },
                Edge { tail: 1, head: 2, capacity: 1, transit: 1 },
            ],
            source: 0,
            sink: 2,
            players: 4,
            priority: PriorityScheme::Local(vec![vec![], vec![0], vec![0]]),
        };
        let json = instance_to_json(&inst);
        let back = instance_from_json(&json).unwrap();
        assert_eq!(inst, back);
        // byte-stable serialization
        assert_eq!(json, instance_to_json(&back));
    }

    #[test]
    fn rejects_sparse_edge_ids() {
        let text = r#"{
            "nodes": ["s", "t"],
            "edges": [{"id": 1, "tail": "s", "head": "t", "capacity": 1, "transit": 1}],
            "source": "s", "sink": "t", "players": 1,
            "priority": {"kind": "global", "order": [0]}
        }"#;
        assert!(instance_from_json(text).is_err());
    }

    #[test]
    fn profile_round_trip() {
        let p = StrategyProfile::new(vec![Walk(vec![0, 2]), Walk(vec![1, 2])]);
        let back = profile_from_json(&profile_to_json(&p)).unwrap();
        assert_eq!(p, back);
    }
}
