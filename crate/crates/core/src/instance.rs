//! Domain types: game instances, priority schemes, walks and profiles.
//!
//! An instance is a directed multigraph with per-edge inflow capacities and
//! integral transit times, a single source/sink pair, a player count, and a
//! priority scheme that ranks the incoming edges of every node for each of
//! its outgoing edges.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type EdgeId = usize;
/// Players are numbered from 0 internally; reports print them 1-based.
pub type PlayerId = usize;
pub type Time = u32;

pub const INF: Time = Time::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub tail: NodeId,
    pub head: NodeId,
    /// Maximum number of players that may enter the edge per time step.
    pub capacity: u32,
    /// Time units needed to traverse the edge.
    pub transit: Time,
}

/// Ranking of incoming edges used to break entry conflicts.
///
/// A global scheme is a total order on all edges; the list of each edge
/// `e = (v, w)` is the set of incoming edges of `v` sorted by ascending
/// global rank. A local scheme spells the list out per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PriorityScheme {
    Global(Vec<EdgeId>),
    /// `lists[e]` is a permutation of the incoming edges of `tail(e)`.
    Local(Vec<Vec<EdgeId>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameInstance {
    pub node_names: Vec<String>,
    pub edges: Vec<Edge>,
    pub source: NodeId,
    pub sink: NodeId,
    pub players: usize,
    pub priority: PriorityScheme,
}

impl GameInstance {
    pub fn num_nodes(&self) -> usize {
        self.node_names.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn incoming(&self, v: NodeId) -> Vec<EdgeId> {
        (0..self.edges.len()).filter(|&e| self.edges[e].head == v).collect()
    }

    pub fn outgoing(&self, v: NodeId) -> Vec<EdgeId> {
        (0..self.edges.len()).filter(|&e| self.edges[e].tail == v).collect()
    }

    /// Resolves the priority scheme into one explicit list per edge.
    ///
    /// For a global scheme the list of edge `e` is `incoming(tail(e))`
    /// sorted by ascending global rank. Fails if the scheme does not cover
    /// the instance (wrong arity, missing edges); completeness per node is
    /// the validator's job.
    pub fn local_lists(&self) -> Result<Vec<Vec<EdgeId>>> {
        match &self.priority {
            PriorityScheme::Local(lists) => {
                if lists.len() != self.edges.len() {
                    return Err(Error::InvalidParameter(format!(
                        "priority scheme has {} lists for {} edges",
                        lists.len(),
                        self.edges.len()
                    )));
                }
                Ok(lists.clone())
            }
            PriorityScheme::Global(order) => {
                if order.len() != self.edges.len() {
                    return Err(Error::InvalidParameter(format!(
                        "global priority order has {} entries for {} edges",
                        order.len(),
                        self.edges.len()
                    )));
                }
                let mut rank = vec![usize::MAX; self.edges.len()];
                for (pos, &e) in order.iter().enumerate() {
                    if e >= self.edges.len() || rank[e] != usize::MAX {
                        return Err(Error::InvalidParameter(
                            "global priority order is not a permutation of the edge ids".into(),
                        ));
                    }
                    rank[e] = pos;
                }
                let lists = (0..self.edges.len())
                    .map(|e| {
                        let mut inc = self.incoming(self.edges[e].tail);
                        inc.sort_by_key(|&f| rank[f]);
                        inc
                    })
                    .collect();
                Ok(lists)
            }
        }
    }

    /// Replaces the scheme by the equivalent explicit local one.
    ///
    /// Idempotent: instances that already carry local lists are returned
    /// unchanged.
    pub fn globalize(mut self) -> Result<GameInstance> {
        let lists = self.local_lists()?;
        self.priority = PriorityScheme::Local(lists);
        Ok(self)
    }
}

/// An ordered edge sequence from source to sink. Edges may repeat; every
/// consecutive pair must share a node.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Walk(pub Vec<EdgeId>);

impl Walk {
    pub fn edges(&self) -> &[EdgeId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn transit(&self, instance: &GameInstance) -> Time {
        self.0.iter().map(|&e| instance.edges[e].transit).sum()
    }

    /// Checks start, end and head-to-tail connectivity against an instance.
    pub fn check(&self, instance: &GameInstance, player: PlayerId) -> Result<()> {
        let fail = |reason: &str| Err(Error::InvalidWalk { player, reason: reason.to_string() });
        if self.0.is_empty() {
            return fail("walk is empty");
        }
        if self.0.iter().any(|&e| e >= instance.edges.len()) {
            return fail("edge id out of range");
        }
        if instance.edges[self.0[0]].tail != instance.source {
            return fail("walk does not start at the source");
        }
        if instance.edges[*self.0.last().unwrap()].head != instance.sink {
            return fail("walk does not end at the sink");
        }
        for w in self.0.windows(2) {
            if instance.edges[w[0]].head != instance.edges[w[1]].tail {
                return fail("consecutive edges do not share a node");
            }
        }
        Ok(())
    }
}

/// One walk per player; the state of the game.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyProfile {
    pub walks: Vec<Walk>,
}

impl StrategyProfile {
    pub fn new(walks: Vec<Walk>) -> Self {
        StrategyProfile { walks }
    }

    pub fn check(&self, instance: &GameInstance) -> Result<()> {
        if self.walks.len() != instance.players {
            return Err(Error::ProfileSizeMismatch {
                got: self.walks.len(),
                expected: instance.players,
            });
        }
        for (i, walk) in self.walks.iter().enumerate() {
            walk.check(instance, i)?;
        }
        Ok(())
    }
}
