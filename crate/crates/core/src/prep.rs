//! Static preprocessing shared by the simulator, the equilibrium solver and
//! the analysis scans: adjacency, resolved priority ranks, congestion-free
//! shortest distances, and a deterministic per-step edge processing order.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::instance::{EdgeId, GameInstance, NodeId, Time, INF};
use crate::validate::{dijkstra, validate_instance};

#[derive(Debug, Clone)]
pub struct Prepared {
    instance: GameInstance,
    in_edges: Vec<Vec<EdgeId>>,
    out_edges: Vec<Vec<EdgeId>>,
    /// `lists[e]` is the resolved priority list of edge `e`.
    lists: Vec<Vec<EdgeId>>,
    /// `rank[e * m + f]` is the position of incoming edge `f` in the list of
    /// `e`, or `u32::MAX` if `f` does not enter `tail(e)`.
    rank: Vec<u32>,
    /// Edge order used inside one simulation step: topological over the
    /// "exits at the same step" relation (a zero-transit edge is processed
    /// before every edge leaving its head), ties by ascending edge id.
    step_order: Vec<EdgeId>,
    /// Congestion-free shortest transit distance from the source.
    dist: Vec<Time>,
}

impl Prepared {
    /// Validates and preprocesses an instance. Fails with the full violation
    /// list if the instance is invalid.
    pub fn new(instance: &GameInstance) -> Result<Prepared> {
        let report = validate_instance(instance);
        if !report.is_empty() {
            return Err(Error::InvalidInstance(report));
        }
        let n = instance.num_nodes();
        let m = instance.num_edges();
        let mut in_edges = vec![Vec::new(); n];
        let mut out_edges = vec![Vec::new(); n];
        for (e, edge) in instance.edges.iter().enumerate() {
            in_edges[edge.head].push(e);
            out_edges[edge.tail].push(e);
        }
        let lists = instance.local_lists()?;
        let mut rank = vec![u32::MAX; m * m];
        for e in 0..m {
            for (pos, &f) in lists[e].iter().enumerate() {
                rank[e * m + f] = pos as u32;
            }
        }
        let step_order = zero_transit_topo_order(instance, &out_edges)?;
        let dist = dijkstra(instance, instance.source);
        Ok(Prepared {
            instance: instance.clone(),
            in_edges,
            out_edges,
            lists,
            rank,
            step_order,
            dist,
        })
    }

    pub fn instance(&self) -> &GameInstance {
        &self.instance
    }

    pub fn num_nodes(&self) -> usize {
        self.instance.num_nodes()
    }

    pub fn num_edges(&self) -> usize {
        self.instance.num_edges()
    }

    pub fn players(&self) -> usize {
        self.instance.players
    }

    pub fn source(&self) -> NodeId {
        self.instance.source
    }

    pub fn sink(&self) -> NodeId {
        self.instance.sink
    }

    pub fn tail(&self, e: EdgeId) -> NodeId {
        self.instance.edges[e].tail
    }

    pub fn head(&self, e: EdgeId) -> NodeId {
        self.instance.edges[e].head
    }

    pub fn capacity(&self, e: EdgeId) -> u32 {
        self.instance.edges[e].capacity
    }

    pub fn transit(&self, e: EdgeId) -> Time {
        self.instance.edges[e].transit
    }

    pub fn in_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.in_edges[v]
    }

    pub fn out_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.out_edges[v]
    }

    /// Priority list of edge `e` (a permutation of `in_edges(tail(e))`).
    pub fn priority_list(&self, e: EdgeId) -> &[EdgeId] {
        &self.lists[e]
    }

    /// Position of incoming edge `f` in the priority list of `e`.
    pub fn rank(&self, e: EdgeId, f: EdgeId) -> Option<u32> {
        let r = self.rank[e * self.num_edges() + f];
        (r != u32::MAX).then_some(r)
    }

    pub fn step_order(&self) -> &[EdgeId] {
        &self.step_order
    }

    /// Congestion-free shortest transit distance from the source to `v`.
    pub fn dist_from_source(&self, v: NodeId) -> Time {
        self.dist[v]
    }

    /// Shortest source-sink transit distance; at least 1 on valid instances.
    pub fn shortest_transit(&self) -> Time {
        self.dist[self.instance.sink]
    }
}

/// Congestion-free shortest transit distances from the source to every
/// reachable node. Fails if the sink is unreachable.
pub fn transit_shortest_paths(instance: &GameInstance) -> Result<Vec<Time>> {
    let dist = dijkstra(instance, instance.source);
    if dist[instance.sink] == INF {
        return Err(Error::SinkUnreachable);
    }
    Ok(dist)
}

/// Orders edges so that within one time step every zero-transit edge comes
/// before all edges leaving its head. Players exiting a zero-transit edge
/// compete for their next edge in the same step, so admissions upstream of a
/// zero chain must be settled first. Cycles in this relation are exactly the
/// zero-cost cycles the validator rejects.
fn zero_transit_topo_order(instance: &GameInstance, out_edges: &[Vec<EdgeId>]) -> Result<Vec<EdgeId>> {
    let m = instance.num_edges();
    let mut indegree = vec![0usize; m];
    for edge in &instance.edges {
        if edge.transit == 0 {
            for &f in &out_edges[edge.head] {
                indegree[f] += 1;
            }
        }
    }
    let mut heap: BinaryHeap<Reverse<EdgeId>> = (0..m).filter(|&e| indegree[e] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(m);
    while let Some(Reverse(e)) = heap.pop() {
        order.push(e);
        if instance.edges[e].transit == 0 {
            for &f in &out_edges[instance.edges[e].head] {
                indegree[f] -= 1;
                if indegree[f] == 0 {
                    heap.push(Reverse(f));
                }
            }
        }
    }
    if order.len() != m {
        return Err(Error::Internal("zero-transit subgraph has a cycle past validation".into()));
    }
    Ok(order)
}
