//! Earliest arrival flows via successive shortest paths on the static
//! residual network, the global priority-list construction driven by those
//! paths, and the comparison harness between the constructed list's
//! equilibria and the flow's arrival pattern.

use serde::Serialize;

use crate::analysis::permutations;
use crate::error::{Error, Result};
use crate::instance::{EdgeId, GameInstance, NodeId, PriorityScheme, Time};
use crate::pathfinder::{compute_equilibrium, SinkEdgePolicy};
use crate::prep::Prepared;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ResidualArc {
    pub edge: EdgeId,
    /// Forward use of the edge, or a cancellation against earlier flow.
    pub forward: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResidualPath {
    pub arcs: Vec<ResidualArc>,
    pub length: Time,
    pub flow: u32,
}

/// An actual source-sink path of the final static flow.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Chain {
    pub edges: Vec<EdgeId>,
    pub length: Time,
    pub flow: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EafResult {
    /// Augmenting paths in order of discovery; lengths never decrease.
    pub paths: Vec<ResidualPath>,
    /// Steady-state decomposition of the final flow, cancellations applied.
    pub chains: Vec<Chain>,
    /// Arrival times of the `k` players, earliest slots first.
    pub arrivals: Vec<Time>,
}

impl EafResult {
    /// Number of players that can have arrived by time `horizon`: each
    /// augmenting path of length `l` delivers its flow once per step from
    /// `l` on.
    pub fn cumulative_arrivals(&self, horizon: Time) -> u64 {
        self.paths
            .iter()
            .map(|p| p.flow as u64 * (horizon.saturating_sub(p.length) as u64 + u64::from(horizon >= p.length)))
            .sum()
    }

    pub fn total_cost(&self) -> u64 {
        self.arrivals.iter().map(|&a| a as u64).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("flow serialization cannot fail")
    }
}

const UNREACHED: i64 = i64::MAX / 4;

struct Residual<'a> {
    prep: &'a Prepared,
    flow: Vec<u32>,
}

impl Residual<'_> {
    fn arcs_from(&self, v: NodeId) -> Vec<(ResidualArc, NodeId, i64)> {
        let mut out = Vec::new();
        for &e in self.prep.out_edges(v) {
            if self.flow[e] < self.prep.capacity(e) {
                out.push((ResidualArc { edge: e, forward: true }, self.prep.head(e), self.prep.transit(e) as i64));
            }
        }
        for &e in self.prep.in_edges(v) {
            if self.flow[e] > 0 {
                out.push((ResidualArc { edge: e, forward: false }, self.prep.tail(e), -(self.prep.transit(e) as i64)));
            }
        }
        // Deterministic tie-breaking wants ascending (edge id, forward first).
        out.sort_by_key(|(arc, _, _)| (arc.edge, !arc.forward));
        out
    }

    /// Label-correcting pass (backward arcs carry negative costs; flow
    /// optimality rules out negative cycles).
    fn distances_from_source(&self) -> Vec<i64> {
        let n = self.prep.num_nodes();
        let mut dist = vec![UNREACHED; n];
        dist[self.prep.source()] = 0;
        for _ in 0..n {
            let mut changed = false;
            for v in 0..n {
                if dist[v] == UNREACHED {
                    continue;
                }
                for (_, w, cost) in self.arcs_from(v) {
                    if dist[v] + cost < dist[w] {
                        dist[w] = dist[v] + cost;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        dist
    }
}

/// Computes the earliest arrival flow pattern: successive shortest paths on
/// the static residual network until its capacity is exhausted, then greedy
/// assignment of the `k` players to the earliest arrival slots.
pub fn earliest_arrival_flow(prep: &Prepared, k: usize) -> Result<EafResult> {
    let mut residual = Residual { prep, flow: vec![0; prep.num_edges()] };
    let mut paths: Vec<ResidualPath> = Vec::new();
    let cap_total: u64 = (0..prep.num_edges()).map(|e| prep.capacity(e) as u64).sum();
    for _ in 0..=cap_total {
        match shortest_augmenting_path(&residual)? {
            None => break,
            Some((arcs, length)) => {
                let mut bottleneck = u32::MAX;
                for arc in &arcs {
                    bottleneck = bottleneck.min(if arc.forward {
                        prep.capacity(arc.edge) - residual.flow[arc.edge]
                    } else {
                        residual.flow[arc.edge]
                    });
                }
                for arc in &arcs {
                    if arc.forward {
                        residual.flow[arc.edge] += bottleneck;
                    } else {
                        residual.flow[arc.edge] -= bottleneck;
                    }
                }
                if let Some(last) = paths.last() {
                    if length < last.length {
                        return Err(Error::Internal("augmenting path lengths decreased".into()));
                    }
                }
                paths.push(ResidualPath { arcs, length, flow: bottleneck });
            }
        }
    }
    if paths.is_empty() {
        return Err(Error::SinkUnreachable);
    }

    let chains = decompose(prep, residual.flow.clone())?;
    let arrivals = assign_players(&paths, k);
    Ok(EafResult { paths, chains, arrivals })
}

/// Lexicographically smallest (by arc key) node-simple shortest path in the
/// residual network. Restricting to simple paths keeps the run canonical:
/// any shortest walk through a zero-cost residual cycle has a simple
/// shortest sibling.
fn shortest_augmenting_path(residual: &Residual) -> Result<Option<(Vec<ResidualArc>, Time)>> {
    let prep = residual.prep;
    let dist_s = residual.distances_from_source();
    if dist_s[prep.sink()] >= UNREACHED {
        return Ok(None);
    }
    // shortest distance to the sink, over reversed residual arcs
    let n = prep.num_nodes();
    let mut dist_t = vec![UNREACHED; n];
    dist_t[prep.sink()] = 0;
    for _ in 0..n {
        let mut changed = false;
        for v in 0..n {
            for (_, w, cost) in residual.arcs_from(v) {
                if dist_t[w] < UNREACHED && dist_t[w] + cost < dist_t[v] {
                    dist_t[v] = dist_t[w] + cost;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let total = dist_s[prep.sink()];
    let mut visited = vec![false; n];
    let mut path = Vec::new();
    fn dfs(
        residual: &Residual,
        dist_s: &[i64],
        dist_t: &[i64],
        total: i64,
        v: NodeId,
        visited: &mut Vec<bool>,
        path: &mut Vec<ResidualArc>,
    ) -> bool {
        if v == residual.prep.sink() {
            return true;
        }
        visited[v] = true;
        for (arc, w, cost) in residual.arcs_from(v) {
            if visited[w] {
                continue;
            }
            // stay on prefix-optimal arcs that can still finish shortest
            if dist_s[v] + cost != dist_s[w] || dist_s[w] + dist_t[w] != total {
                continue;
            }
            path.push(arc);
            if dfs(residual, dist_s, dist_t, total, w, visited, path) {
                return true;
            }
            path.pop();
        }
        visited[v] = false;
        false
    }
    if !dfs(residual, &dist_s, &dist_t, total, prep.source(), &mut visited, &mut path) {
        return Err(Error::Internal("sink labelled reachable but no tight path found".into()));
    }
    Ok(Some((path, total as Time)))
}

/// Splits a static flow into source-sink chains, smallest edge ids first.
fn decompose(prep: &Prepared, mut flow: Vec<u32>) -> Result<Vec<Chain>> {
    let mut chains = Vec::new();
    loop {
        let mut edges = Vec::new();
        let mut v = prep.source();
        let mut bottleneck = u32::MAX;
        while v != prep.sink() {
            let Some(&e) = prep.out_edges(v).iter().find(|&&e| flow[e] > 0) else {
                if v == prep.source() {
                    return Ok(chains);
                }
                return Err(Error::Internal("flow conservation violated during decomposition".into()));
            };
            bottleneck = bottleneck.min(flow[e]);
            edges.push(e);
            v = prep.head(e);
            if edges.len() > flow.iter().map(|&f| f as usize).sum::<usize>() + prep.num_edges() {
                return Err(Error::Internal("flow decomposition cycled".into()));
            }
        }
        for &e in &edges {
            flow[e] -= bottleneck;
        }
        let length = edges.iter().map(|&e| prep.transit(e)).sum();
        chains.push(Chain { edges, length, flow: bottleneck });
    }
}

fn assign_players(paths: &[ResidualPath], k: usize) -> Vec<Time> {
    let mut arrivals = Vec::with_capacity(k);
    let mut horizon = paths.iter().map(|p| p.length).min().unwrap_or(1);
    while arrivals.len() < k {
        let slots: u64 = paths.iter().filter(|p| p.length <= horizon).map(|p| p.flow as u64).sum();
        for _ in 0..slots {
            if arrivals.len() == k {
                break;
            }
            arrivals.push(horizon);
        }
        horizon += 1;
    }
    arrivals
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ListStatus {
    Feasible,
    /// Some edge would appear twice in the list.
    Infeasible { edge: EdgeId },
}

#[derive(Debug, Clone, Serialize)]
pub struct PriorityListDraft {
    /// The constructed global order; contains duplicates when infeasible.
    pub order: Vec<EdgeId>,
    pub occurrences: Vec<u32>,
    pub status: ListStatus,
    /// Backward-rule targets appended to the list just to give the insertion
    /// a position; the construction leaves their placement open.
    pub forced_tail_insertions: Vec<EdgeId>,
    /// On infeasibility: the duplicated edge and the backward edge that
    /// triggered its second insertion.
    pub conflict_pair: Option<(EdgeId, EdgeId)>,
}

impl PriorityListDraft {
    pub fn as_global_order(&self) -> Option<Vec<EdgeId>> {
        matches!(self.status, ListStatus::Feasible).then(|| self.order.clone())
    }
}

/// Builds a global priority list from the residual paths of an earliest
/// arrival flow on a unit-capacity network.
///
/// Walking each path in order of discovery: an edge followed by a forward
/// arc is appended on its first use; the last forward edge before a
/// backward arc is inserted in front of the cancelled edge. Edges never
/// placed are appended at the end. The list is feasible when no edge occurs
/// twice.
pub fn construct_priority_list(prep: &Prepared) -> Result<PriorityListDraft> {
    for e in 0..prep.num_edges() {
        if prep.capacity(e) != 1 {
            return Err(Error::NonUnitCapacity { edge: e, capacity: prep.capacity(e) });
        }
    }
    let eaf = earliest_arrival_flow(prep, 1)?;
    Ok(priority_list_from_paths(prep, &eaf.paths))
}

pub fn priority_list_from_paths(prep: &Prepared, paths: &[ResidualPath]) -> PriorityListDraft {
    let m = prep.num_edges();
    let mut order: Vec<EdgeId> = Vec::new();
    let mut used = vec![false; m];
    let mut occurrences = vec![0u32; m];
    let mut forced = Vec::new();
    let mut conflict: Option<(EdgeId, EdgeId)> = None;

    let place = |order: &mut Vec<EdgeId>, occurrences: &mut Vec<u32>, e: EdgeId, at: usize| {
        order.insert(at, e);
        occurrences[e] += 1;
        occurrences[e] >= 2
    };

    for path in paths {
        for i in 0..path.arcs.len() - 1 {
            let here = path.arcs[i];
            let next = path.arcs[i + 1];
            if next.forward {
                if here.forward && !used[here.edge] {
                    let at = order.len();
                    if place(&mut order, &mut occurrences, here.edge, at) && conflict.is_none() {
                        conflict = Some((here.edge, here.edge));
                    }
                }
            } else {
                // last forward arc at or before position i
                let anchor = path.arcs[..=i].iter().rev().find(|a| a.forward);
                if let Some(anchor) = anchor {
                    let target = next.edge;
                    let at = match order.iter().position(|&e| e == target) {
                        Some(pos) => pos,
                        None => {
                            order.push(target);
                            occurrences[target] += 1;
                            forced.push(target);
                            order.len() - 1
                        }
                    };
                    if place(&mut order, &mut occurrences, anchor.edge, at) && conflict.is_none() {
                        conflict = Some((anchor.edge, target));
                    }
                }
            }
            used[here.edge] = true;
        }
        if let Some(last) = path.arcs.last() {
            used[last.edge] = true;
        }
    }
    for e in 0..m {
        if occurrences[e] == 0 {
            order.push(e);
            occurrences[e] += 1;
        }
    }
    let status = match conflict {
        Some((e, _)) => ListStatus::Infeasible { edge: e },
        None => ListStatus::Feasible,
    };
    PriorityListDraft { order, occurrences, status, forced_tail_insertions: forced, conflict_pair: conflict }
}

#[derive(Debug, Clone, Serialize)]
pub struct EafCheckReport {
    pub status: ListStatus,
    pub constructed_order: Vec<EdgeId>,
    pub eaf_cost: u64,
    /// Cheapest equilibrium cost over all fixed sink orders, when feasible.
    pub equilibrium_cost: Option<u64>,
    /// Whether some sink order reproduced the flow's cost exactly.
    pub matches: bool,
}

/// Runs the constructed list against the flow: does some sink-edge order
/// make the solver's equilibrium exactly as cheap as the earliest arrival
/// flow? Evidence gathering only; a mismatch is reported, never asserted
/// away.
pub fn eaf_equilibrium_check(instance: &GameInstance, k: usize) -> Result<EafCheckReport> {
    let prep = Prepared::new(instance)?;
    let eaf = earliest_arrival_flow(&prep, k)?;
    let draft = construct_priority_list(&prep)?;
    let Some(order) = draft.as_global_order() else {
        return Ok(EafCheckReport {
            status: draft.status,
            constructed_order: draft.order,
            eaf_cost: eaf.total_cost(),
            equilibrium_cost: None,
            matches: false,
        });
    };
    let mut ruled = instance.clone();
    ruled.players = k;
    ruled.priority = PriorityScheme::Global(order.clone());
    let best = best_equilibrium_over_policies(&ruled)?;
    Ok(EafCheckReport {
        status: draft.status,
        constructed_order: order,
        eaf_cost: eaf.total_cost(),
        equilibrium_cost: Some(best),
        matches: best == eaf.total_cost(),
    })
}

/// Cheapest solver outcome over every fixed sink-edge order (all
/// permutations while there are at most five sink edges, rotations beyond).
pub fn best_equilibrium_over_policies(instance: &GameInstance) -> Result<u64> {
    let prep = Prepared::new(instance)?;
    let sink_edges = prep.in_edges(prep.sink()).to_vec();
    let orders = if sink_edges.len() <= 5 {
        permutations(&sink_edges)
    } else {
        (0..sink_edges.len())
            .map(|r| sink_edges.iter().cycle().skip(r).take(sink_edges.len()).copied().collect())
            .collect()
    };
    let mut best = u64::MAX;
    for order in orders {
        let eq = compute_equilibrium(&prep, SinkEdgePolicy::FixedOrder(order))?;
        best = best.min(eq.trace.total_cost);
    }
    Ok(best)
}

/// A subdivision of the complete bipartite graph on parts {u, w} and
/// {s, v, t}: six internally disjoint undirected paths.
#[derive(Debug, Clone)]
pub struct K23Witness {
    pub centers: (NodeId, NodeId),
    pub anchors: (NodeId, NodeId, NodeId),
    pub paths: Vec<Vec<NodeId>>,
}

/// Extracts and verifies the structural witness behind an infeasible list:
/// a second insertion of edge (u, v) against a cancelled edge (w, v) forces
/// connections that subdivide the complete bipartite graph on {u, w} and
/// {source, v, sink}, which no outerplanar graph contains.
pub fn k23_witness(prep: &Prepared, paths: &[ResidualPath], conflict: (EdgeId, EdgeId)) -> Option<K23Witness> {
    let (x, cancelled) = conflict;
    let u = prep.tail(x);
    let v = prep.head(x);
    let w = prep.tail(cancelled);
    if prep.head(cancelled) != v {
        return None;
    }
    let mut edge_set: Vec<EdgeId> = paths.iter().flat_map(|p| p.arcs.iter().map(|a| a.edge)).collect();
    edge_set.push(x);
    edge_set.push(cancelled);
    edge_set.sort_unstable();
    edge_set.dedup();
    let full: Vec<EdgeId> = (0..prep.num_edges()).collect();
    for candidate_edges in [&edge_set[..], &full[..]] {
        if let Some(witness) = find_k23(prep, candidate_edges, (u, w), (prep.source(), v, prep.sink())) {
            return Some(witness);
        }
    }
    None
}

fn find_k23(
    prep: &Prepared,
    edges: &[EdgeId],
    centers: (NodeId, NodeId),
    anchors: (NodeId, NodeId, NodeId),
) -> Option<K23Witness> {
    let n = prep.num_nodes();
    let branch = [centers.0, centers.1, anchors.0, anchors.1, anchors.2];
    {
        let mut sorted = branch.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != 5 {
            return None;
        }
    }
    let mut adj = vec![Vec::new(); n];
    for &e in edges {
        let (a, b) = (prep.tail(e), prep.head(e));
        if a != b {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let pairs: Vec<(NodeId, NodeId)> = [centers.0, centers.1]
        .into_iter()
        .flat_map(|c| [anchors.0, anchors.1, anchors.2].into_iter().map(move |a| (c, a)))
        .collect();

    fn connect(
        adj: &[Vec<NodeId>],
        branch: &[NodeId; 5],
        pairs: &[(NodeId, NodeId)],
        blocked: &mut Vec<bool>,
        chosen: &mut Vec<Vec<NodeId>>,
    ) -> bool {
        let Some(&(from, to)) = pairs.first() else {
            return true;
        };
        // all simple from-to paths whose interior avoids branch vertices and
        // previously used interiors
        let mut stack = vec![vec![from]];
        while let Some(path) = stack.pop() {
            let last = *path.last().unwrap();
            for &next in &adj[last] {
                if next == to {
                    let mut full = path.clone();
                    full.push(to);
                    for &node in &full[1..full.len() - 1] {
                        blocked[node] = true;
                    }
                    chosen.push(full.clone());
                    if connect(adj, branch, &pairs[1..], blocked, chosen) {
                        return true;
                    }
                    chosen.pop();
                    for &node in &full[1..full.len() - 1] {
                        blocked[node] = false;
                    }
                } else if !blocked[next] && !branch.contains(&next) && !path.contains(&next) {
                    let mut longer = path.clone();
                    longer.push(next);
                    stack.push(longer);
                }
            }
        }
        false
    }

    let mut blocked = vec![false; n];
    let mut chosen = Vec::new();
    connect(&adj, &branch, &pairs, &mut blocked, &mut chosen).then(|| K23Witness {
        centers,
        anchors,
        paths: chosen,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    fn eaf_of(instance: &GameInstance, k: usize) -> EafResult {
        let prep = Prepared::new(instance).unwrap();
        earliest_arrival_flow(&prep, k).unwrap()
    }

    #[test]
    fn wide_entry_bottleneck_pattern() {
        let g = generators::fig6();
        let eaf = eaf_of(&g.instance, 4);
        assert_eq!(eaf.arrivals, vec![1, 2, 3, 3]);
        assert_eq!(eaf.total_cost(), 9);
    }

    #[test]
    fn detour_network_residual_paths() {
        let g = generators::fig7(7, true).unwrap();
        let eaf = eaf_of(&g.instance, 22);
        let lengths: Vec<Time> = eaf.paths.iter().map(|p| p.length).collect();
        assert_eq!(lengths, vec![3, 5, 8]);
        // one arrival per step from 3, two from 5, three from 8
        assert_eq!(eaf.arrivals[..8], [3, 4, 5, 5, 6, 6, 7, 7]);
        assert_eq!(eaf.cumulative_arrivals(7), 8);
        assert_eq!(eaf.cumulative_arrivals(8), 11);
        // the middle edge is cancelled and re-routed across the three paths
        assert!(eaf.paths[1].arcs.contains(&ResidualArc { edge: g.e_v1_v2, forward: false }));
        assert_eq!(eaf.chains.len(), 3);
    }

    #[test]
    fn five_node_network_pattern_prefix() {
        let g = generators::fig8();
        let eaf = eaf_of(&g.instance, 9);
        assert_eq!(eaf.arrivals, vec![3, 4, 5, 5, 6, 6, 7, 7, 7]);
        let lengths: Vec<Time> = eaf.paths.iter().map(|p| p.length).collect();
        assert_eq!(lengths, vec![3, 5, 7]);
    }

    #[test]
    fn single_pipeline_streams_one_per_step() {
        let inst = GameInstance {
            node_names: vec!["s".into(), "a".into(), "t".into()],
            edges: vec![
                crate::instance::Edge { tail: 0, head: 1, capacity: 1, transit: 1 },
                crate::instance::Edge { tail: 1, head: 2, capacity: 1, transit: 1 },
            ],
            source: 0,
            sink: 2,
            players: 3,
            priority: PriorityScheme::Global(vec![0, 1]),
        };
        let eaf = eaf_of(&inst, 3);
        assert_eq!(eaf.arrivals, vec![2, 3, 4]);
    }

    #[test]
    fn five_node_network_constructed_list() {
        let g = generators::fig8();
        let prep = Prepared::new(&g.instance).unwrap();
        let draft = construct_priority_list(&prep).unwrap();
        assert_eq!(draft.status, ListStatus::Feasible);
        // first path seeds the chain, the third inserts the join edge in
        // front of the cancelled middle edge
        assert_eq!(
            draft.order,
            vec![
                g.e_s_v1,
                g.e_v3_v2,
                g.e_v1_v2,
                g.e_s_v3_short,
                g.e_s_v3_long,
                g.e_v2_t,
                g.e_v3_t,
                g.e_v1_t,
            ]
        );
    }

    #[test]
    fn detour_network_list_is_infeasible_with_witness() {
        let g = generators::fig7(7, true).unwrap();
        let prep = Prepared::new(&g.instance).unwrap();
        let draft = construct_priority_list(&prep).unwrap();
        assert_eq!(draft.status, ListStatus::Infeasible { edge: g.e_v1_v2 });
        let conflict = draft.conflict_pair.unwrap();
        assert_eq!(conflict, (g.e_v1_v2, g.e_v5_v2));
        let eaf = earliest_arrival_flow(&prep, 4).unwrap();
        let witness = k23_witness(&prep, &eaf.paths, conflict).expect("witness must exist");
        assert_eq!(witness.centers, (1, 5));
        assert_eq!(witness.anchors, (0, 2, 6));
    }

    #[test]
    fn non_unit_capacity_is_rejected() {
        let g = generators::fig6();
        let prep = Prepared::new(&g.instance).unwrap();
        assert!(matches!(
            construct_priority_list(&prep),
            Err(Error::NonUnitCapacity { edge: 0, capacity: 2 })
        ));
    }
}
