//! Instance validation. Violations are data, not failures: the report lists
//! everything that is wrong and an empty report means the instance is valid.

use std::collections::BinaryHeap;
use std::fmt;

use crate::instance::{EdgeId, GameInstance, NodeId, PriorityScheme, Time, INF};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EdgeEndpointOutOfRange { edge: EdgeId },
    NonPositiveCapacity { edge: EdgeId },
    NoPlayers,
    SourceOutOfRange,
    SinkOutOfRange,
    SourceHasIncomingEdge { edge: EdgeId },
    /// A directed cycle consisting solely of zero-transit edges.
    ZeroCostCycle { edges: Vec<EdgeId> },
    SinkUnreachable,
    SourceSinkDistanceZero,
    MalformedPriorityScheme { reason: String },
    /// The list of `edge` is not a permutation of the incoming edges of its tail.
    IncompletePriorityList { edge: EdgeId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EdgeEndpointOutOfRange { edge } => {
                write!(f, "edge {edge} has an endpoint that is not a node")
            }
            Violation::NonPositiveCapacity { edge } => {
                write!(f, "edge {edge} has capacity 0; capacities must be positive")
            }
            Violation::NoPlayers => write!(f, "the game has no players"),
            Violation::SourceOutOfRange => write!(f, "source is not a node"),
            Violation::SinkOutOfRange => write!(f, "sink is not a node"),
            Violation::SourceHasIncomingEdge { edge } => {
                write!(f, "edge {edge} enters the source; the source must have no incoming edges")
            }
            Violation::ZeroCostCycle { edges } => {
                write!(f, "zero-cost cycle through edges {edges:?}")
            }
            Violation::SinkUnreachable => write!(f, "sink unreachable from source"),
            Violation::SourceSinkDistanceZero => {
                write!(f, "source and sink have transit distance zero")
            }
            Violation::MalformedPriorityScheme { reason } => {
                write!(f, "malformed priority scheme: {reason}")
            }
            Violation::IncompletePriorityList { edge } => {
                write!(f, "priority list of edge {edge} is not a permutation of the incoming edges of its tail")
            }
        }
    }
}

pub type ValidationReport = Vec<Violation>;

pub fn validate_instance(instance: &GameInstance) -> ValidationReport {
    let mut report = Vec::new();
    let n = instance.num_nodes();

    if instance.players == 0 {
        report.push(Violation::NoPlayers);
    }
    if instance.source >= n {
        report.push(Violation::SourceOutOfRange);
    }
    if instance.sink >= n {
        report.push(Violation::SinkOutOfRange);
    }
    let mut endpoints_ok = true;
    for (e, edge) in instance.edges.iter().enumerate() {
        if edge.tail >= n || edge.head >= n {
            report.push(Violation::EdgeEndpointOutOfRange { edge: e });
            endpoints_ok = false;
        }
        if edge.capacity == 0 {
            report.push(Violation::NonPositiveCapacity { edge: e });
        }
    }
    if !endpoints_ok || instance.source >= n || instance.sink >= n {
        return report;
    }

    for (e, edge) in instance.edges.iter().enumerate() {
        if edge.head == instance.source {
            report.push(Violation::SourceHasIncomingEdge { edge: e });
        }
    }

    if let Some(cycle) = zero_cost_cycle(instance) {
        report.push(Violation::ZeroCostCycle { edges: cycle });
    }

    match dijkstra(instance, instance.source) {
        dist if dist[instance.sink] == INF => report.push(Violation::SinkUnreachable),
        dist if dist[instance.sink] == 0 => report.push(Violation::SourceSinkDistanceZero),
        _ => {}
    }

    check_priorities(instance, &mut report);
    report
}

fn check_priorities(instance: &GameInstance, report: &mut Vec<Violation>) {
    let lists = match &instance.priority {
        PriorityScheme::Global(order) => {
            let mut seen = vec![false; instance.num_edges()];
            let mut ok = order.len() == instance.num_edges();
            for &e in order {
                if e >= instance.num_edges() || seen[e] {
                    ok = false;
                    break;
                }
                seen[e] = true;
            }
            if !ok {
                report.push(Violation::MalformedPriorityScheme {
                    reason: "global order is not a permutation of the edge ids".into(),
                });
            }
            return; // induced lists are permutations by construction
        }
        PriorityScheme::Local(lists) => lists,
    };
    if lists.len() != instance.num_edges() {
        report.push(Violation::MalformedPriorityScheme {
            reason: format!("{} lists for {} edges", lists.len(), instance.num_edges()),
        });
        return;
    }
    for e in 0..instance.num_edges() {
        let mut expected = instance.incoming(instance.edges[e].tail);
        expected.sort_unstable();
        let mut got = lists[e].clone();
        got.sort_unstable();
        if got != expected {
            report.push(Violation::IncompletePriorityList { edge: e });
        }
    }
}

/// Searches for a directed cycle inside the subgraph of zero-transit edges.
fn zero_cost_cycle(instance: &GameInstance) -> Option<Vec<EdgeId>> {
    let n = instance.num_nodes();
    let mut out = vec![Vec::new(); n];
    for (e, edge) in instance.edges.iter().enumerate() {
        if edge.transit == 0 {
            out[edge.tail].push(e);
        }
    }
    // Iterative DFS with an explicit edge stack so the witness cycle can be
    // reconstructed.
    let mut color = vec![0u8; n]; // 0 unvisited, 1 on stack, 2 done
    for start in 0..n {
        if color[start] != 0 {
            continue;
        }
        let mut stack: Vec<(NodeId, usize)> = vec![(start, 0)];
        let mut path: Vec<EdgeId> = Vec::new();
        color[start] = 1;
        while let Some(&mut (v, ref mut idx)) = stack.last_mut() {
            if *idx < out[v].len() {
                let e = out[v][*idx];
                *idx += 1;
                let w = instance.edges[e].head;
                match color[w] {
                    0 => {
                        color[w] = 1;
                        path.push(e);
                        stack.push((w, 0));
                    }
                    1 => {
                        // Found a cycle: the suffix of `path` from w, plus e.
                        let mut cycle = vec![e];
                        let mut node = v;
                        for &pe in path.iter().rev() {
                            if node == w {
                                break;
                            }
                            cycle.push(pe);
                            node = instance.edges[pe].tail;
                        }
                        cycle.reverse();
                        return Some(cycle);
                    }
                    _ => {}
                }
            } else {
                color[v] = 2;
                stack.pop();
                path.pop();
            }
        }
    }
    None
}

/// Plain Dijkstra over transit times; `INF` marks unreachable nodes.
pub(crate) fn dijkstra(instance: &GameInstance, from: NodeId) -> Vec<Time> {
    let n = instance.num_nodes();
    let mut out = vec![Vec::new(); n];
    for (e, edge) in instance.edges.iter().enumerate() {
        out[edge.tail].push(e);
    }
    let mut dist = vec![INF; n];
    dist[from] = 0;
    let mut heap: BinaryHeap<(std::cmp::Reverse<Time>, NodeId)> = BinaryHeap::new();
    heap.push((std::cmp::Reverse(0), from));
    while let Some((std::cmp::Reverse(d), v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &e in &out[v] {
            let nd = d.saturating_add(instance.edges[e].transit);
            let w = instance.edges[e].head;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push((std::cmp::Reverse(nd), w));
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Edge;

    #[test]
    fn single_zero_edge_is_distance_zero() {
        let inst = GameInstance {
            node_names: vec!["s".into(), "t".into()],
            edges: vec![Edge { tail: 0, head: 1, capacity: 1, transit: 0 }],
            source: 0,
            sink: 1,
            players: 1,
            priority: PriorityScheme::Local(vec![vec![]]),
        };
        let report = validate_instance(&inst);
        assert!(report.contains(&Violation::SourceSinkDistanceZero), "{report:?}");
    }

    #[test]
    fn zero_self_loop_is_a_cycle() {
        let inst = GameInstance {
            node_names: vec!["s".into(), "v".into(), "t".into()],
            edges: vec![
                Edge { tail: 0, head: 1, capacity: 1, transit: 1 },
                Edge { tail: 1, head: 1, capacity: 1, transit: 0 },
                Edge { tail: 1, head: 2, capacity: 1, transit: 1 },
            ],
            source: 0,
            sink: 2,
            players: 1,
            priority: PriorityScheme::Global(vec![0, 1, 2]),
        };
        let report = validate_instance(&inst);
        assert!(matches!(report[..], [Violation::ZeroCostCycle { .. }]), "{report:?}");
    }

    #[test]
    fn incomplete_local_list_is_reported() {
        let inst = GameInstance {
            node_names: vec!["s".into(), "v".into(), "t".into()],
            edges: vec![
                Edge { tail: 0, head: 1, capacity: 1, transit: 1 },
                Edge { tail: 0, head: 1, capacity: 1, transit: 1 },
                Edge { tail: 1, head: 2, capacity: 1, transit: 0 },
            ],
            source: 0,
            sink: 2,
            players: 1,
            // exit list forgets one of the two parallel entry edges
            priority: PriorityScheme::Local(vec![vec![], vec![], vec![0]]),
        };
        let report = validate_instance(&inst);
        assert_eq!(report, vec![Violation::IncompletePriorityList { edge: 2 }]);
    }
}
