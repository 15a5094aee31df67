//! Sequential equilibrium solver for symmetric games.
//!
//! Players are assigned one after another. A label pass tracks, per node,
//! the earliest reachable time and, per edge, the earliest time the edge can
//! still be left given the slots already handed out. Each player gets a walk
//! extracted backwards from the sink through highest-priority predecessors,
//! pinned to the earliest usable slot of every edge; afterwards the labels
//! are updated to reflect the consumed capacity. The resulting profile is a
//! pure Nash equilibrium in which no player can ever be delayed by a later
//! one, and the simulation reproduces the planned entry times exactly.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::error::{Error, Result};
use crate::instance::{EdgeId, NodeId, PlayerId, StrategyProfile, Time, Walk, INF};
use crate::prep::Prepared;
use crate::simulator::{self, SimulationTrace};

#[derive(Debug, Clone)]
pub struct LabelSet {
    /// Earliest time each node can be reached.
    pub earliest_arrival: Vec<Time>,
    /// Earliest time each edge can be left with residual capacity.
    pub earliest_exit: Vec<Time>,
    /// Planned departure per node during the last extraction; transient.
    pub departure: Vec<Option<Time>>,
    /// Players assigned per (edge, entry time).
    pub usage: HashMap<(EdgeId, Time), u32>,
}

impl LabelSet {
    /// Checks the label invariants; test support.
    pub fn check(&self, prep: &Prepared) -> Result<()> {
        for e in 0..prep.num_edges() {
            let tail = self.earliest_arrival[prep.tail(e)];
            let head = self.earliest_arrival[prep.head(e)];
            let exit = self.earliest_exit[e];
            if exit < tail.saturating_add(prep.transit(e)) {
                return Err(Error::Internal(format!("edge {e} can be left before it can be entered")));
            }
            if head > exit {
                return Err(Error::Internal(format!("head of edge {e} labelled later than the edge exit")));
            }
        }
        for (&(e, _), &count) in &self.usage {
            if count > prep.capacity(e) {
                return Err(Error::Internal(format!("edge {e} over-assigned")));
            }
        }
        Ok(())
    }
}

/// How to pick the sink edge among those achieving the earliest arrival.
/// The choice does not affect that player's arrival time but can steer the
/// whole run between the best and the worst equilibrium.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SinkEdgePolicy {
    /// Lowest edge id first; the deterministic default.
    ByEdgeIndex,
    /// First eligible edge of this fixed list, which must be a permutation
    /// of the sink's incoming edges.
    FixedOrder(Vec<EdgeId>),
    /// Cycle through the sink's incoming edges across players.
    RoundRobin,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PathfinderStats {
    /// Predecessor list entries inspected during extraction.
    pub pred_scans: u64,
    /// Edge relaxations performed by label updates.
    pub relax_ops: u64,
    pub heap_pops: u64,
}

impl PathfinderStats {
    pub fn total(&self) -> u64 {
        self.pred_scans + self.relax_ops + self.heap_pops
    }
}

#[derive(Debug, Clone)]
pub struct Equilibrium {
    pub profile: StrategyProfile,
    /// Entry time planned for every walk position, per player.
    pub planned_entries: Vec<Vec<Time>>,
    /// Arrival promised to each player at assignment time.
    pub planned_arrivals: Vec<Time>,
    pub trace: SimulationTrace,
    pub stats: PathfinderStats,
}

/// Labels for the empty network: a full Dijkstra pass from the source (not
/// stopped at the sink), with every edge exit at its free-flow time. Edges
/// hanging off unreachable nodes can never be left.
pub fn init_labels(prep: &Prepared) -> LabelSet {
    init_labels_counted(prep, &mut PathfinderStats::default())
}

fn init_labels_counted(prep: &Prepared, stats: &mut PathfinderStats) -> LabelSet {
    let mut labels = LabelSet {
        earliest_arrival: vec![INF; prep.num_nodes()],
        earliest_exit: vec![0; prep.num_edges()],
        departure: vec![None; prep.num_nodes()],
        usage: HashMap::new(),
    };
    labels.earliest_arrival[prep.source()] = 0;
    dijkstra_pass(prep, &mut labels, stats);
    for e in 0..prep.num_edges() {
        if labels.earliest_arrival[prep.tail(e)] == INF {
            labels.earliest_exit[e] = INF;
        }
    }
    labels
}

/// Relaxes `earliest_arrival` from scratch and lifts `earliest_exit` to the
/// current reachability, keeping exits consumed by assigned players.
fn dijkstra_pass(prep: &Prepared, labels: &mut LabelSet, stats: &mut PathfinderStats) {
    let mut dist = vec![INF; prep.num_nodes()];
    dist[prep.source()] = 0;
    let mut heap: BinaryHeap<(Reverse<Time>, NodeId)> = BinaryHeap::new();
    heap.push((Reverse(0), prep.source()));
    while let Some((Reverse(d), v)) = heap.pop() {
        stats.heap_pops += 1;
        if d > dist[v] {
            continue;
        }
        for &e in prep.out_edges(v) {
            stats.relax_ops += 1;
            let free = d.saturating_add(prep.transit(e));
            let exit = labels.earliest_exit[e].max(free);
            labels.earliest_exit[e] = exit;
            let head = prep.head(e);
            if exit < dist[head] {
                dist[head] = exit;
                heap.push((Reverse(exit), head));
            }
        }
    }
    labels.earliest_arrival = dist;
    labels.departure.iter_mut().for_each(|d| *d = None);
}

/// Stateful sink-edge selection; fixed orders are validated once.
#[derive(Debug, Clone)]
pub struct SinkEdgeChooser {
    policy: SinkEdgePolicy,
    cursor: usize,
}

impl SinkEdgeChooser {
    pub fn new(prep: &Prepared, policy: SinkEdgePolicy) -> Result<SinkEdgeChooser> {
        if let SinkEdgePolicy::FixedOrder(order) = &policy {
            let mut want = prep.in_edges(prep.sink()).to_vec();
            want.sort_unstable();
            let mut got = order.clone();
            got.sort_unstable();
            if want != got {
                return Err(Error::InvalidParameter(
                    "fixed sink order must be a permutation of the sink's incoming edges".into(),
                ));
            }
        }
        Ok(SinkEdgeChooser { policy, cursor: 0 })
    }

    fn pick(&mut self, prep: &Prepared, labels: &LabelSet) -> Result<EdgeId> {
        let sink_time = labels.earliest_arrival[prep.sink()];
        let eligible = |e: EdgeId| labels.earliest_exit[e] == sink_time;
        let picked = match &self.policy {
            SinkEdgePolicy::ByEdgeIndex => prep.in_edges(prep.sink()).iter().copied().find(|&e| eligible(e)),
            SinkEdgePolicy::FixedOrder(order) => order.iter().copied().find(|&e| eligible(e)),
            SinkEdgePolicy::RoundRobin => {
                let ring = prep.in_edges(prep.sink());
                let found = (0..ring.len())
                    .map(|off| (self.cursor + off) % ring.len())
                    .find(|&pos| eligible(ring[pos]));
                found.map(|pos| {
                    self.cursor = (pos + 1) % ring.len();
                    ring[pos]
                })
            }
        };
        picked.ok_or_else(|| Error::Internal("no sink edge matches the sink label".into()))
    }
}

/// Extracts one walk backwards from the sink: pick a sink edge achieving the
/// earliest arrival, then repeatedly the highest-priority predecessor that
/// can be left early enough, each pinned to its earliest slot. Returns the
/// walk and the planned entry time of every walk position.
pub fn extract_walk(
    prep: &Prepared,
    labels: &mut LabelSet,
    chooser: &mut SinkEdgeChooser,
) -> Result<(Walk, Vec<Time>)> {
    extract_walk_counted(prep, labels, chooser, &mut PathfinderStats::default())
}

fn extract_walk_counted(
    prep: &Prepared,
    labels: &mut LabelSet,
    chooser: &mut SinkEdgeChooser,
    stats: &mut PathfinderStats,
) -> Result<(Walk, Vec<Time>)> {
    if labels.earliest_arrival[prep.sink()] == INF {
        return Err(Error::SinkUnreachable);
    }
    labels.departure.iter_mut().for_each(|d| *d = None);
    let sink_edge = chooser.pick(prep, labels)?;

    let mut edges_rev = vec![sink_edge];
    let mut entries_rev = vec![labels.earliest_exit[sink_edge] - prep.transit(sink_edge)];
    let mut succ = sink_edge;
    let mut node = prep.tail(sink_edge);
    let mut leave_by = entries_rev[0];
    labels.departure[node] = Some(leave_by);

    while node != prep.source() {
        let mut found = None;
        for &cand in prep.priority_list(succ) {
            stats.pred_scans += 1;
            if labels.earliest_exit[cand] <= leave_by {
                found = Some(cand);
                break;
            }
        }
        let pred = found.ok_or_else(|| {
            Error::Internal(format!("no usable predecessor at node {node} (labels inconsistent)"))
        })?;
        let entry = labels.earliest_exit[pred] - prep.transit(pred);
        edges_rev.push(pred);
        entries_rev.push(entry);
        succ = pred;
        node = prep.tail(pred);
        leave_by = entry;
        labels.departure[node] = Some(leave_by);
        if edges_rev.len() > prep.num_edges() {
            return Err(Error::Internal("extraction repeated an edge; zero-cost cycle slipped through".into()));
        }
    }
    edges_rev.reverse();
    entries_rev.reverse();
    Ok((Walk(edges_rev), entries_rev))
}

/// Books the walk into the usage map, bumps exhausted slots, and restores
/// the label invariants with a fresh relaxation pass.
pub fn update_labels(prep: &Prepared, labels: &mut LabelSet, walk: &Walk, entries: &[Time]) -> Result<()> {
    update_labels_counted(prep, labels, walk, entries, &mut PathfinderStats::default())
}

fn update_labels_counted(
    prep: &Prepared,
    labels: &mut LabelSet,
    walk: &Walk,
    entries: &[Time],
    stats: &mut PathfinderStats,
) -> Result<()> {
    for (&e, &entry) in walk.0.iter().zip(entries) {
        let count = labels.usage.entry((e, entry)).or_insert(0);
        *count += 1;
        if *count > prep.capacity(e) {
            return Err(Error::Internal(format!("edge {e} over-assigned at time {entry}")));
        }
        if *count == prep.capacity(e) {
            labels.earliest_exit[e] += 1;
        }
    }
    #[cfg(debug_assertions)]
    let before = labels.earliest_arrival.clone();
    dijkstra_pass(prep, labels, stats);
    #[cfg(debug_assertions)]
    for v in 0..prep.num_nodes() {
        debug_assert!(labels.earliest_arrival[v] >= before[v], "arrival label decreased at node {v}");
    }
    Ok(())
}

/// Runs the full solver: one label initialization, then per player an
/// extraction and a label update. The returned profile is simulated and the
/// simulation must reproduce every planned entry time; any deviation is
/// reported as an internal error rather than papered over.
pub fn compute_equilibrium(prep: &Prepared, policy: SinkEdgePolicy) -> Result<Equilibrium> {
    let mut stats = PathfinderStats::default();
    let mut labels = init_labels_counted(prep, &mut stats);
    let mut chooser = SinkEdgeChooser::new(prep, policy)?;
    let mut walks = Vec::with_capacity(prep.players());
    let mut planned_entries = Vec::with_capacity(prep.players());
    let mut planned_arrivals = Vec::with_capacity(prep.players());
    for _ in 0..prep.players() {
        planned_arrivals.push(labels.earliest_arrival[prep.sink()]);
        let (walk, entries) = extract_walk_counted(prep, &mut labels, &mut chooser, &mut stats)?;
        update_labels_counted(prep, &mut labels, &walk, &entries, &mut stats)?;
        walks.push(walk);
        planned_entries.push(entries);
    }

    let profile = StrategyProfile::new(walks);
    let trace = simulator::simulate(prep, &profile)?;
    for p in 0..prep.players() {
        let simulated: Vec<Time> = trace.players[p].iter().map(|t| t.entry).collect();
        if simulated != planned_entries[p] {
            return Err(Error::Internal(format!(
                "player {p} was displaced: planned entries {:?}, simulated {simulated:?}",
                planned_entries[p]
            )));
        }
        if trace.arrivals[p] != planned_arrivals[p] {
            return Err(Error::Internal(format!(
                "player {p} promised arrival {} but reached the sink at {}",
                planned_arrivals[p], trace.arrivals[p]
            )));
        }
    }
    Ok(Equilibrium { profile, planned_entries, planned_arrivals, trace, stats })
}

/// A way for a later player to take a slot promised to an earlier one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Displacement {
    /// Number of leading players whose schedule the adversary attacks.
    pub prefix: usize,
    pub edge: EdgeId,
    pub time: Time,
    /// The scheduled player that would lose its slot.
    pub victim: PlayerId,
}

/// Certifies that no adversary arriving after any prefix of the assigned
/// players can take a scheduled slot from them.
///
/// The adversary is over-approximated: it roams the network freely (no walk
/// structure), may wait anywhere, and is only blocked by scheduled entries
/// that fill a slot it cannot outrank. If even this adversary finds no
/// displacement, no set of real subsequent players can delay any scheduled
/// player, which is the delay-proofness the solver promises.
pub fn verify_no_adversarial_displacement(
    prep: &Prepared,
    equilibrium: &Equilibrium,
) -> std::result::Result<(), Displacement> {
    let k = prep.players();
    let m = prep.num_edges();
    let horizon = equilibrium
        .planned_entries
        .iter()
        .flatten()
        .copied()
        .max()
        .unwrap_or(0) as usize
        + 1;

    for prefix in 1..k {
        // scheduled entries of players 0..prefix: count and weakest key
        let mut count = vec![0u32; m * (horizon + 1)];
        let mut weakest: Vec<Option<(u32, Time, PlayerId)>> = vec![None; m * (horizon + 1)];
        for p in 0..prefix {
            let walk = &equilibrium.profile.walks[p].0;
            let entries = &equilibrium.planned_entries[p];
            for (i, (&e, &entry)) in walk.iter().zip(entries).enumerate() {
                let slot = e * (horizon + 1) + entry as usize;
                count[slot] += 1;
                let key = if i == 0 {
                    (0, 0, p)
                } else {
                    let rank = prep.rank(e, walk[i - 1]).expect("walk edges are connected");
                    (rank, entries[i - 1], p)
                };
                if weakest[slot].map_or(true, |w| key > w) {
                    weakest[slot] = Some(key);
                }
            }
        }

        // adversary reachability over (edge, entry time)
        let mut reach = vec![false; m * (horizon + 1)];
        let mut queue = Vec::new();
        for e in 0..m {
            if prep.tail(e) != prep.source() {
                continue;
            }
            for t in 0..=horizon {
                // ties at the source go by id, which the adversary loses
                if count[e * (horizon + 1) + t] < prep.capacity(e) {
                    reach[e * (horizon + 1) + t] = true;
                    queue.push((e, t));
                }
            }
        }
        while let Some((e, t)) = queue.pop() {
            let free_from = t + prep.transit(e) as usize;
            for &f in prep.out_edges(prep.head(e)) {
                let rank = prep.rank(f, e).expect("outgoing edge of the head");
                for t2 in free_from..=horizon {
                    let slot = f * (horizon + 1) + t2;
                    if count[slot] < prep.capacity(f) {
                        if !reach[slot] {
                            reach[slot] = true;
                            queue.push((f, t2));
                        }
                    } else if let Some((wr, wf, victim)) = weakest[slot] {
                        // slot is full; a strictly better (rank, fifo) key
                        // would push the weakest scheduled player out
                        if (rank, t as Time) < (wr, wf) {
                            return Err(Displacement {
                                prefix,
                                edge: f,
                                time: t2 as Time,
                                victim,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::prep::Prepared;

    fn prep(instance: &crate::instance::GameInstance) -> Prepared {
        Prepared::new(instance).unwrap()
    }

    #[test]
    fn init_labels_on_single_edge() {
        let inst = crate::instance::GameInstance {
            node_names: vec!["s".into(), "t".into()],
            edges: vec![crate::instance::Edge { tail: 0, head: 1, capacity: 1, transit: 1 }],
            source: 0,
            sink: 1,
            players: 2,
            priority: crate::instance::PriorityScheme::Local(vec![vec![]]),
        };
        let prep = prep(&inst);
        let labels = init_labels(&prep);
        assert_eq!(labels.earliest_arrival[1], 1);
        assert_eq!(labels.earliest_exit[0], 1);
        labels.check(&prep).unwrap();
    }

    #[test]
    fn single_edge_slot_consumed_after_first_player() {
        let inst = crate::instance::GameInstance {
            node_names: vec!["s".into(), "t".into()],
            edges: vec![crate::instance::Edge { tail: 0, head: 1, capacity: 1, transit: 1 }],
            source: 0,
            sink: 1,
            players: 2,
            priority: crate::instance::PriorityScheme::Local(vec![vec![]]),
        };
        let prep = prep(&inst);
        let mut labels = init_labels(&prep);
        let mut chooser = SinkEdgeChooser::new(&prep, SinkEdgePolicy::ByEdgeIndex).unwrap();
        let (walk, entries) = extract_walk(&prep, &mut labels, &mut chooser).unwrap();
        assert_eq!(entries, vec![0]);
        update_labels(&prep, &mut labels, &walk, &entries).unwrap();
        assert_eq!(labels.earliest_exit[0], 2);
        assert_eq!(labels.earliest_arrival[1], 2);
        labels.check(&prep).unwrap();
    }

    #[test]
    fn init_labels_against_relaxation_oracle() {
        // independent Bellman-Ford style relaxation for the free network
        let g = generators::fig7(7, true).unwrap();
        let prep = prep(&g.instance);
        let labels = init_labels(&prep);
        let inst = prep.instance();
        let mut oracle = vec![INF; inst.num_nodes()];
        oracle[inst.source] = 0;
        for _ in 0..inst.num_nodes() {
            for e in &inst.edges {
                if oracle[e.tail] != INF {
                    oracle[e.head] = oracle[e.head].min(oracle[e.tail] + e.transit);
                }
            }
        }
        assert_eq!(labels.earliest_arrival, oracle);
        assert_eq!(labels.earliest_arrival[inst.sink], 3);
        assert_eq!(labels.earliest_exit[g.e_v5_t], 7);
    }

    #[test]
    fn braess_top_down_stays_parallel() {
        let g = generators::braess(4).unwrap();
        let prep = prep(&g.instance);
        let eq = compute_equilibrium(&prep, SinkEdgePolicy::FixedOrder(g.t_edges.clone())).unwrap();
        assert_eq!(eq.trace.arrivals, vec![1, 1, 1, 1]);
        assert_eq!(eq.trace.total_cost, 4);
        for (p, walk) in eq.profile.walks.iter().enumerate() {
            assert_eq!(*walk, g.parallel_walk(p));
        }
    }

    #[test]
    fn braess_bottom_first_collapses_to_zigzag() {
        let g = generators::braess(4).unwrap();
        let prep = prep(&g.instance);
        let mut order = g.t_edges.clone();
        order.reverse();
        let eq = compute_equilibrium(&prep, SinkEdgePolicy::FixedOrder(order)).unwrap();
        assert_eq!(eq.trace.arrivals, vec![1, 2, 3, 4]);
        assert_eq!(eq.trace.total_cost, 10);
        for walk in &eq.profile.walks {
            assert_eq!(*walk, g.zigzag_walk());
        }
    }

    #[test]
    fn braess_first_player_keeps_labels_flat() {
        let g = generators::braess(4).unwrap();
        let prep = prep(&g.instance);
        let mut labels = init_labels(&prep);
        let mut chooser =
            SinkEdgeChooser::new(&prep, SinkEdgePolicy::FixedOrder(g.t_edges.clone())).unwrap();
        let (walk, entries) = extract_walk(&prep, &mut labels, &mut chooser).unwrap();
        assert_eq!(walk, g.parallel_walk(0));
        update_labels(&prep, &mut labels, &walk, &entries).unwrap();
        // three parallel rows remain free, so the sink label stays at 1
        assert_eq!(labels.earliest_arrival[prep.sink()], 1);
    }

    #[test]
    fn loop_network_walks_and_arrivals() {
        for k in [3usize, 4, 5] {
            let g = generators::loop_network(k).unwrap();
            let prep = prep(&g.instance);
            let eq = compute_equilibrium(&prep, SinkEdgePolicy::ByEdgeIndex).unwrap();
            let expect: Vec<Time> = (0..k as Time).map(|i| i + 2).collect();
            assert_eq!(eq.trace.arrivals, expect);
            for p in 0..k - 1 {
                assert_eq!(eq.profile.walks[p], g.pne_walk(p), "player {p} of loop({k})");
            }
            // player k-1 circles the middle node k-1 times
            let visits = eq.profile.walks[k - 2]
                .0
                .iter()
                .filter(|&&e| prep.head(e) == 1)
                .count();
            assert_eq!(visits, k - 1);
        }
    }

    #[test]
    fn loop_update_matches_best_reply_oracle() {
        // after all k players are assigned, the sink label equals the best
        // arrival an extra player could still achieve, found by brute force
        for k in [3usize, 4] {
            let g = generators::loop_network(k).unwrap();
            let prep = prep(&g.instance);
            let mut labels = init_labels(&prep);
            let mut chooser = SinkEdgeChooser::new(&prep, SinkEdgePolicy::ByEdgeIndex).unwrap();
            let mut walks = Vec::new();
            for _ in 0..k {
                let (walk, entries) = extract_walk(&prep, &mut labels, &mut chooser).unwrap();
                update_labels(&prep, &mut labels, &walk, &entries).unwrap();
                walks.push(walk);
            }
            let predicted = labels.earliest_arrival[prep.sink()];

            let mut extra = g.instance.clone();
            extra.players = k + 1;
            let eprep = Prepared::new(&extra).unwrap();
            let universe =
                crate::analysis::enumerate_walks(&eprep, (k + 4) as Time, 100_000).unwrap();
            let mut sim = crate::simulator::Simulator::new(&eprep);
            let best = universe
                .iter()
                .map(|w| {
                    let mut ws = walks.clone();
                    ws.push(w.clone());
                    sim.arrivals(&StrategyProfile::new(ws)).unwrap()[k]
                })
                .min()
                .unwrap();
            assert_eq!(predicted, best, "loop({k})");
            assert_eq!(predicted, k as Time + 2);
        }
    }

    #[test]
    fn double_braess_left_follows_under_every_policy() {
        let g = generators::double_braess(4, generators::DoubleBraessVariant::Left).unwrap();
        let prep = prep(&g.instance);
        let mut policies = vec![SinkEdgePolicy::ByEdgeIndex, SinkEdgePolicy::RoundRobin];
        let t_edges = g.t_edges.clone();
        policies.extend(permutations(&t_edges).into_iter().map(SinkEdgePolicy::FixedOrder));
        for policy in policies {
            let eq = compute_equilibrium(&prep, policy.clone()).unwrap();
            assert_eq!(eq.trace.total_cost, 10, "{policy:?}");
            assert_eq!(eq.trace.arrivals, vec![1, 2, 3, 4], "{policy:?}");
        }
    }

    #[test]
    fn no_displacement_certificate_holds_on_named_families() {
        let instances = vec![
            generators::braess(4).unwrap().instance,
            generators::pos_braess(4).unwrap().instance,
            generators::loop_network(5).unwrap().instance,
            generators::fig6().instance,
            generators::fig8().instance,
        ];
        for inst in instances {
            let prep = Prepared::new(&inst).unwrap();
            let eq = compute_equilibrium(&prep, SinkEdgePolicy::ByEdgeIndex).unwrap();
            verify_no_adversarial_displacement(&prep, &eq).unwrap();
        }
    }

    pub(crate) fn permutations(items: &[EdgeId]) -> Vec<Vec<EdgeId>> {
        if items.is_empty() {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for (i, &x) in items.iter().enumerate() {
            let mut rest = items.to_vec();
            rest.remove(i);
            for mut tail in permutations(&rest) {
                tail.insert(0, x);
                out.push(tail);
            }
        }
        out
    }
}
