//! Deterministic discrete-time execution of a strategy profile.
//!
//! Time advances in integer steps. At each step every edge admits, in the
//! prepared step order, up to its capacity among the players whose next walk
//! edge it is and who are ready at its tail. Conflicts are resolved by the
//! rank of the player's current edge in the target's priority list, then by
//! the time the player entered that current edge, then by player id. Players
//! at the source have no current edge and compete by id alone. A player
//! whose walk is exhausted arrives the moment its last edge can be left.
//!
//! Zero-transit edges are traversed within a single step; the step order
//! guarantees that admissions upstream of a zero-transit chain are settled
//! before the edges fed by it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{EdgeId, PlayerId, StrategyProfile, Time};
use crate::prep::Prepared;

/// One edge traversal: when the player entered, when the edge could first be
/// left, and when the player actually left (equal to the entry time of the
/// next edge, or to `exit_eligible` on the final edge).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Traversal {
    pub edge: EdgeId,
    pub entry: Time,
    pub exit_eligible: Time,
    pub exit: Time,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationTrace {
    pub players: Vec<Vec<Traversal>>,
    pub arrivals: Vec<Time>,
    pub total_cost: u64,
}

impl SimulationTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<SimulationTrace> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("bad trace JSON: {e}")))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Position {
    AtSource,
    OnEdge { entry: Time },
    Arrived,
}

/// Where the engine reads walks from; lets the profile scans run on walk
/// indices into a shared universe without cloning edge lists.
pub trait WalkSource {
    fn count(&self) -> usize;
    fn walk(&self, player: PlayerId) -> &[EdgeId];
}

impl WalkSource for &StrategyProfile {
    fn count(&self) -> usize {
        self.walks.len()
    }

    fn walk(&self, player: PlayerId) -> &[EdgeId] {
        &self.walks[player].0
    }
}

/// Players assigned walks by index into a common universe.
pub struct IndexedProfile<'a> {
    pub universe: &'a [crate::instance::Walk],
    pub assignment: &'a [usize],
}

impl WalkSource for IndexedProfile<'_> {
    fn count(&self) -> usize {
        self.assignment.len()
    }

    fn walk(&self, player: PlayerId) -> &[EdgeId] {
        &self.universe[self.assignment[player]].0
    }
}

/// Reusable engine; the profile scans run millions of simulations, so the
/// per-player state buffers are kept between runs.
pub struct Simulator<'a> {
    prep: &'a Prepared,
    position: Vec<Position>,
    cursor: Vec<usize>,
    arrivals: Vec<Time>,
    candidates: Vec<(u32, Time, PlayerId)>,
}

impl<'a> Simulator<'a> {
    pub fn new(prep: &'a Prepared) -> Simulator<'a> {
        let k = prep.players();
        Simulator {
            prep,
            position: vec![Position::AtSource; k],
            cursor: vec![0; k],
            arrivals: vec![0; k],
            candidates: Vec::with_capacity(k),
        }
    }

    pub fn prepared(&self) -> &Prepared {
        self.prep
    }

    /// Runs the profile and returns the arrival vector. The profile must
    /// already be checked; only cheap structural mistakes are caught here.
    /// Profiles shorter than the instance's player count play the prefix
    /// game of their first players.
    pub fn arrivals(&mut self, profile: &StrategyProfile) -> Result<&[Time]> {
        self.run(profile, &mut None)
    }

    /// As `arrivals`, with walks given as indices into a shared universe.
    pub fn arrivals_indexed(
        &mut self,
        universe: &[crate::instance::Walk],
        assignment: &[usize],
    ) -> Result<&[Time]> {
        self.run(IndexedProfile { universe, assignment }, &mut None)
    }

    pub fn trace(&mut self, profile: &StrategyProfile) -> Result<SimulationTrace> {
        let mut recorder = Some(vec![Vec::new(); profile.walks.len()]);
        let arrivals = self.run(profile, &mut recorder)?.to_vec();
        let total_cost = arrivals.iter().map(|&a| a as u64).sum();
        Ok(SimulationTrace { players: recorder.unwrap(), arrivals, total_cost })
    }

    fn run<S: WalkSource>(
        &mut self,
        source: S,
        recorder: &mut Option<Vec<Vec<Traversal>>>,
    ) -> Result<&[Time]> {
        let prep = self.prep;
        let k = source.count();
        self.position.clear();
        self.position.resize(k, Position::AtSource);
        self.cursor.clear();
        self.cursor.resize(k, 0);
        self.arrivals.clear();
        self.arrivals.resize(k, 0);

        let mut remaining = k;
        let horizon: u64 = (0..k)
            .map(|p| {
                let w = source.walk(p);
                w.len() as u64 + w.iter().map(|&e| prep.transit(e) as u64).sum::<u64>()
            })
            .sum::<u64>()
            + (k * prep.num_edges()) as u64
            + 16;

        let mut now: Time = 0;
        while remaining > 0 {
            if now as u64 > horizon {
                return Err(Error::Livelock { horizon });
            }
            for &edge in prep.step_order() {
                self.candidates.clear();
                for p in 0..k {
                    let walk = source.walk(p);
                    let key = match self.position[p] {
                        Position::Arrived => continue,
                        Position::AtSource => {
                            if walk.get(self.cursor[p]) != Some(&edge) {
                                continue;
                            }
                            (0, 0)
                        }
                        Position::OnEdge { entry } => {
                            if walk.get(self.cursor[p]) != Some(&edge) {
                                continue;
                            }
                            let current = walk[self.cursor[p] - 1];
                            if entry + prep.transit(current) > now {
                                continue;
                            }
                            let rank = prep.rank(edge, current).ok_or_else(|| {
                                Error::InvalidWalk {
                                    player: p,
                                    reason: "walk edge not connected to its successor".into(),
                                }
                            })?;
                            (rank, entry)
                        }
                    };
                    self.candidates.push((key.0, key.1, p));
                }
                if self.candidates.is_empty() {
                    continue;
                }
                self.candidates.sort_unstable();
                let admit = (prep.capacity(edge) as usize).min(self.candidates.len());
                for &(_, _, p) in &self.candidates[..admit] {
                    if let (Some(rec), Position::OnEdge { entry }) =
                        (recorder.as_mut(), self.position[p])
                    {
                        let done = rec[p].last_mut().expect("player on edge has a traversal");
                        debug_assert_eq!(done.exit_eligible, entry + prep.transit(done.edge));
                        done.exit = now;
                    }
                    self.position[p] = Position::OnEdge { entry: now };
                    if let Some(rec) = recorder.as_mut() {
                        rec[p].push(Traversal {
                            edge,
                            entry: now,
                            exit_eligible: now + prep.transit(edge),
                            exit: now + prep.transit(edge),
                        });
                    }
                    self.cursor[p] += 1;
                    if self.cursor[p] == source.walk(p).len() {
                        let at = now + prep.transit(edge);
                        self.arrivals[p] = at;
                        self.position[p] = Position::Arrived;
                        remaining -= 1;
                    }
                }
            }
            now += 1;
        }
        Ok(&self.arrivals)
    }
}

/// Simulates a profile on a prepared instance, producing the full trace.
pub fn simulate(prep: &Prepared, profile: &StrategyProfile) -> Result<SimulationTrace> {
    profile.check(prep.instance())?;
    Simulator::new(prep).trace(profile)
}

/// A player competing for entry into an edge.
#[derive(Debug, Clone, Copy)]
pub struct Candidate {
    pub player: PlayerId,
    /// The edge the player is currently on; `None` for players still at the
    /// source (who compete by id alone).
    pub current_edge: Option<EdgeId>,
    /// When the player entered its current edge.
    pub arrived_on_current: Time,
}

/// Orders candidates for entry into `target` and returns the admitted
/// players, at most capacity minus `already_admitted` of them.
pub fn admission_order(
    prep: &Prepared,
    target: EdgeId,
    already_admitted: u32,
    candidates: &[Candidate],
) -> Result<Vec<PlayerId>> {
    let mut keyed = Vec::with_capacity(candidates.len());
    for c in candidates {
        let key = match c.current_edge {
            None => (0, 0),
            Some(current) => {
                let rank = prep.rank(target, current).ok_or_else(|| {
                    Error::Internal(format!("edge {current} does not enter the tail of {target}"))
                })?;
                (rank, c.arrived_on_current)
            }
        };
        keyed.push((key.0, key.1, c.player));
    }
    keyed.sort_unstable();
    let room = prep.capacity(target).saturating_sub(already_admitted) as usize;
    Ok(keyed.into_iter().take(room.min(candidates.len())).map(|(_, _, p)| p).collect())
}

/// Re-checks a finished trace against the model rules: capacity, FIFO on
/// edges, priority soundness at every admission, and walk progress. Used by
/// the property and acceptance suites.
pub fn audit_trace(prep: &Prepared, profile: &StrategyProfile, trace: &SimulationTrace) -> Result<()> {
    let fail = |msg: String| Err(Error::Internal(msg));
    let k = prep.players();

    // entries per (edge, time) never exceed capacity
    let mut entries: std::collections::HashMap<(EdgeId, Time), u32> = std::collections::HashMap::new();
    for per_player in &trace.players {
        for t in per_player {
            *entries.entry((t.edge, t.entry)).or_default() += 1;
        }
    }
    for (&(edge, time), &count) in &entries {
        if count > prep.capacity(edge) {
            return fail(format!("capacity of edge {edge} exceeded at time {time}"));
        }
    }

    // walk progress and arrival bookkeeping
    for p in 0..k {
        let steps = &trace.players[p];
        if steps.len() != profile.walks[p].0.len() {
            return fail(format!("player {p} did not traverse its whole walk"));
        }
        for (i, t) in steps.iter().enumerate() {
            if t.edge != profile.walks[p].0[i] {
                return fail(format!("player {p} deviated from its walk"));
            }
            if t.exit_eligible != t.entry + prep.transit(t.edge) || t.exit < t.exit_eligible {
                return fail(format!("player {p} left edge {} too early", t.edge));
            }
            if i + 1 < steps.len() && steps[i + 1].entry != t.exit {
                return fail(format!("player {p} has a gap between traversals"));
            }
        }
        if trace.arrivals[p] != steps.last().unwrap().exit_eligible {
            return fail(format!("player {p} arrival does not match its last traversal"));
        }
    }

    // sort key of player p when it tries to enter `target` as traversal i
    let key_of = |p: PlayerId, i: usize, target: EdgeId| -> Result<(u32, Time, PlayerId)> {
        if i == 0 {
            return Ok((0, 0, p));
        }
        let prev = trace.players[p][i - 1];
        let rank = prep
            .rank(target, prev.edge)
            .ok_or_else(|| Error::Internal("trace predecessor not in priority list".into()))?;
        Ok((rank, prev.entry, p))
    };

    // priority soundness: while p waited for its next edge, everyone who
    // entered that edge must have carried a strictly smaller key
    for p in 0..k {
        for (i, t) in trace.players[p].iter().enumerate() {
            let ready = if i == 0 { 0 } else { trace.players[p][i - 1].exit_eligible };
            let denied_key = key_of(p, i, t.edge)?;
            for wait in ready..t.entry {
                for q in 0..k {
                    for (j, u) in trace.players[q].iter().enumerate() {
                        if u.edge == t.edge && u.entry == wait {
                            let admitted_key = key_of(q, j, t.edge)?;
                            if admitted_key > denied_key {
                                return fail(format!(
                                    "player {q} entered edge {} at {wait} over waiting player {p}",
                                    t.edge
                                ));
                            }
                        }
                    }
                }
            }
        }
    }

    // FIFO on edges: same edge, same next edge, entry order equals exit order
    for p in 0..k {
        for (i, a) in trace.players[p].iter().enumerate() {
            let a_next = profile.walks[p].0.get(i + 1);
            for q in 0..k {
                for (j, b) in trace.players[q].iter().enumerate() {
                    let b_next = profile.walks[q].0.get(j + 1);
                    if a.edge == b.edge && a_next == b_next && a.entry < b.entry && a.exit > b.exit {
                        return fail(format!(
                            "players {p} and {q} broke FIFO on edge {}",
                            a.edge
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}
