//! Brute-force analysis at desk scale: walk enumeration, best responses,
//! equilibrium enumeration and verification, mistrust checks, social optima
//! and the efficiency metrics.
//!
//! Everything here re-simulates whole profiles instead of patching traces;
//! the simulator is cheap and exactness beats cleverness at this scale.
//! Checks are exhaustive within the arrival horizon: an equilibrium arrival
//! is bounded by the shortest path length plus the player count, so the
//! default horizon makes equilibrium verification exact.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{EdgeId, PlayerId, StrategyProfile, Time, Walk};
use crate::io::instance_hash;
use crate::prep::Prepared;
use crate::ratio::Ratio;
use crate::simulator::Simulator;

#[derive(Debug, Clone)]
pub struct SearchBudget {
    /// Walks are enumerated up to this transit length; defaults to the
    /// shortest source-sink distance plus the player count.
    pub horizon: Option<Time>,
    pub max_walks: usize,
    pub max_profiles: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { horizon: None, max_walks: 20_000, max_profiles: 20_000_000 }
    }
}

impl SearchBudget {
    pub fn with_horizon(horizon: Time) -> Self {
        SearchBudget { horizon: Some(horizon), ..Default::default() }
    }

    pub fn resolve_horizon(&self, prep: &Prepared) -> Time {
        self.horizon.unwrap_or(prep.shortest_transit() + prep.players() as Time)
    }
}

/// All source-sink walks with total transit at most `horizon`, ending at
/// their first sink visit, in lexicographic edge-id order.
pub fn enumerate_walks(prep: &Prepared, horizon: Time, max_walks: usize) -> Result<Vec<Walk>> {
    fn dfs(
        prep: &Prepared,
        node: usize,
        transit: Time,
        path: &mut Vec<EdgeId>,
        walks: &mut Vec<Walk>,
        horizon: Time,
        max_walks: usize,
    ) -> Result<()> {
        for &e in prep.out_edges(node) {
            let total = transit + prep.transit(e);
            if total > horizon {
                continue;
            }
            path.push(e);
            if prep.head(e) == prep.sink() {
                if walks.len() == max_walks {
                    return Err(Error::BudgetExceeded(format!("more than {max_walks} walks")));
                }
                walks.push(Walk(path.clone()));
            } else {
                dfs(prep, prep.head(e), total, path, walks, horizon, max_walks)?;
            }
            path.pop();
        }
        Ok(())
    }
    let mut walks = Vec::new();
    let mut path = Vec::new();
    dfs(prep, prep.source(), 0, &mut path, &mut walks, horizon, max_walks)?;
    Ok(walks)
}

fn checked_profile_count(walks: usize, players: usize, cap: u64) -> Result<u64> {
    let mut total: u64 = 1;
    for _ in 0..players {
        total = total
            .checked_mul(walks as u64)
            .filter(|&t| t <= cap)
            .ok_or_else(|| Error::BudgetExceeded(format!("{walks}^{players} profiles")))?;
    }
    Ok(total)
}

/// Walk assignment encoded as a number: player 0 in the most significant
/// digit, so numeric order is lexicographic profile order.
fn decode_profile(universe: &[Walk], players: usize, mut index: u64) -> StrategyProfile {
    let mut walks = vec![Walk(Vec::new()); players];
    for p in (0..players).rev() {
        walks[p] = universe[(index % universe.len() as u64) as usize].clone();
        index /= universe.len() as u64;
    }
    StrategyProfile::new(walks)
}

/// Deviation order for refutation scans: cheap walks first, then
/// lexicographic. A deviation whose transit already reaches the current
/// arrival can never strictly improve it.
fn deviation_order(prep: &Prepared, universe: &[Walk]) -> Vec<(Time, usize)> {
    let mut order: Vec<(Time, usize)> =
        universe.iter().enumerate().map(|(i, w)| (w.transit(prep.instance()), i)).collect();
    order.sort_unstable();
    order
}

struct ScanOutcome {
    optimum_cost: u64,
    optimum_index: u64,
    /// Profile indices that are equilibria, with their cost; ascending index.
    pnes: Vec<(u64, u64)>,
}

fn decode_into(base: usize, mut index: u64, digits: &mut [usize]) {
    for d in digits.iter_mut().rev() {
        *d = (index % base as u64) as usize;
        index /= base as u64;
    }
}

/// One parallel pass over every profile: the cheapest profile and
/// (optionally) the equilibrium filter with fail-fast refutation.
fn scan_profiles(prep: &Prepared, universe: &[Walk], players: usize, collect_pnes: bool, cap: u64) -> Result<ScanOutcome> {
    let total = checked_profile_count(universe.len(), players, cap)?;
    let deviations = deviation_order(prep, universe);

    struct Acc {
        best: (u64, u64),
        pnes: Vec<(u64, u64)>,
    }
    let parts: Vec<Acc> = (0..total)
        .into_par_iter()
        .fold(
            || (Simulator::new(prep), vec![0usize; players], Vec::<Time>::new(), Acc {
                best: (u64::MAX, u64::MAX),
                pnes: Vec::new(),
            }),
            |(mut sim, mut digits, mut arrivals, mut acc), index| {
                decode_into(universe.len(), index, &mut digits);
                arrivals.clear();
                arrivals.extend_from_slice(
                    sim.arrivals_indexed(universe, &digits)
                        .expect("enumerated walks simulate cleanly"),
                );
                let cost: u64 = arrivals.iter().map(|&a| a as u64).sum();
                acc.best = acc.best.min((cost, index));
                if collect_pnes {
                    // refute late arrivers first; their improving moves are
                    // the easiest to find
                    let mut by_lateness: Vec<usize> = (0..players).collect();
                    by_lateness.sort_unstable_by_key(|&p| std::cmp::Reverse(arrivals[p]));
                    let earliest = (0..players).min_by_key(|&p| arrivals[p]).unwrap();
                    let mut stable = true;
                    'players: for &p in &by_lateness {
                        let current = arrivals[p];
                        let original = digits[p];
                        // copying the earliest player is the classic
                        // improving move; try it before the sweep
                        let copy = digits[earliest];
                        let mut try_walk = |digits: &mut Vec<usize>, sim: &mut Simulator, w: usize| {
                            digits[p] = w;
                            let arrival = sim
                                .arrivals_indexed(universe, digits)
                                .expect("enumerated walks simulate cleanly")[p];
                            digits[p] = original;
                            arrival < current
                        };
                        if copy != original
                            && universe[copy].transit(prep.instance()) < current
                            && try_walk(&mut digits, &mut sim, copy)
                        {
                            stable = false;
                            break 'players;
                        }
                        for &(transit, w) in &deviations {
                            if transit >= current {
                                break; // cannot strictly improve
                            }
                            if w == original || w == copy {
                                continue;
                            }
                            if try_walk(&mut digits, &mut sim, w) {
                                stable = false;
                                break 'players;
                            }
                        }
                    }
                    if stable {
                        acc.pnes.push((index, cost));
                    }
                }
                (sim, digits, arrivals, acc)
            },
        )
        .map(|(_, _, _, acc)| acc)
        .collect();

    let mut best = (u64::MAX, u64::MAX);
    let mut pnes = Vec::new();
    for part in parts {
        best = best.min(part.best);
        pnes.extend(part.pnes);
    }
    pnes.sort_unstable();
    let (optimum_cost, optimum_index) = best;
    Ok(ScanOutcome { optimum_cost, optimum_index, pnes })
}

/// Cheapest response of `player` against the rest of the profile, breaking
/// ties towards the lexicographically smallest walk.
pub fn best_response(
    prep: &Prepared,
    profile: &StrategyProfile,
    player: PlayerId,
    budget: &SearchBudget,
) -> Result<(Walk, Time)> {
    let horizon = budget.resolve_horizon(prep);
    let universe = enumerate_walks(prep, horizon, budget.max_walks)?;
    let mut sim = Simulator::new(prep);
    let mut work = profile.clone();
    let mut best: Option<(Time, usize)> = None;
    for (i, walk) in universe.iter().enumerate() {
        work.walks[player] = walk.clone();
        let arrival = sim.arrivals(&work)?[player];
        if best.map_or(true, |(a, _)| arrival < a) {
            best = Some((arrival, i));
        }
    }
    let (arrival, index) =
        best.ok_or_else(|| Error::BudgetExceeded("empty walk universe".into()))?;
    Ok((universe[index].clone(), arrival))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PneCheck {
    pub is_pne: bool,
    /// First improving deviation in (player, walk) order, if any.
    pub improvement: Option<(PlayerId, Walk, Time)>,
}

/// Exhaustive equilibrium check within the budget horizon.
pub fn is_pne(prep: &Prepared, profile: &StrategyProfile, budget: &SearchBudget) -> Result<PneCheck> {
    profile.check(prep.instance())?;
    let horizon = budget.resolve_horizon(prep);
    let universe = enumerate_walks(prep, horizon, budget.max_walks)?;
    let mut sim = Simulator::new(prep);
    let baseline = sim.arrivals(profile)?.to_vec();
    let mut work = profile.clone();
    for p in 0..profile.walks.len() {
        for walk in &universe {
            if walk.transit(prep.instance()) >= baseline[p] || walk == &profile.walks[p] {
                continue;
            }
            work.walks[p] = walk.clone();
            let arrival = sim.arrivals(&work)?[p];
            if arrival < baseline[p] {
                return Ok(PneCheck { is_pne: false, improvement: Some((p, walk.clone(), arrival)) });
            }
        }
        work.walks[p] = profile.walks[p].clone();
    }
    Ok(PneCheck { is_pne: true, improvement: None })
}

/// Every equilibrium whose walks fit the horizon, with its total cost,
/// in lexicographic profile order.
pub fn enumerate_pnes(prep: &Prepared, budget: &SearchBudget) -> Result<Vec<(StrategyProfile, u64)>> {
    let horizon = budget.resolve_horizon(prep);
    let universe = enumerate_walks(prep, horizon, budget.max_walks)?;
    let players = prep.players();
    let outcome = scan_profiles(prep, &universe, players, true, budget.max_profiles)?;
    Ok(outcome
        .pnes
        .into_iter()
        .map(|(index, cost)| (decode_profile(&universe, players, index), cost))
        .collect())
}

/// Exhaustive minimizer of the total cost over all profiles in the horizon.
pub fn social_optimum(prep: &Prepared, budget: &SearchBudget) -> Result<(StrategyProfile, u64)> {
    let horizon = budget.resolve_horizon(prep);
    let universe = enumerate_walks(prep, horizon, budget.max_walks)?;
    let players = prep.players();
    let outcome = scan_profiles(prep, &universe, players, false, budget.max_profiles)?;
    Ok((decode_profile(&universe, players, outcome.optimum_index), outcome.optimum_cost))
}

/// Whether every player plays a strategy that is cost-minimal against the
/// players before it and that no choice of the players after it can delay.
///
/// The second part is checked against every assignment of horizon-bounded
/// walks to the later players; a delay must hit the player before its own
/// arrival, so the horizon bound loses nothing.
pub fn is_mistrustful_profile(
    prep: &Prepared,
    profile: &StrategyProfile,
    budget: &SearchBudget,
) -> Result<bool> {
    profile.check(prep.instance())?;
    let horizon = budget.resolve_horizon(prep);
    let universe = enumerate_walks(prep, horizon, budget.max_walks)?;
    let k = profile.walks.len();

    let mut adversarial_work: u64 = 0;
    for i in 0..k {
        adversarial_work = adversarial_work
            .checked_add(checked_profile_count(universe.len(), k - 1 - i, budget.max_profiles)?)
            .ok_or_else(|| Error::BudgetExceeded("adversary scan too large".into()))?;
    }
    if adversarial_work > budget.max_profiles {
        return Err(Error::BudgetExceeded(format!("{adversarial_work} adversary assignments")));
    }

    let mut sim = Simulator::new(prep);
    for i in 0..k {
        // best response against the earlier players alone
        let prefix = StrategyProfile::new(profile.walks[..=i].to_vec());
        let undisturbed = sim.arrivals(&prefix)?[i];
        let mut work = prefix.clone();
        for walk in &universe {
            if walk.transit(prep.instance()) >= undisturbed {
                continue;
            }
            work.walks[i] = walk.clone();
            if sim.arrivals(&work)?[i] < undisturbed {
                return Ok(false);
            }
        }

        // no assignment of later players may delay player i
        let later = k - 1 - i;
        if later == 0 {
            continue;
        }
        // the fixed prefix walks live at the end of an extended universe
        let mut extended = universe.clone();
        extended.extend(profile.walks[..=i].iter().cloned());
        let total = checked_profile_count(universe.len(), later, budget.max_profiles)?;
        let chunk: u64 = 4096;
        let delayed = (0..total.div_ceil(chunk)).into_par_iter().find_any(|&c| {
            let mut sim = Simulator::new(prep);
            let mut digits: Vec<usize> = (universe.len()..universe.len() + i + 1).collect();
            digits.resize(k, 0);
            (c * chunk..total.min((c + 1) * chunk)).any(|index| {
                decode_into(universe.len(), index, &mut digits[i + 1..]);
                sim.arrivals_indexed(&extended, &digits)
                    .expect("enumerated walks simulate cleanly")[i]
                    > undisturbed
            })
        });
        if delayed.is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumReport {
    pub tool_version: String,
    pub instance_hash: String,
    pub players: usize,
    pub horizon: Time,
    pub walk_count: usize,
    pub profile_count: u64,
    pub pne_count: usize,
    pub social_optimum_cost: u64,
    pub social_optimum_profile: Vec<Vec<EdgeId>>,
    pub best_pne_cost: u64,
    pub best_pne_profile: Vec<Vec<EdgeId>>,
    pub worst_pne_cost: u64,
    pub worst_pne_profile: Vec<Vec<EdgeId>>,
    pub best_mistrustful_cost: u64,
    pub best_mistrustful_profile: Vec<Vec<EdgeId>>,
    pub poa: Ratio,
    pub pos: Ratio,
    pub pom: Ratio,
    pub poa_bound: Ratio,
}

impl EquilibriumReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let mut row = |k: &str, v: String| out.push_str(&format!("{k:<24} {v}\n"));
        row("players", self.players.to_string());
        row("walks (horizon)", format!("{} ({})", self.walk_count, self.horizon));
        row("profiles scanned", self.profile_count.to_string());
        row("equilibria", self.pne_count.to_string());
        row("social optimum", self.social_optimum_cost.to_string());
        row("best equilibrium", self.best_pne_cost.to_string());
        row("worst equilibrium", self.worst_pne_cost.to_string());
        row("best mistrustful", self.best_mistrustful_cost.to_string());
        row("price of anarchy", format!("{} (bound {})", self.poa, self.poa_bound));
        row("price of stability", self.pos.to_string());
        row("price of mistrust", self.pom.to_string());
        out
    }
}

fn profile_edges(p: &StrategyProfile) -> Vec<Vec<EdgeId>> {
    p.walks.iter().map(|w| w.0.clone()).collect()
}

/// Full efficiency report: social optimum, equilibrium extremes, the best
/// mistrustful equilibrium, and the three price ratios. Fails hard if the
/// anarchy bound `(k+1)/2` is violated, since that would falsify the model.
pub fn price_metrics(prep: &Prepared, budget: &SearchBudget) -> Result<EquilibriumReport> {
    let horizon = budget.resolve_horizon(prep);
    let universe = enumerate_walks(prep, horizon, budget.max_walks)?;
    let players = prep.players();
    let outcome = scan_profiles(prep, &universe, players, true, budget.max_profiles)?;
    if outcome.pnes.is_empty() {
        return Err(Error::Internal("no equilibrium within the horizon".into()));
    }

    let mut by_cost: Vec<(u64, u64)> =
        outcome.pnes.iter().map(|&(index, cost)| (cost, index)).collect();
    by_cost.sort_unstable();
    let (best_cost, best_index) = by_cost[0];
    let worst_cost = by_cost.last().unwrap().0;
    let worst_index = by_cost.iter().find(|&&(c, _)| c == worst_cost).unwrap().1;

    let mut best_mistrustful = None;
    for &(cost, index) in &by_cost {
        let profile = decode_profile(&universe, players, index);
        if is_mistrustful_profile(prep, &profile, budget)? {
            best_mistrustful = Some((cost, profile));
            break;
        }
    }
    let (mistrust_cost, mistrust_profile) = best_mistrustful
        .ok_or_else(|| Error::Internal("no mistrustful equilibrium within the horizon".into()))?;

    let opt = outcome.optimum_cost;
    let poa = Ratio::new(worst_cost, opt);
    let poa_bound = Ratio::new(players as u64 + 1, 2);
    if poa > poa_bound {
        return Err(Error::Internal(format!(
            "price of anarchy {poa} exceeds the bound {poa_bound}"
        )));
    }
    Ok(EquilibriumReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        instance_hash: instance_hash(prep.instance()),
        players,
        horizon,
        walk_count: universe.len(),
        profile_count: checked_profile_count(universe.len(), players, budget.max_profiles)?,
        pne_count: outcome.pnes.len(),
        social_optimum_cost: opt,
        social_optimum_profile: profile_edges(&decode_profile(&universe, players, outcome.optimum_index)),
        best_pne_cost: best_cost,
        best_pne_profile: profile_edges(&decode_profile(&universe, players, best_index)),
        worst_pne_cost: worst_cost,
        worst_pne_profile: profile_edges(&decode_profile(&universe, players, worst_index)),
        best_mistrustful_cost: mistrust_cost,
        best_mistrustful_profile: profile_edges(&mistrust_profile),
        poa: Ratio::new(worst_cost, opt),
        pos: Ratio::new(best_cost, opt),
        pom: Ratio::new(mistrust_cost, opt),
        poa_bound,
    })
}

/// All orderings of a slice; sink policies and small tie-break sweeps.
pub fn permutations(items: &[EdgeId]) -> Vec<Vec<EdgeId>> {
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
