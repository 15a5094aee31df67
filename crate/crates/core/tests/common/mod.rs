use prioroute::analysis::SearchBudget;
use prioroute::{enumerate_walks, generators, GameInstance, Prepared, StrategyProfile, Time};

pub fn arrivals_of(prep: &Prepared, profile: &StrategyProfile) -> Vec<Time> {
    prioroute::Simulator::new(prep).arrivals(profile).unwrap().to_vec()
}

/// Equilibrium arrival structure: ordered by player id, consecutive gaps at
/// most one.
pub fn assert_arrival_structure(arrivals: &[Time], context: &str) {
    for (i, w) in arrivals.windows(2).enumerate() {
        assert!(w[1] >= w[0], "{context}: player {} arrives after player {}", i + 1, i + 2);
        assert!(w[1] <= w[0] + 1, "{context}: arrival gap above one after player {}", i + 1);
    }
}

/// Seeded random instances whose walk universe stays small enough for
/// exhaustive profile scans.
pub fn random_desk_instances(count: usize, unit_caps: bool, max_walks: usize) -> Vec<GameInstance> {
    let mut out = Vec::new();
    let mut seed = if unit_caps { 1_000_000 } else { 0 };
    while out.len() < count {
        let inst = generators::random_instance(seed, 6, 10, unit_caps);
        seed += 1;
        let prep = Prepared::new(&inst).unwrap();
        let horizon = SearchBudget::default().resolve_horizon(&prep);
        if enumerate_walks(&prep, horizon, max_walks).is_ok() {
            out.push(inst);
        }
    }
    out
}
