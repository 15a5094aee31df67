//! Competitive packet routing games with edge priorities.
//!
//! Atomic players route through a directed network in discrete time; when
//! too many want to enter an edge at once, per-edge priority lists over the
//! incoming edges decide who goes first, then FIFO on the current edge, then
//! the player id. The crate simulates such games deterministically, computes
//! mistrustful pure Nash equilibria sequentially, enumerates equilibria and
//! social optima by brute force at desk scale, measures the prices of
//! anarchy, stability and mistrust, and connects the games to earliest
//! arrival flows, including the construction of global priority lists from
//! flow decompositions.

pub mod analysis;
pub mod eaf;
pub mod error;
pub mod generators;
pub mod instance;
pub mod io;
pub mod pathfinder;
pub mod prep;
pub mod ratio;
pub mod simulator;
pub mod validate;

pub use analysis::{
    best_response, enumerate_pnes, enumerate_walks, is_mistrustful_profile, is_pne, price_metrics,
    social_optimum, EquilibriumReport, SearchBudget,
};
pub use eaf::{
    construct_priority_list, eaf_equilibrium_check, earliest_arrival_flow, EafResult, ListStatus,
    PriorityListDraft,
};
pub use error::{Error, Result};
pub use generators::{generate, FamilySpec};
pub use instance::{Edge, EdgeId, GameInstance, NodeId, PlayerId, PriorityScheme, StrategyProfile, Time, Walk};
pub use pathfinder::{compute_equilibrium, Equilibrium, LabelSet, SinkEdgePolicy};
pub use prep::{transit_shortest_paths, Prepared};
pub use ratio::Ratio;
pub use simulator::{admission_order, audit_trace, simulate, SimulationTrace, Simulator};
pub use validate::{validate_instance, ValidationReport, Violation};
