//! Trace-driven simulation of malware spreading among mobile IoT devices
//! over direct and AP-routed contacts, with traffic-aware, random and
//! no-patch AP patching policies and a Monte Carlo experiment harness.

pub mod epidemic;
pub mod error;
pub mod experiment;
pub mod fixtures;
pub mod policy;
pub mod rng;
pub mod trace;

pub use epidemic::{
    exact_oracle, exact_oracle_with_cap, init_state, process_event, run_trial, run_trial_from,
    EpidemicState, InfectionRecord, Link, LinkCounts, SimParams, TrialResult,
    DEFAULT_ENUMERATION_CAP,
};
pub use error::{Error, Result};
pub use experiment::{
    device_probabilities, diff_grid, monte_carlo, optimal_patch_time, pinned_grid, run_trials,
    sweep_grid, Aggregate, Estimate, GridResult, OptimalCurve, OptimalPoint,
};
pub use policy::{
    make_plan, patch_count, rank_aps, select_patch_set, tally_traffic, PatchPlan, PatchPolicy,
    RankingMetric, TrafficTally,
};
pub use rng::{EventDraws, TrialStreams};
pub use trace::{
    generate_synthetic, parse_trace, parse_trace_str, parse_trace_with, validate, write_trace,
    ApId, ContactEvent, DeviceId, IdMapping, LinkKind, ParseOptions, SyntheticParams, Trace,
    Violation, ViolationKind,
};
