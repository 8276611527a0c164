//! Frozen fixtures shared by tests, benchmarks and the `oracle-check`
//! command.

use crate::epidemic::SimParams;
use crate::policy::{PatchPlan, PatchPolicy};
use crate::trace::{generate_synthetic, ApId, ContactEvent, SyntheticParams, Trace};

/// Four devices, two APs, six events. Small enough for exact enumeration.
pub fn golden_trace() -> Trace {
    Trace::new(
        4,
        2,
        vec![
            ContactEvent::direct(1.0, 0, 1),
            ContactEvent::infrastructure(2.0, 1, 2, &[1]),
            ContactEvent::infrastructure(3.0, 0, 2, &[0]),
            ContactEvent::infrastructure(4.0, 2, 3, &[0, 1]),
            ContactEvent::infrastructure(5.0, 1, 3, &[1]),
            ContactEvent::direct(6.0, 2, 3),
        ],
    )
    .expect("golden fixture is well formed")
}

/// `lambda_inf = 0.5`, `lambda_dir = 0.25`, 10^5 trials.
pub fn golden_params() -> SimParams {
    SimParams {
        lambda_inf: 0.5,
        lambda_dir: 0.25,
        patch_time: 0.0,
        patch_fraction: 50.0,
        policy: PatchPolicy::TRAFFIC,
        trials: 100_000,
        master_seed: 2016,
    }
}

/// AP 0 patched from time 0.
pub fn golden_plan() -> PatchPlan {
    PatchPlan {
        patch_time: 0.0,
        patched: [ApId(0)].into_iter().collect(),
    }
}

/// 50 devices, 200 APs with Zipf(1.2) popularity, 10^4 s at 0.01
/// contacts per device-second, 20% direct, paths of one or two APs.
pub fn zipf_params() -> SyntheticParams {
    SyntheticParams {
        n_devices: 50,
        n_aps: 200,
        duration: 10_000.0,
        contact_rate: 0.01,
        direct_fraction: 0.2,
        ap_zipf_alpha: 1.2,
        max_path_len: 2,
        seed: 1,
    }
}

pub fn zipf_trace() -> Trace {
    generate_synthetic(&zipf_params()).expect("zipf fixture parameters are valid")
}

/// Propagation rates for the Zipf fixture: high enough that the epidemic
/// reaches a sizeable share of its 50 devices over the trace.
pub fn zipf_sim_params() -> SimParams {
    SimParams {
        lambda_inf: ZIPF_LAMBDA_INF,
        lambda_dir: ZIPF_LAMBDA_DIR,
        patch_time: 0.0,
        patch_fraction: 0.0,
        policy: PatchPolicy::TRAFFIC,
        trials: 500,
        master_seed: 42,
    }
}

pub const ZIPF_LAMBDA_INF: f64 = 0.05;
pub const ZIPF_LAMBDA_DIR: f64 = 0.01;
