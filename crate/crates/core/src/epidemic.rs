//! Propagation dynamics on a contact trace.
//!
//! Devices follow SI dynamics: a compromised device stays compromised. At
//! each contact with exactly one compromised endpoint the other endpoint is
//! infected with probability `lambda_dir` (direct link) or `lambda_inf`
//! (infrastructure link). An infrastructure contact whose path touches a
//! patched AP cannot transmit. The draw for event `i` of a trial is keyed by
//! `i`, so blocked or inert events leave every other event's draw unchanged.

use rand::Rng;

use crate::error::{Error, Result};
use crate::policy::{PatchPlan, PatchPolicy};
use crate::rng::{EventDraws, TrialStreams};
use crate::trace::{ContactEvent, DeviceId, LinkKind, Trace};

/// Default bound on the number of events enumerated by [`exact_oracle`].
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    pub lambda_inf: f64,
    pub lambda_dir: f64,
    /// Seconds.
    pub patch_time: f64,
    /// Percentage of APs, in `[0, 100]`.
    pub patch_fraction: f64,
    pub policy: PatchPolicy,
    pub trials: usize,
    pub master_seed: u64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            lambda_inf: 0.00004,
            lambda_dir: 0.00001,
            patch_time: 0.0,
            patch_fraction: 0.0,
            policy: PatchPolicy::TRAFFIC,
            trials: 500,
            master_seed: 0,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda_inf", self.lambda_inf), ("lambda_dir", self.lambda_dir)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParams(format!("{name} = {v} is not a probability")));
            }
        }
        if !(self.patch_time >= 0.0 && self.patch_time.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "patch time {} must be finite and non-negative",
                self.patch_time
            )));
        }
        if !(0.0..=100.0).contains(&self.patch_fraction) {
            return Err(Error::FractionOutOfRange(self.patch_fraction));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParams("trials must be at least 1".into()));
        }
        Ok(())
    }

    /// Transmission probability across `kind`.
    pub fn rate(&self, kind: &LinkKind) -> f64 {
        match kind {
            LinkKind::Direct => self.lambda_dir,
            LinkKind::Infrastructure(_) => self.lambda_inf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    Direct,
    Infrastructure,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LinkCounts {
    pub direct: usize,
    pub infrastructure: usize,
}

impl LinkCounts {
    pub fn total(&self) -> usize {
        self.direct + self.infrastructure
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfectionRecord {
    pub time: f64,
    pub event_index: usize,
    pub device: DeviceId,
    pub link: Link,
}

#[derive(Debug, Clone)]
pub struct EpidemicState {
    compromised: Vec<bool>,
    compromised_count: usize,
    patched: Vec<bool>,
    patch_applied: bool,
    clock: f64,
}

impl EpidemicState {
    pub fn is_compromised(&self, device: DeviceId) -> bool {
        self.compromised[device.index()]
    }

    pub fn compromised(&self) -> &[bool] {
        &self.compromised
    }

    pub fn compromised_count(&self) -> usize {
        self.compromised_count
    }

    pub fn patched(&self) -> &[bool] {
        &self.patched
    }

    pub fn patch_applied(&self) -> bool {
        self.patch_applied
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    /// Marks every AP in `plan` as patched. Idempotent.
    pub fn apply_patch(&mut self, plan: &PatchPlan) {
        for ap in &plan.patched {
            self.patched[ap.index()] = true;
        }
        self.patch_applied = true;
    }

    fn infect(&mut self, device: DeviceId) {
        if !self.compromised[device.index()] {
            self.compromised[device.index()] = true;
            self.compromised_count += 1;
        }
    }
}

/// Fresh trial state with one uniformly chosen compromised device.
pub fn init_state<R: Rng + ?Sized>(trace: &Trace, rng: &mut R) -> Result<EpidemicState> {
    if trace.devices() == 0 {
        return Err(Error::NoDevices);
    }
    let seed = DeviceId(rng.random_range(0..trace.devices() as u32));
    Ok(init_state_at(trace, seed))
}

pub fn init_state_at(trace: &Trace, seed: DeviceId) -> EpidemicState {
    let mut state = EpidemicState {
        compromised: vec![false; trace.devices()],
        compromised_count: 0,
        patched: vec![false; trace.aps()],
        patch_applied: false,
        clock: 0.0,
    };
    state.infect(seed);
    state
}

/// Applies one contact. Draws are taken only when exactly one endpoint is
/// compromised and the contact is not blocked by a patched AP.
pub fn process_event(
    state: &mut EpidemicState,
    index: usize,
    event: &ContactEvent,
    params: &SimParams,
    draws: &mut EventDraws,
) -> Result<Option<InfectionRecord>> {
    if event.time < state.clock {
        return Err(Error::OutOfOrder {
            index,
            time: event.time,
            clock: state.clock,
        });
    }
    state.clock = event.time;

    let target = match (state.is_compromised(event.a), state.is_compromised(event.b)) {
        (true, false) => event.b,
        (false, true) => event.a,
        _ => return Ok(None),
    };
    let (link, rate) = match &event.kind {
        LinkKind::Direct => (Link::Direct, params.lambda_dir),
        LinkKind::Infrastructure(path) => {
            if path.iter().any(|ap| state.patched[ap.index()]) {
                return Ok(None);
            }
            (Link::Infrastructure, params.lambda_inf)
        }
    };
    if draws.uniform(index) < rate {
        state.infect(target);
        Ok(Some(InfectionRecord {
            time: event.time,
            event_index: index,
            device: target,
            link,
        }))
    } else {
        Ok(None)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub seed_device: DeviceId,
    pub final_compromised: usize,
    /// `(time, compromised count)` after every infection.
    pub series: Vec<(f64, usize)>,
    pub infections_by_link: LinkCounts,
    /// Final per-device compromise flags.
    pub compromised: Vec<bool>,
    /// Number of infection draws consumed.
    pub draws: u64,
}

/// Runs one trial with its seed device drawn from the trial's seed stream.
pub fn run_trial(
    trace: &Trace,
    params: &SimParams,
    plan: &PatchPlan,
    streams: &TrialStreams,
) -> Result<TrialResult> {
    let state = init_state(trace, &mut streams.seed_device_rng())?;
    run_from(trace, params, plan, state, streams.infection_draws())
}

/// Runs one trial from a fixed seed device.
pub fn run_trial_from(
    trace: &Trace,
    params: &SimParams,
    plan: &PatchPlan,
    seed: DeviceId,
    streams: &TrialStreams,
) -> Result<TrialResult> {
    if seed.index() >= trace.devices() {
        return Err(Error::InvalidParams(format!("seed device {seed} outside the trace")));
    }
    run_from(trace, params, plan, init_state_at(trace, seed), streams.infection_draws())
}

fn run_from(
    trace: &Trace,
    params: &SimParams,
    plan: &PatchPlan,
    mut state: EpidemicState,
    mut draws: EventDraws,
) -> Result<TrialResult> {
    let seed_device = DeviceId(state.compromised.iter().position(|&c| c).unwrap_or(0) as u32);
    let mut series = Vec::new();
    let mut by_link = LinkCounts::default();
    for (index, event) in trace.events().iter().enumerate() {
        if !state.patch_applied && event.time >= plan.patch_time {
            state.apply_patch(plan);
        }
        if let Some(record) = process_event(&mut state, index, event, params, &mut draws)? {
            match record.link {
                Link::Direct => by_link.direct += 1,
                Link::Infrastructure => by_link.infrastructure += 1,
            }
            series.push((record.time, state.compromised_count));
        }
    }
    Ok(TrialResult {
        seed_device,
        final_compromised: state.compromised_count,
        series,
        infections_by_link: by_link,
        compromised: state.compromised,
        draws: draws.consumed(),
    })
}

/// Exact per-device compromise probabilities for a fixed seed device.
///
/// Every event that could transmit (positive rate and not statically blocked
/// by the plan) gets a Bernoulli outcome; all `2^E` outcome vectors are
/// replayed forward in time and weighted by their probability.
pub fn exact_oracle(
    trace: &Trace,
    params: &SimParams,
    plan: &PatchPlan,
    seed_device: DeviceId,
) -> Result<Vec<f64>> {
    exact_oracle_with_cap(trace, params, plan, seed_device, DEFAULT_ENUMERATION_CAP)
}

pub fn exact_oracle_with_cap(
    trace: &Trace,
    params: &SimParams,
    plan: &PatchPlan,
    seed_device: DeviceId,
    cap: usize,
) -> Result<Vec<f64>> {
    if trace.devices() == 0 {
        return Err(Error::NoDevices);
    }
    if seed_device.index() >= trace.devices() {
        return Err(Error::InvalidParams(format!("seed device {seed_device} outside the trace")));
    }
    let patched = plan.mask(trace.aps());
    let candidates: Vec<(usize, usize, f64)> = trace
        .events()
        .iter()
        .filter(|e| {
            let blocked = e.time >= plan.patch_time
                && e.kind.distinct_aps().any(|ap| patched[ap.index()]);
            !blocked && params.rate(&e.kind) > 0.0
        })
        .map(|e| (e.a.index(), e.b.index(), params.rate(&e.kind)))
        .collect();
    if candidates.len() > cap.min(63) {
        return Err(Error::CapExceeded {
            cap,
            found: candidates.len(),
        });
    }

    let mut probability = vec![0.0; trace.devices()];
    let mut compromised = vec![false; trace.devices()];
    for outcome in 0u64..(1u64 << candidates.len()) {
        let mut weight = 1.0;
        for (bit, &(_, _, q)) in candidates.iter().enumerate() {
            weight *= if outcome >> bit & 1 == 1 { q } else { 1.0 - q };
        }
        if weight == 0.0 {
            continue;
        }
        compromised.fill(false);
        compromised[seed_device.index()] = true;
        for (bit, &(a, b, _)) in candidates.iter().enumerate() {
            if outcome >> bit & 1 == 1 && compromised[a] != compromised[b] {
                compromised[a] = true;
                compromised[b] = true;
            }
        }
        for (p, &c) in probability.iter_mut().zip(&compromised) {
            if c {
                *p += weight;
            }
        }
    }
    Ok(probability)
}
