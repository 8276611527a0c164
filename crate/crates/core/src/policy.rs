//! Patch-set selection: traffic-aware ranking of APs, random selection, and
//! the no-patch baseline.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::trace::{ApId, Trace};

/// Per-AP count of infrastructure events observed in `[0, window_end)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficTally {
    pub counts: Vec<u64>,
    pub window_end: f64,
}

/// Importance metric used to order APs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum RankingMetric {
    /// Infrastructure event count within the monitoring window.
    #[default]
    Volume,
    /// Reserved for path-centrality ranking; not implemented.
    Betweenness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatchPolicy {
    None,
    Random,
    TrafficAware(RankingMetric),
}

impl PatchPolicy {
    pub const TRAFFIC: PatchPolicy = PatchPolicy::TrafficAware(RankingMetric::Volume);

    pub fn name(&self) -> &'static str {
        match self {
            PatchPolicy::None => "none",
            PatchPolicy::Random => "random",
            PatchPolicy::TrafficAware(RankingMetric::Volume) => "traffic",
            PatchPolicy::TrafficAware(RankingMetric::Betweenness) => "traffic-betweenness",
        }
    }
}

impl fmt::Display for PatchPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PatchPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(PatchPolicy::None),
            "random" => Ok(PatchPolicy::Random),
            "traffic" | "traffic-aware" => Ok(PatchPolicy::TRAFFIC),
            "traffic-betweenness" => Ok(PatchPolicy::TrafficAware(RankingMetric::Betweenness)),
            other => Err(Error::InvalidParams(format!(
                "unknown policy {other:?} (expected none, random or traffic)"
            ))),
        }
    }
}

/// APs to patch and the instant the patch takes effect.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchPlan {
    pub patch_time: f64,
    pub patched: BTreeSet<ApId>,
}

impl PatchPlan {
    pub fn empty(patch_time: f64) -> Self {
        Self {
            patch_time,
            patched: BTreeSet::new(),
        }
    }

    /// Dense membership mask over `aps` APs.
    pub fn mask(&self, aps: usize) -> Vec<bool> {
        let mut mask = vec![false; aps];
        for ap in &self.patched {
            mask[ap.index()] = true;
        }
        mask
    }
}

pub fn tally_traffic(trace: &Trace, window_end: f64) -> TrafficTally {
    let mut counts = vec![0u64; trace.aps()];
    for event in trace.events().iter().take_while(|e| e.time < window_end) {
        for ap in event.kind.distinct_aps() {
            counts[ap.index()] += 1;
        }
    }
    TrafficTally { counts, window_end }
}

/// Orders all APs by count, descending, with ties broken by ascending id.
pub fn rank_aps(tally: &TrafficTally) -> Vec<ApId> {
    let mut ranked: Vec<ApId> = (0..tally.counts.len() as u32).map(ApId).collect();
    ranked.sort_by(|x, y| {
        tally.counts[y.index()]
            .cmp(&tally.counts[x.index()])
            .then(x.cmp(y))
    });
    ranked
}

pub fn rank_by(metric: RankingMetric, trace: &Trace, window_end: f64) -> Result<Vec<ApId>> {
    match metric {
        RankingMetric::Volume => Ok(rank_aps(&tally_traffic(trace, window_end))),
        RankingMetric::Betweenness => Err(Error::UnsupportedMetric("betweenness")),
    }
}

/// Number of APs covered by `p` percent of `aps`, rounded half up.
pub fn patch_count(p: f64, aps: usize) -> Result<usize> {
    if !(0.0..=100.0).contains(&p) {
        return Err(Error::FractionOutOfRange(p));
    }
    let k = (p * aps as f64 / 100.0 + 0.5).floor() as usize;
    Ok(k.min(aps))
}

pub fn select_patch_set(ranked: &[ApId], p: f64) -> Result<BTreeSet<ApId>> {
    let k = patch_count(p, ranked.len())?;
    Ok(ranked[..k].iter().copied().collect())
}

/// Builds the patch plan for `policy`. Only the random branch reads `rng`.
pub fn make_plan<R: Rng + ?Sized>(
    policy: PatchPolicy,
    trace: &Trace,
    patch_time: f64,
    p: f64,
    rng: &mut R,
) -> Result<PatchPlan> {
    if patch_time.is_nan() || patch_time < 0.0 {
        return Err(Error::InvalidParams(format!("patch time {patch_time} is negative")));
    }
    let patched = match policy {
        PatchPolicy::None => {
            patch_count(p, trace.aps())?;
            BTreeSet::new()
        }
        PatchPolicy::Random => {
            let k = patch_count(p, trace.aps())?;
            rand::seq::index::sample(rng, trace.aps(), k)
                .into_iter()
                .map(|i| ApId(i as u32))
                .collect()
        }
        PatchPolicy::TrafficAware(metric) => {
            select_patch_set(&rank_by(metric, trace, patch_time)?, p)?
        }
    };
    Ok(PatchPlan {
        patch_time,
        patched,
    })
}

/// Writes the `rank,ap_id,event_count` report. `ap_id` is the original file
/// label of each AP.
pub fn write_ranking<W: Write>(trace: &Trace, tally: &TrafficTally, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rank", "ap_id", "event_count"])?;
    for (rank, ap) in rank_aps(tally).into_iter().enumerate() {
        w.write_record([
            (rank + 1).to_string(),
            trace.ap_labels()[ap.index()].to_string(),
            tally.counts[ap.index()].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
