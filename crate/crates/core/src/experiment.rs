//! Monte Carlo aggregation, patch-time × patch-fraction sweeps, baseline
//! differencing and CSV persistence.
//!
//! Trial `i` of every cell uses the sub-streams of `(master_seed, i)`, so
//! cells and policies are compared under common random numbers. Trials run
//! on the current rayon pool; results are reduced in trial order, so the
//! output does not depend on the thread count.

use std::io::{Read, Write};

use rayon::prelude::*;

use crate::epidemic::{run_trial, run_trial_from, SimParams, TrialResult};
use crate::error::{Error, Result};
use crate::policy::{make_plan, PatchPlan, PatchPolicy};
use crate::rng::TrialStreams;
use crate::trace::{DeviceId, Trace};

/// Number of time bins used for averaged infection curves.
pub const SERIES_BINS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    /// Mean of `final_compromised / D`. Signed difference in diff grids.
    pub mean_fraction: f64,
    /// Sample standard deviation over `sqrt(trials)`.
    pub stderr: f64,
    pub trials: usize,
    /// `(bin end time, mean compromised fraction)`.
    pub mean_series: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    /// Policy name, or `a-b` for a difference grid.
    pub label: String,
    pub patch_times: Vec<f64>,
    pub fractions: Vec<f64>,
    /// Indexed `[time][fraction]`.
    pub cells: Vec<Vec<Aggregate>>,
    pub params: SimParams,
}

impl GridResult {
    pub fn cell(&self, time: usize, fraction: usize) -> &Aggregate {
        &self.cells[time][fraction]
    }

    pub fn trials(&self) -> usize {
        self.cells
            .first()
            .and_then(|row| row.first())
            .map_or(0, |c| c.trials)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalPoint {
    pub fraction: f64,
    pub best_patch_time: f64,
    pub best_mean_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalCurve {
    pub points: Vec<OptimalPoint>,
}

/// Mean and standard error of a per-trial indicator or fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

fn mean_and_stderr(values: impl ExactSizeIterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt())
}

/// The plan shared by every trial, or `None` when the policy redraws it per
/// trial.
fn shared_plan(trace: &Trace, params: &SimParams) -> Result<Option<PatchPlan>> {
    match params.policy {
        PatchPolicy::Random => Ok(None),
        policy => {
            let mut unused = TrialStreams::new(params.master_seed, 0).policy_rng();
            make_plan(policy, trace, params.patch_time, params.patch_fraction, &mut unused).map(Some)
        }
    }
}

fn trial_plan(
    trace: &Trace,
    params: &SimParams,
    shared: &Option<PatchPlan>,
    streams: &TrialStreams,
) -> Result<PatchPlan> {
    match shared {
        Some(plan) => Ok(plan.clone()),
        None => make_plan(
            params.policy,
            trace,
            params.patch_time,
            params.patch_fraction,
            &mut streams.policy_rng(),
        ),
    }
}

/// Runs `params.trials` trials and returns them in trial order.
pub fn run_trials(trace: &Trace, params: &SimParams) -> Result<Vec<TrialResult>> {
    run_trials_seeded(trace, params, None)
}

fn run_trials_seeded(
    trace: &Trace,
    params: &SimParams,
    seed: Option<DeviceId>,
) -> Result<Vec<TrialResult>> {
    params.validate()?;
    if trace.devices() == 0 {
        return Err(Error::NoDevices);
    }
    let shared = shared_plan(trace, params)?;
    (0..params.trials as u64)
        .into_par_iter()
        .map(|i| {
            let streams = TrialStreams::new(params.master_seed, i);
            let plan = trial_plan(trace, params, &shared, &streams)?;
            match seed {
                None => run_trial(trace, params, &plan, &streams),
                Some(d) => run_trial_from(trace, params, &plan, d, &streams),
            }
        })
        .collect()
}

pub fn aggregate(trace: &Trace, trials: &[TrialResult]) -> Aggregate {
    let d = trace.devices() as f64;
    // statistics on integer counts, scaled once, so a constant count gives
    // exactly count / D
    let (mean_count, stderr_count) =
        mean_and_stderr(trials.iter().map(|t| t.final_compromised as f64));
    let (mean_fraction, stderr) = (mean_count / d, stderr_count / d);
    let duration = trace.duration();
    let bin_ends: Vec<f64> = (1..=SERIES_BINS)
        .map(|k| duration * k as f64 / SERIES_BINS as f64)
        .collect();
    let mut sums = vec![0.0; SERIES_BINS];
    for trial in trials {
        let mut count = 1;
        let mut next = 0;
        for (sum, &end) in sums.iter_mut().zip(&bin_ends) {
            while next < trial.series.len() && trial.series[next].0 <= end {
                count = trial.series[next].1;
                next += 1;
            }
            *sum += count as f64 / d;
        }
    }
    let n = trials.len().max(1) as f64;
    Aggregate {
        mean_fraction,
        stderr,
        trials: trials.len(),
        mean_series: bin_ends.into_iter().zip(sums.into_iter().map(|s| s / n)).collect(),
    }
}

pub fn monte_carlo(trace: &Trace, params: &SimParams) -> Result<Aggregate> {
    Ok(aggregate(trace, &run_trials(trace, params)?))
}

/// Per-device compromise probability estimates. With `seed` set every trial
/// starts from that device; otherwise the seed is drawn uniformly as in
/// [`monte_carlo`].
pub fn device_probabilities(
    trace: &Trace,
    params: &SimParams,
    seed: Option<DeviceId>,
) -> Result<Vec<Estimate>> {
    let trials = run_trials_seeded(trace, params, seed)?;
    Ok((0..trace.devices())
        .map(|d| {
            let (mean, stderr) = mean_and_stderr(
                trials
                    .iter()
                    .map(|t| if t.compromised[d] { 1.0 } else { 0.0 }),
            );
            Estimate { mean, stderr }
        })
        .collect())
}

fn check_axes(patch_times: &[f64], fractions: &[f64]) -> Result<()> {
    if patch_times.is_empty() || fractions.is_empty() {
        return Err(Error::InvalidParams("sweep axes must be non-empty".into()));
    }
    Ok(())
}

fn cell_params(base: &SimParams, patch_time: f64, fraction: f64) -> SimParams {
    SimParams {
        patch_time,
        patch_fraction: fraction,
        ..base.clone()
    }
}

pub fn sweep_grid(
    trace: &Trace,
    base: &SimParams,
    patch_times: &[f64],
    fractions: &[f64],
) -> Result<GridResult> {
    check_axes(patch_times, fractions)?;
    for &t in patch_times {
        for &p in fractions {
            cell_params(base, t, p).validate()?;
        }
    }
    let cells = patch_times
        .iter()
        .map(|&t| {
            fractions
                .iter()
                .map(|&p| monte_carlo(trace, &cell_params(base, t, p)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GridResult {
        label: base.policy.name().to_string(),
        patch_times: patch_times.to_vec(),
        fractions: fractions.to_vec(),
        cells,
        params: base.clone(),
    })
}

/// A grid whose every row is the run at `pinned_time`, laid out on the
/// `patch_times` axis. Used for baselines defined at a single patch time,
/// such as immediate random patching.
pub fn pinned_grid(
    trace: &Trace,
    base: &SimParams,
    pinned_time: f64,
    patch_times: &[f64],
    fractions: &[f64],
) -> Result<GridResult> {
    check_axes(patch_times, fractions)?;
    let row = sweep_grid(trace, base, &[pinned_time], fractions)?
        .cells
        .remove(0);
    Ok(GridResult {
        label: base.policy.name().to_string(),
        patch_times: patch_times.to_vec(),
        fractions: fractions.to_vec(),
        cells: vec![row; patch_times.len()],
        params: SimParams {
            patch_time: pinned_time,
            ..base.clone()
        },
    })
}

/// Cell-wise `a - b` with combined standard error.
pub fn diff_grid(a: &GridResult, b: &GridResult) -> Result<GridResult> {
    if a.patch_times != b.patch_times {
        return Err(Error::AxisMismatch("patch time axes differ".into()));
    }
    if a.fractions != b.fractions {
        return Err(Error::AxisMismatch("fraction axes differ".into()));
    }
    let cells = a
        .cells
        .iter()
        .zip(&b.cells)
        .map(|(ra, rb)| {
            ra.iter()
                .zip(rb)
                .map(|(x, y)| {
                    if x.trials != y.trials {
                        return Err(Error::AxisMismatch(format!(
                            "trial counts differ ({} vs {})",
                            x.trials, y.trials
                        )));
                    }
                    Ok(Aggregate {
                        mean_fraction: x.mean_fraction - y.mean_fraction,
                        stderr: x.stderr.hypot(y.stderr),
                        trials: x.trials,
                        mean_series: x
                            .mean_series
                            .iter()
                            .zip(&y.mean_series)
                            .map(|(&(t, u), &(_, v))| (t, u - v))
                            .collect(),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GridResult {
        label: format!("{}-{}", a.label, b.label),
        patch_times: a.patch_times.clone(),
        fractions: a.fractions.clone(),
        cells,
        params: a.params.clone(),
    })
}

/// Per fraction, the patch time with the lowest mean; earliest on ties.
pub fn optimal_patch_time(grid: &GridResult) -> Result<OptimalCurve> {
    if grid.patch_times.is_empty() || grid.fractions.is_empty() {
        return Err(Error::InvalidParams("empty grid".into()));
    }
    let points = grid
        .fractions
        .iter()
        .enumerate()
        .map(|(j, &fraction)| {
            let mut best = 0;
            for i in 1..grid.patch_times.len() {
                if grid.cells[i][j].mean_fraction < grid.cells[best][j].mean_fraction {
                    best = i;
                }
            }
            OptimalPoint {
                fraction,
                best_patch_time: grid.patch_times[best],
                best_mean_fraction: grid.cells[best][j].mean_fraction,
            }
        })
        .collect();
    Ok(OptimalCurve { points })
}

pub const GRID_HEADER: [&str; 6] = ["policy", "patch_time", "fraction", "trials", "mean_fraction", "stderr"];
pub const OPTIMAL_HEADER: [&str; 3] = ["fraction", "best_patch_time", "best_mean_fraction"];
pub const SERIES_HEADER: [&str; 5] = ["policy", "patch_time", "fraction", "bin_time", "mean_fraction"];

// `f64`'s Display is the shortest string that parses back to the same value.
fn num(x: f64) -> String {
    x.to_string()
}

pub fn write_grid<W: Write>(grid: &GridResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(GRID_HEADER)?;
    for (i, &t) in grid.patch_times.iter().enumerate() {
        for (j, &p) in grid.fractions.iter().enumerate() {
            let c = &grid.cells[i][j];
            w.write_record([
                grid.label.clone(),
                num(t),
                num(p),
                c.trials.to_string(),
                num(c.mean_fraction),
                num(c.stderr),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_series<W: Write>(grid: &GridResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SERIES_HEADER)?;
    for (i, &t) in grid.patch_times.iter().enumerate() {
        for (j, &p) in grid.fractions.iter().enumerate() {
            for &(bin, mean) in &grid.cells[i][j].mean_series {
                w.write_record([grid.label.clone(), num(t), num(p), num(bin), num(mean)])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes a single Monte Carlo result as a one-row grid CSV.
pub fn write_aggregate<W: Write>(params: &SimParams, agg: &Aggregate, out: W) -> Result<()> {
    write_grid(&single_cell(params, agg), out)
}

pub fn single_cell(params: &SimParams, agg: &Aggregate) -> GridResult {
    GridResult {
        label: params.policy.name().to_string(),
        patch_times: vec![params.patch_time],
        fractions: vec![params.patch_fraction],
        cells: vec![vec![agg.clone()]],
        params: params.clone(),
    }
}

pub fn write_optimal<W: Write>(curve: &OptimalCurve, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(OPTIMAL_HEADER)?;
    for pt in &curve.points {
        w.write_record([num(pt.fraction), num(pt.best_patch_time), num(pt.best_mean_fraction)])?;
    }
    w.flush()?;
    Ok(())
}

/// One data row of a grid CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub policy: String,
    pub patch_time: f64,
    pub fraction: f64,
    pub trials: usize,
    pub mean_fraction: f64,
    pub stderr: f64,
}

fn checked_reader<R: Read>(input: R, header: &[&str]) -> Result<csv::Reader<R>> {
    let mut r = csv::Reader::from_reader(input);
    let found = r.headers()?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::InvalidParams(format!(
            "unexpected CSV header {:?}, expected {:?}",
            found.iter().collect::<Vec<_>>(),
            header
        )));
    }
    Ok(r)
}

fn field<T: std::str::FromStr>(record: &csv::StringRecord, i: usize) -> Result<T> {
    let line = record.position().map_or(0, |p| p.line() as usize);
    let raw = record.get(i).unwrap_or("");
    raw.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid value {raw:?} in column {i}"),
    })
}

pub fn read_grid<R: Read>(input: R) -> Result<Vec<GridRow>> {
    let mut r = checked_reader(input, &GRID_HEADER)?;
    r.records()
        .map(|rec| {
            let rec = rec?;
            Ok(GridRow {
                policy: field(&rec, 0)?,
                patch_time: field(&rec, 1)?,
                fraction: field(&rec, 2)?,
                trials: field(&rec, 3)?,
                mean_fraction: field(&rec, 4)?,
                stderr: field(&rec, 5)?,
            })
        })
        .collect()
}

pub fn read_optimal<R: Read>(input: R) -> Result<OptimalCurve> {
    let mut r = checked_reader(input, &OPTIMAL_HEADER)?;
    let points = r
        .records()
        .map(|rec| {
            let rec = rec?;
            Ok(OptimalPoint {
                fraction: field(&rec, 0)?,
                best_patch_time: field(&rec, 1)?,
                best_mean_fraction: field(&rec, 2)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OptimalCurve { points })
}
