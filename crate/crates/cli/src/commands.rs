use std::fs;
use std::io::{self, Write};
use std::path::Path;

use iotpatch_core::experiment::{write_aggregate, write_grid, write_optimal, write_series};
use iotpatch_core::policy::write_ranking;
use iotpatch_core::{
    device_probabilities, diff_grid, exact_oracle_with_cap, generate_synthetic, make_plan,
    monte_carlo, optimal_patch_time, parse_trace_with, pinned_grid, sweep_grid, tally_traffic,
    write_trace, DeviceId, IdMapping, ParseOptions, PatchPolicy, SimParams, SyntheticParams,
    Trace, TrialStreams,
};

use crate::args::{
    CompareArgs, GenTraceArgs, OracleCheckArgs, RankArgs, SimArgs, SimulateArgs, SweepArgs,
    SyntheticArgs, TraceArgs,
};
use crate::error::{CliError, CliResult};
use crate::Command;

pub fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::GenTrace(a) => gen_trace(a),
        Command::Rank(a) => rank(a),
        Command::Simulate(a) => {
            let threads = a.sim.threads;
            with_threads(threads, || simulate(a))
        }
        Command::Sweep(a) => {
            let threads = a.sim.threads;
            with_threads(threads, || sweep(a))
        }
        Command::Compare(a) => {
            let threads = a.sim.threads;
            with_threads(threads, || compare(a))
        }
        Command::OracleCheck(a) => {
            let threads = a.threads;
            with_threads(threads, || oracle_check(a))
        }
    }
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> CliResult<T> + Send) -> CliResult<T> {
    match threads {
        None => f(),
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?
            .install(f),
    }
}

fn synthetic_params(args: &SyntheticArgs, seed: u64) -> CliResult<SyntheticParams> {
    let params = SyntheticParams {
        n_devices: args.devices,
        n_aps: args.aps,
        duration: args.duration,
        contact_rate: args.contact_rate,
        direct_fraction: args.direct_fraction,
        ap_zipf_alpha: args.zipf_alpha,
        max_path_len: args.max_path_len,
        seed,
    };
    params.validate()?;
    Ok(params)
}

/// A trace source whose file, if any, is known to exist.
enum TraceSource<'a> {
    File(&'a Path, ParseOptions),
    Synthetic(SyntheticParams),
}

fn trace_source(args: &TraceArgs) -> CliResult<TraceSource<'_>> {
    match (&args.trace, args.synthetic) {
        (Some(path), _) => {
            if !path.is_file() {
                return Err(CliError::Usage(format!("trace file {} not found", path.display())));
            }
            let ids = if args.keep_ids { IdMapping::Verbatim } else { IdMapping::Dense };
            Ok(TraceSource::File(path, ParseOptions { ids }))
        }
        (None, true) => Ok(TraceSource::Synthetic(synthetic_params(&args.params, args.trace_seed)?)),
        (None, false) => Err(CliError::Usage("one of --trace FILE or --synthetic is required".into())),
    }
}

fn load_trace(source: &TraceSource<'_>) -> CliResult<Trace> {
    match source {
        TraceSource::File(path, options) => {
            let file = fs::File::open(path)
                .map_err(|e| CliError::Usage(format!("cannot open trace {}: {e}", path.display())))?;
            parse_trace_with(io::BufReader::new(file), *options)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
        }
        TraceSource::Synthetic(params) => Ok(generate_synthetic(params)?),
    }
}

fn check_output(path: Option<&Path>) -> CliResult<()> {
    let Some(path) = path else { return Ok(()) };
    if path.is_dir() {
        return Err(CliError::Usage(format!("output {} is a directory", path.display())));
    }
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(CliError::Usage(format!(
            "output directory {} does not exist",
            dir.display()
        ))),
        _ => Ok(()),
    }
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display()))),
        None => io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Data(format!("cannot write to stdout: {e}"))),
    }
}

fn render(f: impl FnOnce(&mut Vec<u8>) -> iotpatch_core::Result<()>) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn sim_params(sim: &SimArgs, patch_time: f64, fraction: f64) -> SimParams {
    SimParams {
        lambda_inf: sim.lambda_inf,
        lambda_dir: sim.lambda_dir,
        patch_time,
        patch_fraction: fraction,
        policy: sim.policy,
        trials: sim.trials,
        master_seed: sim.seed,
    }
}

fn validate_axes(base: &SimParams, patch_times: &[f64], fractions: &[f64]) -> CliResult<()> {
    if patch_times.is_empty() || fractions.is_empty() {
        return Err(CliError::Usage("sweep axes must be non-empty".into()));
    }
    for &t in patch_times {
        for &p in fractions {
            SimParams {
                patch_time: t,
                patch_fraction: p,
                ..base.clone()
            }
            .validate()?;
        }
    }
    Ok(())
}

fn gen_trace(args: GenTraceArgs) -> CliResult<()> {
    let params = synthetic_params(&args.synthetic, args.seed)?;
    check_output(Some(&args.output))?;
    let trace = generate_synthetic(&params)?;
    let bytes = render(|buf| Ok(write_trace(&trace, buf)?))?;
    emit(Some(&args.output), &bytes)?;
    println!(
        "devices={} aps={} events={}",
        trace.devices(),
        trace.aps(),
        trace.events().len()
    );
    Ok(())
}

fn rank(args: RankArgs) -> CliResult<()> {
    if args.window_end.is_nan() || args.window_end < 0.0 {
        return Err(CliError::Usage(format!(
            "--window-end {} must be non-negative",
            args.window_end
        )));
    }
    let source = trace_source(&args.trace)?;
    check_output(args.output.as_deref())?;
    let trace = load_trace(&source)?;
    let tally = tally_traffic(&trace, args.window_end);
    let bytes = render(|buf| write_ranking(&trace, &tally, buf))?;
    emit(args.output.as_deref(), &bytes)
}

fn simulate(args: SimulateArgs) -> CliResult<()> {
    let params = sim_params(&args.sim, args.patch_time, args.fraction);
    params.validate()?;
    let source = trace_source(&args.trace)?;
    check_output(args.output.as_deref())?;
    check_output(args.series.as_deref())?;
    let trace = load_trace(&source)?;
    let agg = monte_carlo(&trace, &params)?;
    let grid = iotpatch_core::experiment::single_cell(&params, &agg);
    let main = render(|buf| write_aggregate(&params, &agg, buf))?;
    let series = match args.series {
        Some(_) => Some(render(|buf| write_series(&grid, buf))?),
        None => None,
    };
    emit(args.output.as_deref(), &main)?;
    if let (Some(path), Some(bytes)) = (args.series.as_deref(), series) {
        emit(Some(path), &bytes)?;
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> CliResult<()> {
    let base = sim_params(&args.sim, 0.0, 0.0);
    validate_axes(&base, &args.patch_times.0, &args.fractions.0)?;
    let source = trace_source(&args.trace)?;
    for out in [&args.output, &args.series, &args.optimal] {
        check_output(out.as_deref())?;
    }
    let trace = load_trace(&source)?;
    let grid = sweep_grid(&trace, &base, &args.patch_times.0, &args.fractions.0)?;

    let main = render(|buf| write_grid(&grid, buf))?;
    let series = match args.series {
        Some(_) => Some(render(|buf| write_series(&grid, buf))?),
        None => None,
    };
    let optimal = match args.optimal {
        Some(_) => {
            let curve = optimal_patch_time(&grid)?;
            Some(render(|buf| write_optimal(&curve, buf))?)
        }
        None => None,
    };
    emit(args.output.as_deref(), &main)?;
    if let (Some(path), Some(bytes)) = (args.series.as_deref(), series) {
        emit(Some(path), &bytes)?;
    }
    if let (Some(path), Some(bytes)) = (args.optimal.as_deref(), optimal) {
        emit(Some(path), &bytes)?;
    }
    Ok(())
}

fn compare(args: CompareArgs) -> CliResult<()> {
    let base = sim_params(&args.sim, 0.0, 0.0);
    let baseline = SimParams {
        policy: args.baseline,
        ..base.clone()
    };
    let pinned = match (args.baseline_patch_time, args.baseline) {
        (Some(t), _) => Some(t),
        (None, PatchPolicy::Random) => Some(0.0),
        (None, _) => None,
    };
    let (times, fractions) = (&args.patch_times.0, &args.fractions.0);
    validate_axes(&base, times, fractions)?;
    validate_axes(&baseline, &pinned.map_or_else(|| times.clone(), |t| vec![t]), fractions)?;
    let source = trace_source(&args.trace)?;
    check_output(args.output.as_deref())?;
    let trace = load_trace(&source)?;

    let subject = sweep_grid(&trace, &base, times, fractions)?;
    let reference = match pinned {
        Some(t) => pinned_grid(&trace, &baseline, t, times, fractions)?,
        None => sweep_grid(&trace, &baseline, times, fractions)?,
    };
    let diff = diff_grid(&reference, &subject)?;
    let bytes = render(|buf| write_grid(&diff, buf))?;
    emit(args.output.as_deref(), &bytes)
}

fn oracle_check(args: OracleCheckArgs) -> CliResult<()> {
    if args.policy == PatchPolicy::Random {
        return Err(CliError::Usage(
            "oracle-check needs a deterministic plan; use --policy none or traffic".into(),
        ));
    }
    let params = SimParams {
        lambda_inf: args.lambda_inf,
        lambda_dir: args.lambda_dir,
        patch_time: args.patch_time,
        patch_fraction: args.fraction,
        policy: args.policy,
        trials: args.trials,
        master_seed: args.seed,
    };
    params.validate()?;
    let source = if args.golden {
        None
    } else {
        Some(trace_source(&args.trace)?)
    };
    check_output(args.output.as_deref())?;
    let trace = match &source {
        None => iotpatch_core::fixtures::golden_trace(),
        Some(source) => load_trace(source)?,
    };
    if let Some(d) = args.seed_device {
        if d as usize >= trace.devices() {
            return Err(CliError::Usage(format!(
                "--seed-device {d} outside the trace's {} devices",
                trace.devices()
            )));
        }
    }

    let mut unused = TrialStreams::new(params.master_seed, 0).policy_rng();
    let plan = make_plan(params.policy, &trace, params.patch_time, params.patch_fraction, &mut unused)?;
    let seeds: Vec<DeviceId> = match args.seed_device {
        Some(d) => vec![DeviceId(d)],
        None => (0..trace.devices() as u32).map(DeviceId).collect(),
    };
    let mut exact = vec![0.0; trace.devices()];
    for &seed in &seeds {
        let p = exact_oracle_with_cap(&trace, &params, &plan, seed, args.cap)?;
        for (acc, x) in exact.iter_mut().zip(p) {
            *acc += x / seeds.len() as f64;
        }
    }
    let estimates = device_probabilities(&trace, &params, args.seed_device.map(DeviceId))?;

    let mut report = String::from("device,exact,estimate,stderr,result\n");
    let mut failures = 0;
    for (d, (e, &x)) in estimates.iter().zip(&exact).enumerate() {
        let ok = (e.mean - x).abs() <= 3.0 * e.stderr + 1e-12;
        if !ok {
            failures += 1;
        }
        report.push_str(&format!(
            "{},{},{},{},{}\n",
            trace.device_labels()[d],
            x,
            e.mean,
            e.stderr,
            if ok { "pass" } else { "FAIL" }
        ));
    }
    match args.output.as_deref() {
        Some(path) => emit(Some(path), report.as_bytes())?,
        None => print!("{report}"),
    }
    if failures > 0 {
        return Err(CliError::Check(format!(
            "oracle-check failed: {failures} of {} devices outside 3 standard errors",
            trace.devices()
        )));
    }
    println!(
        "oracle-check passed: {} devices within 3 standard errors over {} trials",
        trace.devices(),
        params.trials
    );
    Ok(())
}
