use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use iotpatch_core::PatchPolicy;

#[derive(Debug, Parser)]
#[command(name = "iotpatch", version, about = "Malware propagation and AP patching experiments on contact traces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic contact trace.
    #[command(args_override_self = true)]
    GenTrace(GenTraceArgs),
    /// Rank APs by traffic observed before a cutoff time.
    #[command(args_override_self = true)]
    Rank(RankArgs),
    /// Monte Carlo estimate for one patch time and fraction.
    #[command(args_override_self = true)]
    Simulate(SimulateArgs),
    /// Sweep patch times × patch fractions.
    #[command(args_override_self = true)]
    Sweep(SweepArgs),
    /// Difference between a baseline policy grid and a policy grid.
    #[command(args_override_self = true)]
    Compare(CompareArgs),
    /// Check Monte Carlo estimates against exact enumeration.
    #[command(args_override_self = true)]
    OracleCheck(OracleCheckArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SyntheticArgs {
    #[arg(long, default_value_t = 50)]
    pub devices: usize,
    #[arg(long, default_value_t = 200)]
    pub aps: usize,
    /// Seconds.
    #[arg(long, default_value_t = 10_000.0)]
    pub duration: f64,
    /// Contacts per device per second.
    #[arg(long, default_value_t = 0.01)]
    pub contact_rate: f64,
    #[arg(long, default_value_t = 0.2)]
    pub direct_fraction: f64,
    #[arg(long, default_value_t = 1.2)]
    pub zipf_alpha: f64,
    #[arg(long, default_value_t = 2)]
    pub max_path_len: usize,
}

#[derive(Debug, Args)]
pub struct GenTraceArgs {
    #[command(flatten)]
    pub synthetic: SyntheticArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct TraceArgs {
    /// Trace CSV file.
    #[arg(long, conflicts_with = "synthetic")]
    pub trace: Option<PathBuf>,
    /// Use a generated trace instead of a file.
    #[arg(long)]
    pub synthetic: bool,
    /// Keep file ids verbatim instead of remapping them densely.
    #[arg(long)]
    pub keep_ids: bool,
    #[command(flatten)]
    pub params: SyntheticArgs,
    /// Seed for `--synthetic`.
    #[arg(long, default_value_t = 1)]
    pub trace_seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = 0.00004)]
    pub lambda_inf: f64,
    #[arg(long, default_value_t = 0.00001)]
    pub lambda_dir: f64,
    #[arg(long, default_value = "traffic", value_parser = parse_policy)]
    pub policy: PatchPolicy,
    #[arg(long, default_value_t = 500)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[command(flatten)]
    pub trace: TraceArgs,
    /// Monitoring cutoff; events strictly before it are counted.
    #[arg(long)]
    pub window_end: f64,
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub trace: TraceArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long, default_value_t = 0.0)]
    pub patch_time: f64,
    /// Percentage of APs to patch.
    #[arg(long, default_value_t = 0.0)]
    pub fraction: f64,
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
    /// Also write the binned infection curve.
    #[arg(long)]
    pub series: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub trace: TraceArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long, value_parser = parse_axis, default_value = "0")]
    pub patch_times: Axis,
    #[arg(long, value_parser = parse_axis, default_value = "0,25,50,75,100")]
    pub fractions: Axis,
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub series: Option<PathBuf>,
    /// Also write the optimal patch time per fraction.
    #[arg(long)]
    pub optimal: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub trace: TraceArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Policy subtracted from: the output is baseline minus policy.
    #[arg(long, default_value = "none", value_parser = parse_policy)]
    pub baseline: PatchPolicy,
    /// Run the baseline at this single patch time across the whole grid.
    /// Defaults to 0 for a random baseline.
    #[arg(long)]
    pub baseline_patch_time: Option<f64>,
    #[arg(long, value_parser = parse_axis, default_value = "0")]
    pub patch_times: Axis,
    #[arg(long, value_parser = parse_axis, default_value = "0,25,50,75,100")]
    pub fractions: Axis,
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleCheckArgs {
    /// Use the built-in four-device golden fixture.
    #[arg(long, conflicts_with_all = ["trace", "synthetic"])]
    pub golden: bool,
    #[command(flatten)]
    pub trace: TraceArgs,
    #[arg(long, default_value_t = 0.5)]
    pub lambda_inf: f64,
    #[arg(long, default_value_t = 0.25)]
    pub lambda_dir: f64,
    /// `none` or `traffic`; random plans are not fixed and cannot be enumerated.
    #[arg(long, default_value = "traffic", value_parser = parse_policy)]
    pub policy: PatchPolicy,
    #[arg(long, default_value_t = 0.0)]
    pub patch_time: f64,
    #[arg(long, default_value_t = 50.0)]
    pub fraction: f64,
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 2016)]
    pub seed: u64,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Start every trial from this device instead of a uniform draw.
    #[arg(long)]
    pub seed_device: Option<u32>,
    /// Maximum number of enumerated events.
    #[arg(long, default_value_t = iotpatch_core::DEFAULT_ENUMERATION_CAP)]
    pub cap: usize,
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

fn parse_policy(s: &str) -> Result<PatchPolicy, String> {
    s.parse().map_err(|e: iotpatch_core::Error| e.to_string())
}

/// Comma-separated list of numbers, taken as one flag value.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis(pub Vec<f64>);

fn parse_axis(s: &str) -> Result<Axis, String> {
    let values = s
        .split(',')
        .map(|v| {
            let v = v.trim();
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("invalid number {v:?} in list {s:?}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Axis(values))
}
