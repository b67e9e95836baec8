//! `fdd-mimo`: run the reference experiments, custom sweeps, and closed-form bounds.

mod config_file;
mod manifest;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::warn;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use fdd_mimo::asymptotics::{
    balancing_ratio, bf_beats_zf, delta_dp, gamma, partial_zf_derivative_sign, rate_floor_fast_nt,
    rate_floor_log_nt, ScalingParams,
};
use fdd_mimo::montecarlo::{presets, run_all, DEFAULT_COHERENCE_BLOCK, DEFAULT_SNR_DB, DEFAULT_TRIALS};
use fdd_mimo::report::to_csv_string;
use fdd_mimo::{db_to_linear, ExperimentResult, ExperimentSpec, Executor, Scheme, Sweep};

use manifest::{write_atomic, RunManifest};

/// Environment variable capping the worker count (0 or unset = automatic).
const THREADS_ENV: &str = "FDD_MIMO_THREADS";

#[derive(Parser)]
#[command(name = "fdd-mimo", version, about = "FDD massive-MIMO uplink/downlink rate balancing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Average user rate against feedback bits per block (BF, ZF, DP).
    Fig1(FigArgs),
    /// Per-user BF rate against antenna count for three antenna policies.
    Fig2(FigArgs),
    /// Sum rate against antenna count for BF, ZF and DP.
    Fig3(FigArgs),
    /// Print closed-form limits for the given scaling parameters.
    Bounds(BoundsArgs),
    /// Run an experiment from a TOML config or replay a JSON manifest.
    Custom {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path; the manifest is written next to it.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct FigArgs {
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_SNR_DB, allow_negative_numbers = true)]
    snr_db: f64,
    /// Antenna grid for fig2/fig3.
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    /// Feedback-bit grid for fig1.
    #[arg(long, value_delimiter = ',')]
    bits_list: Option<Vec<f64>>,
    #[arg(long, default_value = "results")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Bf,
    Zf,
    Dp,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Bf => Scheme::Bf,
            SchemeArg::Zf => Scheme::Zf,
            SchemeArg::Dp => Scheme::Dp,
        }
    }
}

#[derive(Args)]
struct BoundsArgs {
    /// Coherence block length in symbols.
    #[arg(long = "T", default_value_t = DEFAULT_COHERENCE_BLOCK as f64)]
    coherence_block: f64,
    /// Transmit antennas, for the exchange ratio T/N_t.
    #[arg(long)]
    nt: Option<f64>,
    #[arg(long, default_value_t = 4.0)]
    cu: f64,
    /// Defaults to c_u.
    #[arg(long)]
    ct: Option<f64>,
    /// Feedback fraction of the uplink rate.
    #[arg(long, conflicts_with = "cf_t")]
    cf: Option<f64>,
    /// Alternatively the product c_f * T.
    #[arg(long = "cf-t")]
    cf_t: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SNR_DB, allow_negative_numbers = true)]
    snr_db: f64,
    #[arg(long, value_enum, default_value = "dp")]
    scheme: SchemeArg,
    #[arg(long)]
    json: bool,
}

fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .with_context(|| format!("{THREADS_ENV} must be a nonnegative integer, got `{v}`")),
        _ => Ok(0),
    }
}

fn fig_specs(name: &str, args: &FigArgs) -> Result<Vec<ExperimentSpec>> {
    if args.trials == 0 {
        bail!("--trials must be at least 1");
    }
    if !args.snr_db.is_finite() {
        bail!("--snr-db must be finite");
    }
    let mut specs = match name {
        "fig1" => vec![presets::fig1(args.trials, args.seed)],
        "fig2" => presets::fig2(args.trials, args.seed),
        "fig3" => presets::fig3(args.trials, args.seed),
        _ => unreachable!(),
    };
    for spec in &mut specs {
        spec.base.snr = db_to_linear(args.snr_db);
        match (&mut spec.sweep, &args.n_list, &args.bits_list) {
            (Sweep::Antennas(ns), Some(list), _) => *ns = list.clone(),
            (Sweep::FeedbackBits(bs), _, Some(list)) => *bs = list.clone(),
            _ => {}
        }
    }
    if name == "fig1" && args.n_list.is_some() {
        bail!("--n-list applies to fig2 and fig3 only");
    }
    if name != "fig1" && args.bits_list.is_some() {
        bail!("--bits-list applies to fig1 only");
    }
    if let Some(n) = &args.n_list {
        if n.is_empty() || n.contains(&0) {
            bail!("--n-list entries must be positive");
        }
    }
    if let Some(b) = &args.bits_list {
        if b.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            bail!("--bits-list entries must be nonnegative");
        }
    }
    Ok(specs)
}

fn report_skips(result: &ExperimentResult) {
    for s in &result.skipped {
        warn!("skipped {} point {} ({}): {}", s.experiment, s.point, s.scheme, s.reason);
        eprintln!("warning: skipped {} point {} ({}): {}", s.experiment, s.point, s.scheme, s.reason);
    }
}

/// Sum-rate growth from the first to the last antenna count of each curve.
fn print_scaling_summary(result: &ExperimentResult) {
    let mut curves: BTreeMap<(String, String), Vec<(f64, f64)>> = BTreeMap::new();
    for r in &result.rows {
        curves
            .entry((r.experiment.clone(), r.scheme.label().to_string()))
            .or_default()
            .push((r.point, r.sum_rate));
    }
    println!("experiment,scheme,n_first,n_last,sum_rate_first,sum_rate_last,sum_rate_ratio");
    for ((exp, scheme), pts) in curves {
        if let (Some(first), Some(last)) = (pts.first(), pts.last()) {
            if pts.len() > 1 {
                println!(
                    "{exp},{scheme},{},{},{:.4},{:.4},{:.4}",
                    first.0,
                    last.0,
                    first.1,
                    last.1,
                    last.1 / first.1
                );
            }
        }
    }
}

fn write_outputs(csv_path: &Path, command: &str, seed: u64, specs: Vec<ExperimentSpec>, result: &ExperimentResult) -> Result<()> {
    let manifest_path = csv_path.with_extension("manifest.json");
    let manifest = RunManifest::new(command, seed, specs, vec![csv_path.to_path_buf(), manifest_path.clone()]);
    let csv = to_csv_string(&result.rows);
    let json = serde_json::to_string_pretty(&manifest)?;
    write_atomic(csv_path, csv.as_bytes())?;
    write_atomic(&manifest_path, json.as_bytes())?;
    eprintln!("wrote {} ({} rows) and {}", csv_path.display(), result.rows.len(), manifest_path.display());
    Ok(())
}

fn cmd_fig(name: &str, args: FigArgs, exec: &Executor) -> Result<()> {
    let specs = fig_specs(name, &args)?;
    let result = run_all(&specs, exec)?;
    report_skips(&result);
    let csv_path = args.out_dir.join(format!("{name}.csv"));
    write_outputs(&csv_path, name, args.seed, specs, &result)?;
    if name != "fig1" {
        print_scaling_summary(&result);
    }
    Ok(())
}

fn cmd_custom(config: &Path, out: &Path, exec: &Executor) -> Result<()> {
    let specs = config_file::load(config)?;
    let result = run_all(&specs, exec)?;
    report_skips(&result);
    let seed = specs.first().map(|s| s.base.seed).unwrap_or(0);
    write_outputs(out, "custom", seed, specs, &result)
}

#[derive(Serialize)]
struct BoundsReport {
    coherence_block: f64,
    c_u: f64,
    c_t: f64,
    c_f: f64,
    snr: f64,
    scheme: Scheme,
    balancing_ratio: Option<f64>,
    limit_distortion: f64,
    gamma: f64,
    delta: Option<f64>,
    floor_fast_nt: f64,
    floor_log_nt_bf: f64,
    floor_log_nt_zf: Option<f64>,
    floor_log_nt_dp: Option<f64>,
    floor_log_nt_selected: Option<f64>,
    bf_beats_zf: bool,
    partial_zf_derivative_sign: i8,
}

fn bounds_report(args: &BoundsArgs) -> Result<BoundsReport> {
    let t = args.coherence_block;
    let c_f = match (args.cf, args.cf_t) {
        (Some(cf), None) => cf,
        (None, Some(cf_t)) => cf_t / t,
        (None, None) => 10.0 / t,
        (Some(_), Some(_)) => unreachable!("clap enforces the conflict"),
    };
    let c_t = args.ct.unwrap_or(args.cu);
    let snr = db_to_linear(args.snr_db);
    let bf = ScalingParams::new(args.cu, c_t, c_f, t, snr, Scheme::Bf)?;
    let zf = bf.with_scheme(Scheme::Zf).ok();
    let dp = bf.with_scheme(Scheme::Dp).ok();
    let scheme: Scheme = args.scheme.into();
    let selected = bf.with_scheme(scheme).ok().map(|p| rate_floor_log_nt(&p));
    Ok(BoundsReport {
        coherence_block: t,
        c_u: args.cu,
        c_t,
        c_f,
        snr,
        scheme,
        balancing_ratio: args.nt.map(|nt| balancing_ratio(t, nt)),
        limit_distortion: bf.limit_distortion(),
        gamma: gamma(snr, c_f, t, c_t),
        delta: dp.as_ref().map(delta_dp),
        floor_fast_nt: rate_floor_fast_nt(&bf),
        floor_log_nt_bf: rate_floor_log_nt(&bf),
        floor_log_nt_zf: zf.as_ref().map(rate_floor_log_nt),
        floor_log_nt_dp: dp.as_ref().map(rate_floor_log_nt),
        floor_log_nt_selected: selected,
        bf_beats_zf: bf_beats_zf(&bf),
        partial_zf_derivative_sign: partial_zf_derivative_sign(snr, bf.limit_distortion(), bf.load()),
    })
}

fn cmd_bounds(args: BoundsArgs) -> Result<()> {
    if let Some(nt) = args.nt {
        if nt.is_nan() || nt <= 0.0 {
            bail!("--nt must be positive");
        }
    }
    let report = bounds_report(&args)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
        return Ok(());
    }
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "n/a (needs c_t >= c_u)".into());
    if let Some(r) = report.balancing_ratio {
        println!("balancing_ratio (T/N_t):       {r:.6}");
    }
    println!("limit distortion xi^2:         {:.6}", report.limit_distortion);
    println!("gamma:                         {:.6}", report.gamma);
    println!("delta (dp - zf):               {}", opt(report.delta));
    println!("floor, N_t >> log N:           {:.6}", report.floor_fast_nt);
    println!("floor, N_t = c_t log2 N, bf:   {:.6}", report.floor_log_nt_bf);
    println!("floor, N_t = c_t log2 N, zf:   {}", opt(report.floor_log_nt_zf));
    println!("floor, N_t = c_t log2 N, dp:   {}", opt(report.floor_log_nt_dp));
    println!("floor for {}:                  {}", report.scheme, opt(report.floor_log_nt_selected));
    println!("bf beats zf:                   {}", report.bf_beats_zf);
    println!(
        "partial-zf derivative sign:    {:+} ({})",
        report.partial_zf_derivative_sign,
        if report.partial_zf_derivative_sign > 0 { "zf preferred" } else { "bf preferred" }
    );
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let exec = Executor::new(threads_from_env()?);
    match cli.command {
        Command::Fig1(a) => cmd_fig("fig1", a, &exec),
        Command::Fig2(a) => cmd_fig("fig2", a, &exec),
        Command::Fig3(a) => cmd_fig("fig3", a, &exec),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Custom { config, out } => cmd_custom(&config, &out, &exec),
    }
}
