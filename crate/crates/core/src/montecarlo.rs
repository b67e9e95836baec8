//! Monte Carlo experiment harness.
//!
//! A trial draws the uplink (when feedback is tied to the uplink rate), turns
//! the feedback budget into a distortion, samples `(H, Ĥ)`, builds the
//! precoder and evaluates the rate bound. Trials run in parallel but each one
//! owns a stream keyed by `(seed, point, lane, trial)` and results are folded
//! in trial order, so output never depends on the worker count.
//!
//! Channel lanes are shared across schemes: at a given point and trial every
//! scheme sees the same `(H_U, H, Ĥ)`.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{rate_floor_fast_nt, rate_floor_log_nt, ScalingParams};
use crate::channel::draw_uplink;
use crate::config::{db_to_linear, Feedback, Scheme, SystemConfig};
use crate::error::{Error, Result};
use crate::precoder::{build_dp, build_linear};
use crate::quantizer::{distortion_for_budget, synthesize_pair};
use crate::rates::{dp_rate, feedback_budget_from_uplink, linear_rate, uplink_mmse_rate};
use crate::rng::{lane, RngStream};

/// Maximum redraws of a degenerate realization within one trial.
pub const REDRAW_CAP: u32 = 10;
/// Uplink realizations averaged by [`UplinkBudget::Average`].
pub const WARMUP_REALIZATIONS: u64 = 100;
pub const DEFAULT_TRIALS: usize = 2000;
pub const DEFAULT_COHERENCE_BLOCK: usize = 180;
pub const DEFAULT_SNR_DB: f64 = 30.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy")]
pub enum AntennaPolicy {
    /// `N_t = N`.
    All,
    /// `N_t = round(c_t log2 N)`, capped at `N`.
    Log { c_t: f64 },
    /// `N_t` taken from the base configuration.
    Fixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy")]
pub enum UserPolicy {
    Fixed,
    /// `K = round(c_u log2 N)`, at least 1.
    Log { c_u: f64 },
}

/// How an uplink-fraction budget is turned into feedback bits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UplinkBudget {
    /// Each trial uses every user's own instantaneous MMSE rate.
    #[default]
    Instantaneous,
    /// All trials use the MMSE rate averaged over warm-up realizations.
    Average,
}

/// Units of the `bound_floor` column.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundOverlay {
    #[default]
    None,
    PerUser,
    SumRate,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_rx: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_tx: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_users: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feedback_bits: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feedback_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "values")]
pub enum Sweep {
    /// Feedback bits per block; requires a bits-driven base configuration.
    FeedbackBits(Vec<f64>),
    /// Total base-station antennas `N`.
    Antennas(Vec<usize>),
    Custom(Vec<PointOverride>),
}

impl Sweep {
    pub fn len(&self) -> usize {
        match self {
            Sweep::FeedbackBits(v) => v.len(),
            Sweep::Antennas(v) => v.len(),
            Sweep::Custom(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    /// Base scenario. Its `scheme` is replaced by each entry of `schemes`, and
    /// its `feedback` chooses between fixed bits and an uplink fraction.
    pub base: SystemConfig,
    pub sweep: Sweep,
    pub schemes: Vec<Scheme>,
    pub trials: usize,
    pub antenna_policy: AntennaPolicy,
    pub user_policy: UserPolicy,
    #[serde(default)]
    pub uplink_budget: UplinkBudget,
    #[serde(default)]
    pub bound: BoundOverlay,
}

impl ExperimentSpec {
    /// Configuration for one sweep point and scheme, or the reason it is skipped.
    pub fn resolve(&self, point: usize, scheme: Scheme) -> std::result::Result<SystemConfig, String> {
        let mut cfg = self.base.clone();
        cfg.scheme = scheme;
        match &self.sweep {
            Sweep::FeedbackBits(bits) => {
                let b = *bits.get(point).ok_or("point index out of range")?;
                if !matches!(cfg.feedback, Feedback::Bits(_)) {
                    return Err("feedback-bits sweep needs a bits-driven base configuration".into());
                }
                cfg.feedback = Feedback::Bits(b);
            }
            Sweep::Antennas(ns) => {
                let n = *ns.get(point).ok_or("point index out of range")?;
                if n == 0 {
                    return Err("antenna count must be positive".into());
                }
                let log_n = (n as f64).log2();
                cfg.n_rx = n;
                cfg.n_users = match self.user_policy {
                    UserPolicy::Fixed => cfg.n_users,
                    UserPolicy::Log { c_u } => ((c_u * log_n).round() as usize).max(1),
                };
                cfg.n_tx = match self.antenna_policy {
                    AntennaPolicy::All => n,
                    AntennaPolicy::Log { c_t } => ((c_t * log_n).round() as usize).clamp(1, n),
                    AntennaPolicy::Fixed => cfg.n_tx,
                };
            }
            Sweep::Custom(points) => {
                let o = points.get(point).ok_or("point index out of range")?;
                cfg.n_rx = o.n_rx.unwrap_or(cfg.n_rx);
                cfg.n_tx = o.n_tx.unwrap_or(cfg.n_tx);
                cfg.n_users = o.n_users.unwrap_or(cfg.n_users);
                if let Some(db) = o.snr_db {
                    cfg.snr = db_to_linear(db);
                }
                match (o.feedback_bits, o.feedback_fraction) {
                    (Some(_), Some(_)) => return Err("point sets both feedback_bits and feedback_fraction".into()),
                    (Some(b), None) => cfg.feedback = Feedback::Bits(b),
                    (None, Some(c)) => cfg.feedback = Feedback::UplinkFraction(c),
                    (None, None) => {}
                }
            }
        }
        cfg.zf_order = scheme.implied_zf_order(cfg.n_users).unwrap_or(self.base.zf_order);
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    /// Sweep coordinate reported for a point.
    pub fn coordinate(&self, point: usize) -> f64 {
        match &self.sweep {
            Sweep::FeedbackBits(b) => b[point],
            Sweep::Antennas(n) => n[point] as f64,
            Sweep::Custom(_) => point as f64,
        }
    }

    /// Closed-form per-user floor for a resolved point, when one applies.
    pub fn floor_for(&self, cfg: &SystemConfig) -> Option<f64> {
        if self.bound == BoundOverlay::None || cfg.scheme == Scheme::PartialZf {
            return None;
        }
        let (UserPolicy::Log { c_u }, Feedback::UplinkFraction(c_f)) = (self.user_policy, cfg.feedback) else {
            return None;
        };
        let per_user = match self.antenna_policy {
            AntennaPolicy::All => {
                let p = ScalingParams::new(c_u, c_u, c_f, cfg.coherence_block as f64, cfg.snr, Scheme::Bf).ok()?;
                rate_floor_fast_nt(&p)
            }
            AntennaPolicy::Log { c_t } => {
                let p = ScalingParams::new(c_u, c_t, c_f, cfg.coherence_block as f64, cfg.snr, cfg.scheme).ok()?;
                rate_floor_log_nt(&p)
            }
            AntennaPolicy::Fixed => return None,
        };
        Some(match self.bound {
            BoundOverlay::SumRate => per_user * cfg.n_users as f64,
            _ => per_user,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateSummary {
    pub experiment: String,
    pub point: f64,
    pub scheme: Scheme,
    pub config: SystemConfig,
    pub trials: usize,
    pub mean_user_rate: f64,
    pub sum_rate: f64,
    pub stderr: f64,
    pub trials_used: usize,
    pub trials_redrawn: usize,
    pub bound_floor: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkippedPoint {
    pub experiment: String,
    pub point: f64,
    pub scheme: Scheme,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub rows: Vec<RateSummary>,
    pub skipped: Vec<SkippedPoint>,
}

impl ExperimentResult {
    pub fn extend(&mut self, other: ExperimentResult) {
        self.rows.extend(other.rows);
        self.skipped.extend(other.skipped);
    }
}

/// Worker pool for trial evaluation.
pub struct Executor {
    pool: rayon::ThreadPool,
}

impl Executor {
    /// `threads = 0` picks rayon's default.
    pub fn new(threads: usize) -> Self {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("failed to start worker pool");
        Self { pool }
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Default for Executor {
    fn default() -> Self {
        Self::new(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct TrialOutcome {
    sum_rate: f64,
    mean_user_rate: f64,
    redraws: u32,
}

/// Per-user feedback bits for one trial.
fn trial_budgets(
    cfg: &SystemConfig,
    seed: u64,
    point: u64,
    trial: u64,
    average_rate: Option<f64>,
) -> Result<Vec<f64>> {
    match cfg.feedback {
        Feedback::Bits(b) => Ok(vec![b; cfg.n_users]),
        Feedback::UplinkFraction(c_f) => {
            let rates = match average_rate {
                Some(r) => vec![r; cfg.n_users],
                None => {
                    let mut rng = RngStream::keyed(seed, point, lane::UPLINK, trial);
                    let ul = draw_uplink(cfg, &mut rng);
                    uplink_mmse_rate(ul.uplink.as_ref().expect("uplink drawn"), cfg.snr).per_user
                }
            };
            rates
                .into_iter()
                .map(|r| feedback_budget_from_uplink(r, c_f, cfg.coherence_block))
                .collect()
        }
    }
}

/// Uplink MMSE rate averaged over users and warm-up realizations.
pub fn average_uplink_rate(cfg: &SystemConfig, seed: u64, point: u64) -> f64 {
    let total: f64 = (0..WARMUP_REALIZATIONS)
        .map(|w| {
            let mut rng = RngStream::keyed(seed, point, lane::UPLINK_WARMUP, w);
            let ul = draw_uplink(cfg, &mut rng);
            uplink_mmse_rate(ul.uplink.as_ref().expect("uplink drawn"), cfg.snr).mean_user_rate()
        })
        .sum();
    total / WARMUP_REALIZATIONS as f64
}

fn run_trial(cfg: &SystemConfig, point: u64, trial: u64, average_rate: Option<f64>) -> Result<TrialOutcome> {
    let seed = cfg.seed;
    let budgets = trial_budgets(cfg, seed, point, trial, average_rate)?;
    let distortion: Vec<f64> = budgets.iter().map(|&b| distortion_for_budget(b, cfg.n_tx)).collect();

    let mut last_reason = String::new();
    for attempt in 0..=REDRAW_CAP {
        let attempt_lane = attempt as u64 * lane::REDRAW_STRIDE;
        let mut chan_rng = RngStream::keyed(seed, point, lane::CHANNEL + attempt_lane, trial);
        let (channel, csi) = synthesize_pair(cfg, &distortion, &mut chan_rng)?;
        let sample = match cfg.scheme {
            Scheme::Dp => {
                let mut rng = RngStream::keyed(seed, point, lane::SCHEME_BASE + cfg.scheme.tag() + attempt_lane, trial);
                match build_dp(&csi, &mut rng) {
                    Ok(p) => dp_rate(&p, &csi.distortion, cfg.snr)?,
                    Err(Error::Degenerate(reason)) => {
                        last_reason = reason;
                        continue;
                    }
                    Err(e) => return Err(e),
                }
            }
            _ => match build_linear(&csi, cfg.zf_order) {
                Ok(p) => linear_rate(&channel.downlink, &p, cfg.snr)?,
                Err(Error::Degenerate(reason)) => {
                    last_reason = reason;
                    continue;
                }
                Err(e) => return Err(e),
            },
        };
        return Ok(TrialOutcome {
            sum_rate: sample.sum_rate,
            mean_user_rate: sample.mean_user_rate(),
            redraws: attempt,
        });
    }
    Err(Error::RedrawCapExceeded {
        cap: REDRAW_CAP,
        trial,
        reason: last_reason,
    })
}

/// Runs every trial at one resolved point.
pub fn run_config(cfg: &SystemConfig, point: u64, trials: usize, budget: UplinkBudget, exec: &Executor) -> Result<Aggregate> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    cfg.validate()?;
    let average_rate = match (cfg.feedback, budget) {
        (Feedback::UplinkFraction(_), UplinkBudget::Average) => Some(average_uplink_rate(cfg, cfg.seed, point)),
        _ => None,
    };
    let outcomes: Vec<TrialOutcome> = exec.pool.install(|| {
        (0..trials as u64)
            .into_par_iter()
            .map(|t| run_trial(cfg, point, t, average_rate))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(Aggregate::from_outcomes(&outcomes))
}

/// Trial statistics at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aggregate {
    pub mean_user_rate: f64,
    pub sum_rate: f64,
    pub stderr: f64,
    pub trials_used: usize,
    pub trials_redrawn: usize,
}

impl Aggregate {
    fn from_outcomes(outcomes: &[TrialOutcome]) -> Self {
        let n = outcomes.len() as f64;
        let mean = outcomes.iter().map(|o| o.mean_user_rate).sum::<f64>() / n;
        let sum_rate = outcomes.iter().map(|o| o.sum_rate).sum::<f64>() / n;
        let stderr = if outcomes.len() > 1 {
            let var = outcomes.iter().map(|o| (o.mean_user_rate - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Self {
            mean_user_rate: mean,
            sum_rate,
            stderr,
            trials_used: outcomes.len(),
            trials_redrawn: outcomes.iter().filter(|o| o.redraws > 0).count(),
        }
    }
}

/// Runs one sweep point for one scheme. `Ok(Err(reason))` means the point was skipped.
pub fn run_point(
    spec: &ExperimentSpec,
    point: usize,
    scheme: Scheme,
    exec: &Executor,
) -> Result<std::result::Result<RateSummary, SkippedPoint>> {
    let cfg = match spec.resolve(point, scheme) {
        Ok(c) => c,
        Err(reason) => {
            return Ok(Err(SkippedPoint {
                experiment: spec.name.clone(),
                point: spec.coordinate(point),
                scheme,
                reason,
            }))
        }
    };
    // A feedback sweep keeps the dimensions fixed, so every point reuses the
    // same draws and only the distortion changes.
    let stream = match spec.sweep {
        Sweep::FeedbackBits(_) => 0,
        _ => point as u64,
    };
    let agg = run_config(&cfg, stream, spec.trials, spec.uplink_budget, exec)?;
    Ok(Ok(RateSummary {
        experiment: spec.name.clone(),
        point: spec.coordinate(point),
        scheme,
        bound_floor: spec.floor_for(&cfg),
        config: cfg,
        trials: spec.trials,
        mean_user_rate: agg.mean_user_rate,
        sum_rate: agg.sum_rate,
        stderr: agg.stderr,
        trials_used: agg.trials_used,
        trials_redrawn: agg.trials_redrawn,
    }))
}

/// Runs every point and scheme; rows are ordered by point, then scheme.
pub fn run_experiment(spec: &ExperimentSpec, exec: &Executor) -> Result<ExperimentResult> {
    if spec.trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    let mut out = ExperimentResult::default();
    for point in 0..spec.sweep.len() {
        for &scheme in &spec.schemes {
            match run_point(spec, point, scheme, exec)? {
                Ok(row) => out.rows.push(row),
                Err(skip) => {
                    warn!(
                        "{}: skipping point {} ({}): {}",
                        skip.experiment, skip.point, skip.scheme, skip.reason
                    );
                    out.skipped.push(skip);
                }
            }
        }
    }
    Ok(out)
}

pub mod presets {
    //! Default experiment definitions for the three reference figures.
    //!
    //! Grids, trial counts and the 30 dB SNR of the antenna sweeps are preset
    //! choices, as are the two logarithmic antenna policies (`c_t` = 4 and 8).

    use super::*;

    pub const FIG1_BITS_STEP: usize = 4;
    pub const FIG1_BITS_MAX: usize = 200;
    pub const ANTENNA_GRID: [usize; 7] = [4, 8, 16, 32, 64, 128, 256];
    pub const C_U: f64 = 4.0;
    /// `c_f T`, feedback bits per block per `log2 N`.
    pub const CF_T: f64 = 10.0;
    pub const LOG_POLICIES_CT: [f64; 2] = [4.0, 8.0];

    pub fn fig1_bits() -> Vec<f64> {
        (0..=FIG1_BITS_MAX).step_by(FIG1_BITS_STEP).map(|b| b as f64).collect()
    }

    pub fn fig1(trials: usize, seed: u64) -> ExperimentSpec {
        ExperimentSpec {
            name: "fig1".into(),
            base: SystemConfig {
                n_rx: 8,
                n_tx: 8,
                n_users: 8,
                snr: db_to_linear(DEFAULT_SNR_DB),
                coherence_block: DEFAULT_COHERENCE_BLOCK,
                feedback: Feedback::Bits(0.0),
                scheme: Scheme::Bf,
                zf_order: 0,
                seed,
            },
            sweep: Sweep::FeedbackBits(fig1_bits()),
            schemes: vec![Scheme::Bf, Scheme::Zf, Scheme::Dp],
            trials,
            antenna_policy: AntennaPolicy::Fixed,
            user_policy: UserPolicy::Fixed,
            uplink_budget: UplinkBudget::Instantaneous,
            bound: BoundOverlay::None,
        }
    }

    fn antenna_sweep(name: String, policy: AntennaPolicy, schemes: Vec<Scheme>, trials: usize, seed: u64, bound: BoundOverlay) -> ExperimentSpec {
        ExperimentSpec {
            name,
            base: SystemConfig {
                n_rx: 4,
                n_tx: 4,
                n_users: 8,
                snr: db_to_linear(DEFAULT_SNR_DB),
                coherence_block: DEFAULT_COHERENCE_BLOCK,
                feedback: Feedback::UplinkFraction(CF_T / DEFAULT_COHERENCE_BLOCK as f64),
                scheme: Scheme::Bf,
                zf_order: 0,
                seed,
            },
            sweep: Sweep::Antennas(ANTENNA_GRID.to_vec()),
            schemes,
            trials,
            antenna_policy: policy,
            user_policy: UserPolicy::Log { c_u: C_U },
            uplink_budget: UplinkBudget::Instantaneous,
            bound,
        }
    }

    fn policies() -> Vec<(String, AntennaPolicy)> {
        let mut v: Vec<(String, AntennaPolicy)> = LOG_POLICIES_CT
            .iter()
            .map(|&c_t| (format!("log_ct{c_t}"), AntennaPolicy::Log { c_t }))
            .collect();
        v.push(("all".into(), AntennaPolicy::All));
        v
    }

    /// Per-user BF rate against `N` under three antenna policies.
    pub fn fig2(trials: usize, seed: u64) -> Vec<ExperimentSpec> {
        policies()
            .into_iter()
            .map(|(label, p)| antenna_sweep(format!("fig2_{label}"), p, vec![Scheme::Bf], trials, seed, BoundOverlay::PerUser))
            .collect()
    }

    /// Sum rate against `N` for BF, ZF and DP under the same policies.
    pub fn fig3(trials: usize, seed: u64) -> Vec<ExperimentSpec> {
        policies()
            .into_iter()
            .map(|(label, p)| {
                antenna_sweep(
                    format!("fig3_{label}"),
                    p,
                    vec![Scheme::Bf, Scheme::Zf, Scheme::Dp],
                    trials,
                    seed,
                    BoundOverlay::SumRate,
                )
            })
            .collect()
    }
}

pub fn run_all(specs: &[ExperimentSpec], exec: &Executor) -> Result<ExperimentResult> {
    let mut out = ExperimentResult::default();
    for spec in specs {
        out.extend(run_experiment(spec, exec)?);
    }
    Ok(out)
}

pub fn run_fig1(trials: usize, seed: u64, exec: &Executor) -> Result<ExperimentResult> {
    run_experiment(&presets::fig1(trials, seed), exec)
}

pub fn run_fig2(trials: usize, seed: u64, exec: &Executor) -> Result<ExperimentResult> {
    run_all(&presets::fig2(trials, seed), exec)
}

pub fn run_fig3(trials: usize, seed: u64, exec: &Executor) -> Result<ExperimentResult> {
    run_all(&presets::fig3(trials, seed), exec)
}
