//! TOML experiment files for `fdd-mimo custom`.
//!
//! ```toml
//! name = "zf_vs_dp"
//! trials = 500
//! seed = 7
//! schemes = ["zf", "dp"]
//!
//! [system]
//! n_rx = 64
//! n_tx = 8
//! n_users = 8
//! snr_db = 30
//! coherence_block = 180
//! feedback_bits = 80          # or: feedback_fraction = 0.0556
//! zf_order = 2                # partial_zf only
//!
//! [policy]
//! antennas = "fixed"          # fixed | all | log  (log needs c_t)
//! users = "fixed"             # fixed | log        (log needs c_u)
//! uplink_budget = "instantaneous"
//! bound = "none"              # none | per_user | sum_rate
//!
//! [sweep]
//! feedback_bits = [40, 80, 120]   # or: antennas = [16, 64]
//!
//! [[point]]                   # instead of [sweep]: explicit points
//! n_tx = 4
//! feedback_bits = 40
//! ```
//!
//! Unknown keys are rejected. A run manifest (`*.json`) is also accepted and
//! replays the experiments it records.

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use std::path::Path;

use fdd_mimo::montecarlo::PointOverride;
use fdd_mimo::{
    db_to_linear, AntennaPolicy, BoundOverlay, ExperimentSpec, Feedback, Scheme, Sweep, SystemConfig, UplinkBudget,
    UserPolicy,
};

use crate::manifest::RunManifest;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSpec {
    name: Option<String>,
    trials: usize,
    #[serde(default)]
    seed: u64,
    schemes: Vec<String>,
    system: SystemSection,
    #[serde(default)]
    policy: PolicySection,
    sweep: Option<SweepSection>,
    #[serde(default)]
    point: Vec<PointOverride>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemSection {
    n_rx: usize,
    n_tx: usize,
    n_users: usize,
    snr_db: f64,
    #[serde(default = "default_block")]
    coherence_block: usize,
    feedback_bits: Option<f64>,
    feedback_fraction: Option<f64>,
    #[serde(default)]
    zf_order: usize,
}

fn default_block() -> usize {
    fdd_mimo::montecarlo::DEFAULT_COHERENCE_BLOCK
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicySection {
    antennas: Option<String>,
    c_t: Option<f64>,
    users: Option<String>,
    c_u: Option<f64>,
    #[serde(default)]
    uplink_budget: UplinkBudget,
    #[serde(default)]
    bound: BoundOverlay,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    feedback_bits: Option<Vec<f64>>,
    antennas: Option<Vec<usize>>,
}

fn parse_toml(text: &str) -> Result<ExperimentSpec> {
    let f: FileSpec = toml::from_str(text)?;
    let feedback = match (f.system.feedback_bits, f.system.feedback_fraction) {
        (Some(b), None) => Feedback::Bits(b),
        (None, Some(c)) => Feedback::UplinkFraction(c),
        (Some(_), Some(_)) => bail!("[system]: set only one of `feedback_bits` and `feedback_fraction`"),
        (None, None) => bail!("[system]: one of `feedback_bits` or `feedback_fraction` is required"),
    };
    let schemes = f
        .schemes
        .iter()
        .map(|s| s.parse::<Scheme>().with_context(|| format!("key `schemes`: bad entry `{s}`")))
        .collect::<Result<Vec<_>>>()?;
    if schemes.is_empty() {
        bail!("key `schemes` must list at least one scheme");
    }
    let antenna_policy = match f.policy.antennas.as_deref().unwrap_or("fixed") {
        "fixed" => AntennaPolicy::Fixed,
        "all" => AntennaPolicy::All,
        "log" => AntennaPolicy::Log {
            c_t: f.policy.c_t.context("key `policy.c_t` is required when antennas = \"log\"")?,
        },
        other => bail!("key `policy.antennas`: unknown policy `{other}`"),
    };
    let user_policy = match f.policy.users.as_deref().unwrap_or("fixed") {
        "fixed" => UserPolicy::Fixed,
        "log" => UserPolicy::Log {
            c_u: f.policy.c_u.context("key `policy.c_u` is required when users = \"log\"")?,
        },
        other => bail!("key `policy.users`: unknown policy `{other}`"),
    };
    let sweep = match (f.sweep, f.point.is_empty()) {
        (Some(s), true) => match (s.feedback_bits, s.antennas) {
            (Some(b), None) => Sweep::FeedbackBits(b),
            (None, Some(n)) => Sweep::Antennas(n),
            _ => bail!("[sweep]: set exactly one of `feedback_bits` or `antennas`"),
        },
        (None, false) => Sweep::Custom(f.point),
        (None, true) => Sweep::Custom(vec![PointOverride::default()]),
        (Some(_), false) => bail!("use either [sweep] or [[point]], not both"),
    };
    if !(f.system.snr_db.is_finite()) {
        bail!("key `system.snr_db` must be finite");
    }
    Ok(ExperimentSpec {
        name: f.name.unwrap_or_else(|| "custom".into()),
        base: SystemConfig {
            n_rx: f.system.n_rx,
            n_tx: f.system.n_tx,
            n_users: f.system.n_users,
            snr: db_to_linear(f.system.snr_db),
            coherence_block: f.system.coherence_block,
            feedback,
            scheme: schemes[0],
            zf_order: f.system.zf_order,
            seed: f.seed,
        },
        sweep,
        schemes,
        trials: f.trials,
        antenna_policy,
        user_policy,
        uplink_budget: f.policy.uplink_budget,
        bound: f.policy.bound,
    })
}

/// Loads experiments from a TOML config or a JSON run manifest.
pub fn load(path: &Path) -> Result<Vec<ExperimentSpec>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "json") {
        let manifest: RunManifest =
            serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))?;
        return Ok(manifest.experiments);
    }
    let spec = parse_toml(&text).with_context(|| format!("invalid config {}", path.display()))?;
    if spec.trials == 0 {
        bail!("key `trials` must be at least 1");
    }
    Ok(vec![spec])
}
