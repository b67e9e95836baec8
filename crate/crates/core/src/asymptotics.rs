//! Closed-form large-antenna limits.
//!
//! The scaling regime ties everything to `log2 N`: `K = c_u log2 N` users,
//! `N_t = c_t log2 N` transmit antennas (or `N_t = N`), and a feedback budget
//! of `c_f T log2 N` bits per block, which makes the limiting distortion
//! `ξ² = 2^(-c_f T / c_t)`.

use serde::{Deserialize, Serialize};

use crate::config::Scheme;
use crate::error::{Error, Result};
use crate::rates::log2_1p;

const LN_2: f64 = std::f64::consts::LN_2;
const LOG2_E: f64 = std::f64::consts::LOG2_E;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    /// Users per `log2 N`.
    pub c_u: f64,
    /// Transmit antennas per `log2 N`.
    pub c_t: f64,
    /// Fraction of the uplink rate spent on feedback.
    pub c_f: f64,
    /// Coherence block length in symbols.
    pub coherence_block: f64,
    /// Linear SNR.
    pub snr: f64,
    pub scheme: Scheme,
}

impl ScalingParams {
    pub fn new(c_u: f64, c_t: f64, c_f: f64, coherence_block: f64, snr: f64, scheme: Scheme) -> Result<Self> {
        let p = Self {
            c_u,
            c_t,
            c_f,
            coherence_block,
            snr,
            scheme,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.c_u > 0.0 && self.c_t > 0.0) {
            return bad("c_u and c_t must be positive".into());
        }
        if self.c_f.is_nan() || self.c_f < 0.0 {
            return bad(format!("c_f must be nonnegative, got {}", self.c_f));
        }
        if !(self.coherence_block > 0.0 && self.snr > 0.0) {
            return bad("coherence block and snr must be positive".into());
        }
        match self.scheme {
            Scheme::PartialZf => bad("asymptotic floors are defined for bf, zf and dp only".into()),
            Scheme::Zf | Scheme::Dp if self.c_t < self.c_u => bad(format!(
                "{} needs c_t >= c_u (c_t = {}, c_u = {})",
                self.scheme, self.c_t, self.c_u
            )),
            _ => Ok(()),
        }
    }

    pub fn with_scheme(self, scheme: Scheme) -> Result<Self> {
        Self { scheme, ..self }.validate().map(|_| Self { scheme, ..self })
    }

    /// `c_f T / c_t`, the feedback bits per transmit antenna in the limit.
    pub fn bits_per_antenna(&self) -> f64 {
        self.c_f * self.coherence_block / self.c_t
    }

    /// Limiting distortion `ξ² = 2^(-c_f T / c_t)`.
    pub fn limit_distortion(&self) -> f64 {
        (-self.bits_per_antenna()).exp2()
    }

    /// `1 - ξ²` without cancellation.
    fn one_minus_distortion(&self) -> f64 {
        -(-self.bits_per_antenna() * LN_2).exp_m1()
    }

    /// Antennas-to-users ratio `c_t / c_u`.
    pub fn antenna_ratio(&self) -> f64 {
        self.c_t / self.c_u
    }

    /// `ζ = c_u / c_t`.
    pub fn load(&self) -> f64 {
        self.c_u / self.c_t
    }

    fn beta(&self) -> f64 {
        match self.scheme {
            Scheme::Bf => 0.0,
            _ => 1.0,
        }
    }
}

/// Downlink-to-feedback exchange ratio `T / N_t` in the interference-limited regime.
pub fn balancing_ratio(coherence_block: f64, n_tx: f64) -> f64 {
    coherence_block / n_tx
}

/// Per-user floor when `N_t` grows faster than `log N`.
pub fn rate_floor_fast_nt(params: &ScalingParams) -> f64 {
    let rho = params.snr;
    log2_1p(rho / (1.0 + rho) * params.c_f * params.coherence_block / (params.c_u * LOG2_E))
}

/// `γ = ρ (1 - 2^(-c_f T/c_t)) / (1 + ρ 2^(-c_f T/c_t))`.
pub fn gamma(snr: f64, c_f: f64, coherence_block: f64, c_t: f64) -> f64 {
    let x = c_f * coherence_block / c_t;
    let xi2 = (-x).exp2();
    let one_minus = -(-x * LN_2).exp_m1();
    snr * one_minus / (1.0 + snr * xi2)
}

/// DP advantage `Δ` for antenna ratio `r = c_t / c_u` at a given `γ`.
///
/// With `x = γ / (1 + r γ)` the closed form collapses to
/// `(-ln(1 - x)/x - 1) / ln 2`, whose series `x/2 + x²/3 + ...` is used near zero.
pub fn delta_from_gamma(gamma: f64, antenna_ratio: f64) -> f64 {
    if gamma <= 0.0 {
        return 0.0;
    }
    let x = gamma / (1.0 + antenna_ratio * gamma);
    if x < 1e-4 {
        let series: f64 = (2..8).map(|n| x.powi(n - 1) / n as f64).sum();
        return series * LOG2_E;
    }
    (-(-x).ln_1p() / x - 1.0) * LOG2_E
}

pub fn delta_dp(params: &ScalingParams) -> f64 {
    let g = gamma(params.snr, params.c_f, params.coherence_block, params.c_t);
    delta_from_gamma(g, params.antenna_ratio())
}

/// Per-user floor with `N_t = c_t log2 N` transmit antennas.
pub fn rate_floor_log_nt(params: &ScalingParams) -> f64 {
    let rho = params.snr;
    let beta = params.beta();
    let one_minus = params.one_minus_distortion();
    let xi2 = params.limit_distortion();
    let num = rho * (params.antenna_ratio() - beta) * one_minus;
    let den = 1.0 + rho * (1.0 - beta) + rho * beta * xi2;
    let delta = match params.scheme {
        Scheme::Dp => delta_dp(params),
        _ => 0.0,
    };
    log2_1p(num / den) + delta
}

/// Whether BF beats ZF asymptotically: `c_u/c_t > (1 - ξ²) ρ/(1+ρ)`.
pub fn bf_beats_zf(params: &ScalingParams) -> bool {
    let rho = params.snr;
    params.load() > params.one_minus_distortion() * rho / (1.0 + rho)
}

/// Sign of the derivative of the partial-ZF limit rate with respect to the
/// nulled fraction `β`: `sign(ρ(1 - ξ²) - ζ(1 + ρ))`. It does not depend on
/// `β`, so `+1` favors full ZF and `-1` favors BF.
pub fn partial_zf_derivative_sign(snr: f64, limit_distortion: f64, load: f64) -> i8 {
    let v = snr * (1.0 - limit_distortion) - load * (1.0 + snr);
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Finite-`N` surrogate of the large-array MMSE SINR, `ρ (N - K)`.
pub fn uplink_asymptotic_sinr(snr: f64, n_users: usize, n_rx: usize) -> f64 {
    snr * n_rx.saturating_sub(n_users) as f64
}

/// Uplink rate surrogate `log2(1 + ρ (N - K))`.
pub fn uplink_asymptotic_rate(snr: f64, n_users: usize, n_rx: usize) -> f64 {
    log2_1p(uplink_asymptotic_sinr(snr, n_users, n_rx))
}
