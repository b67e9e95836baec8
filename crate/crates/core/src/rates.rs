//! Per-realization achievable-rate bounds.
//!
//! Rates are spectral efficiencies in bits per symbol. The Monte Carlo
//! harness owns the expectation over channel draws.

use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex64;

use crate::channel::CMatrix;
use crate::error::{Error, Result};
use crate::precoder::{effective_gains, PrecoderOutput};

/// Powers entering one user's SINR, scaled so `sinr = signal / (interference + noise)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SinrTerms {
    pub signal: f64,
    pub interference: f64,
    pub noise: f64,
}

impl SinrTerms {
    pub fn sinr(&self) -> f64 {
        self.signal / (self.interference + self.noise)
    }

    pub fn rate(&self) -> f64 {
        log2_1p(self.sinr())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateSample {
    pub per_user: Vec<f64>,
    pub sum_rate: f64,
    pub sinr_terms: Vec<SinrTerms>,
}

impl RateSample {
    fn from_terms(terms: Vec<SinrTerms>) -> Self {
        let per_user: Vec<f64> = terms.iter().map(SinrTerms::rate).collect();
        let sum_rate = per_user.iter().sum();
        Self {
            per_user,
            sum_rate,
            sinr_terms: terms,
        }
    }

    pub fn mean_user_rate(&self) -> f64 {
        self.sum_rate / self.per_user.len() as f64
    }
}

pub(crate) fn log2_1p(x: f64) -> f64 {
    x.max(0.0).ln_1p() * std::f64::consts::LOG2_E
}

/// Linear-precoding rate bound evaluated on the true channel `h`:
/// `log2(1 + ρ|h_i u_i^H|² / (ρ Σ_{k≠i} |h_i u_k^H|² + 1))`.
pub fn linear_rate(h: &CMatrix, precoder: &PrecoderOutput, snr: f64) -> Result<RateSample> {
    let lin = precoder.as_linear()?;
    if h.shape() != lin.matrix.shape() {
        return Err(Error::Dimension(format!(
            "channel {:?} vs precoder {:?}",
            h.shape(),
            lin.matrix.shape()
        )));
    }
    let gains = effective_gains(h, lin);
    let k = gains.nrows();
    let terms = (0..k)
        .map(|i| {
            let signal = gains[(i, i)].norm_sqr();
            let leak: f64 = (0..k).filter(|&j| j != i).map(|j| gains[(i, j)].norm_sqr()).sum();
            SinrTerms {
                signal: snr * signal,
                interference: snr * leak,
                noise: 1.0,
            }
        })
        .collect();
    Ok(RateSample::from_terms(terms))
}

/// Dirty-paper rate bound `log2(1 + ρ ℓ_pp² / (K + ρ K ξ²_u))` where user `u`
/// is encoded at position `p`. Results are indexed by user, not position.
pub fn dp_rate(precoder: &PrecoderOutput, distortion: &[f64], snr: f64) -> Result<RateSample> {
    let dp = precoder.as_dp()?;
    let k = dp.user_order.len();
    if distortion.len() != k {
        return Err(Error::Dimension(format!(
            "{} distortion values for {k} users",
            distortion.len()
        )));
    }
    let kf = k as f64;
    let mut terms = vec![
        SinrTerms {
            signal: 0.0,
            interference: 0.0,
            noise: 1.0,
        };
        k
    ];
    for (p, &user) in dp.user_order.iter().enumerate() {
        let diag = dp.lower[(p, p)].norm_sqr();
        terms[user] = SinrTerms {
            signal: snr * diag,
            interference: snr * kf * distortion[user],
            noise: kf,
        };
    }
    Ok(RateSample::from_terms(terms))
}

/// Linear MMSE uplink SINRs, `ρ h_i^H (ρ H_ī H_ī^H + I)^{-1} h_i` for every
/// column of the `N x K` uplink matrix.
///
/// Computed from the `K x K` matrix `M = I + ρ H^H H` through the identity
/// `SINR_i = 1 / [M^{-1}]_ii - 1`, which is exact.
pub fn mmse_sinrs(h_uplink: &CMatrix, snr: f64) -> Vec<f64> {
    let k = h_uplink.ncols();
    if snr == 0.0 {
        return vec![0.0; k];
    }
    let gram = h_uplink.adjoint() * h_uplink;
    let m: CMatrix = DMatrix::identity(k, k) + gram * Complex64::new(snr, 0.0);
    let inv = Cholesky::new(m)
        .expect("I + ρ H^H H is Hermitian positive definite")
        .inverse();
    (0..k).map(|i| (1.0 / inv[(i, i)].re - 1.0).max(0.0)).collect()
}

/// Per-user uplink rate with a linear MMSE receiver.
pub fn uplink_mmse_rate(h_uplink: &CMatrix, snr: f64) -> RateSample {
    let terms = mmse_sinrs(h_uplink, snr)
        .into_iter()
        .map(|sinr| SinrTerms {
            signal: sinr,
            interference: 0.0,
            noise: 1.0,
        })
        .collect();
    RateSample::from_terms(terms)
}

/// Feedback bits per block when a fraction `c_f` of the uplink rate is spent on CSI.
pub fn feedback_budget_from_uplink(uplink_rate: f64, fraction: f64, coherence_block: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::FractionOutOfRange(fraction));
    }
    Ok(fraction * uplink_rate * coherence_block as f64)
}
