//! Scenario parameters for a single cell.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Matched-filter beamforming (no nulling).
    Bf,
    /// Nulls `zf_order` other users per beam.
    PartialZf,
    /// Full zero-forcing.
    Zf,
    /// LQ-based dirty-paper precoding.
    Dp,
}

impl Scheme {
    pub const fn label(self) -> &'static str {
        match self {
            Scheme::Bf => "bf",
            Scheme::PartialZf => "partial_zf",
            Scheme::Zf => "zf",
            Scheme::Dp => "dp",
        }
    }

    pub(crate) const fn tag(self) -> u64 {
        match self {
            Scheme::Bf => 0,
            Scheme::PartialZf => 1,
            Scheme::Zf => 2,
            Scheme::Dp => 3,
        }
    }

    /// Whether the scheme needs at least as many transmit antennas as users.
    pub const fn needs_full_rank(self) -> bool {
        matches!(self, Scheme::Zf | Scheme::Dp)
    }

    /// Nulling order implied by the scheme, or `None` for partial ZF where it is free.
    pub const fn implied_zf_order(self, n_users: usize) -> Option<usize> {
        match self {
            Scheme::Bf => Some(0),
            Scheme::Zf | Scheme::Dp => Some(n_users.saturating_sub(1)),
            Scheme::PartialZf => None,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "bf" => Ok(Scheme::Bf),
            "partial_zf" | "pzf" => Ok(Scheme::PartialZf),
            "zf" => Ok(Scheme::Zf),
            "dp" => Ok(Scheme::Dp),
            other => Err(Error::InvalidConfig(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Which quantity sets the per-block feedback budget.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "value")]
pub enum Feedback {
    /// Fixed number of feedback bits per user per coherence block (`F_i T`).
    Bits(f64),
    /// Fraction `c_f` of each user's uplink rate spent on feedback.
    UplinkFraction(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Base-station antennas, all used for uplink reception.
    pub n_rx: usize,
    /// Downlink transmit antennas.
    pub n_tx: usize,
    pub n_users: usize,
    /// Linear SNR.
    pub snr: f64,
    /// Symbols per fading block.
    pub coherence_block: usize,
    pub feedback: Feedback,
    pub scheme: Scheme,
    /// Users nulled by each beam.
    pub zf_order: usize,
    pub seed: u64,
}

impl SystemConfig {
    /// Builds a configuration with the nulling order implied by `scheme`
    /// (0 for BF and partial ZF, `K - 1` for ZF and DP) and validates it.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n_rx: usize,
        n_tx: usize,
        n_users: usize,
        snr: f64,
        coherence_block: usize,
        feedback: Feedback,
        scheme: Scheme,
        seed: u64,
    ) -> Result<Self> {
        let zf_order = scheme.implied_zf_order(n_users).unwrap_or(0);
        let cfg = Self {
            n_rx,
            n_tx,
            n_users,
            snr,
            coherence_block,
            feedback,
            scheme,
            zf_order,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_zf_order(mut self, zf_order: usize) -> Result<Self> {
        self.zf_order = zf_order;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_rx == 0 || self.n_tx == 0 || self.n_users == 0 {
            return bad("antenna and user counts must be positive".into());
        }
        if self.n_tx > self.n_rx {
            return bad(format!("n_tx = {} exceeds n_rx = {}", self.n_tx, self.n_rx));
        }
        if !(self.snr.is_finite() && self.snr > 0.0) {
            return bad(format!("snr must be positive and finite, got {}", self.snr));
        }
        if self.coherence_block == 0 {
            return bad("coherence_block must be positive".into());
        }
        match self.feedback {
            Feedback::Bits(b) if !(b >= 0.0 && b.is_finite()) => {
                return bad(format!("feedback bits must be nonnegative, got {b}"));
            }
            Feedback::UplinkFraction(c) if !(0.0..=1.0).contains(&c) => {
                return bad(format!("feedback fraction must lie in [0, 1], got {c}"));
            }
            _ => {}
        }
        match self.scheme {
            Scheme::Zf | Scheme::Dp => {
                if self.n_tx < self.n_users {
                    return bad(format!(
                        "{} needs n_tx >= n_users (n_tx = {}, n_users = {})",
                        self.scheme, self.n_tx, self.n_users
                    ));
                }
                if self.zf_order != self.n_users - 1 {
                    return bad(format!(
                        "{} requires zf_order = n_users - 1 = {}, got {}",
                        self.scheme,
                        self.n_users - 1,
                        self.zf_order
                    ));
                }
            }
            Scheme::PartialZf => {
                if self.zf_order > self.n_users - 1 {
                    return bad(format!(
                        "zf_order {} exceeds n_users - 1 = {}",
                        self.zf_order,
                        self.n_users - 1
                    ));
                }
                if self.n_tx <= self.zf_order {
                    return bad(format!(
                        "partial ZF needs n_tx > zf_order (n_tx = {}, zf_order = {})",
                        self.n_tx, self.zf_order
                    ));
                }
            }
            Scheme::Bf => {
                if self.zf_order != 0 {
                    return bad(format!("bf requires zf_order = 0, got {}", self.zf_order));
                }
            }
        }
        Ok(())
    }

    pub fn snr_db(&self) -> f64 {
        linear_to_db(self.snr)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n_tx: usize, k: usize, scheme: Scheme) -> Result<SystemConfig> {
        SystemConfig::new(64, n_tx, k, 1000.0, 180, Feedback::Bits(80.0), scheme, 1)
    }

    #[test]
    fn zf_sets_full_order() {
        let c = cfg(8, 8, Scheme::Zf).unwrap();
        assert_eq!(c.zf_order, 7);
    }

    #[test]
    fn zf_rejects_more_users_than_antennas() {
        assert!(cfg(4, 8, Scheme::Zf).is_err());
        assert!(cfg(4, 8, Scheme::Dp).is_err());
        assert!(cfg(4, 8, Scheme::Bf).is_ok());
    }

    #[test]
    fn n_tx_bounded_by_n_rx() {
        assert!(SystemConfig::new(4, 8, 2, 1.0, 10, Feedback::Bits(0.0), Scheme::Bf, 0).is_err());
    }

    #[test]
    fn partial_zf_bounds() {
        let base = cfg(8, 6, Scheme::PartialZf).unwrap();
        assert!(base.clone().with_zf_order(3).is_ok());
        assert!(base.clone().with_zf_order(6).is_err());
        let narrow = SystemConfig::new(64, 3, 6, 1.0, 10, Feedback::Bits(0.0), Scheme::PartialZf, 0)
            .unwrap();
        assert!(narrow.with_zf_order(3).is_err());
    }

    #[test]
    fn zf_order_is_pinned_for_zf() {
        let c = cfg(8, 8, Scheme::Zf).unwrap();
        assert!(c.with_zf_order(3).is_err());
    }

    #[test]
    fn feedback_fraction_range() {
        let r = SystemConfig::new(8, 8, 2, 1.0, 10, Feedback::UplinkFraction(1.5), Scheme::Bf, 0);
        assert!(r.is_err());
    }

    #[test]
    fn db_conversion() {
        assert!((db_to_linear(30.0) - 1000.0).abs() < 1e-9);
        assert!((linear_to_db(1000.0) - 30.0).abs() < 1e-12);
    }

    #[test]
    fn scheme_parse_roundtrip() {
        for s in [Scheme::Bf, Scheme::PartialZf, Scheme::Zf, Scheme::Dp] {
            assert_eq!(s.label().parse::<Scheme>().unwrap(), s);
        }
        assert!("mmse".parse::<Scheme>().is_err());
    }
}
