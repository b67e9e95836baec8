//! I.i.d. Rayleigh block-fading channels with unit-power entries.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::config::SystemConfig;
use crate::rng::RngStream;

pub type CMatrix = DMatrix<Complex64>;

/// One fading block.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    /// `K x N_t`, row `i` is the channel seen by user `i`.
    pub downlink: CMatrix,
    /// `N x K`, column `i` is user `i`'s uplink signature.
    pub uplink: Option<CMatrix>,
}

/// Matrix of i.i.d. `CN(0, variance)` entries, filled row-major.
pub fn complex_gaussian_matrix(rows: usize, cols: usize, variance: f64, rng: &mut RngStream) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            m[(r, c)] = rng.complex_normal(variance);
        }
    }
    m
}

pub fn draw_downlink(config: &SystemConfig, rng: &mut RngStream) -> ChannelRealization {
    ChannelRealization {
        downlink: complex_gaussian_matrix(config.n_users, config.n_tx, 1.0, rng),
        uplink: None,
    }
}

/// Uplink draw. The downlink field is left empty (`0 x 0`).
pub fn draw_uplink(config: &SystemConfig, rng: &mut RngStream) -> ChannelRealization {
    ChannelRealization {
        downlink: CMatrix::zeros(0, 0),
        uplink: Some(complex_gaussian_matrix(config.n_rx, config.n_users, 1.0, rng)),
    }
}
