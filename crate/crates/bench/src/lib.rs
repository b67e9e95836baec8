//! Fixtures shared by the benchmarks.

use fdd_mimo::quantizer::synthesize_pair;
use fdd_mimo::{ChannelRealization, Feedback, QuantizedCsi, RngStream, Scheme, SystemConfig};

/// System with `n_rx = n_tx` and a fixed per-block feedback budget.
pub fn system(n_tx: usize, n_users: usize, bits: f64, scheme: Scheme) -> SystemConfig {
    SystemConfig::new(n_tx.max(n_users), n_tx, n_users, 1000.0, 180, Feedback::Bits(bits), scheme, 1)
        .expect("valid bench configuration")
}

/// One channel and its quantized CSI at distortion `xi2`.
pub fn csi(cfg: &SystemConfig, xi2: f64) -> (ChannelRealization, QuantizedCsi) {
    let dist = vec![xi2; cfg.n_users];
    synthesize_pair(cfg, &dist, &mut RngStream::from_seed(1)).expect("valid distortion")
}
