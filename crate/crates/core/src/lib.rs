//! Uplink/downlink rate balancing for FDD massive MIMO.
//!
//! Simulates how CSI feedback bought with uplink rate turns into downlink
//! throughput under beamforming, (partial) zero-forcing and dirty-paper
//! precoding, and evaluates the matching large-antenna closed forms.
//!
//! The pipeline for one Monte Carlo trial:
//!
//! 1. [`channel`]: i.i.d. Rayleigh uplink/downlink draws.
//! 2. [`quantizer`]: feedback budget to distortion, and `(H, Ĥ)` sampling.
//! 3. [`precoder`]: linear rows or the LQ dirty-paper factorization.
//! 4. [`rates`]: achievable-rate bounds on the realized channel.
//!
//! [`montecarlo`] runs sweeps of that pipeline and [`asymptotics`] holds the
//! closed-form limits it is compared against.

pub mod asymptotics;
pub mod channel;
pub mod config;
pub mod error;
pub mod montecarlo;
pub mod precoder;
pub mod quantizer;
pub mod rates;
pub mod report;
pub mod rng;

pub use channel::{CMatrix, ChannelRealization};
pub use config::{db_to_linear, linear_to_db, Feedback, Scheme, SystemConfig};
pub use error::{Error, Result};
pub use montecarlo::{
    AntennaPolicy, BoundOverlay, ExperimentResult, ExperimentSpec, Executor, RateSummary, SkippedPoint, Sweep,
    UplinkBudget, UserPolicy,
};
pub use precoder::PrecoderOutput;
pub use quantizer::QuantizedCsi;
pub use rates::RateSample;
pub use rng::RngStream;
