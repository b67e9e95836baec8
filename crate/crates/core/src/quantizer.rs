//! Rate-distortion model of CSI feedback.
//!
//! Production code never builds a codebook. A feedback budget of `B` bits per
//! block over `N_t` antennas buys a per-element distortion `2^(-B/N_t)`, and a
//! consistent `(H, Ĥ, E)` triple is sampled through the backward channel:
//! `Ĥ ~ CN(0, 1 - ξ²)` and `E ~ CN(0, ξ²)` drawn independently, `H = Ĥ + E`.
//! [`oracle_codebook_quantize`] is a brute-force random-codebook quantizer
//! kept only to check that model at tiny sizes.

use num_complex::Complex64;

use crate::channel::{CMatrix, ChannelRealization};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Largest codebook the oracle will enumerate.
pub const ORACLE_MAX_BITS: u32 = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct QuantizedCsi {
    /// `Ĥ`, the channel known at the transmitter.
    pub quantized: CMatrix,
    /// `E = H - Ĥ`, unknown to the transmitter.
    pub error: CMatrix,
    /// Per-user distortion `ξ²_i`.
    pub distortion: Vec<f64>,
}

/// Distortion reached with `bits_per_block` feedback bits over `n_tx` antennas.
///
/// Budgets beyond roughly `1074 * n_tx` bits underflow to exactly zero.
pub fn distortion_for_budget(bits_per_block: f64, n_tx: usize) -> f64 {
    if bits_per_block <= 0.0 {
        return 1.0;
    }
    (-bits_per_block / n_tx as f64).exp2().clamp(0.0, 1.0)
}

/// Feedback rate (bits per symbol) needed to reach distortion `xi2`.
pub fn budget_for_distortion(xi2: f64, n_tx: usize, coherence_block: usize) -> Result<f64> {
    if !(xi2 > 0.0 && xi2 <= 1.0) {
        return Err(Error::DistortionOutOfRange(xi2));
    }
    if xi2 == 1.0 {
        return Ok(0.0);
    }
    Ok(n_tx as f64 / coherence_block as f64 * -xi2.log2())
}

/// Samples a true channel together with its quantized version.
///
/// `distortion` holds one `ξ²` per user. `Ĥ` is drawn first (row-major), then `E`.
pub fn synthesize_pair(
    config: &SystemConfig,
    distortion: &[f64],
    rng: &mut RngStream,
) -> Result<(ChannelRealization, QuantizedCsi)> {
    let (k, nt) = (config.n_users, config.n_tx);
    if distortion.len() != k {
        return Err(Error::Dimension(format!(
            "{} distortion values for {k} users",
            distortion.len()
        )));
    }
    let xi2: Vec<f64> = distortion.iter().map(|d| d.clamp(0.0, 1.0)).collect();

    let mut quantized = CMatrix::zeros(k, nt);
    for i in 0..k {
        for j in 0..nt {
            quantized[(i, j)] = rng.complex_normal(1.0 - xi2[i]);
        }
    }
    let mut error = CMatrix::zeros(k, nt);
    for i in 0..k {
        for j in 0..nt {
            error[(i, j)] = rng.complex_normal(xi2[i]);
        }
    }
    let downlink = &quantized + &error;
    Ok((
        ChannelRealization {
            downlink,
            uplink: None,
        },
        QuantizedCsi {
            quantized,
            error,
            distortion: xi2,
        },
    ))
}

/// Nearest-codeword quantization of one channel row against a fresh random
/// codebook of `2^bits` entries drawn `CN(0, (1 - ξ²) I)`.
///
/// Returns `(ĥ, ε)` with `ĥ + ε = h`. Zero bits maps to the zero codeword.
pub fn oracle_codebook_quantize(
    h_row: &[Complex64],
    bits: u32,
    rng: &mut RngStream,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if bits > ORACLE_MAX_BITS {
        return Err(Error::CodebookTooLarge {
            bits,
            max: ORACLE_MAX_BITS,
        });
    }
    let nt = h_row.len();
    if bits == 0 {
        return Ok((vec![Complex64::new(0.0, 0.0); nt], h_row.to_vec()));
    }
    let variance = 1.0 - distortion_for_budget(bits as f64, nt);
    let mut best = vec![Complex64::new(0.0, 0.0); nt];
    let mut best_dist = f64::INFINITY;
    let mut candidate = vec![Complex64::new(0.0, 0.0); nt];
    for _ in 0..(1u64 << bits) {
        for c in candidate.iter_mut() {
            *c = rng.complex_normal(variance);
        }
        let dist: f64 = candidate
            .iter()
            .zip(h_row)
            .map(|(c, h)| (h - c).norm_sqr())
            .sum();
        if dist < best_dist {
            best_dist = dist;
            best.copy_from_slice(&candidate);
        }
    }
    let residual = h_row.iter().zip(&best).map(|(h, c)| h - c).collect();
    Ok((best, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Feedback, Scheme};
    use proptest::prelude::*;

    fn cfg(nt: usize, k: usize) -> SystemConfig {
        SystemConfig::new(nt, nt, k, 1.0, 180, Feedback::Bits(0.0), Scheme::Bf, 0).unwrap()
    }

    #[test]
    fn distortion_examples() {
        assert_eq!(distortion_for_budget(0.0, 8), 1.0);
        assert_eq!(distortion_for_budget(0.0, 3), 1.0);
        assert_eq!(distortion_for_budget(80.0, 8), 9.765625e-4);
        assert_eq!(distortion_for_budget(8.0, 8), 0.5);
    }

    #[test]
    fn budget_examples() {
        assert_eq!(budget_for_distortion(1.0, 8, 180).unwrap(), 0.0);
        let f = budget_for_distortion(2f64.powi(-10), 8, 180).unwrap();
        assert!((f - 80.0 / 180.0).abs() < 1e-15);
        assert!(budget_for_distortion(0.0, 8, 180).is_err());
        assert!(budget_for_distortion(1.5, 8, 180).is_err());
        assert!(budget_for_distortion(-0.1, 8, 180).is_err());
    }

    #[test]
    fn budget_round_trip() {
        for b in 1..=200 {
            let b = b as f64;
            let xi2 = distortion_for_budget(b, 8);
            let back = budget_for_distortion(xi2, 8, 180).unwrap() * 180.0;
            assert!((back - b).abs() < 1e-9 * b.max(1.0), "{b} -> {back}");
        }
    }

    #[test]
    fn huge_budget_underflows_to_zero() {
        assert_eq!(distortion_for_budget(2000.0 * 8.0, 8), 0.0);
    }

    proptest! {
        #[test]
        fn distortion_strictly_decreasing(b in 0.0f64..400.0, step in 0.01f64..50.0, nt in 1usize..64) {
            prop_assert!(distortion_for_budget(b + step, nt) < distortion_for_budget(b, nt));
        }
    }

    #[test]
    fn zero_and_full_distortion() {
        let c = cfg(4, 3);
        let mut rng = RngStream::from_seed(4);
        let (h, q) = synthesize_pair(&c, &[0.0; 3], &mut rng).unwrap();
        assert!(q.error.iter().all(|z| z.norm() == 0.0));
        assert_eq!(h.downlink, q.quantized);
        let (h, q) = synthesize_pair(&c, &[1.0; 3], &mut rng).unwrap();
        assert!(q.quantized.iter().all(|z| z.norm() == 0.0));
        assert_eq!(h.downlink, q.error);
    }

    #[test]
    fn reconstruction_identity() {
        let c = cfg(6, 4);
        let mut rng = RngStream::from_seed(8);
        let (h, q) = synthesize_pair(&c, &[0.1, 0.3, 0.5, 0.9], &mut rng).unwrap();
        assert_eq!(h.downlink, &q.quantized + &q.error);
    }

    #[test]
    fn rejects_wrong_length() {
        let c = cfg(4, 3);
        assert!(synthesize_pair(&c, &[0.5; 2], &mut RngStream::from_seed(0)).is_err());
    }

    #[test]
    fn quantized_power_and_orthogonality() {
        // 10^6 samples of each of ĥ and ε at ξ² = 0.25.
        let c = cfg(8, 8);
        let mut rng = RngStream::from_seed(99);
        let xi2 = [0.25; 8];
        let (mut qp, mut ep, mut cross, mut n) = (0.0, 0.0, Complex64::new(0.0, 0.0), 0.0);
        for _ in 0..15_625 {
            let (_, q) = synthesize_pair(&c, &xi2, &mut rng).unwrap();
            for (a, e) in q.quantized.iter().zip(q.error.iter()) {
                qp += a.norm_sqr();
                ep += e.norm_sqr();
                cross += a * e.conj();
                n += 1.0;
            }
        }
        assert!((qp / n - 0.75).abs() < 0.01, "E|ĥ|^2 = {}", qp / n);
        assert!((ep / n - 0.25).abs() < 0.01, "E|ε|^2 = {}", ep / n);
        // Var(ĥ ε*) = 0.75 * 0.25 per sample.
        let se = (0.75f64 * 0.25 / n).sqrt();
        assert!((cross / n).norm() < 3.0 * se);
    }

    #[test]
    fn oracle_zero_bits() {
        let h = vec![Complex64::new(0.3, -1.0), Complex64::new(2.0, 0.5)];
        let (q, e) = oracle_codebook_quantize(&h, 0, &mut RngStream::from_seed(1)).unwrap();
        assert!(q.iter().all(|z| z.norm() == 0.0));
        assert_eq!(e, h);
    }

    #[test]
    fn oracle_deterministic_and_bounded() {
        let h = vec![Complex64::new(0.3, -1.0), Complex64::new(2.0, 0.5)];
        let a = oracle_codebook_quantize(&h, 6, &mut RngStream::from_seed(5)).unwrap();
        let b = oracle_codebook_quantize(&h, 6, &mut RngStream::from_seed(5)).unwrap();
        assert_eq!(a, b);
        for ((q, e), x) in a.0.iter().zip(&a.1).zip(&h) {
            assert!((q + e - x).norm() < 1e-15);
        }
        assert!(matches!(
            oracle_codebook_quantize(&h, 17, &mut RngStream::from_seed(5)),
            Err(Error::CodebookTooLarge { .. })
        ));
    }
}
