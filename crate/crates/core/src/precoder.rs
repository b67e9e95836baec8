//! Transmit precoders built from quantized CSI.
//!
//! Linear schemes (BF, partial ZF, ZF) produce a `K x N_t` matrix `U` whose
//! row `u_i` carries user `i`'s unit-variance symbol, so `x = U^H s` and
//! `‖u_i‖² = 1/K`. The DP scheme instead factors a randomly permuted `Ĥ` as
//! `L Q` and transmits `x = Q^H s` with `E|s_i|² = 1/K`.

use nalgebra::Cholesky;
use num_complex::Complex64;

use crate::channel::CMatrix;
use crate::error::{Error, Result};
use crate::quantizer::QuantizedCsi;
use crate::rng::RngStream;

/// Relative energy below which a projected beam counts as vanished.
const DEGENERATE_TOL: f64 = 1e-20;

#[derive(Clone, Debug, PartialEq)]
pub struct LinearPrecoder {
    /// `K x N_t`, row `i` is `u_i`.
    pub matrix: CMatrix,
    /// Users each beam is orthogonal to (in the quantized channel).
    pub nulled: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DpPrecoder {
    /// `K x K` lower triangular with real nonnegative diagonal.
    pub lower: CMatrix,
    /// `K x N_t` with orthonormal rows.
    pub unitary: CMatrix,
    /// `user_order[p]` is the user encoded at position `p`.
    pub user_order: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PrecoderOutput {
    Linear(LinearPrecoder),
    Dp(DpPrecoder),
}

impl PrecoderOutput {
    pub fn kind(&self) -> &'static str {
        match self {
            PrecoderOutput::Linear(_) => "linear",
            PrecoderOutput::Dp(_) => "dp",
        }
    }

    pub fn as_linear(&self) -> Result<&LinearPrecoder> {
        match self {
            PrecoderOutput::Linear(p) => Ok(p),
            other => Err(Error::WrongPrecoderKind {
                expected: "linear",
                found: other.kind(),
            }),
        }
    }

    pub fn as_dp(&self) -> Result<&DpPrecoder> {
        match self {
            PrecoderOutput::Dp(p) => Ok(p),
            other => Err(Error::WrongPrecoderKind {
                expected: "dp",
                found: other.kind(),
            }),
        }
    }

    /// Transmit vector for the symbol vector `s`.
    pub fn transmit(&self, symbols: &[Complex64]) -> Vec<Complex64> {
        let m = match self {
            PrecoderOutput::Linear(p) => &p.matrix,
            PrecoderOutput::Dp(p) => &p.unitary,
        };
        (0..m.ncols())
            .map(|j| {
                symbols
                    .iter()
                    .enumerate()
                    .map(|(i, s)| m[(i, j)].conj() * s)
                    .sum()
            })
            .collect()
    }
}

/// Users that user `i`'s beam nulls: `i+1, ..., i+L` modulo `K`.
pub fn nulled_set(user: usize, zf_order: usize, n_users: usize) -> Vec<usize> {
    (1..=zf_order).map(|d| (user + d) % n_users).collect()
}

fn vec_inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

fn energy(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Orthonormal basis (as rows) for the span of the given rows of `m`.
/// Rank-deficient members are dropped.
fn orthonormal_rows(m: &CMatrix, rows: &[usize]) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(rows.len());
    for &r in rows {
        let mut v: Vec<Complex64> = m.row(r).iter().copied().collect();
        let scale = energy(&v);
        // Two passes of modified Gram-Schmidt.
        for _ in 0..2 {
            for q in &basis {
                let c = vec_inner(&v, q);
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= c * y;
                }
            }
        }
        let e = energy(&v);
        if scale > 0.0 && e > 1e-24 * scale {
            let inv = 1.0 / e.sqrt();
            v.iter_mut().for_each(|x| *x *= inv);
            basis.push(v);
        }
    }
    basis
}

/// Seed direction for user `i`: its quantized row, or a fixed antenna beam
/// when the transmitter knows nothing about the user.
fn seed_row(q: &CMatrix, i: usize) -> Vec<Complex64> {
    let row: Vec<Complex64> = q.row(i).iter().copied().collect();
    if energy(&row) > 0.0 {
        row
    } else {
        let mut e = vec![Complex64::new(0.0, 0.0); q.ncols()];
        e[i % q.ncols()] = Complex64::new(1.0, 0.0);
        e
    }
}

fn project_out(v: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = vec_inner(v, q);
            for (x, y) in v.iter_mut().zip(q) {
                *x -= c * y;
            }
        }
    }
}

/// Full zero-forcing directions as rows of `(Ĥ Ĥ^H)^{-1} Ĥ`. Row `i` is
/// parallel (with positive phase) to `ĥ_i` projected off all other users.
fn zf_rows_via_gram(q: &CMatrix) -> Option<CMatrix> {
    let gram = q * q.adjoint();
    let chol = Cholesky::new(gram)?;
    Some(chol.solve(q))
}

/// Linear precoder with nulling order `zf_order` (0 = BF, `K-1` = ZF).
pub fn build_linear(csi: &QuantizedCsi, zf_order: usize) -> Result<PrecoderOutput> {
    let q = &csi.quantized;
    let (k, nt) = q.shape();
    if zf_order >= k.max(1) || nt <= zf_order {
        return Err(Error::InvalidConfig(format!(
            "nulling order {zf_order} needs n_tx > {zf_order} and n_users > {zf_order} (n_tx = {nt}, n_users = {k})"
        )));
    }
    let nulled: Vec<Vec<usize>> = (0..k).map(|i| nulled_set(i, zf_order, k)).collect();
    let all_known = (0..k).all(|i| q.row(i).iter().any(|z| z.norm_sqr() > 0.0));

    let mut rows = CMatrix::zeros(k, nt);
    let full_zf = zf_order == k - 1 && k > 1 && all_known;
    let gram_rows = if full_zf { zf_rows_via_gram(q) } else { None };

    for i in 0..k {
        let dir: Vec<Complex64> = match &gram_rows {
            Some(g) => g.row(i).iter().copied().collect(),
            None => {
                let mut v = seed_row(q, i);
                if zf_order > 0 {
                    project_out(&mut v, &orthonormal_rows(q, &nulled[i]));
                }
                v
            }
        };
        let e = energy(&dir);
        let reference = energy(&seed_row(q, i));
        if !e.is_finite() || e <= DEGENERATE_TOL * reference {
            return Err(Error::Degenerate(format!(
                "beam for user {i} vanished after nulling {zf_order} users"
            )));
        }
        let scale = 1.0 / ((k as f64) * e).sqrt();
        for (j, z) in dir.iter().enumerate() {
            rows[(i, j)] = z * scale;
        }
    }
    Ok(PrecoderOutput::Linear(LinearPrecoder {
        matrix: rows,
        nulled,
    }))
}

/// LQ factorization `A = L Q` via the QR factorization of `A^H`, with the
/// diagonal of `L` made real and nonnegative.
pub fn lq_decompose(a: &CMatrix) -> (CMatrix, CMatrix) {
    let (k, _) = a.shape();
    let qr = a.adjoint().qr();
    let mut q = qr.q(); // N_t x K
    let mut r = qr.r(); // K x K
    for i in 0..k {
        let d = r[(i, i)];
        let mag = d.norm();
        let phase = if mag > 0.0 { d / mag } else { Complex64::new(1.0, 0.0) };
        // R <- D^* R, Q <- Q D keeps Q R unchanged.
        for c in 0..r.ncols() {
            r[(i, c)] *= phase.conj();
        }
        for row in 0..q.nrows() {
            q[(row, i)] *= phase;
        }
        r[(i, i)] = Complex64::new(r[(i, i)].re.max(0.0), 0.0);
    }
    (r.adjoint(), q.adjoint())
}

/// Dirty-paper precoder: random user order, then LQ of the permuted `Ĥ`.
pub fn build_dp(csi: &QuantizedCsi, rng: &mut RngStream) -> Result<PrecoderOutput> {
    let q = &csi.quantized;
    let (k, nt) = q.shape();
    if nt < k {
        return Err(Error::InvalidConfig(format!(
            "dp needs n_tx >= n_users (n_tx = {nt}, n_users = {k})"
        )));
    }
    let user_order = rng.permutation(k);
    let permuted = CMatrix::from_fn(k, nt, |p, j| q[(user_order[p], j)]);
    let (lower, unitary) = lq_decompose(&permuted);

    for (p, &user) in user_order.iter().enumerate() {
        let row_energy: f64 = permuted.row(p).iter().map(|z| z.norm_sqr()).sum();
        // A user with no CSI legitimately gets a zero diagonal.
        if csi.distortion[user] < 1.0 && row_energy > 0.0 {
            let diag = lower[(p, p)].re;
            if diag.is_nan() || diag * diag <= DEGENERATE_TOL * row_energy {
                return Err(Error::Degenerate(format!(
                    "quantized channel is rank deficient at encoding position {p}"
                )));
            }
        }
    }
    Ok(PrecoderOutput::Dp(DpPrecoder {
        lower,
        unitary,
        user_order,
    }))
}

/// `h_k · u_i^H` for every pair, i.e. `H U^H`.
pub fn effective_gains(h: &CMatrix, precoder: &LinearPrecoder) -> CMatrix {
    h * precoder.matrix.adjoint()
}
