//! Cayley–Hamilton expansion of matrix powers and the network-encoded input.
//!
//! Every power of an `n×n` matrix is a combination of its first `n` powers,
//! `W^k = Σ_j φ_j^{(k)} W^j`. The coefficient vectors `φ^{(k)}` start as the
//! standard basis (`φ^{(k)} = e_k` for `k < n`) and are then advanced by the
//! companion matrix of the characteristic polynomial. Folding an input window
//! into those coefficients gives the encoded input
//! `s_j = Σ_k φ_j^{(k)} u_{−k}`, and the final reservoir state factors as
//! `x₀ = C·s` with `C` the controllability matrix.
//!
//! Input windows are stored most-recent-first: `u[k]` is `u_{−k}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix, RealVector};

/// `|φ|` above this is treated as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e100;

/// Extra recursion steps used to extrapolate the truncation tail.
pub const TAIL_PROBE_STEPS: usize = 50;

pub const DEFAULT_TRUNCATION_EPS: f64 = 1e-12;

const MAX_HORIZON: usize = 1_000_000;

/// Negated characteristic-polynomial coefficients `φ_k = −α_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharCoeffs {
    pub varphi: RealVector,
}

impl CharCoeffs {
    pub fn new(varphi: RealVector) -> Self {
        Self { varphi }
    }

    pub fn of(m: &DenseMatrix) -> Result<Self> {
        Ok(Self::new(linalg::char_poly_negated_coeffs(m)?))
    }

    pub fn order(&self) -> usize {
        self.varphi.len()
    }
}

/// Frobenius companion matrix: ones on the subdiagonal, `φ` in the last column.
#[derive(Debug, Clone, PartialEq)]
pub struct CompanionMatrix {
    matrix: DenseMatrix,
}

impl CompanionMatrix {
    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }
}

pub fn companion_matrix(c: &CharCoeffs) -> CompanionMatrix {
    let n = c.order();
    let matrix = DenseMatrix::from_fn(n, n, |i, j| {
        if j == n - 1 {
            c.varphi[i]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    CompanionMatrix { matrix }
}

/// Expansion coefficients of `W^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiState {
    pub k: usize,
    pub phi: RealVector,
}

/// Streaming `φ^{(k)}` generator. Holds one coefficient vector and advances
/// it in place with an `O(n)` companion step.
#[derive(Debug, Clone)]
pub struct PhiRecursion<'a> {
    varphi: &'a [f64],
    k: usize,
    phi: Vec<f64>,
}

impl<'a> PhiRecursion<'a> {
    pub fn new(c: &'a CharCoeffs) -> Self {
        let n = c.order();
        let mut phi = vec![0.0; n];
        if n > 0 {
            phi[0] = 1.0;
        }
        Self { varphi: c.varphi.as_slice(), k: 0, phi }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn current(&self) -> &[f64] {
        &self.phi
    }

    /// Moves from `φ^{(k)}` to `φ^{(k+1)}`.
    pub fn advance(&mut self) -> Result<()> {
        let n = self.phi.len();
        let next = self.k + 1;
        if next < n {
            self.phi[self.k] = 0.0;
            self.phi[next] = 1.0;
        } else {
            let last = self.phi[n - 1];
            for i in (1..n).rev() {
                self.phi[i] = self.phi[i - 1] + self.varphi[i] * last;
            }
            self.phi[0] = self.varphi[0] * last;
            let magnitude = self.phi.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if !(magnitude <= DIVERGENCE_LIMIT) {
                return Err(Error::Divergence { step: next, magnitude });
            }
        }
        self.k = next;
        Ok(())
    }
}

/// `φ^{(0)}, …, φ^{(K−1)}`.
pub fn phi_sequence(c: &CharCoeffs, horizon: usize) -> Result<Vec<PhiState>> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("phi_sequence needs K >= 1".into()));
    }
    let mut rec = PhiRecursion::new(c);
    let mut out = Vec::with_capacity(horizon);
    loop {
        out.push(PhiState { k: rec.k(), phi: RealVector::from_vec_unchecked(rec.current().to_vec()) });
        if out.len() == horizon {
            return Ok(out);
        }
        rec.advance()?;
    }
}

/// Network-encoded input truncated at `horizon` steps into the past.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedInput {
    pub s: RealVector,
    pub horizon: usize,
    /// Heuristic size of the dropped tail `Σ_{k≥K} φ^{(k)} u_{−k}` (ℓ₁),
    /// assuming the remaining inputs are bounded by the window's max.
    pub tail_estimate: f64,
}

fn check_window(n: usize, u: &RealVector, horizon: usize) -> Result<()> {
    if horizon < n {
        return Err(Error::InvalidParameter(format!("horizon K = {horizon} must be >= n = {n}")));
    }
    if u.len() < horizon {
        return Err(Error::DimensionMismatch(format!(
            "input window has {} samples, horizon needs {horizon}",
            u.len()
        )));
    }
    Ok(())
}

/// `s_j = Σ_{k<K} φ_j^{(k)} u_{−k}` for a general reservoir.
pub fn encode_input(c: &CharCoeffs, u: &RealVector, horizon: usize) -> Result<EncodedInput> {
    let n = c.order();
    check_window(n, u, horizon)?;
    let mut s = vec![0.0; n];
    let mut rec = PhiRecursion::new(c);
    for k in 0..horizon {
        if k > 0 {
            rec.advance()?;
        }
        let uk = u[k];
        for (sj, phij) in s.iter_mut().zip(rec.current()) {
            *sj += phij * uk;
        }
    }

    let bound = u.as_slice()[..horizon].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut probe = Vec::with_capacity(TAIL_PROBE_STEPS);
    for _ in 0..TAIL_PROBE_STEPS {
        rec.advance()?;
        probe.push(rec.current().iter().map(|v| v.abs()).sum::<f64>());
    }
    let partial: f64 = probe.iter().sum();
    let (first, last) = (probe[0], probe[TAIL_PROBE_STEPS - 1]);
    let extrapolated = if first > 0.0 && last > 0.0 {
        let ratio = (last / first).powf(1.0 / (TAIL_PROBE_STEPS - 1) as f64);
        if ratio < 1.0 { last * ratio / (1.0 - ratio) } else { 0.0 }
    } else {
        0.0
    };
    Ok(EncodedInput {
        s: RealVector::new(s)?,
        horizon,
        tail_estimate: bound * (partial + extrapolated),
    })
}

/// Closed form for `W = ρ·W_c`: `s̃_j = Σ_p ρ^{j+pn} u_{−(j+pn)}`.
///
/// Pairs with the ρ-free controllability matrix
/// [`cyclic_controllability_tilde`](crate::controllability::cyclic_controllability_tilde);
/// relates to the general encoding by `s̃_j = ρ^j s_j`.
pub fn encode_input_cyclic(rho: f64, n: usize, u: &RealVector, horizon: usize) -> Result<EncodedInput> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidParameter(format!("cyclic encoding needs 0 <= rho < 1, got {rho}")));
    }
    check_window(n, u, horizon)?;
    let mut s = vec![0.0; n];
    let mut power = 1.0;
    for k in 0..horizon {
        s[k % n] += power * u[k];
        power *= rho;
    }
    let bound = u.as_slice()[..horizon].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    Ok(EncodedInput {
        s: RealVector::new(s)?,
        horizon,
        tail_estimate: bound * power / (1.0 - rho),
    })
}

/// Delay line: the encoded input is the last `n` inputs verbatim.
pub fn encode_input_delay(u: &RealVector, n: usize) -> Result<EncodedInput> {
    if u.len() < n {
        return Err(Error::DimensionMismatch(format!(
            "input window has {} samples, delay line of size {n} needs {n}",
            u.len()
        )));
    }
    Ok(EncodedInput { s: RealVector::from_slice(&u.as_slice()[..n])?, horizon: n, tail_estimate: 0.0 })
}

/// `⌈ln ε / ln ρ⌉`, i.e. the first `K` with `ρ^K ≤ ε`, at least 1 and at most 10⁶.
pub fn truncation_horizon(rho: f64, epsilon: f64) -> Result<usize> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidParameter(format!("truncation needs 0 < rho < 1, got {rho}")));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be > 0, got {epsilon}")));
    }
    let k = (epsilon.ln() / rho.ln()).ceil();
    Ok((k.max(1.0) as usize).min(MAX_HORIZON))
}

/// [`truncation_horizon`] clamped from below by the reservoir size.
pub fn truncation_horizon_for(n: usize, rho: f64, epsilon: f64) -> Result<usize> {
    Ok(truncation_horizon(rho, epsilon)?.max(n))
}
