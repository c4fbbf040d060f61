//! The four reservoir architectures and their input weights.
//!
//! | kind      | `W`                                             | `w`             |
//! |-----------|-------------------------------------------------|-----------------|
//! | delay     | `ρ` on the subdiagonal, open chain              | `e₀`            |
//! | cyclic    | delay line plus the wrap-around `W[0][n−1] = ρ` | `N(0, 1/n)`, aperiodic |
//! | random    | i.i.d. `N(0, ρ²/n)`                             | `N(0, 1/n)`     |
//! | wigner    | symmetric, off-diagonal `N(0, ρ²/4n)`, diagonal `N(0, ρ²/16n)` | `N(0, 1/n)` |
//!
//! Random and Wigner matrices have expected spectral radius `ρ`. The Wigner
//! off-diagonal variance is a quarter of the non-symmetric one because a
//! symmetric matrix with entry variance `σ²/n` has its spectrum on
//! `[−2σ, 2σ]`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix, RealVector, SpectrumSummary};
use crate::rng;

pub const DEFAULT_APERIODIC_TOL: f64 = 1e-9;

/// Cap on redraws while looking for an aperiodic cyclic input vector.
const MAX_APERIODIC_DRAWS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    #[serde(alias = "delay", alias = "delay-line")]
    DelayLine,
    Cyclic,
    #[serde(rename = "random", alias = "random_gaussian")]
    RandomGaussian,
    Wigner,
}

impl TopologyKind {
    pub const ALL: [TopologyKind; 4] = [
        TopologyKind::DelayLine,
        TopologyKind::Cyclic,
        TopologyKind::RandomGaussian,
        TopologyKind::Wigner,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TopologyKind::DelayLine => "delay_line",
            TopologyKind::Cyclic => "cyclic",
            TopologyKind::RandomGaussian => "random",
            TopologyKind::Wigner => "wigner",
        }
    }

    /// Stable integer tag used in seed derivation.
    pub fn tag(self) -> u64 {
        match self {
            TopologyKind::DelayLine => 0,
            TopologyKind::Cyclic => 1,
            TopologyKind::RandomGaussian => 2,
            TopologyKind::Wigner => 3,
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "delay" | "delay_line" | "delay-line" => Ok(TopologyKind::DelayLine),
            "cyclic" | "ring" => Ok(TopologyKind::Cyclic),
            "random" | "random_gaussian" => Ok(TopologyKind::RandomGaussian),
            "wigner" => Ok(TopologyKind::Wigner),
            other => Err(Error::InvalidParameter(format!(
                "unknown topology '{other}' (expected delay, cyclic, random or wigner)"
            ))),
        }
    }
}

/// How `W` is normalized after sampling. Only random and Wigner reservoirs are
/// affected; delay and cyclic reservoirs are exact by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RescaleMode {
    /// Keep the sampled matrix; `ρ` is the expected spectral radius.
    #[default]
    AsDistributed,
    /// Multiply `W` by `ρ / spectral_radius(W)`.
    #[serde(alias = "exact")]
    ExactSpectralRadius,
    /// Multiply `W` by `ρ / σ_max(W)`.
    #[serde(alias = "msv")]
    ExactMaxSingularValue,
}

impl FromStr for RescaleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "as_distributed" | "as-distributed" | "none" => Ok(RescaleMode::AsDistributed),
            "exact" | "exact_spectral_radius" | "sr" => Ok(RescaleMode::ExactSpectralRadius),
            "msv" | "exact_max_singular_value" => Ok(RescaleMode::ExactMaxSingularValue),
            other => Err(Error::InvalidParameter(format!(
                "unknown rescale mode '{other}' (expected as_distributed, exact or msv)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirSpec {
    pub kind: TopologyKind,
    pub n: usize,
    pub rho: f64,
    pub seed: u64,
    pub input_seed: u64,
    #[serde(default)]
    pub rescale_mode: RescaleMode,
}

impl ReservoirSpec {
    pub fn new(kind: TopologyKind, n: usize, rho: f64) -> Self {
        Self { kind, n, rho, seed: 0, input_seed: 0, rescale_mode: RescaleMode::AsDistributed }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_input_seed(mut self, input_seed: u64) -> Self {
        self.input_seed = input_seed;
        self
    }

    pub fn with_rescale(mut self, mode: RescaleMode) -> Self {
        self.rescale_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!("reservoir size must be >= 2, got {}", self.n)));
        }
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(Error::InvalidParameter(format!("rho must be finite and > 0, got {}", self.rho)));
        }
        if self.rho > 1.0 {
            log::warn!("rho = {} > 1: the encoded input does not converge", self.rho);
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Reservoir> {
        self.validate()?;
        let n = self.n;
        let rho = self.rho;
        let (weights, input_weights) = match self.kind {
            TopologyKind::DelayLine => (delay_matrix(n, rho), RealVector::basis(n, 0)),
            TopologyKind::Cyclic => {
                (ring_matrix(n, rho), aperiodic_input_weights(n, self.input_seed)?)
            }
            TopologyKind::RandomGaussian => {
                let mut g = rng::stream(self.seed, rng::STREAM_RESERVOIR);
                let std = rho / (n as f64).sqrt();
                let entries: Vec<f64> = (0..n * n).map(|_| std * normal(&mut g)).collect();
                let w = DenseMatrix::from_row_major(n, n, entries)?;
                (w, gaussian_input_weights(n, self.input_seed))
            }
            TopologyKind::Wigner => (wigner_matrix(n, rho, self.seed), gaussian_input_weights(n, self.input_seed)),
        };
        let weights = match (self.kind, self.rescale_mode) {
            (TopologyKind::RandomGaussian | TopologyKind::Wigner, RescaleMode::ExactSpectralRadius) => {
                let sr = linalg::spectral_radius(&weights)?;
                weights.scaled(rho / sr)
            }
            (TopologyKind::RandomGaussian | TopologyKind::Wigner, RescaleMode::ExactMaxSingularValue) => {
                weights.scaled(rho / linalg::max_singular_value(&weights))
            }
            _ => weights,
        };
        Ok(Reservoir { spec: *self, weights, input_weights })
    }
}

/// A realized reservoir: connection matrix `W` and input weights `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reservoir {
    #[serde(flatten)]
    pub spec: ReservoirSpec,
    #[serde(rename = "W")]
    weights: DenseMatrix,
    #[serde(rename = "w")]
    input_weights: RealVector,
}

impl Reservoir {
    /// Assembles a reservoir from explicit parts, checking shapes.
    pub fn from_parts(spec: ReservoirSpec, weights: DenseMatrix, input_weights: RealVector) -> Result<Self> {
        let n = weights.nrows();
        if !weights.is_square() || input_weights.len() != n || spec.n != n {
            return Err(Error::DimensionMismatch(format!(
                "spec n = {}, W is {}x{}, w has length {}",
                spec.n,
                weights.nrows(),
                weights.ncols(),
                input_weights.len()
            )));
        }
        Ok(Self { spec, weights, input_weights })
    }

    /// Same `W`, different input weights.
    pub fn with_input_weights(self, input_weights: RealVector) -> Result<Self> {
        Self::from_parts(self.spec, self.weights, input_weights)
    }

    pub fn weights(&self) -> &DenseMatrix {
        &self.weights
    }

    pub fn input_weights(&self) -> &RealVector {
        &self.input_weights
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn kind(&self) -> TopologyKind {
        self.spec.kind
    }

    pub fn spectrum(&self) -> Result<SpectrumSummary> {
        SpectrumSummary::of(&self.weights)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Reservoir = serde_json::from_str(text)?;
        Self::from_parts(raw.spec, raw.weights, raw.input_weights)
    }
}

pub fn build_delay_line(n: usize, rho: f64) -> Result<Reservoir> {
    ReservoirSpec::new(TopologyKind::DelayLine, n, rho).build()
}

pub fn build_cyclic(n: usize, rho: f64, input_seed: u64) -> Result<Reservoir> {
    ReservoirSpec::new(TopologyKind::Cyclic, n, rho).with_input_seed(input_seed).build()
}

pub fn build_random(n: usize, rho: f64, seed: u64) -> Result<Reservoir> {
    ReservoirSpec::new(TopologyKind::RandomGaussian, n, rho)
        .with_seed(seed)
        .with_input_seed(seed)
        .build()
}

pub fn build_wigner(n: usize, rho: f64, seed: u64) -> Result<Reservoir> {
    ReservoirSpec::new(TopologyKind::Wigner, n, rho)
        .with_seed(seed)
        .with_input_seed(seed)
        .build()
}

/// `true` iff no nontrivial cyclic shift of `w` lies within `tol·‖w‖` of `w`.
pub fn check_aperiodic(w: &RealVector, tol: f64) -> bool {
    let norm = w.norm();
    if norm == 0.0 {
        return false;
    }
    (1..w.len()).all(|p| w.cyclic_shift(p).sub(w).norm() > tol * norm)
}

fn normal(g: &mut impl Rng) -> f64 {
    g.sample(StandardNormal)
}

fn delay_matrix(n: usize, rho: f64) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |i, j| if i == j + 1 { rho } else { 0.0 })
}

fn ring_matrix(n: usize, rho: f64) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |i, j| if i == (j + 1) % n { rho } else { 0.0 })
}

fn wigner_matrix(n: usize, rho: f64, seed: u64) -> DenseMatrix {
    let mut g = rng::stream(seed, rng::STREAM_RESERVOIR);
    let off_std = 0.5 * rho / (n as f64).sqrt();
    let diag_std = 0.5 * off_std;
    let mut upper = vec![0.0; n * n];
    for i in 0..n {
        upper[i * n + i] = diag_std * normal(&mut g);
        for j in i + 1..n {
            upper[i * n + j] = off_std * normal(&mut g);
        }
    }
    DenseMatrix::from_fn(n, n, |i, j| if i <= j { upper[i * n + j] } else { upper[j * n + i] })
}

fn gaussian_input_weights(n: usize, input_seed: u64) -> RealVector {
    let mut g = rng::stream(input_seed, rng::STREAM_INPUT_WEIGHTS);
    let std = 1.0 / (n as f64).sqrt();
    RealVector::from_vec_unchecked((0..n).map(|_| std * normal(&mut g)).collect())
}

fn aperiodic_input_weights(n: usize, input_seed: u64) -> Result<RealVector> {
    let mut g = rng::stream(input_seed, rng::STREAM_INPUT_WEIGHTS);
    let std = 1.0 / (n as f64).sqrt();
    for _ in 0..MAX_APERIODIC_DRAWS {
        let w = RealVector::from_vec_unchecked((0..n).map(|_| std * normal(&mut g)).collect());
        if check_aperiodic(&w, DEFAULT_APERIODIC_TOL) {
            return Ok(w);
        }
    }
    Err(Error::Verification(format!(
        "no aperiodic input vector after {MAX_APERIODIC_DRAWS} draws"
    )))
}
