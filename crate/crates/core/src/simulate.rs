//! Delayed-recall experiments on linear reservoirs.
//!
//! A reservoir is driven by i.i.d. standard-normal input, a linear readout is
//! fit by least squares to reproduce the input `τ` steps back, and the fit is
//! scored on a held-out tail as `γ = max(1 − NRMSE, 0)`. Memory curves sweep
//! `τ`, SR sweeps add a grid over `ρ`, and rank scans track the
//! controllability rank as the reservoir grows.
//!
//! Every (topology, n, ρ, realization) cell gets its own seeds from
//! [`cell_seeds`]; cells run in parallel and results are reduced in grid
//! order, so the output does not depend on the number of workers.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::controllability::{analyze, controllability_matrix};
use crate::error::{Error, Result};
use crate::linalg::{least_squares, DenseMatrix, RealVector};
use crate::rng;
use crate::topology::{RescaleMode, Reservoir, ReservoirSpec, TopologyKind};

/// State norm above this is treated as instability.
pub const INSTABILITY_LIMIT: f64 = 1e100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Total signal length `T`.
    pub t_total: usize,
    /// Train/test split: rows `< t0` train, rows `t0..T` test.
    pub t0: usize,
    pub taus: Vec<usize>,
    pub rhos: Vec<f64>,
    pub n: usize,
    pub realizations: usize,
    pub master_seed: u64,
    pub washout: usize,
    pub ridge: f64,
    /// Defaults to exact spectral-radius rescaling: near `ρ = 1` an
    /// as-distributed random draw can land above 1 and diverge.
    pub rescale_mode: RescaleMode,
    /// Worker threads; `None` uses the global pool. Never affects results.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            t_total: 1500,
            t0: 1000,
            taus: Vec::new(),
            rhos: Vec::new(),
            n: 100,
            realizations: 10,
            master_seed: 0,
            washout: 100,
            ridge: 0.0,
            rescale_mode: RescaleMode::ExactSpectralRadius,
            workers: None,
        }
    }
}

impl ExperimentConfig {
    /// Collects every violated constraint instead of stopping at the first.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.taus.is_empty() {
            problems.push("taus must not be empty".to_string());
        }
        let max_tau = self.taus.iter().copied().max().unwrap_or(0);
        if self.washout + max_tau >= self.t0 {
            problems.push(format!(
                "washout ({}) + max(taus) ({max_tau}) must be < t0 ({})",
                self.washout, self.t0
            ));
        }
        if self.t0 >= self.t_total {
            problems.push(format!("t0 ({}) must be < t_total ({})", self.t0, self.t_total));
        }
        if self.t0 < self.t_total && self.t_total - self.t0 < 2 {
            problems.push("test slice needs at least 2 samples".to_string());
        }
        if self.realizations == 0 {
            problems.push("realizations must be >= 1".to_string());
        }
        if self.n < 2 {
            problems.push(format!("n must be >= 2, got {}", self.n));
        }
        for &rho in &self.rhos {
            if !(rho > 0.0) || !rho.is_finite() {
                problems.push(format!("rho must be finite and > 0, got {rho}"));
            }
        }
        if !(self.ridge >= 0.0) || !self.ridge.is_finite() {
            problems.push(format!("ridge must be finite and >= 0, got {}", self.ridge));
        }
        if self.workers == Some(0) {
            problems.push("workers must be >= 1".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }
}

/// Seeds for one experiment cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellSeeds {
    pub reservoir: u64,
    /// Shared by all topologies at the same `(n, realization)`.
    pub input_weights: u64,
    pub signal: u64,
}

pub fn cell_seeds(master: u64, kind: TopologyKind, n: usize, rho: f64, realization: usize) -> CellSeeds {
    let r = realization as u64;
    let n = n as u64;
    CellSeeds {
        reservoir: rng::derive_seed(master, &[0, kind.tag(), n, rho.to_bits(), r]),
        input_weights: rng::derive_seed(master, &[1, n, r]),
        signal: rng::derive_seed(master, &[2, n, r]),
    }
}

/// i.i.d. standard-normal signal.
pub fn generate_signal(seed: u64, len: usize) -> RealVector {
    let mut g = rng::stream(seed, rng::STREAM_SIGNAL);
    RealVector::from_vec_unchecked((0..len).map(|_| g.sample::<f64, _>(StandardNormal)).collect())
}

/// Drives the reservoir from rest: `x_k = W x_{k−1} + w u_k`, `x_{−1} = 0`.
/// Row `k` of the result is the state after consuming `u[k]`.
pub fn run_reservoir(reservoir: &Reservoir, u: &RealVector) -> Result<DenseMatrix> {
    let n = reservoir.n();
    let w = reservoir.input_weights();
    let mut x = RealVector::zeros(n);
    let mut rows = Vec::with_capacity(u.len() * n);
    for (k, &uk) in u.iter().enumerate() {
        x = reservoir.weights().mul_vec(&x);
        x.axpy(uk, w);
        let norm = x.norm();
        if !(norm <= INSTABILITY_LIMIT) {
            return Err(Error::Unstable { step: k, norm });
        }
        rows.extend_from_slice(x.as_slice());
    }
    DenseMatrix::from_row_major(u.len(), n, rows)
}

/// `sqrt(Σ(y − ŷ)² / Σ(y − ȳ)²)`.
pub fn nrmse(y: &[f64], yhat: &[f64]) -> Result<f64> {
    if y.len() != yhat.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} targets vs {} predictions",
            y.len(),
            yhat.len()
        )));
    }
    if y.len() < 2 {
        return Err(Error::InvalidParameter("NRMSE needs at least 2 samples".into()));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let spread: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if spread == 0.0 {
        return Err(Error::ConstantTarget);
    }
    let err: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b).powi(2)).sum();
    Ok((err / spread).sqrt())
}

/// `γ = max(1 − NRMSE, 0)`.
pub fn accuracy(nrmse_value: f64) -> f64 {
    (1.0 - nrmse_value).clamp(0.0, 1.0)
}

/// Where the readout trains and how hard it is regularized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutSetup {
    pub t0: usize,
    pub washout: usize,
    pub ridge: f64,
}

impl From<&ExperimentConfig> for ReadoutSetup {
    fn from(c: &ExperimentConfig) -> Self {
        Self { t0: c.t0, washout: c.washout, ridge: c.ridge }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedReadout {
    pub r: RealVector,
    pub train_nrmse: f64,
}

fn delayed_targets(u: &RealVector, tau: usize, start: usize, end: usize) -> Vec<f64> {
    (start..end).map(|k| u[k - tau]).collect()
}

/// Fits `r` on rows `washout + τ .. t0` against targets `u[k − τ]`.
pub fn train_readout(
    states: &DenseMatrix,
    u: &RealVector,
    tau: usize,
    setup: ReadoutSetup,
) -> Result<TrainedReadout> {
    let start = setup.washout + tau;
    if states.nrows() < setup.t0 || u.len() < setup.t0 {
        return Err(Error::DimensionMismatch(format!(
            "need at least t0 = {} rows, have {} states and {} inputs",
            setup.t0,
            states.nrows(),
            u.len()
        )));
    }
    if start + 2 > setup.t0 {
        return Err(Error::InvalidParameter(format!(
            "training slice {start}..{} is too short",
            setup.t0
        )));
    }
    let design = states.select_rows(start, setup.t0);
    if design.max_abs() == 0.0 {
        return Err(Error::DegenerateStates);
    }
    let targets = delayed_targets(u, tau, start, setup.t0);
    let r = least_squares(&design, &RealVector::new(targets.clone())?, setup.ridge)?;
    let fitted = design.mul_vec(&r);
    let train_nrmse = nrmse(&targets, fitted.as_slice())?;
    Ok(TrainedReadout { r, train_nrmse })
}

/// Test NRMSE of a trained readout over rows `t0..`.
pub fn test_nrmse(states: &DenseMatrix, u: &RealVector, tau: usize, t0: usize, readout: &TrainedReadout) -> Result<f64> {
    let end = states.nrows().min(u.len());
    if t0 + 2 > end {
        return Err(Error::InvalidParameter(format!("test slice {t0}..{end} is too short")));
    }
    let predicted = states.select_rows(t0, end).mul_vec(&readout.r);
    nrmse(&delayed_targets(u, tau, t0, end), predicted.as_slice())
}

/// Test accuracy for every delay in `taus` on one realization.
pub fn realization_accuracies(
    kind: TopologyKind,
    rho: f64,
    realization: usize,
    config: &ExperimentConfig,
    taus: &[usize],
) -> Result<Vec<f64>> {
    let seeds = cell_seeds(config.master_seed, kind, config.n, rho, realization);
    let reservoir = ReservoirSpec::new(kind, config.n, rho)
        .with_seed(seeds.reservoir)
        .with_input_seed(seeds.input_weights)
        .with_rescale(config.rescale_mode)
        .build()?;
    let u = generate_signal(seeds.signal, config.t_total);
    let states = run_reservoir(&reservoir, &u)?;
    let setup = ReadoutSetup::from(config);
    taus.iter()
        .map(|&tau| {
            let readout = train_readout(&states, &u, tau, setup)?;
            Ok(accuracy(test_nrmse(&states, &u, tau, config.t0, &readout)?))
        })
        .collect()
}

/// One raw measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaRecord {
    pub topology: TopologyKind,
    pub n: usize,
    pub rho: f64,
    pub tau: usize,
    pub realization: usize,
    pub gamma: f64,
}

/// Realization-averaged accuracy at one `(ρ, τ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub topology: TopologyKind,
    pub n: usize,
    pub rho: f64,
    pub tau: usize,
    pub mean_gamma: f64,
    pub std_gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub tau: usize,
    pub mean_gamma: f64,
    pub std_gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryCurve {
    pub topology: TopologyKind,
    pub rho: f64,
    pub points: Vec<CurvePoint>,
}

impl MemoryCurve {
    pub fn at(&self, tau: usize) -> Option<&CurvePoint> {
        self.points.iter().find(|p| p.tau == tau)
    }
}

/// Raw measurements plus their aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRun {
    pub records: Vec<GammaRecord>,
    pub points: Vec<SweepPoint>,
}

impl SweepRun {
    pub fn curve(&self, kind: TopologyKind, rho: f64) -> MemoryCurve {
        MemoryCurve {
            topology: kind,
            rho,
            points: self
                .points
                .iter()
                .filter(|p| p.topology == kind && p.rho == rho)
                .map(|p| CurvePoint { tau: p.tau, mean_gamma: p.mean_gamma, std_gamma: p.std_gamma })
                .collect(),
        }
    }

    pub fn point(&self, kind: TopologyKind, rho: f64, tau: usize) -> Option<&SweepPoint> {
        self.points.iter().find(|p| p.topology == kind && p.rho == rho && p.tau == tau)
    }
}

/// Population mean and standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let len = values.len() as f64;
    let mean = values.iter().sum::<f64>() / len;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / len;
    (mean, var.sqrt())
}

pub(crate) fn with_workers<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Full `(kind × ρ × τ)` grid, averaged over realizations.
pub fn sweep_grid(kinds: &[TopologyKind], rhos: &[f64], config: &ExperimentConfig) -> Result<SweepRun> {
    config.validate()?;
    if kinds.is_empty() || rhos.is_empty() {
        return Err(Error::Config(vec!["need at least one topology and one rho".into()]));
    }
    let cells: Vec<(TopologyKind, f64, usize)> = kinds
        .iter()
        .flat_map(|&k| rhos.iter().flat_map(move |&rho| (0..config.realizations).map(move |r| (k, rho, r))))
        .collect();
    let results: Vec<Result<Vec<f64>>> = with_workers(config.workers, || {
        cells
            .par_iter()
            .map(|&(kind, rho, r)| realization_accuracies(kind, rho, r, config, &config.taus))
            .collect()
    })?;
    let gammas = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut records = Vec::with_capacity(cells.len() * config.taus.len());
    for (&(kind, rho, realization), row) in cells.iter().zip(&gammas) {
        for (&tau, &gamma) in config.taus.iter().zip(row) {
            records.push(GammaRecord { topology: kind, n: config.n, rho, tau, realization, gamma });
        }
    }
    let per_cell = config.realizations;
    let mut points = Vec::new();
    for (block, chunk) in gammas.chunks(per_cell).enumerate() {
        let (kind, rho, _) = cells[block * per_cell];
        for (t, &tau) in config.taus.iter().enumerate() {
            let values: Vec<f64> = chunk.iter().map(|row| row[t]).collect();
            let (mean_gamma, std_gamma) = mean_std(&values);
            points.push(SweepPoint { topology: kind, n: config.n, rho, tau, mean_gamma, std_gamma });
        }
    }
    Ok(SweepRun { records, points })
}

/// Accuracy as a function of `τ` for one topology and `ρ`.
pub fn memory_curve(kind: TopologyKind, rho: f64, config: &ExperimentConfig) -> Result<MemoryCurve> {
    Ok(sweep_grid(&[kind], &[rho], config)?.curve(kind, rho))
}

/// Accuracy over a `ρ × τ` grid for one topology.
pub fn sr_sweep(kind: TopologyKind, taus: &[usize], rhos: &[f64], config: &ExperimentConfig) -> Result<Vec<SweepPoint>> {
    let config = ExperimentConfig { taus: taus.to_vec(), rhos: rhos.to_vec(), ..config.clone() };
    Ok(sweep_grid(&[kind], rhos, &config)?.points)
}

/// Which quantity is pinned to `ρ` in a rank scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    SpectralRadius,
    MaxSingularValue,
}

impl Normalization {
    pub fn rescale_mode(self) -> RescaleMode {
        match self {
            Normalization::SpectralRadius => RescaleMode::ExactSpectralRadius,
            Normalization::MaxSingularValue => RescaleMode::ExactMaxSingularValue,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Normalization::SpectralRadius => "spectral_radius",
            Normalization::MaxSingularValue => "max_singular_value",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRecord {
    pub topology: TopologyKind,
    pub n: usize,
    pub rho: f64,
    pub normalization: Normalization,
    pub realization: usize,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankPoint {
    pub topology: TopologyKind,
    pub n: usize,
    pub rho: f64,
    pub normalization: Normalization,
    pub mean_rank: f64,
    pub std_rank: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankScan {
    pub records: Vec<RankRecord>,
    pub points: Vec<RankPoint>,
}

impl RankScan {
    pub fn mean_rank(&self, kind: TopologyKind, n: usize) -> Option<f64> {
        self.points.iter().find(|p| p.topology == kind && p.n == n).map(|p| p.mean_rank)
    }
}

/// Numerical rank of `C` for each topology and size. Reservoirs are
/// normalized exactly according to `fixed` and share input weights across
/// topologies within a realization.
pub fn rank_scan(
    kinds: &[TopologyKind],
    ns: &[usize],
    rho: f64,
    fixed: Normalization,
    realizations: usize,
    master_seed: u64,
    workers: Option<usize>,
) -> Result<RankScan> {
    let mut problems = Vec::new();
    if kinds.is_empty() {
        problems.push("kinds must not be empty".to_string());
    }
    if ns.is_empty() {
        problems.push("ns must not be empty".to_string());
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        problems.push("ns must be strictly ascending".to_string());
    }
    if ns.iter().any(|&n| n < 2) {
        problems.push("every n must be >= 2".to_string());
    }
    if realizations == 0 {
        problems.push("realizations must be >= 1".to_string());
    }
    if !(rho > 0.0) || !rho.is_finite() {
        problems.push(format!("rho must be finite and > 0, got {rho}"));
    }
    if !problems.is_empty() {
        return Err(Error::Config(problems));
    }

    let cells: Vec<(TopologyKind, usize, usize)> = kinds
        .iter()
        .flat_map(|&k| ns.iter().flat_map(move |&n| (0..realizations).map(move |r| (k, n, r))))
        .collect();
    let ranks: Vec<Result<usize>> = with_workers(workers, || {
        cells
            .par_iter()
            .map(|&(kind, n, r)| {
                let seeds = cell_seeds(master_seed, kind, n, rho, r);
                let reservoir = ReservoirSpec::new(kind, n, rho)
                    .with_seed(seeds.reservoir)
                    .with_input_seed(seeds.input_weights)
                    .with_rescale(fixed.rescale_mode())
                    .build()?;
                Ok(analyze(&controllability_matrix(&reservoir), None)?.rank)
            })
            .collect()
    })?;
    let ranks = ranks.into_iter().collect::<Result<Vec<_>>>()?;

    let records: Vec<RankRecord> = cells
        .iter()
        .zip(&ranks)
        .map(|(&(kind, n, realization), &rank)| RankRecord {
            topology: kind,
            n,
            rho,
            normalization: fixed,
            realization,
            rank,
        })
        .collect();
    let points = records
        .chunks(realizations)
        .map(|chunk| {
            let values: Vec<f64> = chunk.iter().map(|r| r.rank as f64).collect();
            let (mean_rank, std_rank) = mean_std(&values);
            RankPoint {
                topology: chunk[0].topology,
                n: chunk[0].n,
                rho,
                normalization: fixed,
                mean_rank,
                std_rank,
            }
        })
        .collect();
    Ok(RankScan { records, points })
}
