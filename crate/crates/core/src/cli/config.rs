//! Experiment configuration files.
//!
//! TOML, flat key-value. Every key is optional; missing keys take the
//! defaults of the subcommand being run. Example:
//!
//! ```toml
//! kinds = ["cyclic", "random"]
//! n = 100
//! rhos = [0.9, 0.99]
//! taus = [0, 10, 20, 50, 90, 100, 120]
//! t_total = 1500
//! t0 = 1000
//! washout = 100
//! realizations = 10
//! master_seed = 42
//! ridge = 0.0
//! rescale_mode = "exact_spectral_radius"   # or "as_distributed", "exact_max_singular_value"
//! ns = [10, 50, 100, 200]           # rank-scan only
//! normalization = ["spectral_radius", "max_singular_value"]   # rank-scan only
//! svg = true
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulate::{ExperimentConfig, Normalization};
use crate::topology::{RescaleMode, TopologyKind};

/// Which experiment a configuration drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    MemoryCurve,
    SrSweep,
    RankScan,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::MemoryCurve => "memory-curve",
            ExperimentKind::SrSweep => "sr-sweep",
            ExperimentKind::RankScan => "rank-scan",
        }
    }

    /// Output file stem.
    pub fn stem(self) -> &'static str {
        match self {
            ExperimentKind::MemoryCurve => "memory_curve",
            ExperimentKind::SrSweep => "sr_sweep",
            ExperimentKind::RankScan => "rank_scan",
        }
    }
}

/// Contents of a config file, before defaults.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub kinds: Option<Vec<TopologyKind>>,
    pub t_total: Option<usize>,
    pub t0: Option<usize>,
    pub taus: Option<Vec<usize>>,
    pub rhos: Option<Vec<f64>>,
    pub n: Option<usize>,
    pub ns: Option<Vec<usize>>,
    pub realizations: Option<usize>,
    pub master_seed: Option<u64>,
    pub washout: Option<usize>,
    pub ridge: Option<f64>,
    pub rescale_mode: Option<RescaleMode>,
    pub normalization: Option<Vec<Normalization>>,
    pub workers: Option<usize>,
    pub svg: Option<bool>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// Fully resolved configuration, as recorded in the run manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment_kind: ExperimentKind,
    pub kinds: Vec<TopologyKind>,
    /// Reservoir sizes; rank-scan only.
    pub ns: Vec<usize>,
    /// Rank-scan only.
    pub normalization: Vec<Normalization>,
    pub svg: bool,
    pub experiment: ExperimentConfig,
}

fn default_rhos(kind: ExperimentKind) -> Vec<f64> {
    match kind {
        ExperimentKind::MemoryCurve => vec![0.7, 0.9, 0.99],
        ExperimentKind::SrSweep => vec![
            0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.97, 0.99, 0.995, 0.999, 0.9995,
        ],
        ExperimentKind::RankScan => vec![0.995],
    }
}

fn default_taus(kind: ExperimentKind) -> Vec<usize> {
    match kind {
        ExperimentKind::MemoryCurve => (0..=150).step_by(5).collect(),
        ExperimentKind::SrSweep => vec![5, 20, 40, 60, 80],
        ExperimentKind::RankScan => vec![0],
    }
}

impl RunConfig {
    /// Subcommand defaults mirror the setup of the memory-curve experiments:
    /// `n = 100`, `T = 1500`, `t0 = 1000`, 10 realizations, all four
    /// topologies.
    pub fn defaults(kind: ExperimentKind) -> Self {
        Self {
            experiment_kind: kind,
            kinds: TopologyKind::ALL.to_vec(),
            ns: vec![10, 25, 50, 100, 200, 300, 400, 500],
            normalization: vec![Normalization::SpectralRadius, Normalization::MaxSingularValue],
            svg: true,
            experiment: ExperimentConfig {
                taus: default_taus(kind),
                rhos: default_rhos(kind),
                ..ExperimentConfig::default()
            },
        }
    }

    pub fn resolve(kind: ExperimentKind, file: ConfigFile) -> Result<Self> {
        let mut cfg = Self::defaults(kind);
        let e = &mut cfg.experiment;
        macro_rules! take {
            ($dst:expr, $src:expr) => {
                if let Some(v) = $src {
                    $dst = v;
                }
            };
        }
        take!(cfg.kinds, file.kinds);
        take!(cfg.ns, file.ns);
        take!(cfg.normalization, file.normalization);
        take!(cfg.svg, file.svg);
        take!(e.t_total, file.t_total);
        take!(e.t0, file.t0);
        take!(e.taus, file.taus);
        take!(e.rhos, file.rhos);
        take!(e.n, file.n);
        take!(e.realizations, file.realizations);
        take!(e.master_seed, file.master_seed);
        take!(e.washout, file.washout);
        take!(e.ridge, file.ridge);
        take!(e.rescale_mode, file.rescale_mode);
        e.workers = file.workers;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reports every violated constraint at once.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.kinds.is_empty() {
            problems.push("kinds must not be empty".to_string());
        }
        if self.experiment.rhos.is_empty() {
            problems.push("rhos must not be empty".to_string());
        }
        match self.experiment_kind {
            ExperimentKind::RankScan => {
                let e = &self.experiment;
                if self.ns.is_empty() {
                    problems.push("ns must not be empty".to_string());
                }
                if self.ns.windows(2).any(|w| w[0] >= w[1]) {
                    problems.push("ns must be strictly ascending".to_string());
                }
                if self.ns.iter().any(|&n| n < 2) {
                    problems.push("every n must be >= 2".to_string());
                }
                if self.normalization.is_empty() {
                    problems.push("normalization must not be empty".to_string());
                }
                if e.realizations == 0 {
                    problems.push("realizations must be >= 1".to_string());
                }
                for &rho in &e.rhos {
                    if !(rho > 0.0) || !rho.is_finite() {
                        problems.push(format!("rho must be finite and > 0, got {rho}"));
                    }
                }
                if e.workers == Some(0) {
                    problems.push("workers must be >= 1".to_string());
                }
            }
            _ => {
                if let Err(Error::Config(more)) = self.experiment.validate() {
                    problems.extend(more);
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }
}
