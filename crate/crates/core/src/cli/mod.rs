//! Command-line front end.
//!
//! Subcommands: `build`, `analyze`, `encode-verify`, `memory-curve`,
//! `sr-sweep`, `rank-scan`. Output goes to `--out-dir`, which defaults to
//! `$LINRES_OUT_DIR` and then to `./linres-out`.
//!
//! CSV layouts (column order is fixed):
//!
//! | file | columns |
//! |------|---------|
//! | `memory_curve_raw.csv`, `sr_sweep_raw.csv` | topology, n, rho, tau, realization, gamma |
//! | `memory_curve.csv`, `sr_sweep.csv` | topology, n, rho, tau, mean_gamma, std_gamma |
//! | `rank_scan_raw.csv` | topology, n, rho, normalization, realization, rank |
//! | `rank_scan.csv` | topology, n, rho, normalization, mean_rank, std_rank |
//! | `<stem>_analysis.csv` | index, singular_value, column_norm, nullspace_energy |
//!
//! Exit codes: 0 success, 1 invalid input or configuration, 2 numerical
//! failure (including a failed verification).

pub mod config;
pub mod output;
pub mod svg;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::controllability::{analyze, controllability_matrix, cyclic_controllability_tilde};
use crate::encoding::{encode_input, encode_input_cyclic, encode_input_delay, truncation_horizon_for, CharCoeffs};
use crate::error::{Error, Result};
use crate::linalg::RealVector;
use crate::rng;
use crate::simulate::{self, cell_seeds, generate_signal, run_reservoir};
use crate::topology::{RescaleMode, Reservoir, ReservoirSpec, TopologyKind};
use config::{ConfigFile, ExperimentKind, RunConfig};
use output::{csv_bytes, unix_now, CellSeedRecord, OutputSet, RunManifest, SEED_DERIVATION};
use svg::{Plot, Series};

pub const OUT_DIR_ENV: &str = "LINRES_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "linres-out";
/// Relative residual accepted by `encode-verify`.
pub const VERIFY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "linres", version, about = "Linear reservoir controllability and memory experiments")]
pub struct Cli {
    /// Directory for every file a subcommand writes.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = DEFAULT_OUT_DIR)]
    pub out_dir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a reservoir and save it as JSON.
    Build(BuildArgs),
    /// Rank, singular values, column norms and nullspace of a saved reservoir's C.
    Analyze(AnalyzeArgs),
    /// Check x0 = C s against direct simulation on random windows.
    EncodeVerify(EncodeVerifyArgs),
    /// Recall accuracy against delay for each topology and spectral radius.
    MemoryCurve(ExperimentArgs),
    /// Recall accuracy against spectral radius for each delay.
    SrSweep(ExperimentArgs),
    /// Controllability rank against reservoir size.
    RankScan(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct ReservoirArgs {
    /// delay, cyclic, random or wigner.
    #[arg(long)]
    pub kind: TopologyKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub rho: f64,
    /// Seed for W (random, wigner).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Seed for w; defaults to --seed.
    #[arg(long)]
    pub input_seed: Option<u64>,
    /// as-distributed, exact (spectral radius) or msv (max singular value).
    #[arg(long)]
    pub rescale: Option<RescaleMode>,
}

impl ReservoirArgs {
    fn spec(&self, default_rescale: RescaleMode) -> ReservoirSpec {
        ReservoirSpec::new(self.kind, self.n, self.rho)
            .with_seed(self.seed)
            .with_input_seed(self.input_seed.unwrap_or(self.seed))
            .with_rescale(self.rescale.unwrap_or(default_rescale))
    }
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub reservoir: ReservoirArgs,
    /// Output file; defaults to a descriptive name inside --out-dir.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Reservoir JSON written by `build`.
    pub reservoir: PathBuf,
    /// Rank tolerance; defaults to sigma_1 * n * eps.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EncodeVerifyArgs {
    #[command(flatten)]
    pub reservoir: ReservoirArgs,
    /// Window length K; defaults to the horizon where rho^K <= 1e-14.
    #[arg(long)]
    pub length: Option<usize>,
    /// Number of random windows.
    #[arg(long, default_value_t = 10)]
    pub windows: usize,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// TOML config; missing keys take the subcommand defaults.
    #[arg(long, conflicts_with = "from_manifest")]
    pub config: Option<PathBuf>,
    /// Rerun the configuration recorded in a manifest and check that every
    /// output digest matches.
    #[arg(long)]
    pub from_manifest: Option<PathBuf>,
    /// Overrides the master seed.
    #[arg(long, conflicts_with = "from_manifest")]
    pub seed: Option<u64>,
    /// Worker threads; does not change results.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Skip SVG output.
    #[arg(long)]
    pub no_svg: bool,
}

/// Exit status for an error: 2 for numerical failures, 1 otherwise.
pub fn exit_code(err: &Error) -> u8 {
    if err.is_numerical() {
        2
    } else {
        1
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Build(args) => cmd_build(&args, &cli.out_dir),
        Command::Analyze(args) => cmd_analyze(&args, &cli.out_dir),
        Command::EncodeVerify(args) => cmd_encode_verify(&args, &cli.out_dir),
        Command::MemoryCurve(args) => cmd_experiment(ExperimentKind::MemoryCurve, &args, &cli.out_dir),
        Command::SrSweep(args) => cmd_experiment(ExperimentKind::SrSweep, &args, &cli.out_dir),
        Command::RankScan(args) => cmd_experiment(ExperimentKind::RankScan, &args, &cli.out_dir),
    }
}

fn cmd_build(args: &BuildArgs, out_dir: &Path) -> Result<()> {
    let r = &args.reservoir;
    let reservoir = r.spec(RescaleMode::AsDistributed).build()?;
    let path = match &args.output {
        Some(p) => p.clone(),
        None => out_dir.join(format!("reservoir_{}_n{}_rho{}_seed{}.json", r.kind, r.n, r.rho, r.seed)),
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(&path, reservoir.to_json()?)?;
    println!("{}", reservoir.spectrum()?);
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct AnalysisRow {
    index: usize,
    singular_value: f64,
    column_norm: f64,
    nullspace_energy: f64,
}

fn cmd_analyze(args: &AnalyzeArgs, out_dir: &Path) -> Result<()> {
    let reservoir = Reservoir::from_json(&std::fs::read_to_string(&args.reservoir)?)?;
    let report = analyze(&controllability_matrix(&reservoir), args.tol)?;
    let energy = report.nullspace_energy_profile();
    let rows: Vec<AnalysisRow> = (0..report.n())
        .map(|i| AnalysisRow {
            index: i,
            singular_value: report.singular_values[i],
            column_norm: report.column_norms[i],
            nullspace_energy: energy[i],
        })
        .collect();
    let stem = args.reservoir.file_stem().and_then(|s| s.to_str()).unwrap_or("reservoir");
    let mut out = OutputSet::new(out_dir)?;
    let json_path = out.write(&format!("{stem}_analysis.json"), serde_json::to_string_pretty(&report)?.as_bytes())?;
    let csv_path = out.write(&format!("{stem}_analysis.csv"), &csv_bytes(&rows)?)?;
    println!("rank {} of {} (nullity {}, tolerance {:e})", report.rank, report.n(), report.nullity(), report.rank_tolerance);
    println!("wrote {}", json_path.display());
    println!("wrote {}", csv_path.display());
    Ok(())
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    topology: TopologyKind,
    n: usize,
    rho: f64,
    horizon: usize,
    windows: usize,
    max_residual_controllability: f64,
    max_residual_closed_form: Option<f64>,
    tolerance: f64,
    pass: bool,
}

fn relative_gap(reference: &RealVector, candidate: &RealVector) -> f64 {
    let scale = reference.norm();
    let gap = reference.sub(candidate).norm();
    if scale == 0.0 {
        gap
    } else {
        gap / scale
    }
}

fn cmd_encode_verify(args: &EncodeVerifyArgs, out_dir: &Path) -> Result<()> {
    let r = &args.reservoir;
    if !(r.rho < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "encode-verify needs rho < 1 (got {}); the encoded input diverges otherwise",
            r.rho
        )));
    }
    if args.windows == 0 {
        return Err(Error::InvalidParameter("--windows must be >= 1".into()));
    }
    let reservoir = r.spec(RescaleMode::ExactSpectralRadius).build()?;
    let n = reservoir.n();
    let horizon = match args.length {
        Some(k) if k < n => {
            return Err(Error::InvalidParameter(format!("--length must be >= n = {n}, got {k}")));
        }
        Some(k) => k,
        None => truncation_horizon_for(n, r.rho, 1e-14)?,
    };
    let coeffs = CharCoeffs::of(reservoir.weights())?;
    let c = controllability_matrix(&reservoir);
    let c_tilde = cyclic_controllability_tilde(reservoir.input_weights());

    let mut worst_c: f64 = 0.0;
    let mut worst_closed: Option<f64> = None;
    for i in 0..args.windows {
        let window = generate_signal(rng::derive_seed(r.seed, &[0x656e63, i as u64]), horizon);
        let chronological = RealVector::new(window.iter().rev().copied().collect())?;
        let states = run_reservoir(&reservoir, &chronological)?;
        let direct = states.row(states.nrows() - 1);
        let encoded = encode_input(&coeffs, &window, horizon)?;
        worst_c = worst_c.max(relative_gap(&direct, &c.mul_vec(&encoded.s)));
        let closed = match r.kind {
            TopologyKind::Cyclic => {
                Some(c_tilde.mul_vec(&encode_input_cyclic(r.rho, n, &window, horizon)?.s))
            }
            TopologyKind::DelayLine => Some(c.mul_vec(&encode_input_delay(&window, n)?.s)),
            _ => None,
        };
        if let Some(x) = closed {
            let gap = relative_gap(&direct, &x);
            worst_closed = Some(worst_closed.map_or(gap, |w| w.max(gap)));
        }
    }
    let pass = worst_c <= VERIFY_TOLERANCE && worst_closed.is_none_or(|g| g <= VERIFY_TOLERANCE);
    let report = VerifyReport {
        topology: r.kind,
        n,
        rho: r.rho,
        horizon,
        windows: args.windows,
        max_residual_controllability: worst_c,
        max_residual_closed_form: worst_closed,
        tolerance: VERIFY_TOLERANCE,
        pass,
    };
    let mut out = OutputSet::new(out_dir)?;
    let path = out.write(
        &format!("encode_verify_{}_n{}_rho{}.json", r.kind, n, r.rho),
        serde_json::to_string_pretty(&report)?.as_bytes(),
    )?;
    println!("horizon K = {horizon}, {} windows", args.windows);
    println!("direct vs C s: max relative residual {worst_c:.3e}");
    if let Some(g) = worst_closed {
        println!("direct vs closed form: max relative residual {g:.3e}");
    }
    println!("wrote {}", path.display());
    if pass {
        println!("PASS (tolerance {VERIFY_TOLERANCE:e})");
        Ok(())
    } else {
        println!("FAIL (tolerance {VERIFY_TOLERANCE:e})");
        Err(Error::Verification(format!(
            "reconstruction residual above {VERIFY_TOLERANCE:e}"
        )))
    }
}

fn load_run_config(kind: ExperimentKind, args: &ExperimentArgs) -> Result<(RunConfig, Option<RunManifest>)> {
    let (mut cfg, manifest) = match &args.from_manifest {
        Some(path) => {
            let manifest = RunManifest::load(path)?;
            if manifest.config.experiment_kind != kind {
                return Err(Error::InvalidParameter(format!(
                    "manifest records a {} run, not {}",
                    manifest.config.experiment_kind.name(),
                    kind.name()
                )));
            }
            let cfg = manifest.config.clone();
            cfg.validate()?;
            (cfg, Some(manifest))
        }
        None => {
            let file = match &args.config {
                Some(path) => ConfigFile::load(path)?,
                None => ConfigFile::default(),
            };
            (RunConfig::resolve(kind, file)?, None)
        }
    };
    if let Some(seed) = args.seed {
        cfg.experiment.master_seed = seed;
    }
    if args.workers.is_some() {
        cfg.experiment.workers = args.workers;
    }
    if args.no_svg {
        cfg.svg = false;
    }
    cfg.validate()?;
    Ok((cfg, manifest))
}

fn cmd_experiment(kind: ExperimentKind, args: &ExperimentArgs, out_dir: &Path) -> Result<()> {
    let (cfg, recorded) = load_run_config(kind, args)?;
    let started = unix_now();
    let mut out = OutputSet::new(out_dir)?;
    let cells = match kind {
        ExperimentKind::MemoryCurve | ExperimentKind::SrSweep => write_recall_outputs(&cfg, &mut out)?,
        ExperimentKind::RankScan => write_rank_outputs(&cfg, &mut out)?,
    };
    // Workers never affect results; keep them out of the recorded config so
    // manifests from different pool sizes compare equal.
    let mut recorded_cfg = cfg.clone();
    recorded_cfg.experiment.workers = None;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: kind.name().to_string(),
        master_seed: cfg.experiment.master_seed,
        config: recorded_cfg,
        seed_derivation: SEED_DERIVATION.to_string(),
        cells,
        started_unix: started,
        finished_unix: unix_now(),
        outputs: out.files().to_vec(),
    };
    let manifest_path = out.dir().join(format!("{}_manifest.json", kind.stem()));
    std::fs::write(&manifest_path, manifest.to_json()?)?;
    for f in out.files() {
        println!("{}  {}", f.sha256, out.dir().join(&f.file).display());
    }
    println!("manifest {}", manifest_path.display());
    if let Some(recorded) = recorded {
        recorded.verify_against(out.files())?;
        println!("all {} recorded digests reproduced", recorded.outputs.len());
    }
    Ok(())
}

fn write_recall_outputs(cfg: &RunConfig, out: &mut OutputSet) -> Result<Vec<CellSeedRecord>> {
    let e = &cfg.experiment;
    let kind = cfg.experiment_kind;
    log::info!(
        "{}: {} topologies x {} rhos x {} taus x {} realizations",
        kind.name(),
        cfg.kinds.len(),
        e.rhos.len(),
        e.taus.len(),
        e.realizations
    );
    let run = simulate::sweep_grid(&cfg.kinds, &e.rhos, e)?;
    out.write(&format!("{}_raw.csv", kind.stem()), &csv_bytes(&run.records)?)?;
    out.write(&format!("{}.csv", kind.stem()), &csv_bytes(&run.points)?)?;

    if cfg.svg {
        for &topology in &cfg.kinds {
            let plot = match kind {
                ExperimentKind::MemoryCurve => Plot {
                    title: format!("memory curve, {topology}, n = {}", e.n),
                    x_label: "tau".into(),
                    y_label: "gamma".into(),
                    series: e
                        .rhos
                        .iter()
                        .map(|&rho| Series {
                            label: format!("rho = {rho}"),
                            points: run
                                .curve(topology, rho)
                                .points
                                .iter()
                                .map(|p| (p.tau as f64, p.mean_gamma, p.std_gamma))
                                .collect(),
                        })
                        .collect(),
                },
                _ => Plot {
                    title: format!("accuracy vs spectral radius, {topology}, n = {}", e.n),
                    x_label: "rho".into(),
                    y_label: "gamma".into(),
                    series: e
                        .taus
                        .iter()
                        .map(|&tau| Series {
                            label: format!("tau = {tau}"),
                            points: e
                                .rhos
                                .iter()
                                .filter_map(|&rho| run.point(topology, rho, tau))
                                .map(|p| (p.rho, p.mean_gamma, p.std_gamma))
                                .collect(),
                        })
                        .collect(),
                },
            };
            out.write(&format!("{}_{topology}.svg", kind.stem()), plot.render().as_bytes())?;
        }
    }

    let mut cells = Vec::new();
    for &topology in &cfg.kinds {
        for &rho in &e.rhos {
            for r in 0..e.realizations {
                cells.push(CellSeedRecord::new(topology, e.n, rho, r, cell_seeds(e.master_seed, topology, e.n, rho, r)));
            }
        }
    }
    Ok(cells)
}

fn write_rank_outputs(cfg: &RunConfig, out: &mut OutputSet) -> Result<Vec<CellSeedRecord>> {
    let e = &cfg.experiment;
    let mut records = Vec::new();
    let mut points = Vec::new();
    for &normalization in &cfg.normalization {
        for &rho in &e.rhos {
            log::info!("rank-scan: {} at rho = {rho}", normalization.name());
            let scan =
                simulate::rank_scan(&cfg.kinds, &cfg.ns, rho, normalization, e.realizations, e.master_seed, e.workers)?;
            if cfg.svg {
                let plot = Plot {
                    title: format!("rank of C, {} fixed at {rho}", normalization.name()),
                    x_label: "n".into(),
                    y_label: "rank".into(),
                    series: cfg
                        .kinds
                        .iter()
                        .map(|&k| Series {
                            label: k.to_string(),
                            points: scan
                                .points
                                .iter()
                                .filter(|p| p.topology == k)
                                .map(|p| (p.n as f64, p.mean_rank, p.std_rank))
                                .collect(),
                        })
                        .collect(),
                };
                out.write(&format!("rank_scan_{}_rho{rho}.svg", normalization.name()), plot.render().as_bytes())?;
            }
            records.extend(scan.records);
            points.extend(scan.points);
        }
    }
    out.write("rank_scan_raw.csv", &csv_bytes(&records)?)?;
    out.write("rank_scan.csv", &csv_bytes(&points)?)?;

    let mut cells = Vec::new();
    for &topology in &cfg.kinds {
        for &n in &cfg.ns {
            for &rho in &e.rhos {
                for r in 0..e.realizations {
                    cells.push(CellSeedRecord::new(topology, n, rho, r, cell_seeds(e.master_seed, topology, n, rho, r)));
                }
            }
        }
    }
    Ok(cells)
}
