//! Recall experiments: accuracy bounds, curve shapes and reproducibility.

use linres::simulate::{
    memory_curve, rank_scan, sr_sweep, sweep_grid, ExperimentConfig, Normalization, SweepRun,
};
use linres::topology::{RescaleMode, TopologyKind};
use proptest::prelude::*;

fn small(n: usize, taus: Vec<usize>) -> ExperimentConfig {
    ExperimentConfig { n, taus, t_total: 700, t0: 500, washout: 50, realizations: 3, ..Default::default() }
}

#[test]
fn current_input_is_recalled_by_every_topology() {
    let config = ExperimentConfig { n: 50, taus: vec![0], realizations: 3, ..Default::default() };
    for kind in TopologyKind::ALL {
        let gamma = memory_curve(kind, 0.9, &config).unwrap().points[0].mean_gamma;
        assert!(gamma >= 0.99, "{kind}: gamma(0) = {gamma}");
    }
}

#[test]
fn delay_line_forgets_everything_past_n() {
    let n = 30;
    let config = small(n, (n..n + 40).step_by(3).collect());
    for rho in [0.5, 0.9, 1.0] {
        for p in memory_curve(TopologyKind::DelayLine, rho, &config).unwrap().points {
            assert!(p.mean_gamma <= 0.05, "rho {rho}, tau {}: {}", p.tau, p.mean_gamma);
        }
    }
}

#[test]
fn cyclic_curve_drops_at_n() {
    // Plateau at 1 - rho^n below n, nothing above.
    let (n, rho) = (40, 0.95);
    let config = small(n, vec![0, 10, 20, 30, 39, 40, 45, 60]);
    let curve = memory_curve(TopologyKind::Cyclic, rho, &config).unwrap();
    let plateau = 1.0 - rho.powi(n as i32);
    for p in &curve.points {
        if p.tau < n {
            assert!((p.mean_gamma - plateau).abs() < 0.05, "tau {}: {} vs {plateau}", p.tau, p.mean_gamma);
        } else {
            assert!(p.mean_gamma < 0.1, "tau {}: {}", p.tau, p.mean_gamma);
        }
    }
}

#[test]
fn random_curve_decreases() {
    let config = ExperimentConfig { n: 100, taus: vec![0, 60, 80, 100], realizations: 3, ..Default::default() };
    let curve = memory_curve(TopologyKind::RandomGaussian, 0.9, &config).unwrap();
    let g: Vec<f64> = curve.points.iter().map(|p| p.mean_gamma).collect();
    assert!(g.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{g:?}");
    assert!(g[3] < 0.05, "{g:?}");
}

#[test]
fn tiny_spectral_radius_erases_old_inputs() {
    let config = ExperimentConfig { t_total: 800, t0: 600, ..small(30, vec![60]) };
    for kind in TopologyKind::ALL {
        let gamma = sr_sweep(kind, &[60], &[0.05], &config).unwrap()[0].mean_gamma;
        assert!(gamma < 0.05, "{kind}: {gamma}");
    }
}

#[test]
fn delay_line_recall_is_flat_in_rho() {
    let config = small(40, vec![10, 30]);
    let points = sr_sweep(TopologyKind::DelayLine, &[10, 30], &[0.6, 0.8, 0.95], &config).unwrap();
    assert!(points.iter().all(|p| p.mean_gamma > 0.99), "{points:?}");
}

#[test]
fn cyclic_rank_saturates() {
    // Columns shrink like rho^k; once rho^k sinks under the rank cutoff the
    // rank stops growing.
    let rho: f64 = 0.9;
    let saturation = (1e-14f64).ln() / rho.ln();
    let scan = rank_scan(&[TopologyKind::Cyclic], &[50, 100, 400, 600], rho, Normalization::SpectralRadius, 2, 0, None)
        .unwrap();
    assert_eq!(scan.mean_rank(TopologyKind::Cyclic, 50), Some(50.0));
    assert_eq!(scan.mean_rank(TopologyKind::Cyclic, 100), Some(100.0));
    let r400 = scan.mean_rank(TopologyKind::Cyclic, 400).unwrap();
    let r600 = scan.mean_rank(TopologyKind::Cyclic, 600).unwrap();
    assert!(r400 < 400.0 && r600 < 600.0, "{r400} {r600}");
    assert!((r600 - r400).abs() < 0.1 * saturation, "{r400} {r600} vs {saturation}");
}

#[test]
fn rank_ordering_under_both_normalizations() {
    // With the spectral radius fixed, cyclic > random > wigner. Fixing the top
    // singular value instead pulls the nonnormal random matrix down to the
    // wigner level, so only the cyclic lead survives.
    let kinds = [TopologyKind::Cyclic, TopologyKind::RandomGaussian, TopologyKind::Wigner];
    for fixed in [Normalization::SpectralRadius, Normalization::MaxSingularValue] {
        let scan = rank_scan(&kinds, &[2, 30, 80], 0.995, fixed, 3, 9, None).unwrap();
        assert_eq!(scan.mean_rank(TopologyKind::Wigner, 2), Some(2.0));
        for n in [30, 80] {
            let c = scan.mean_rank(TopologyKind::Cyclic, n).unwrap();
            let r = scan.mean_rank(TopologyKind::RandomGaussian, n).unwrap();
            let w = scan.mean_rank(TopologyKind::Wigner, n).unwrap();
            assert!(c >= r && c >= w, "{fixed:?} n={n}: {c} {r} {w}");
            if fixed == Normalization::SpectralRadius {
                assert!(r >= w, "{fixed:?} n={n}: {c} {r} {w}");
            }
        }
    }
}

fn run_with(workers: Option<usize>) -> SweepRun {
    let config = ExperimentConfig { workers, rhos: vec![0.5, 0.9], ..small(12, vec![0, 3, 9, 15]) };
    sweep_grid(&TopologyKind::ALL, &[0.5, 0.9], &config).unwrap()
}

#[test]
fn worker_count_does_not_change_results() {
    let one = run_with(Some(1));
    assert_eq!(one, run_with(Some(3)));
    assert_eq!(one, run_with(None));
}

#[test]
fn as_distributed_mode_is_respected() {
    let exact = small(20, vec![2]);
    let raw = ExperimentConfig { rescale_mode: RescaleMode::AsDistributed, ..exact.clone() };
    let a = memory_curve(TopologyKind::RandomGaussian, 0.8, &exact).unwrap();
    let b = memory_curve(TopologyKind::RandomGaussian, 0.8, &raw).unwrap();
    assert_ne!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn gamma_stays_in_unit_interval(
        kind in prop::sample::select(TopologyKind::ALL.to_vec()),
        rho in 0.05f64..0.99,
        n in 2usize..15,
        seed in any::<u64>(),
        ridge in prop::sample::select(vec![0.0, 1e-6, 0.1, 10.0]),
    ) {
        let config = ExperimentConfig { master_seed: seed, ridge, realizations: 2, ..small(n, vec![0, 1, 7, 20]) };
        let run = sweep_grid(&[kind], &[rho], &config).unwrap();
        for r in &run.records {
            prop_assert!((0.0..=1.0).contains(&r.gamma), "{r:?}");
        }
        for p in &run.points {
            prop_assert!((0.0..=1.0).contains(&p.mean_gamma));
            prop_assert!(p.std_gamma >= 0.0);
        }
    }
}
