//! Invariants of the linear-algebra, topology, encoding and controllability
//! layers, checked against independent oracles.

use approx::assert_relative_eq;
use linres::controllability::{analyze, controllability_matrix, cyclic_controllability_tilde, krylov_matrix};
use linres::encoding::{encode_input, phi_sequence, CharCoeffs};
use linres::linalg::{
    cayley_hamilton_residual, char_poly_negated_coeffs, least_squares, max_singular_value, nullspace_basis,
    numerical_rank, singular_values, spectral_radius, DenseMatrix, RealVector,
};
use linres::rng;
use linres::simulate::{generate_signal, run_reservoir};
use linres::topology::{build_random, check_aperiodic, RescaleMode, ReservoirSpec, TopologyKind};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn matrix_strategy(max_n: usize) -> impl Strategy<Value = DenseMatrix> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(-3.0f64..3.0, n * n).prop_map(move |v| DenseMatrix::from_row_major(n, n, v).unwrap())
    })
}

fn kind_strategy() -> impl Strategy<Value = TopologyKind> {
    prop::sample::select(TopologyKind::ALL.to_vec())
}

/// Direct-sum oracle: `Σ_k W^k w u_{-k}` accumulated with explicit powers.
fn state_by_powers(w_mat: &DenseMatrix, w: &RealVector, window: &RealVector) -> RealVector {
    let mut x = RealVector::zeros(w.len());
    let mut col = w.clone();
    for (k, &u) in window.iter().enumerate() {
        if k > 0 {
            col = w_mat.mul_vec(&col);
        }
        x.axpy(u, &col);
    }
    x
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectral_radius_bounded_by_top_singular_value(m in matrix_strategy(12)) {
        let sr = spectral_radius(&m).unwrap();
        prop_assert!(sr <= max_singular_value(&m) + 1e-8);
    }

    #[test]
    fn rank_plus_nullity_is_column_count(rows in 1usize..8, cols in 1usize..8, rank in 0usize..8, seed in any::<u64>()) {
        // Product of thin factors has rank min(rank, rows, cols) generically.
        let mut g = rng::stream(seed, 0);
        let a = DenseMatrix::from_fn(rows, rank.max(1), |_, _| g.sample(StandardNormal));
        let b = DenseMatrix::from_fn(rank.max(1), cols, |_, _| g.sample(StandardNormal));
        let m = if rank == 0 { DenseMatrix::zeros(rows, cols) } else { a.mul_mat(&b) };
        let r = numerical_rank(&m, None).unwrap();
        let null = nullspace_basis(&m, None).unwrap();
        prop_assert_eq!(r + null.ncols(), cols);
        if rank > 0 {
            prop_assert_eq!(r, rank.min(rows).min(cols));
        }
    }

    #[test]
    fn singular_values_sorted_and_nonnegative(m in matrix_strategy(10)) {
        let sv = singular_values(&m);
        prop_assert!(sv.iter().all(|&s| s >= 0.0));
        prop_assert!(sv.as_slice().windows(2).all(|p| p[0] >= p[1]));
    }

    #[test]
    fn least_squares_solves_square_systems(n in 1usize..10, seed in any::<u64>()) {
        let mut g = rng::stream(seed, 0);
        // Diagonally dominant, so well conditioned.
        let a = DenseMatrix::from_fn(n, n, |i, j| {
            let v: f64 = g.sample(StandardNormal);
            if i == j { v + 3.0 * n as f64 * v.signum().max(0.5) } else { v }
        });
        let x_true = RealVector::new((0..n).map(|i| (i as f64 - 2.0) * 0.7).collect()).unwrap();
        let b = a.mul_vec(&x_true);
        let x = least_squares(&a, &b, 0.0).unwrap();
        prop_assert!(x.sub(&x_true).norm() <= 1e-10 * x_true.norm().max(1.0));
    }

    #[test]
    fn ridge_never_lowers_training_error(seed in any::<u64>(), r1 in 0.0f64..5.0, r2 in 0.0f64..5.0) {
        let mut g = rng::stream(seed, 0);
        let a = DenseMatrix::from_fn(30, 6, |_, _| g.sample(StandardNormal));
        let b = RealVector::new((0..30).map(|_| g.sample(StandardNormal)).collect()).unwrap();
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let err = |ridge| a.mul_vec(&least_squares(&a, &b, ridge).unwrap()).sub(&b).norm();
        prop_assert!(err(hi) >= err(lo) - 1e-12);
    }

    #[test]
    fn reconstruction_identity_small(kind in kind_strategy(), n in 2usize..9, rho in 0.3f64..0.95, seed in any::<u64>()) {
        let r = ReservoirSpec::new(kind, n, rho)
            .with_seed(seed)
            .with_input_seed(seed.wrapping_add(1))
            .with_rescale(RescaleMode::ExactSpectralRadius)
            .build()
            .unwrap();
        let horizon = 3 * n + 40;
        let window = generate_signal(seed, horizon);
        let coeffs = CharCoeffs::of(r.weights()).unwrap();
        let s = encode_input(&coeffs, &window, horizon).unwrap().s;
        let oracle = state_by_powers(r.weights(), r.input_weights(), &window);
        let x = controllability_matrix(&r).mul_vec(&s);
        prop_assert!(x.sub(&oracle).norm() <= 1e-8 * oracle.norm().max(1e-300));
    }

    #[test]
    fn phi_expansion_matches_matrix_powers(n in 2usize..7, seed in any::<u64>()) {
        let r = build_random(n, 0.8, seed).unwrap();
        let w = r.weights();
        let coeffs = CharCoeffs::of(w).unwrap();
        let powers: Vec<DenseMatrix> = (0..n).map(|j| w.pow(j)).collect();
        for state in phi_sequence(&coeffs, 3 * n).unwrap() {
            let mut sum = DenseMatrix::zeros(n, n);
            for (j, p) in powers.iter().enumerate() {
                sum = sum.add(&p.scaled(state.phi[j]));
            }
            let target = w.pow(state.k);
            prop_assert!(sum.sub(&target).max_abs() <= 1e-9 * target.max_abs().max(1.0));
        }
    }

    #[test]
    fn states_match_power_sums(kind in kind_strategy(), n in 2usize..8, seed in any::<u64>()) {
        let r = ReservoirSpec::new(kind, n, 0.8).with_seed(seed).with_rescale(RescaleMode::ExactSpectralRadius).build().unwrap();
        let u = generate_signal(seed ^ 7, 25);
        let states = run_reservoir(&r, &u).unwrap();
        let window = RealVector::new(u.iter().rev().copied().collect()).unwrap();
        let oracle = state_by_powers(r.weights(), r.input_weights(), &window);
        prop_assert!(states.row(24).sub(&oracle).norm() <= 1e-12 * oracle.norm().max(1.0));
    }
}

#[test]
fn spectrum_summary_over_random_instances() {
    for seed in 0..100u64 {
        let kind = TopologyKind::ALL[(seed % 4) as usize];
        let r = ReservoirSpec::new(kind, 30, 0.9).with_seed(seed).build().unwrap();
        let s = r.spectrum().unwrap();
        assert!(s.spectral_radius <= s.max_singular_value + 1e-8, "{kind} seed {seed}");
    }
}

#[test]
fn cayley_hamilton_bound_all_topologies() {
    for kind in TopologyKind::ALL {
        for n in [5, 20, 50] {
            let r = ReservoirSpec::new(kind, n, 0.9)
                .with_seed(n as u64)
                .with_rescale(RescaleMode::ExactSpectralRadius)
                .build()
                .unwrap();
            let w = r.weights();
            let varphi = char_poly_negated_coeffs(w).unwrap();
            let residual = cayley_hamilton_residual(w, &varphi).unwrap();
            let scale = w.pow(n).frobenius_norm();
            let bound = if scale < 1e-12 { 1e-6 } else { 1e-6 * scale };
            assert!(residual <= bound, "{kind} n={n}: residual {residual:e}, bound {bound:e}");
        }
    }
}

#[test]
fn aperiodic_circulants_are_full_rank() {
    let mut g = rng::stream(4, 1);
    for _ in 0..100 {
        let w = RealVector::new((0..50).map(|_| g.sample(StandardNormal)).collect()).unwrap();
        assert!(check_aperiodic(&w, 1e-9));
        assert_eq!(numerical_rank(&cyclic_controllability_tilde(&w), None).unwrap(), 50);
    }
}

#[test]
fn krylov_columns_by_iterated_product() {
    let r = build_random(6, 0.9, 1).unwrap();
    let c = krylov_matrix(r.weights(), r.input_weights());
    assert_eq!(c.column(0), *r.input_weights());
    for k in 1..6 {
        let direct = r.weights().pow(k).mul_vec(r.input_weights());
        assert!(c.column(k).sub(&direct).max_abs() < 1e-14);
    }
}

#[test]
fn column_norms_decrease_beyond_five() {
    let mut good = 0;
    for seed in 0..10 {
        let report = analyze(&controllability_matrix(&build_random(1000, 0.9, seed).unwrap()), None).unwrap();
        let norms = report.column_norms.as_slice();
        if norms[5..].windows(2).all(|p| p[1] < p[0]) {
            good += 1;
        }
    }
    assert!(good >= 9, "log column norms decreasing for only {good}/10 seeds");
}

#[test]
fn nullspace_concentrates_on_remote_inputs() {
    // Per basis vector the trailing share varies with the basis the SVD
    // returns; the subspace as a whole carries most of its energy there.
    for kind in [TopologyKind::RandomGaussian, TopologyKind::Wigner] {
        for seed in 0..4 {
            let r = ReservoirSpec::new(kind, 100, 0.99)
                .with_seed(seed)
                .with_rescale(RescaleMode::ExactSpectralRadius)
                .build()
                .unwrap();
            let report = analyze(&controllability_matrix(&r), None).unwrap();
            assert!(report.nullity() > 0, "{kind} seed {seed} is full rank");
            let aggregate = report.aggregate_trailing_energy();
            assert!(aggregate >= 0.7, "{kind} seed {seed}: trailing share {aggregate:.3}");
            let profile = report.nullspace_energy_profile();
            let head: f64 = profile.as_slice()[..report.rank / 4].iter().sum();
            assert!(head <= 1e-6 * report.nullity() as f64, "{kind} seed {seed}: head energy {head:e}");
        }
    }
}

#[test]
fn rank_tracks_exact_rescaling() {
    let r = ReservoirSpec::new(TopologyKind::RandomGaussian, 40, 0.7)
        .with_seed(2)
        .with_rescale(RescaleMode::ExactMaxSingularValue)
        .build()
        .unwrap();
    assert_relative_eq!(max_singular_value(r.weights()), 0.7, max_relative = 1e-10);
}
