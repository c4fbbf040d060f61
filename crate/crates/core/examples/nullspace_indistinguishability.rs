//! Two different encoded inputs that differ by a nullspace vector of `C`
//! land on the same reservoir state. Also prints where the nullspace lives.
//!
//! ```text
//! cargo run --release --example nullspace_indistinguishability -- [n] [rho]
//! ```

use linres::controllability::{analyze, controllability_matrix, indistinguishable_pair};
use linres::simulate::generate_signal;
use linres::topology::{build_wigner, RescaleMode, ReservoirSpec, TopologyKind};

fn main() -> linres::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(100, |s| s.parse().expect("n must be an integer"));
    let rho: f64 = args.next().map_or(0.99, |s| s.parse().expect("rho must be a number"));

    let wigner = build_wigner(n, rho, 17)?;
    let report = analyze(&controllability_matrix(&wigner), None)?;
    println!("Wigner n = {n}, rho = {rho}: rank {}, nullity {}", report.rank, report.nullity());

    let s1 = generate_signal(1, n);
    for d in 0..report.nullity().min(3) {
        let pair = indistinguishable_pair(&report, &s1, d)?;
        println!(
            "direction {d}: |s2 - s1| = {:.3}, |x2 - x1| / |x1| = {:.2e}",
            pair.s2.sub(&pair.s1).norm(),
            pair.relative_gap()
        );
    }

    for kind in [TopologyKind::RandomGaussian, TopologyKind::Wigner] {
        let r = ReservoirSpec::new(kind, n, rho).with_seed(2).with_rescale(RescaleMode::ExactSpectralRadius).build()?;
        let report = analyze(&controllability_matrix(&r), None)?;
        let fractions = report.trailing_energy_fractions();
        let min = fractions.iter().copied().fold(1.0, f64::min);
        println!(
            "{kind}: rank {}, smallest share of nullspace energy past the rank index: {:.3}",
            report.rank, min
        );
    }
    Ok(())
}
