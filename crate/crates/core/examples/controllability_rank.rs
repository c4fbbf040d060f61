//! Rank of the controllability matrix for the four topologies sharing one
//! input vector.
//!
//! ```text
//! cargo run --release --example controllability_rank -- [n] [rho]
//! ```

use linres::controllability::{analyze, controllability_matrix};
use linres::topology::{RescaleMode, ReservoirSpec, TopologyKind};

fn main() -> linres::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(100, |s| s.parse().expect("n must be an integer"));
    let rho: f64 = args.next().map_or(0.99, |s| s.parse().expect("rho must be a number"));

    for kind in TopologyKind::ALL {
        let reservoir = ReservoirSpec::new(kind, n, rho)
            .with_seed(3)
            .with_input_seed(3)
            .with_rescale(RescaleMode::ExactSpectralRadius)
            .build()?;
        let report = analyze(&controllability_matrix(&reservoir), None)?;
        let sv = report.singular_values.as_slice();
        println!(
            "{:<12} rank {:>4} / {n}   sigma_1 {:.3e}   sigma_n {:.3e}   tol {:.1e}",
            kind,
            report.rank,
            sv[0],
            sv[n - 1],
            report.rank_tolerance
        );
    }
    Ok(())
}
