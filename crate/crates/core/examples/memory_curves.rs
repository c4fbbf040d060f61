//! Recall accuracy against delay for all four topologies.
//!
//! ```text
//! cargo run --release --example memory_curves -- [rho] [realizations]
//! ```

use linres::simulate::{sweep_grid, ExperimentConfig};
use linres::topology::TopologyKind;

fn main() -> linres::Result<()> {
    let mut args = std::env::args().skip(1);
    let rho: f64 = args.next().map_or(0.99, |s| s.parse().expect("rho must be a number"));
    let realizations: usize = args.next().map_or(3, |s| s.parse().expect("realizations must be an integer"));

    let taus: Vec<usize> = (0..=140).step_by(10).collect();
    let config = ExperimentConfig { taus: taus.clone(), realizations, ..Default::default() };
    let run = sweep_grid(&TopologyKind::ALL, &[rho], &config)?;

    print!("{:>5}", "tau");
    for kind in TopologyKind::ALL {
        print!(" {:>12}", kind.name());
    }
    println!();
    for tau in taus {
        print!("{tau:>5}");
        for kind in TopologyKind::ALL {
            let p = run.point(kind, rho, tau).expect("grid point");
            print!(" {:>6.3}±{:<5.3}", p.mean_gamma, p.std_gamma);
        }
        println!();
    }
    Ok(())
}
