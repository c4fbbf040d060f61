//! Recall accuracy at fixed delays as the spectral radius grows.
//!
//! ```text
//! cargo run --release --example spectral_radius_sweep -- [kind] [realizations]
//! ```

use linres::simulate::{sr_sweep, ExperimentConfig};
use linres::topology::TopologyKind;

fn main() -> linres::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind: TopologyKind = args.next().map_or(Ok(TopologyKind::Cyclic), |s| s.parse())?;
    let realizations: usize = args.next().map_or(3, |s| s.parse().expect("realizations must be an integer"));

    let taus = [10, 40, 70];
    let rhos = [0.1, 0.3, 0.5, 0.7, 0.8, 0.9, 0.95, 0.99, 0.995, 0.999];
    let config = ExperimentConfig { realizations, ..Default::default() };
    let points = sr_sweep(kind, &taus, &rhos, &config)?;

    println!("{kind}, n = {}", config.n);
    print!("{:>7}", "rho");
    for tau in taus {
        print!(" {:>9}", format!("tau={tau}"));
    }
    println!();
    for rho in rhos {
        print!("{rho:>7}");
        for tau in taus {
            let p = points.iter().find(|p| p.rho == rho && p.tau == tau).expect("grid point");
            print!(" {:>9.3}", p.mean_gamma);
        }
        println!();
    }
    Ok(())
}
