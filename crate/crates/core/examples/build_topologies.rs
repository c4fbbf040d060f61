//! Builds one reservoir of each topology and prints its spectrum.
//!
//! ```text
//! cargo run --example build_topologies -- [n] [rho]
//! ```

use linres::topology::{RescaleMode, ReservoirSpec, TopologyKind};

fn main() -> linres::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(100, |s| s.parse().expect("n must be an integer"));
    let rho: f64 = args.next().map_or(0.9, |s| s.parse().expect("rho must be a number"));

    println!("{:<12} {:<24} {:>16} {:>16}", "topology", "rescale", "spectral radius", "max sing. value");
    for kind in TopologyKind::ALL {
        for mode in [RescaleMode::AsDistributed, RescaleMode::ExactSpectralRadius] {
            let r = ReservoirSpec::new(kind, n, rho).with_seed(1).with_rescale(mode).build()?;
            let s = r.spectrum()?;
            println!("{:<12} {:<24} {:>16.6} {:>16.6}", kind, format!("{mode:?}"), s.spectral_radius, s.max_singular_value);
        }
    }
    Ok(())
}
