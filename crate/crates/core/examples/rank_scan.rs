//! Mean controllability rank as the reservoir grows, with either the
//! spectral radius or the largest singular value pinned.
//!
//! ```text
//! cargo run --release --example rank_scan -- [rho] [realizations]
//! ```

use linres::simulate::{rank_scan, Normalization};
use linres::topology::TopologyKind;

fn main() -> linres::Result<()> {
    let mut args = std::env::args().skip(1);
    let rho: f64 = args.next().map_or(0.995, |s| s.parse().expect("rho must be a number"));
    let realizations: usize = args.next().map_or(3, |s| s.parse().expect("realizations must be an integer"));
    let ns = [10, 25, 50, 100, 200, 300];

    for fixed in [Normalization::SpectralRadius, Normalization::MaxSingularValue] {
        let scan = rank_scan(&TopologyKind::ALL, &ns, rho, fixed, realizations, 0, None)?;
        println!("{} fixed at {rho}", fixed.name());
        print!("{:>5}", "n");
        for kind in TopologyKind::ALL {
            print!(" {:>11}", kind.name());
        }
        println!();
        for n in ns {
            print!("{n:>5}");
            for kind in TopologyKind::ALL {
                print!(" {:>11.1}", scan.mean_rank(kind, n).expect("scan point"));
            }
            println!();
        }
        println!();
    }
    Ok(())
}
