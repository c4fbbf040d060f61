//! Column norms of `C` for a random reservoir follow `‖w‖ ρ^k`.
//!
//! ```text
//! cargo run --release --example column_norms -- [n] [rho]
//! ```

use linres::controllability::expected_column_norms;
use linres::topology::build_random;

fn main() -> linres::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(1000, |s| s.parse().expect("n must be an integer"));
    let rho: f64 = args.next().map_or(0.9, |s| s.parse().expect("rho must be a number"));
    let depth = 40.min(n);
    let seeds = 5;

    let reference = expected_column_norms(rho, depth)?;
    let mut mean = vec![0.0; depth];
    for seed in 0..seeds {
        let r = build_random(n, rho, seed)?;
        let mut col = r.input_weights().clone();
        for (k, m) in mean.iter_mut().enumerate() {
            if k > 0 {
                col = r.weights().mul_vec(&col);
            }
            *m += col.norm() / seeds as f64;
        }
    }
    println!("{:>4} {:>12} {:>12} {:>8}", "k", "mean |c_k|", "rho^k", "ratio");
    for k in (0..depth).step_by(5) {
        println!("{k:>4} {:>12.4e} {:>12.4e} {:>8.3}", mean[k], reference[k], mean[k] / reference[k]);
    }
    Ok(())
}
