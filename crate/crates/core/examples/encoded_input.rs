//! The encoded input `s` built from the Cayley-Hamilton coefficients
//! reproduces the reservoir state: `x0 = C s`.
//!
//! ```text
//! cargo run --example encoded_input -- [kind] [n] [rho]
//! ```

use linres::controllability::{controllability_matrix, cyclic_controllability_tilde};
use linres::encoding::{encode_input, encode_input_cyclic, truncation_horizon_for, CharCoeffs};
use linres::linalg::RealVector;
use linres::simulate::{generate_signal, run_reservoir};
use linres::topology::{RescaleMode, ReservoirSpec, TopologyKind};

fn main() -> linres::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind: TopologyKind = args.next().map_or(Ok(TopologyKind::Cyclic), |s| s.parse())?;
    let n: usize = args.next().map_or(10, |s| s.parse().expect("n must be an integer"));
    let rho: f64 = args.next().map_or(0.9, |s| s.parse().expect("rho must be a number"));

    let reservoir =
        ReservoirSpec::new(kind, n, rho).with_seed(5).with_rescale(RescaleMode::ExactSpectralRadius).build()?;
    let coeffs = CharCoeffs::of(reservoir.weights())?;
    println!("negated characteristic coefficients: {:?}", coeffs.varphi);

    let horizon = truncation_horizon_for(n, rho, 1e-14)?;
    // Most recent sample first: window[k] = u_{-k}.
    let window = generate_signal(7, horizon);
    let encoded = encode_input(&coeffs, &window, horizon)?;
    println!("horizon K = {horizon}, tail estimate {:.2e}", encoded.tail_estimate);
    println!("s = {:?}", encoded.s);

    let chronological = RealVector::new(window.iter().rev().copied().collect())?;
    let states = run_reservoir(&reservoir, &chronological)?;
    let direct = states.row(states.nrows() - 1);
    let via_c = controllability_matrix(&reservoir).mul_vec(&encoded.s);
    println!("|x0 - C s| / |x0| = {:.3e}", direct.sub(&via_c).norm() / direct.norm());

    if kind == TopologyKind::Cyclic {
        let closed = encode_input_cyclic(rho, n, &window, horizon)?;
        let x = cyclic_controllability_tilde(reservoir.input_weights()).mul_vec(&closed.s);
        println!("closed form: |x0 - C~ s~| / |x0| = {:.3e}", direct.sub(&x).norm() / direct.norm());
    }
    Ok(())
}
