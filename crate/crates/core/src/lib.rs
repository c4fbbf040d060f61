//! # linres
//!
//! Linear reservoirs `x_k = W x_{k-1} + w u_k` studied through their
//! controllability matrix `C = [w, Ww, ..., W^{n-1} w]`.
//!
//! - [`topology`] builds delay-line, cyclic, random and Wigner reservoirs.
//! - [`linalg`] wraps dense matrices, SVD rank, nullspaces and the
//!   characteristic polynomial.
//! - [`encoding`] folds an input history into `s` with `x_0 = C s`.
//! - [`controllability`] reports rank, column norms and nullspace energy.
//! - [`simulate`] runs the recall experiments and rank scans.
//! - [`cli`] is the `linres` binary.
//!
//! ## Running Examples
//!
//! ```bash
//! cargo run --release --example build_topologies
//! cargo run --release --example controllability_rank
//! cargo run --release --example encoded_input
//! cargo run --release --example nullspace_indistinguishability
//! cargo run --release --example column_norms
//! cargo run --release --example memory_curves
//! cargo run --release --example spectral_radius_sweep
//! cargo run --release --example rank_scan
//! ```

pub mod cli;
pub mod controllability;
pub mod encoding;
pub mod error;
pub mod linalg;
pub mod rng;
pub mod simulate;
pub mod topology;

pub use error::{Error, Result};
