//! Controllability matrix `C = [w, Ww, …, W^{n−1}w]` and its rank/nullspace.
//!
//! The rank of `C` counts the directions of encoded-input space the readout
//! can see. Encoded inputs that differ by a nullspace vector drive the
//! reservoir to the same state and are indistinguishable downstream.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix, RealVector};
use crate::topology::Reservoir;

/// Share of a nullspace vector's energy expected in its trailing `n − rank`
/// components.
pub const DEFAULT_LOCALIZATION_THRESHOLD: f64 = 0.9;

/// Krylov matrix `[w, Ww, …, W^{n−1}w]`, one matvec per column.
pub fn krylov_matrix(weights: &DenseMatrix, input_weights: &RealVector) -> DenseMatrix {
    let n = weights.nrows();
    assert_eq!(input_weights.len(), n, "input weights length must match W");
    let mut columns = Vec::with_capacity(n);
    let mut col = input_weights.clone();
    for k in 0..n {
        if k > 0 {
            col = weights.mul_vec(&col);
        }
        columns.push(col.clone());
    }
    DenseMatrix::from_columns(&columns).expect("columns share a length")
}

pub fn controllability_matrix(reservoir: &Reservoir) -> DenseMatrix {
    krylov_matrix(reservoir.weights(), reservoir.input_weights())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllabilityReport {
    #[serde(rename = "C")]
    pub c: DenseMatrix,
    pub singular_values: RealVector,
    pub rank: usize,
    /// `n × (n − rank)`, orthonormal columns.
    pub nullspace: DenseMatrix,
    pub column_norms: RealVector,
    pub rank_tolerance: f64,
}

impl ControllabilityReport {
    pub fn n(&self) -> usize {
        self.c.ncols()
    }

    pub fn nullity(&self) -> usize {
        self.nullspace.ncols()
    }

    /// Per-component energy of the nullspace, `Σ_b b_i²` over basis columns.
    pub fn nullspace_energy_profile(&self) -> RealVector {
        let n = self.n();
        let mut energy = vec![0.0; n];
        for b in 0..self.nullity() {
            let col = self.nullspace.column(b);
            for (e, v) in energy.iter_mut().zip(col.iter()) {
                *e += v * v;
            }
        }
        RealVector::from_vec_unchecked(energy)
    }

    /// Share of the whole nullspace's energy carried by the trailing
    /// `n − rank` components. Unlike the per-vector fractions this does not
    /// depend on which orthonormal basis the SVD happened to return.
    pub fn aggregate_trailing_energy(&self) -> f64 {
        if self.nullity() == 0 {
            return 0.0;
        }
        let profile = self.nullspace_energy_profile();
        profile.as_slice()[self.rank..].iter().sum::<f64>() / self.nullity() as f64
    }

    /// Whether every basis vector keeps at least `threshold` of its energy
    /// in the trailing `n − rank` components.
    pub fn is_localized(&self, threshold: f64) -> bool {
        self.trailing_energy_fractions().iter().all(|&f| f >= threshold)
    }

    /// Fraction of each basis vector's squared norm carried by the trailing
    /// `n − rank` components.
    pub fn trailing_energy_fractions(&self) -> Vec<f64> {
        (0..self.nullity())
            .map(|b| trailing_energy_fraction(&self.nullspace.column(b), self.rank))
            .collect()
    }
}

/// Share of `‖v‖²` carried by components `start..`.
pub fn trailing_energy_fraction(v: &RealVector, start: usize) -> f64 {
    let total: f64 = v.iter().map(|x| x * x).sum();
    if total == 0.0 {
        return 0.0;
    }
    v.as_slice()[start.min(v.len())..].iter().map(|x| x * x).sum::<f64>() / total
}

/// Rank, nullspace, singular values and column norms of `C`.
pub fn analyze(c: &DenseMatrix, tol: Option<f64>) -> Result<ControllabilityReport> {
    if !c.is_square() {
        return Err(Error::NotSquare { rows: c.nrows(), cols: c.ncols() });
    }
    let (nullspace, singular_values, rank_tolerance) = linalg::nullspace_with_tolerance(c, tol)?;
    let rank = singular_values.iter().filter(|&&s| s > rank_tolerance).count();
    let column_norms =
        RealVector::from_vec_unchecked((0..c.ncols()).map(|k| c.column(k).norm()).collect());
    Ok(ControllabilityReport {
        c: c.clone(),
        singular_values,
        rank,
        nullspace,
        column_norms,
        rank_tolerance,
    })
}

/// Reference column-norm profile `(1, ρ, …, ρ^{n−1})` for random reservoirs.
pub fn expected_column_norms(rho: f64, n: usize) -> Result<RealVector> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidParameter(format!("rho must be finite and > 0, got {rho}")));
    }
    RealVector::new((0..n).map(|k| rho.powi(k as i32)).collect())
}

/// `[w, w⁽¹⁾, …, w⁽ⁿ⁻¹⁾]` with `w⁽ⁱ⁾` the `i`-fold cyclic shift of `w`.
pub fn cyclic_controllability_tilde(w: &RealVector) -> DenseMatrix {
    let columns: Vec<RealVector> = (0..w.len()).map(|i| w.cyclic_shift(i)).collect();
    DenseMatrix::from_columns(&columns).expect("columns share a length")
}

/// Two encoded inputs that differ by a nullspace vector, and the states they
/// produce.
#[derive(Debug, Clone, PartialEq)]
pub struct IndistinguishablePair {
    pub s1: RealVector,
    pub s2: RealVector,
    pub x1: RealVector,
    pub x2: RealVector,
    pub report_rank: usize,
}

impl IndistinguishablePair {
    pub fn relative_gap(&self) -> f64 {
        self.x1.sub(&self.x2).norm() / self.x1.norm()
    }
}

/// Shifts `s1` along nullspace direction `d_index` and returns both states.
pub fn indistinguishability_demo(
    reservoir: &Reservoir,
    s1: &RealVector,
    d_index: usize,
) -> Result<IndistinguishablePair> {
    let report = analyze(&controllability_matrix(reservoir), None)?;
    indistinguishable_pair(&report, s1, d_index)
}

/// Same as [`indistinguishability_demo`] for an already analyzed `C`.
pub fn indistinguishable_pair(
    report: &ControllabilityReport,
    s1: &RealVector,
    d_index: usize,
) -> Result<IndistinguishablePair> {
    if report.nullity() == 0 {
        return Err(Error::FullRank { rank: report.rank });
    }
    if s1.len() != report.n() {
        return Err(Error::DimensionMismatch(format!(
            "encoded input has length {}, C has {} columns",
            s1.len(),
            report.n()
        )));
    }
    if d_index >= report.nullity() {
        return Err(Error::InvalidParameter(format!(
            "nullspace index {d_index} out of range (dimension {})",
            report.nullity()
        )));
    }
    let s2 = s1.add(&report.nullspace.column(d_index));
    Ok(IndistinguishablePair {
        x1: report.c.mul_vec(s1),
        x2: report.c.mul_vec(&s2),
        s1: s1.clone(),
        s2,
        report_rank: report.rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{build_cyclic, build_delay_line, build_random, ReservoirSpec, TopologyKind};
    use approx::assert_abs_diff_eq;

    #[test]
    fn delay_line_controllability_is_identity() {
        let r = build_delay_line(12, 1.0).unwrap();
        let c = controllability_matrix(&r);
        assert_eq!(c, DenseMatrix::identity(12));
        let report = analyze(&c, None).unwrap();
        assert_eq!(report.rank, 12);
        assert_eq!(report.nullity(), 0);
    }

    #[test]
    fn cyclic_columns_are_scaled_shifts() {
        let r = build_cyclic(7, 0.8, 3).unwrap();
        let c = controllability_matrix(&r);
        for k in 0..7 {
            let want = r.input_weights().cyclic_shift(k).scaled(0.8f64.powi(k as i32));
            assert!(c.column(k).sub(&want).max_abs() < 1e-15);
        }
        assert_eq!(c.column(0), *r.input_weights());
    }

    #[test]
    fn second_column_is_w_times_input() {
        let r = build_random(2, 0.9, 8).unwrap();
        let c = controllability_matrix(&r);
        assert_eq!(c.column(1), r.weights().mul_vec(r.input_weights()));
    }

    #[test]
    fn periodic_input_degenerates_cyclic_rank() {
        let r = build_cyclic(4, 1.0, 0)
            .unwrap()
            .with_input_weights(RealVector::from_slice(&[1.0, 2.0, 1.0, 2.0]).unwrap())
            .unwrap();
        let report = analyze(&controllability_matrix(&r), None).unwrap();
        assert_eq!(report.rank, 2);
        assert_eq!(report.nullity(), 2);
    }

    #[test]
    fn column_norm_profile() {
        let ones = expected_column_norms(1.0, 5).unwrap();
        assert!(ones.iter().all(|&v| v == 1.0));
        assert_eq!(expected_column_norms(0.5, 4).unwrap().as_slice(), &[1.0, 0.5, 0.25, 0.125]);
        assert!(expected_column_norms(0.0, 4).is_err());
    }

    #[test]
    fn tilde_matrix_for_unit_vector() {
        let c = cyclic_controllability_tilde(&RealVector::basis(3, 0));
        assert_eq!(c, DenseMatrix::identity(3));
    }

    #[test]
    fn report_invariants() {
        for kind in TopologyKind::ALL {
            let r = ReservoirSpec::new(kind, 30, 0.95).with_seed(4).with_input_seed(5).build().unwrap();
            let report = analyze(&controllability_matrix(&r), None).unwrap();
            assert_eq!(report.rank + report.nullity(), 30);
            let sv = report.singular_values.as_slice();
            assert!(sv.windows(2).all(|p| p[0] >= p[1]));
            for k in 0..30 {
                assert_abs_diff_eq!(report.column_norms[k], report.c.column(k).norm(), epsilon = 0.0);
            }
            let sigma1 = sv[0];
            for b in 0..report.nullity() {
                let residual = report.c.mul_vec(&report.nullspace.column(b)).norm();
                assert!(residual <= 10.0 * report.rank_tolerance * sigma1.max(1.0));
            }
        }
    }

    #[test]
    fn demo_requires_a_nullspace() {
        let r = build_delay_line(5, 1.0).unwrap();
        let err = indistinguishability_demo(&r, &RealVector::zeros(5), 0).unwrap_err();
        assert!(matches!(err, Error::FullRank { rank: 5 }));
    }

    #[test]
    fn demo_on_degenerate_cyclic() {
        let r = build_cyclic(4, 1.0, 0)
            .unwrap()
            .with_input_weights(RealVector::from_slice(&[1.0, 2.0, 1.0, 2.0]).unwrap())
            .unwrap();
        let s1 = RealVector::from_slice(&[0.3, -1.0, 2.0, 0.7]).unwrap();
        let pair = indistinguishability_demo(&r, &s1, 1).unwrap();
        assert!(pair.relative_gap() < 1e-14);
        assert!(pair.s1.sub(&pair.s2).norm() > 0.99);
    }
}
