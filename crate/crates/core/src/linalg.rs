//! Dense real-matrix primitives.
//!
//! Every numerical routine in the crate goes through the types and functions
//! in this module. The backing store is `nalgebra`; nothing outside this file
//! touches it directly.
//!
//! Tolerances follow the usual LAPACK conventions: the default rank cutoff is
//! `σ₁ · max(rows, cols) · ε`, and the same cutoff doubles as the
//! pseudoinverse threshold in [`least_squares`].

use std::fmt;

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use nalgebra::Complex;

/// Iteration budget per dimension for the eigenvalue solvers.
const EIGEN_ITERATIONS_PER_DIM: usize = 200;

/// Threshold on the imaginary part left over after expanding the
/// characteristic polynomial, relative to the largest coefficient.
pub const IMAGINARY_RESIDUE_THRESHOLD: f64 = 1e-8;

/// Largest matrix order accepted by [`char_poly_negated_coeffs`].
pub const MAX_CHAR_POLY_ORDER: usize = 2048;

/// Real vector with finite entries.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RealVector(Vec<f64>);

impl RealVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("vector"));
        }
        Ok(Self(values))
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec())
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    /// The `k`-th standard basis vector of length `len`.
    pub fn basis(len: usize, k: usize) -> Self {
        assert!(k < len, "basis index {k} out of range for length {len}");
        let mut v = vec![0.0; len];
        v[k] = 1.0;
        Self(v)
    }

    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn dot(&self, other: &RealVector) -> f64 {
        assert_eq!(self.len(), other.len(), "dot: length mismatch");
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn norm_l1(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, factor: f64) -> RealVector {
        RealVector(self.0.iter().map(|v| v * factor).collect())
    }

    pub fn add(&self, other: &RealVector) -> RealVector {
        assert_eq!(self.len(), other.len(), "add: length mismatch");
        RealVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &RealVector) -> RealVector {
        assert_eq!(self.len(), other.len(), "sub: length mismatch");
        RealVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &RealVector) {
        assert_eq!(self.len(), other.len(), "axpy: length mismatch");
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += alpha * b;
        }
    }

    /// Cyclic shift by `p` places: entry `i` moves to `(i + p) mod n`.
    pub fn cyclic_shift(&self, p: usize) -> RealVector {
        let n = self.len();
        if n == 0 {
            return self.clone();
        }
        let mut out = vec![0.0; n];
        for (i, v) in self.0.iter().enumerate() {
            out[(i + p) % n] = *v;
        }
        RealVector(out)
    }

    fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.0)
    }
}

impl TryFrom<Vec<f64>> for RealVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<RealVector> for Vec<f64> {
    fn from(v: RealVector) -> Self {
        v.0
    }
}

impl fmt::Debug for RealVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl std::ops::Index<usize> for RealVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Dense real matrix with finite entries.
///
/// Serialized as a list of rows.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct DenseMatrix(DMatrix<f64>);

impl DenseMatrix {
    /// Builds a matrix from entries listed row by row.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, &entries)))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::from_row_major(rows.len(), cols, rows.concat())
    }

    pub fn from_columns(columns: &[RealVector]) -> Result<Self> {
        let rows = columns.first().map_or(0, RealVector::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch("columns of unequal length".into()));
        }
        Ok(Self::from_fn(rows, columns.len(), |i, j| columns[j][i]))
    }

    /// Panics if `f` produces a non-finite entry.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let m = DMatrix::from_fn(rows, cols, |i, j| f(i, j));
        assert!(m.iter().all(|v| v.is_finite()), "from_fn produced a non-finite entry");
        Self(m)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { 0.0 })
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn column(&self, j: usize) -> RealVector {
        RealVector(self.0.column(j).iter().copied().collect())
    }

    pub fn row(&self, i: usize) -> RealVector {
        RealVector(self.0.row(i).iter().copied().collect())
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.nrows()).map(|i| self.row(i).into_vec()).collect()
    }

    /// Rows `start..end` as a new matrix.
    pub fn select_rows(&self, start: usize, end: usize) -> DenseMatrix {
        assert!(start <= end && end <= self.nrows(), "row range out of bounds");
        Self(self.0.rows(start, end - start).into_owned())
    }

    pub fn transpose(&self) -> DenseMatrix {
        Self(self.0.transpose())
    }

    pub fn mul_vec(&self, v: &RealVector) -> RealVector {
        assert_eq!(self.ncols(), v.len(), "mul_vec: dimension mismatch");
        let out = &self.0 * v.to_dvector();
        RealVector(out.as_slice().to_vec())
    }

    pub fn mul_mat(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.ncols(), other.nrows(), "mul_mat: dimension mismatch");
        Self(&self.0 * &other.0)
    }

    /// `k`-th power by repeated multiplication. Meant for tests and small checks.
    pub fn pow(&self, k: usize) -> DenseMatrix {
        assert!(self.is_square(), "pow of a non-square matrix");
        let mut out = DenseMatrix::identity(self.nrows());
        for _ in 0..k {
            out = out.mul_mat(self);
        }
        out
    }

    pub fn scaled(&self, factor: f64) -> DenseMatrix {
        Self(&self.0 * factor)
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.0.shape(), other.0.shape(), "add: shape mismatch");
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.0.shape(), other.0.shape(), "sub: shape mismatch");
        Self(&self.0 - &other.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Exact (bitwise) symmetry.
    pub fn is_symmetric(&self) -> bool {
        self.is_square() && self.0 == self.0.transpose()
    }

    /// Entries in column-major order.
    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.0.iter()
    }

    fn is_triangular(&self) -> bool {
        let n = self.nrows();
        let lower = (0..n).all(|j| (0..j).all(|i| self.0[(i, j)] == 0.0));
        let upper = (0..n).all(|j| (j + 1..n).all(|i| self.0[(i, j)] == 0.0));
        lower || upper
    }
}

impl TryFrom<Vec<Vec<f64>>> for DenseMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<DenseMatrix> for Vec<Vec<f64>> {
    fn from(m: DenseMatrix) -> Self {
        m.to_rows()
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseMatrix {}x{} ", self.nrows(), self.ncols())?;
        f.debug_list().entries(self.to_rows()).finish()
    }
}

/// Spectral radius and largest singular value of a square matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub spectral_radius: f64,
    pub max_singular_value: f64,
}

impl SpectrumSummary {
    pub fn of(m: &DenseMatrix) -> Result<Self> {
        Ok(Self {
            spectral_radius: spectral_radius(m)?,
            max_singular_value: max_singular_value(m),
        })
    }
}

impl fmt::Display for SpectrumSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "spectral radius {:.10}, max singular value {:.10}",
            self.spectral_radius, self.max_singular_value
        )
    }
}

fn require_square(m: &DenseMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(())
}

/// All eigenvalues of a square matrix.
///
/// Triangular matrices return their diagonal exactly; symmetric matrices go
/// through the symmetric solver; everything else through a real Schur form.
pub fn eigenvalues(m: &DenseMatrix) -> Result<Vec<Complex<f64>>> {
    require_square(m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if m.is_triangular() {
        return Ok((0..n).map(|i| Complex::new(m.get(i, i), 0.0)).collect());
    }
    let iterations = EIGEN_ITERATIONS_PER_DIM * n.max(5);
    if m.is_symmetric() {
        let eig = SymmetricEigen::try_new(m.0.clone(), f64::EPSILON, iterations)
            .ok_or(Error::NoConvergence { iterations })?;
        return Ok(eig.eigenvalues.iter().map(|&v| Complex::new(v, 0.0)).collect());
    }
    let schur = Schur::try_new(m.0.clone(), f64::EPSILON, iterations)
        .or_else(|| Schur::try_new(reflect_similarity(&m.0), f64::EPSILON, iterations))
        .ok_or(Error::NoConvergence { iterations })?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// `H M H` with a fixed Householder reflector `H`. Same spectrum, but breaks
/// up permutation-like structure (ring matrices) on which the QR sweeps stall.
fn reflect_similarity(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let v = nalgebra::DVector::from_fn(n, |i, _| ((i + 2) as f64).sqrt());
    let h = DMatrix::identity(n, n) - (&v * v.transpose()) * (2.0 / v.norm_squared());
    &h * m * &h
}

/// Largest eigenvalue magnitude.
pub fn spectral_radius(m: &DenseMatrix) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().fold(0.0, |r: f64, z| r.max(z.norm())))
}

/// Singular values in descending order.
pub fn singular_values(m: &DenseMatrix) -> RealVector {
    if m.nrows() == 0 || m.ncols() == 0 {
        return RealVector(Vec::new());
    }
    let svd = SVD::new(m.0.clone(), false, false);
    let mut values: Vec<f64> = svd.singular_values.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    RealVector(values)
}

pub fn max_singular_value(m: &DenseMatrix) -> f64 {
    singular_values(m).as_slice().first().copied().unwrap_or(0.0)
}

/// Conventional cutoff `σ₁ · max(rows, cols) · ε`.
pub fn default_rank_tolerance(m: &DenseMatrix, singular_values: &RealVector) -> f64 {
    let sigma1 = singular_values.as_slice().first().copied().unwrap_or(0.0);
    sigma1 * m.nrows().max(m.ncols()) as f64 * f64::EPSILON
}

fn resolve_tolerance(m: &DenseMatrix, sv: &RealVector, tol: Option<f64>) -> Result<f64> {
    match tol {
        Some(t) if !(t >= 0.0) => Err(Error::InvalidParameter(format!(
            "rank tolerance must be nonnegative, got {t}"
        ))),
        Some(t) => Ok(t),
        None => Ok(default_rank_tolerance(m, sv)),
    }
}

/// Number of singular values strictly above `tol` (absolute). `None` selects
/// [`default_rank_tolerance`].
pub fn numerical_rank(m: &DenseMatrix, tol: Option<f64>) -> Result<usize> {
    let sv = singular_values(m);
    let tol = resolve_tolerance(m, &sv, tol)?;
    Ok(sv.iter().filter(|&&s| s > tol).count())
}

/// Orthonormal basis of the numerical nullspace, one basis vector per column.
///
/// The basis is spanned by the right singular vectors whose singular value is
/// at or below `tol`; a matrix with fewer rows than columns is padded with
/// zero rows first so that the full set of right singular vectors is
/// available.
pub fn nullspace_basis(m: &DenseMatrix, tol: Option<f64>) -> Result<DenseMatrix> {
    Ok(nullspace_with_tolerance(m, tol)?.0)
}

pub(crate) fn nullspace_with_tolerance(
    m: &DenseMatrix,
    tol: Option<f64>,
) -> Result<(DenseMatrix, RealVector, f64)> {
    let (rows, cols) = (m.nrows(), m.ncols());
    if cols == 0 {
        return Ok((DenseMatrix::zeros(0, 0), RealVector(Vec::new()), 0.0));
    }
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.rows_mut(0, rows).copy_from(&m.0);
        p
    } else {
        m.0.clone()
    };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("right singular vectors were requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv = RealVector(
        order.iter().take(rows.min(cols)).map(|&i| svd.singular_values[i]).collect(),
    );
    let tol = resolve_tolerance(m, &sv, tol)?;
    let null_rows: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| svd.singular_values[i] <= tol)
        .collect();
    let basis = DenseMatrix::from_fn(cols, null_rows.len(), |i, j| v_t[(null_rows[j], i)]);
    Ok((basis, sv, tol))
}

/// Negated characteristic-polynomial coefficients `φ_k = −α_k`, `k = 0..n`,
/// where `det(λI − M) = λⁿ + α_{n−1}λ^{n−1} + … + α_0`.
///
/// Coefficients come from expanding `∏(λ − λᵢ)` over the eigenvalues in
/// complex arithmetic. The imaginary part left over must stay below
/// [`IMAGINARY_RESIDUE_THRESHOLD`] times the largest coefficient magnitude
/// (or 1, if larger); otherwise the polynomial is reported as ill-conditioned.
pub fn char_poly_negated_coeffs(m: &DenseMatrix) -> Result<RealVector> {
    require_square(m)?;
    let n = m.nrows();
    if n > MAX_CHAR_POLY_ORDER {
        return Err(Error::InvalidParameter(format!(
            "characteristic polynomial limited to order {MAX_CHAR_POLY_ORDER}, got {n}"
        )));
    }
    let eig = leja_order(eigenvalues(m)?);
    // coeffs[k] multiplies λ^k; starts as the constant polynomial 1.
    let mut coeffs = vec![Complex::new(0.0, 0.0); n + 1];
    coeffs[0] = Complex::new(1.0, 0.0);
    for (degree, lambda) in eig.iter().enumerate() {
        for k in (1..=degree + 1).rev() {
            coeffs[k] = coeffs[k - 1] - lambda * coeffs[k];
        }
        coeffs[0] = -lambda * coeffs[0];
    }
    let scale = coeffs.iter().fold(1.0_f64, |s, c| s.max(c.re.abs()));
    let residue = coeffs.iter().fold(0.0_f64, |r, c| r.max(c.im.abs()));
    let threshold = IMAGINARY_RESIDUE_THRESHOLD * scale;
    if residue > threshold {
        return Err(Error::IllConditioned { residue, threshold });
    }
    RealVector::new(coeffs[..n].iter().map(|c| -c.re).collect())
}

/// Leja ordering: start from the largest root, then repeatedly take the root
/// maximizing the product of distances to those already chosen. Keeps the
/// partial products of the expansion small, which limits roundoff.
fn leja_order(mut roots: Vec<Complex<f64>>) -> Vec<Complex<f64>> {
    let n = roots.len();
    if n < 3 {
        return roots;
    }
    let first = (0..n).max_by(|&a, &b| roots[a].norm().total_cmp(&roots[b].norm())).unwrap_or(0);
    roots.swap(0, first);
    // Log distances avoid overflow and underflow of the running products.
    let mut score: Vec<f64> = roots.iter().map(|z| (z - roots[0]).norm().ln()).collect();
    for i in 1..n {
        let next = (i..n).max_by(|&a, &b| score[a].total_cmp(&score[b])).unwrap_or(i);
        roots.swap(i, next);
        score.swap(i, next);
        for j in i + 1..n {
            score[j] += (roots[j] - roots[i]).norm().ln();
        }
    }
    roots
}

/// `‖Mⁿ − Σ φ_j M^j‖_F`, the Cayley–Hamilton residual of a coefficient set,
/// evaluated by Horner's scheme.
pub fn cayley_hamilton_residual(m: &DenseMatrix, varphi: &RealVector) -> Result<f64> {
    require_square(m)?;
    let n = m.nrows();
    if varphi.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients for a matrix of order {n}",
            varphi.len()
        )));
    }
    let identity = DMatrix::<f64>::identity(n, n);
    let mut acc = identity.clone();
    for j in (0..n).rev() {
        acc = &acc * &m.0 - &identity * varphi[j];
    }
    Ok(acc.norm())
}

/// Minimizer of `‖Ax − b‖² + ridge·‖x‖²` through the SVD of `A`.
///
/// Singular values at or below `σ₁ · max(m, n) · ε` are dropped, so a
/// rank-deficient `A` with `ridge = 0` yields the minimum-norm solution.
pub fn least_squares(a: &DenseMatrix, b: &RealVector, ridge: f64) -> Result<RealVector> {
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "design matrix has {} rows, target has {} entries",
            a.nrows(),
            b.len()
        )));
    }
    if !(ridge >= 0.0) || !ridge.is_finite() {
        return Err(Error::InvalidParameter(format!("ridge must be finite and >= 0, got {ridge}")));
    }
    let cols = a.ncols();
    if a.nrows() == 0 || cols == 0 {
        return Ok(RealVector::zeros(cols));
    }
    let svd = SVD::new(a.0.clone(), true, true);
    let u = svd.u.as_ref().expect("left singular vectors were requested");
    let v_t = svd.v_t.as_ref().expect("right singular vectors were requested");
    let sigma1 = svd.singular_values.iter().fold(0.0_f64, |m, &s| m.max(s));
    let cutoff = sigma1 * a.nrows().max(cols) as f64 * f64::EPSILON;
    let kept: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > cutoff).collect();
    // Applies V diag(s / (s^2 + ridge)) U^T on the retained subspace.
    let solve = |rhs: &DVector<f64>| {
        let utb = u.transpose() * rhs;
        let mut x = DVector::<f64>::zeros(cols);
        for &i in &kept {
            let s = svd.singular_values[i];
            x += v_t.row(i).transpose() * (s / (s * s + ridge) * utb[i]);
        }
        x
    };
    let bv = b.to_dvector();
    let mut x = solve(&bv);
    // Refinement on (A^T A + ridge I) x = A^T b, restricted to the retained
    // right singular vectors.
    for _ in 0..2 {
        let g = a.0.transpose() * (&bv - &a.0 * &x) - &x * ridge;
        let vtg = v_t * g;
        let mut dx = DVector::<f64>::zeros(cols);
        for &i in &kept {
            let s = svd.singular_values[i];
            dx += v_t.row(i).transpose() * (vtg[i] / (s * s + ridge));
        }
        x += dx;
    }
    RealVector::new(x.as_slice().to_vec())
}
