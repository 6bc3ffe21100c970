//! Validated symmetric positive definite matrices and the eigendecomposition-based
//! matrix functions every mean in this crate is built from.
//!
//! There is exactly one numerical path: a symmetric eigendecomposition
//! `A = V diag(λ) Vᵀ`, after which `f(A) = V diag(f(λ)) Vᵀ`. Powers, square
//! roots, inverses, logarithms and exponentials all go through it.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative asymmetry below which an input is silently symmetrized.
pub const SYM_TOL: f64 = 1e-8;
/// Smallest admissible `λ_min / λ_max` for a validated input.
pub const PD_TOL: f64 = 1e-12;
/// Soft cap on the matrix dimension accepted from the outside.
pub const MAX_DIM: usize = 64;

const EIGEN_MAX_ITER: usize = 10_000;

/// A symmetric positive definite matrix.
///
/// Values built through [`SpdMatrix::new`] are checked for symmetry and
/// definiteness. Results of matrix functions (powers, means, exponentials)
/// are SPD by construction and are stored after an explicit symmetrization.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix(DMatrix<f64>);

impl SpdMatrix {
    /// Validates `m` with the default tolerances; see [`validate_spd`].
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        validate_spd(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        for r in rows {
            if r.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: r.len(),
                });
            }
        }
        validate_spd(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_diagonal(values: &[f64]) -> Result<Self> {
        validate_spd(DMatrix::from_diagonal(&DVector::from_row_slice(values)))
    }

    pub fn identity(dim: usize) -> Self {
        SpdMatrix(DMatrix::identity(dim, dim))
    }

    /// Wraps a matrix that is SPD by construction. Only symmetrizes.
    pub(crate) fn from_trusted(m: DMatrix<f64>) -> Self {
        SpdMatrix(symmetrize(&m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.0.row(i).iter().copied().collect())
            .collect()
    }

    pub fn inverse(&self) -> Result<SpdMatrix> {
        mat_power(self, -1.0)
    }

    pub fn sqrt(&self) -> Result<SpdMatrix> {
        mat_power(self, 0.5)
    }

    /// Determinant as the product of eigenvalues.
    pub fn det(&self) -> Result<f64> {
        Ok(sym_eig(self)?.values.iter().product())
    }

    /// `c · A` for `c > 0`.
    pub fn scale(&self, c: f64) -> Result<SpdMatrix> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::NonpositiveInput(c));
        }
        Ok(SpdMatrix(&self.0 * c))
    }

    /// `A + B`.
    pub fn add(&self, other: &SpdMatrix) -> Result<SpdMatrix> {
        same_dim(self, other)?;
        Ok(SpdMatrix::from_trusted(&self.0 + &other.0))
    }

    pub fn commutes_with(&self, other: &SpdMatrix, tol: f64) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let ab = &self.0 * &other.0;
        let ba = &other.0 * &self.0;
        (&ab - &ba).norm() <= tol * ab.norm().max(f64::MIN_POSITIVE)
    }
}

impl AsRef<DMatrix<f64>> for SpdMatrix {
    fn as_ref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Ascending eigenvalues with orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigenDecomposition {
    /// `V diag(f(λ)) Vᵀ`, symmetrized.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let fl = f(lam);
            for i in 0..n {
                scaled[(i, j)] *= fl;
            }
        }
        symmetrize(&(scaled * self.vectors.transpose()))
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.map(|x| x)
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest absolute entry.
fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Validates and symmetrizes a square matrix.
///
/// Asymmetry up to `SYM_TOL · max|M_ij|` is averaged away; larger asymmetry is
/// rejected, as is `λ_min ≤ PD_TOL · λ_max`.
pub fn validate_spd(m: DMatrix<f64>) -> Result<SpdMatrix> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Err(Error::Empty);
    }
    if rows > MAX_DIM {
        return Err(Error::DimensionTooLarge {
            dim: rows,
            limit: MAX_DIM,
        });
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let scale = max_abs(&m);
    let asym = max_abs(&(&m - m.transpose()));
    if asym > SYM_TOL * scale {
        return Err(Error::NotSymmetric {
            asymmetry: if scale > 0.0 { asym / scale } else { asym },
            tolerance: SYM_TOL,
        });
    }
    let sym = symmetrize(&m);
    let eig = symmetric_eigen(&sym)?;
    let (lo, hi) = (eig.min(), eig.max());
    if !(hi > 0.0) || lo <= PD_TOL * hi {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: lo,
            max_eigenvalue: hi,
        });
    }
    Ok(SpdMatrix(sym))
}

/// Eigendecomposition of an arbitrary symmetric matrix (not necessarily
/// definite). Values ascending.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<EigenDecomposition> {
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or(Error::ConvergenceFailure)?;
    if eig.eigenvalues.iter().any(|x| !x.is_finite()) {
        return Err(Error::ConvergenceFailure);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(EigenDecomposition { values, vectors })
}

pub fn sym_eig(a: &SpdMatrix) -> Result<EigenDecomposition> {
    symmetric_eigen(&a.0)
}

/// `A^p` for any real `p`.
pub fn mat_power(a: &SpdMatrix, p: f64) -> Result<SpdMatrix> {
    if p == 0.0 {
        return Ok(SpdMatrix::identity(a.dim()));
    }
    if p == 1.0 {
        return Ok(a.clone());
    }
    let eig = sym_eig(a)?;
    Ok(SpdMatrix(eig.map(|x| x.powf(p))))
}

/// Principal logarithm; the result is symmetric, not necessarily definite.
pub fn mat_log(a: &SpdMatrix) -> Result<DMatrix<f64>> {
    Ok(sym_eig(a)?.map(f64::ln))
}

pub fn mat_exp(s: &DMatrix<f64>) -> Result<SpdMatrix> {
    let (rows, cols) = s.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if s.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let scale = max_abs(s);
    let asym = max_abs(&(s - s.transpose()));
    if asym > SYM_TOL * scale.max(1.0) {
        return Err(Error::NotSymmetric {
            asymmetry: asym,
            tolerance: SYM_TOL,
        });
    }
    let eig = symmetric_eigen(&symmetrize(s))?;
    let out = eig.map(f64::exp);
    if out.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(SpdMatrix(out))
}

/// `Cᵀ A C`, revalidated.
pub fn congruence(a: &SpdMatrix, c: &DMatrix<f64>) -> Result<SpdMatrix> {
    let n = a.dim();
    if c.shape() != (n, n) || c.iter().any(|x| !x.is_finite()) {
        return Err(Error::SingularTransform);
    }
    let sv = c.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if !(smax > 0.0) || smin <= 1e-14 * smax {
        return Err(Error::SingularTransform);
    }
    validate_spd(c.transpose() * &a.0 * c)
}

/// `X A X` for symmetric `X`, symmetrized.
pub(crate) fn sandwich(x: &DMatrix<f64>, a: &DMatrix<f64>) -> DMatrix<f64> {
    symmetrize(&(x * a * x))
}

/// `‖X − Y‖_F / ‖Y‖_F`.
pub fn rel_frobenius(x: &DMatrix<f64>, reference: &DMatrix<f64>) -> f64 {
    let denom = reference.norm();
    let diff = (x - reference).norm();
    if denom == 0.0 {
        diff
    } else {
        diff / denom
    }
}

/// Operator 2-norm of a symmetric matrix as its largest absolute eigenvalue.
pub fn sym_operator_norm(m: &DMatrix<f64>) -> Result<f64> {
    let eig = symmetric_eigen(&symmetrize(m))?;
    Ok(eig.min().abs().max(eig.max().abs()))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn sym_min_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    Ok(symmetric_eigen(&symmetrize(m))?.min())
}

pub(crate) fn same_dim(a: &SpdMatrix, b: &SpdMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(())
}

/// Orthogonal matrix rotating the plane by `theta` (2×2).
pub fn rotation2(theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}
