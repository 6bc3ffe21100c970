//! Weighted metric and spectral geometric means and the residual checks that
//! characterize them.
//!
//! `A #ₜ B = A^{1/2} (A^{-1/2} B A^{-1/2})ᵗ A^{1/2}` and
//! `A ♮ₜ B = (A⁻¹ # B)ᵗ A (A⁻¹ # B)ᵗ`. Weights are unrestricted reals except
//! where noted.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::spd::{
    mat_exp, mat_log, mat_power, rel_frobenius, same_dim, sandwich, sym_eig, sym_min_eigenvalue,
    symmetric_eigen, SpdMatrix, PD_TOL,
};

/// `A #ₜ B`.
pub fn metric_mean(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    same_dim(a, b)?;
    if t == 0.0 {
        return Ok(a.clone());
    }
    let eig = sym_eig(a)?;
    let half = eig.map(f64::sqrt);
    let inv_half = eig.map(|x| x.sqrt().recip());
    let inner = SpdMatrix::from_trusted(sandwich(&inv_half, b.as_matrix()));
    let inner_t = mat_power(&inner, t)?;
    Ok(SpdMatrix::from_trusted(sandwich(&half, inner_t.as_matrix())))
}

/// `A # B`, the midpoint of the metric mean.
pub fn geometric_mean(a: &SpdMatrix, b: &SpdMatrix) -> Result<SpdMatrix> {
    metric_mean(a, b, 0.5)
}

/// `A⁻¹ # B`, computed as `A^{-1/2} (A^{1/2} B A^{1/2})^{1/2} A^{-1/2}` so every
/// intermediate stays symmetric.
///
/// The middle factor is the symmetric polar factor of `B^{1/2} A^{1/2}`.
/// Forming `A^{1/2} B A^{1/2}` and taking its root would square the condition
/// number, which shows when `A` and `B` are close but ill-conditioned.
pub fn inverse_geometric_mean(a: &SpdMatrix, b: &SpdMatrix) -> Result<SpdMatrix> {
    same_dim(a, b)?;
    let eig = sym_eig(a)?;
    let half = eig.map(f64::sqrt);
    let inv_half = eig.map(|x| x.sqrt().recip());
    let b_half = sym_eig(b)?.map(f64::sqrt);
    let root = polar_factor(&(b_half * &half))?;
    Ok(SpdMatrix::from_trusted(sandwich(&inv_half, &root)))
}

/// `(MᵀM)^{1/2}` for invertible `M`, without forming `MᵀM`.
///
/// `[[0, M], [Mᵀ, 0]]` has eigenpairs `σ, [u; v]/√2` for each singular triple
/// `M v = σ u`, so the top half of its spectrum gives `Σ σ v vᵀ`.
fn polar_factor(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    let mut augmented = DMatrix::zeros(2 * n, 2 * n);
    augmented.view_mut((0, n), (n, n)).copy_from(m);
    augmented.view_mut((n, 0), (n, n)).copy_from(&m.transpose());
    let eig = symmetric_eigen(&augmented)?;
    let mut h = DMatrix::zeros(n, n);
    for k in n..2 * n {
        let v = eig.vectors.view((n, k), (n, 1));
        h += (v * v.transpose()) * (2.0 * eig.values[k]);
    }
    Ok(h)
}

/// `A ♮ₜ B`.
pub fn spectral_mean(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    same_dim(a, b)?;
    if t == 0.0 {
        return Ok(a.clone());
    }
    let x = inverse_geometric_mean(a, b)?;
    let xt = mat_power(&x, t)?;
    Ok(SpdMatrix::from_trusted(sandwich(xt.as_matrix(), a.as_matrix())))
}

/// `‖X A⁻¹ X − B‖_F / ‖B‖_F`.
pub fn riccati_residual(a: &SpdMatrix, b: &SpdMatrix, x: &SpdMatrix) -> Result<f64> {
    same_dim(a, b)?;
    same_dim(a, x)?;
    let a_inv = a.inverse()?;
    let lhs = sandwich(x.as_matrix(), a_inv.as_matrix());
    Ok(rel_frobenius(&lhs, b.as_matrix()))
}

/// Residual of `A⁻¹ # X = (A⁻¹ # B)ᵗ` at `X = A ♮ₜ B`, relative to the right side.
pub fn spectral_equation_residual(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<f64> {
    let x = spectral_mean(a, b, t)?;
    let lhs = inverse_geometric_mean(a, &x)?;
    let rhs = mat_power(&inverse_geometric_mean(a, b)?, t)?;
    Ok(rel_frobenius(lhs.as_matrix(), rhs.as_matrix()))
}

/// With `X = A ♮ₜ B`, `U = A # X⁻¹`, `V = B # X⁻¹`, returns
/// `‖V − U^{1−1/t}‖_F / ‖V‖_F`.
pub fn characterization_residual(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Err(Error::ZeroWeight);
    }
    same_dim(a, b)?;
    let x_inv = spectral_mean(a, b, t)?.inverse()?;
    let u = geometric_mean(a, &x_inv)?;
    let v = geometric_mean(b, &x_inv)?;
    let u_pow = mat_power(&u, 1.0 - 1.0 / t)?;
    Ok(rel_frobenius(u_pow.as_matrix(), v.as_matrix()))
}

/// Solution of `A = X^{-t} Y X^{-t}`, `B = X^{1-t} Y X^{1-t}` with its residuals.
#[derive(Debug, Clone)]
pub struct MeanSystemSolution {
    pub x: SpdMatrix,
    pub y: SpdMatrix,
    /// `‖X^{-t} Y X^{-t} − A‖_F / ‖A‖_F`
    pub residual_a: f64,
    /// `‖X^{1-t} Y X^{1-t} − B‖_F / ‖B‖_F`
    pub residual_b: f64,
}

pub fn solve_mean_system(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<MeanSystemSolution> {
    same_dim(a, b)?;
    let x = inverse_geometric_mean(a, b)?;
    let y = spectral_mean(a, b, t)?;
    let eig = sym_eig(&x)?;
    let x_neg_t = eig.map(|v| v.powf(-t));
    let x_one_minus_t = eig.map(|v| v.powf(1.0 - t));
    let residual_a = rel_frobenius(&sandwich(&x_neg_t, y.as_matrix()), a.as_matrix());
    let residual_b = rel_frobenius(&sandwich(&x_one_minus_t, y.as_matrix()), b.as_matrix());
    Ok(MeanSystemSolution {
        x,
        y,
        residual_a,
        residual_b,
    })
}

/// Smallest eigenvalues of the gaps in the two-sided Loewner bound
/// `2^{1+t}(A + B⁻¹)^{-t} − A⁻¹ ≤ A ♮ₜ B ≤ [2^{1+t}(A⁻¹ + B)^{-t} − A]⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoewnerMargins {
    pub lower: f64,
    /// `None` when `2^{1+t}(A⁻¹ + B)^{-t} − A` is not positive definite and the
    /// upper bound is undefined.
    pub upper: Option<f64>,
}

pub fn loewner_bound_margins(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<LoewnerMargins> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::WeightOutOfRange { t, range: "(0, 1)" });
    }
    same_dim(a, b)?;
    let mean = spectral_mean(a, b, t)?;
    let a_inv = a.inverse()?;
    let b_inv = b.inverse()?;
    let coeff = 2f64.powf(1.0 + t);

    let lower_bound =
        mat_power(&a.add(&b_inv)?, -t)?.as_matrix() * coeff - a_inv.as_matrix();
    let lower = sym_min_eigenvalue(&(mean.as_matrix() - lower_bound))?;

    let inner = mat_power(&a_inv.add(b)?, -t)?.as_matrix() * coeff - a.as_matrix();
    let inner_eig = symmetric_eigen(&inner)?;
    let upper = if inner_eig.max() > 0.0 && inner_eig.min() > PD_TOL * inner_eig.max() {
        let upper_bound = inner_eig.map(f64::recip);
        Some(sym_min_eigenvalue(&(upper_bound - mean.as_matrix()))?)
    } else {
        None
    };
    Ok(LoewnerMargins { lower, upper })
}

/// Errors `‖(Aˢ ♮ₜ Bˢ)^{1/s} − exp((1−t) log A + t log B)‖_F` along a
/// strictly decreasing schedule of positive `s`.
pub fn ltk_errors(a: &SpdMatrix, b: &SpdMatrix, t: f64, s_values: &[f64]) -> Result<Vec<f64>> {
    same_dim(a, b)?;
    if s_values.is_empty() {
        return Err(Error::InvalidSchedule("empty".into()));
    }
    if s_values.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::InvalidSchedule("values must be positive".into()));
    }
    if s_values.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidSchedule(
            "values must be strictly decreasing".into(),
        ));
    }
    let log_a = mat_log(a)?;
    let log_b = mat_log(b)?;
    let limit = mat_exp(&(log_a * (1.0 - t) + log_b * t))?;
    s_values
        .iter()
        .map(|&s| {
            let mean = spectral_mean(&mat_power(a, s)?, &mat_power(b, s)?, t)?;
            let approx = mat_power(&mean, 1.0 / s)?;
            Ok((approx.as_matrix() - limit.as_matrix()).norm())
        })
        .collect()
}

/// `s = 1, 1/2, …, 1/2^halvings`.
pub fn halving_schedule(halvings: u32) -> Vec<f64> {
    (0..=halvings).map(|k| 0.5f64.powi(k as i32)).collect()
}

/// The tail test for an error sequence: strictly decreasing over the last
/// three entries and ending below its first entry.
pub fn ltk_converging(errors: &[f64]) -> bool {
    let n = errors.len();
    if n < 3 {
        return false;
    }
    errors[n - 3] > errors[n - 2] && errors[n - 2] > errors[n - 1] && errors[n - 1] < errors[0]
}

/// Largest relative deviation between the sorted eigenvalues of `A ♮ B` and the
/// square roots of the sorted eigenvalues of `AB` (taken from `A^{1/2} B A^{1/2}`).
pub fn fiedler_ptak_gap(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    same_dim(a, b)?;
    let mean = spectral_mean(a, b, 0.5)?;
    let mean_eigs = sym_eig(&mean)?.values;
    let half = a.sqrt()?;
    let product = symmetric_eigen(&sandwich(half.as_matrix(), b.as_matrix()))?.values;
    Ok(mean_eigs
        .iter()
        .zip(&product)
        .map(|(&m, &p)| {
            let root = p.sqrt();
            (m - root).abs() / root
        })
        .fold(0.0, f64::max))
}

/// `A^{1−t} B^t` for commuting inputs.
pub fn commuting_power_form(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<DMatrix<f64>> {
    same_dim(a, b)?;
    Ok(mat_power(a, 1.0 - t)?.as_matrix() * mat_power(b, t)?.as_matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_spd, seeded_rng};

    fn diag(v: &[f64]) -> SpdMatrix {
        SpdMatrix::from_diagonal(v).unwrap()
    }

    fn close(x: &SpdMatrix, y: &DMatrix<f64>, tol: f64) -> bool {
        rel_frobenius(x.as_matrix(), y) <= tol
    }

    #[test]
    fn metric_mean_diagonal_and_endpoints() {
        let a = diag(&[1.0, 4.0]);
        let b = diag(&[4.0, 1.0]);
        let m = metric_mean(&a, &b, 0.5).unwrap();
        assert!(close(&m, diag(&[2.0, 2.0]).as_matrix(), 1e-14));
        assert_eq!(metric_mean(&a, &b, 0.0).unwrap(), a);
        assert!(close(&metric_mean(&a, &b, 1.0).unwrap(), b.as_matrix(), 1e-14));
    }

    #[test]
    fn metric_mean_of_unit_determinant_pair() {
        let a = diag(&[2.0, 0.5]);
        let b = diag(&[0.5, 2.0]);
        let m = metric_mean(&a, &b, 0.5).unwrap();
        assert!(close(&m, &DMatrix::identity(2, 2), 1e-14));
        // (A + B) / sqrt(det(A + B)) with A + B = 2.5 I
        let sum = a.as_matrix() + b.as_matrix();
        let closed = &sum / sum.determinant().sqrt();
        assert!(close(&m, &closed, 1e-14));
    }

    #[test]
    fn spectral_mean_commuting_and_endpoints() {
        let a = diag(&[1.0, 4.0]);
        let b = diag(&[4.0, 1.0]);
        let m = spectral_mean(&a, &b, 0.5).unwrap();
        assert!(close(&m, diag(&[2.0, 2.0]).as_matrix(), 1e-14));
        assert_eq!(spectral_mean(&a, &b, 0.0).unwrap(), a);
        assert!(close(&spectral_mean(&a, &b, 1.0).unwrap(), b.as_matrix(), 1e-14));
    }

    #[test]
    fn dimension_mismatch() {
        let a = SpdMatrix::identity(2);
        let b = SpdMatrix::identity(3);
        assert!(matches!(
            spectral_mean(&a, &b, 0.5),
            Err(Error::DimensionMismatch { left: 2, right: 3 })
        ));
        assert!(matches!(
            metric_mean(&a, &b, 0.5),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn riccati_cases() {
        let i = SpdMatrix::identity(2);
        assert_eq!(riccati_residual(&i, &i, &i).unwrap(), 0.0);
        let mut rng = seeded_rng(7);
        for _ in 0..20 {
            let a = random_spd(&mut rng, 3);
            let b = random_spd(&mut rng, 3);
            let x = geometric_mean(&a, &b).unwrap();
            assert!(riccati_residual(&a, &b, &x).unwrap() <= 1e-10);
            assert!(riccati_residual(&a, &b, &a).unwrap() > 1e-3);
        }
    }

    #[test]
    fn spectral_equation_cases() {
        let mut rng = seeded_rng(8);
        let a = random_spd(&mut rng, 3);
        assert!(spectral_equation_residual(&a, &a, 0.5).unwrap() <= 1e-12);
        for &t in &[0.5, -1.0, 2.0, 1.0 / 3.0] {
            let b = random_spd(&mut rng, 3);
            assert!(spectral_equation_residual(&a, &b, t).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn characterization_cases() {
        let mut rng = seeded_rng(9);
        let a = random_spd(&mut rng, 4);
        assert!(characterization_residual(&a, &a, 0.5).unwrap() <= 1e-12);
        for &t in &[0.5, 2.0, -1.0] {
            let b = random_spd(&mut rng, 4);
            assert!(characterization_residual(&a, &b, t).unwrap() <= 1e-9);
        }
        assert_eq!(
            characterization_residual(&a, &a, 0.0).unwrap_err(),
            Error::ZeroWeight
        );
    }

    #[test]
    fn mean_system_cases() {
        let i = SpdMatrix::identity(2);
        let s = solve_mean_system(&i, &i, 0.3).unwrap();
        assert!(close(&s.x, i.as_matrix(), 1e-15) && close(&s.y, i.as_matrix(), 1e-15));

        let s = solve_mean_system(&diag(&[1.0, 4.0]), &diag(&[4.0, 1.0]), 0.5).unwrap();
        assert!(close(&s.x, diag(&[2.0, 0.5]).as_matrix(), 1e-14));
        assert!(close(&s.y, diag(&[2.0, 2.0]).as_matrix(), 1e-14));
        assert!(s.residual_a <= 1e-14 && s.residual_b <= 1e-14);
    }

    #[test]
    fn loewner_cases() {
        let i = SpdMatrix::identity(2);
        let m = loewner_bound_margins(&i, &i, 0.5).unwrap();
        assert!(m.lower.abs() < 1e-14);
        assert!(m.upper.unwrap().abs() < 1e-14);

        // scalar case: lower bound 2^{3/2} 5^{-1/2} - 1/4 against 4^{1/2} 1^{1/2} = 2
        let a = diag(&[4.0, 4.0]);
        let b = diag(&[1.0, 1.0]);
        let m = loewner_bound_margins(&a, &b, 0.5).unwrap();
        let bound = 2f64.powf(1.5) / 5f64.sqrt() - 0.25;
        assert!((bound - 1.0149).abs() < 1e-4);
        assert!((m.lower - (2.0 - bound)).abs() < 1e-13);
        // 2^{3/2} (1/4 + 1)^{-1/2} - 4 < 0
        assert_eq!(m.upper, None);

        assert!(matches!(
            loewner_bound_margins(&a, &b, 1.0),
            Err(Error::WeightOutOfRange { .. })
        ));
    }

    #[test]
    fn ltk_commuting_is_exact() {
        let a = diag(&[1.0, 4.0]);
        let b = diag(&[4.0, 1.0]);
        let errs = ltk_errors(&a, &b, 0.3, &halving_schedule(6)).unwrap();
        assert!(errs.iter().all(|&e| e <= 1e-10), "{errs:?}");
        let errs = ltk_errors(&a, &a, 0.7, &halving_schedule(6)).unwrap();
        assert!(errs.iter().all(|&e| e <= 1e-10), "{errs:?}");
    }

    #[test]
    fn ltk_random_pair_converges() {
        let mut rng = seeded_rng(11);
        let a = random_spd(&mut rng, 3);
        let b = random_spd(&mut rng, 3);
        let errs = ltk_errors(&a, &b, 0.5, &halving_schedule(6)).unwrap();
        assert!(ltk_converging(&errs), "{errs:?}");
    }

    #[test]
    fn ltk_rejects_bad_schedule() {
        let i = SpdMatrix::identity(2);
        assert!(ltk_errors(&i, &i, 0.5, &[0.5, 1.0]).is_err());
        assert!(ltk_errors(&i, &i, 0.5, &[1.0, 0.0]).is_err());
        assert!(ltk_errors(&i, &i, 0.5, &[]).is_err());
    }

    #[test]
    fn fiedler_ptak_cases() {
        let a = diag(&[1.0, 4.0]);
        assert!(fiedler_ptak_gap(&a, &a).unwrap() < 1e-14);
        assert!(fiedler_ptak_gap(&a, &diag(&[4.0, 1.0])).unwrap() < 1e-14);
        let mut rng = seeded_rng(12);
        let a = random_spd(&mut rng, 5);
        let b = random_spd(&mut rng, 5);
        assert!(fiedler_ptak_gap(&a, &b).unwrap() <= 1e-9);
    }
}
