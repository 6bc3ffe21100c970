//! The semi-metric `d(A, B) = 2‖log(A⁻¹ # B)‖`, the Thompson metric, and the
//! geodesic and linear-form checks built on them.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::means::{inverse_geometric_mean, metric_mean, spectral_mean};
use crate::spd::{rel_frobenius, same_dim, sandwich, sym_eig, symmetric_eigen, SpdMatrix};

/// Distance between the two endpoints of `|λ − 1|` below which `L_t(λ) = t`.
pub const UNIT_EIGENVALUE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceReport {
    pub semi_metric: f64,
    pub thompson: f64,
}

pub fn distances(a: &SpdMatrix, b: &SpdMatrix) -> Result<DistanceReport> {
    Ok(DistanceReport {
        semi_metric: semi_metric(a, b)?,
        thompson: thompson_metric(a, b)?,
    })
}

fn max_abs_log(values: &[f64]) -> f64 {
    values.iter().map(|v| v.ln().abs()).fold(0.0, f64::max)
}

/// `2‖log(A⁻¹ # B)‖` in the operator norm.
pub fn semi_metric(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    let x = inverse_geometric_mean(a, b)?;
    Ok(2.0 * max_abs_log(&sym_eig(&x)?.values))
}

/// `‖log A^{-1/2} B A^{-1/2}‖` in the operator norm.
pub fn thompson_metric(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    same_dim(a, b)?;
    let inv_half = sym_eig(a)?.map(|x| x.sqrt().recip());
    let inner = symmetric_eigen(&sandwich(&inv_half, b.as_matrix()))?;
    Ok(max_abs_log(&inner.values))
}

/// `|d(A ♮ₛ B, A ♮ₜ B) − |s − t| d(A, B)|`.
pub fn geodesic_deviation(a: &SpdMatrix, b: &SpdMatrix, s: f64, t: f64) -> Result<f64> {
    let ps = spectral_mean(a, b, s)?;
    let pt = spectral_mean(a, b, t)?;
    Ok((semi_metric(&ps, &pt)? - (s - t).abs() * semi_metric(a, b)?).abs())
}

/// `d(A ♮ₜ B, A ♮ₜ C) − t d(B, C)`, signed. Positive values witness a failure
/// of convexity for the semi-metric.
pub fn convexity_gap(a: &SpdMatrix, b: &SpdMatrix, c: &SpdMatrix, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::WeightOutOfRange { t, range: "[0, 1]" });
    }
    same_dim(a, b)?;
    same_dim(a, c)?;
    let lhs = semi_metric(&spectral_mean(a, b, t)?, &spectral_mean(a, c, t)?)?;
    Ok(lhs - t * semi_metric(b, c)?)
}

/// `(λᵗ − λ^{−t}) / (λ − λ^{−1})`, equal to `t` at `λ = 1`.
///
/// Evaluated as `sinh(t ln λ) / sinh(ln λ)`, which avoids cancellation near 1.
pub fn l_coeff(t: f64, lam: f64) -> Result<f64> {
    if !(lam > 0.0) || !lam.is_finite() {
        return Err(Error::NonpositiveEigenvalue(lam));
    }
    if (lam - 1.0).abs() < UNIT_EIGENVALUE_TOL {
        return Ok(t);
    }
    let l = lam.ln();
    Ok((t * l).sinh() / l.sinh())
}

/// Closed form for the weighted metric mean of 2×2 matrices as a combination
/// of `A` and `B`.
///
/// For `det A = det B` this is `L_{1−t}(λ) A + L_t(λ) B` with `λ` the larger
/// eigenvalue of `AB⁻¹`. Unequal determinants are first normalized away:
/// with `r = √(det B / det A)` and `λ` the larger eigenvalue of `r·AB⁻¹`,
/// the result is `r^t L_{1−t}(λ) A + r^{t−1} L_t(λ) B`.
pub fn metric_mean_linear_p2(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    same_dim(a, b)?;
    if a.dim() != 2 {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: 2,
        });
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::WeightOutOfRange { t, range: "[0, 1]" });
    }
    let ratio = (b.det()? / a.det()?).sqrt();
    // eigenvalues of AB⁻¹ equal those of B^{-1/2} A B^{-1/2}
    let inv_half = sym_eig(b)?.map(|x| x.sqrt().recip());
    let lam = symmetric_eigen(&sandwich(&inv_half, a.as_matrix()))?.max() * ratio;
    let x = ratio.powf(t) * l_coeff(1.0 - t, lam)?;
    let y = ratio.powf(t - 1.0) * l_coeff(t, lam)?;
    Ok(SpdMatrix::from_trusted(
        a.as_matrix() * x + b.as_matrix() * y,
    ))
}

/// Unconstrained least-squares fit `A ♮ₜ B ≈ xA + yB`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub x: f64,
    pub y: f64,
    /// `‖A ♮ₜ B − xA − yB‖_F / ‖A ♮ₜ B‖_F`
    pub residual: f64,
}

pub fn linear_fit(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<LinearFit> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::WeightOutOfRange { t, range: "(0, 1)" });
    }
    let target = spectral_mean(a, b, t)?;
    let n = a.dim() * a.dim();
    let design = DMatrix::from_fn(n, 2, |k, col| {
        if col == 0 {
            a.as_matrix()[k]
        } else {
            b.as_matrix()[k]
        }
    });
    let rhs = DVector::from_iterator(n, target.as_matrix().iter().copied());
    let coef = design
        .svd(true, true)
        .solve(&rhs, 1e-13)
        .map_err(|_| Error::ConvergenceFailure)?;
    let (x, y) = (coef[0], coef[1]);
    let fitted = a.as_matrix() * x + b.as_matrix() * y;
    Ok(LinearFit {
        x,
        y,
        residual: rel_frobenius(&fitted, target.as_matrix()),
    })
}

pub fn linear_fit_residual(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<f64> {
    Ok(linear_fit(a, b, t)?.residual)
}

/// `d_T(A #ₜ B, A #ₜ C) − t d_T(B, C)`; non-positive for `t ∈ [0, 1]`.
pub fn thompson_convexity_gap(a: &SpdMatrix, b: &SpdMatrix, c: &SpdMatrix, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::WeightOutOfRange { t, range: "[0, 1]" });
    }
    let lhs = thompson_metric(&metric_mean(a, b, t)?, &metric_mean(a, c, t)?)?;
    Ok(lhs - t * thompson_metric(b, c)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_commuting_pair, random_orthogonal, random_spd, seeded_rng};
    use crate::spd::congruence;

    fn diag(v: &[f64]) -> SpdMatrix {
        SpdMatrix::from_diagonal(v).unwrap()
    }

    #[test]
    fn semi_metric_examples() {
        let a = diag(&[1.0, 4.0]);
        assert!(semi_metric(&a, &a).unwrap() < 1e-14);
        // A⁻¹ # B = diag(2, 1/2)
        let d = semi_metric(&a, &diag(&[4.0, 1.0])).unwrap();
        assert!((d - 2.0 * 2f64.ln()).abs() < 1e-14);
        assert!((d - 1.38629).abs() < 1e-5);
    }

    #[test]
    fn thompson_examples() {
        let a = diag(&[1.0, 4.0]);
        let b = diag(&[4.0, 1.0]);
        assert_eq!(thompson_metric(&a, &a).unwrap(), 0.0);
        assert!((thompson_metric(&a, &b).unwrap() - 4f64.ln()).abs() < 1e-14);
        let scaled = thompson_metric(&a.scale(3.0).unwrap(), &b.scale(3.0).unwrap()).unwrap();
        assert!((scaled - 4f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn geodesic_examples() {
        let mut rng = seeded_rng(21);
        let a = random_spd(&mut rng, 3);
        let b = random_spd(&mut rng, 3);
        let d = semi_metric(&a, &b).unwrap();
        assert!(geodesic_deviation(&a, &b, 0.4, 0.4).unwrap() < 1e-14);
        assert!(geodesic_deviation(&a, &b, 0.0, 1.0).unwrap() <= 1e-10 * (1.0 + d));
        assert!(geodesic_deviation(&a, &b, -1.3, 0.7).unwrap() <= 1e-8 * (1.0 + d));
    }

    #[test]
    fn convexity_gap_basics() {
        let mut rng = seeded_rng(22);
        let a = random_spd(&mut rng, 2);
        let b = random_spd(&mut rng, 2);
        assert!(convexity_gap(&a, &b, &b, 0.3).unwrap().abs() < 1e-14);
        assert!(matches!(
            convexity_gap(&a, &b, &b, 1.5),
            Err(Error::WeightOutOfRange { .. })
        ));
    }

    #[test]
    fn convexity_holds_for_commuting_diagonal_triples() {
        // scalar case: log-linear interpolation is exactly convex in the sup norm
        let mut rng = seeded_rng(23);
        for _ in 0..100 {
            let vals = crate::sampling::random_log_spectrum(&mut rng, 9);
            let a = diag(&vals[0..3]);
            let b = diag(&vals[3..6]);
            let c = diag(&vals[6..9]);
            let t = rand::Rng::random_range(&mut rng, 0.0..=1.0);
            assert!(convexity_gap(&a, &b, &c, t).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn l_coeff_examples() {
        assert_eq!(l_coeff(0.37, 1.0).unwrap(), 0.37);
        assert_eq!(l_coeff(0.0, 3.0).unwrap(), 0.0);
        assert!((l_coeff(0.5, 4.0).unwrap() - 0.4).abs() < 1e-15);
        assert!(matches!(
            l_coeff(0.5, 0.0),
            Err(Error::NonpositiveEigenvalue(_))
        ));
        // continuity across the branch threshold
        let near = l_coeff(0.3, 1.0 + 2.0 * UNIT_EIGENVALUE_TOL).unwrap();
        assert!((near - 0.3).abs() < 1e-8);
        // symmetric under λ ↦ 1/λ
        assert!((l_coeff(0.3, 5.0).unwrap() - l_coeff(0.3, 0.2).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn linear_p2_examples() {
        let mut rng = seeded_rng(24);
        let a = random_spd(&mut rng, 2);
        let same = metric_mean_linear_p2(&a, &a, 0.3).unwrap();
        assert!(rel_frobenius(same.as_matrix(), a.as_matrix()) < 1e-14);

        let a = diag(&[4.0, 1.0]);
        let b = diag(&[1.0, 4.0]);
        let m = metric_mean_linear_p2(&a, &b, 0.5).unwrap();
        assert!(rel_frobenius(m.as_matrix(), diag(&[2.0, 2.0]).as_matrix()) < 1e-15);

        // unit-determinant pair: (A + B) / sqrt(det(A + B))
        let q = random_orthogonal(&mut rng, 2);
        let a = crate::sampling::conjugated_diagonal(&q, &[3.0, 1.0 / 3.0]);
        let b = diag(&[0.5, 2.0]);
        let m = metric_mean_linear_p2(&a, &b, 0.5).unwrap();
        let sum = a.as_matrix() + b.as_matrix();
        let closed = &sum / sum.determinant().sqrt();
        assert!(rel_frobenius(m.as_matrix(), &closed) < 1e-12);

        assert!(matches!(
            metric_mean_linear_p2(&SpdMatrix::identity(3), &SpdMatrix::identity(3), 0.5),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn linear_p2_matches_metric_mean() {
        let mut rng = seeded_rng(25);
        for _ in 0..200 {
            let a = random_spd(&mut rng, 2);
            let b = random_spd(&mut rng, 2);
            let t = rand::Rng::random_range(&mut rng, 0.0..=1.0);
            let lin = metric_mean_linear_p2(&a, &b, t).unwrap();
            let direct = metric_mean(&a, &b, t).unwrap();
            assert!(rel_frobenius(lin.as_matrix(), direct.as_matrix()) <= 1e-9);
        }
    }

    #[test]
    fn linear_fit_examples() {
        let mut rng = seeded_rng(26);
        let (a, b) = random_commuting_pair(&mut rng, 2);
        assert!(linear_fit_residual(&a, &b, 0.5).unwrap() <= 1e-9);
        let fit = linear_fit(&a, &a, 0.4).unwrap();
        assert!(fit.residual <= 1e-12);
        assert!((fit.x + fit.y - 1.0).abs() < 1e-10);
        assert!(matches!(
            linear_fit(&a, &b, 0.0),
            Err(Error::WeightOutOfRange { .. })
        ));
    }

    #[test]
    fn metric_invariances() {
        let mut rng = seeded_rng(27);
        for m in [2, 3, 5] {
            for _ in 0..20 {
                let a = random_spd(&mut rng, m);
                let b = random_spd(&mut rng, m);
                let d = semi_metric(&a, &b).unwrap();
                assert!((d - semi_metric(&b, &a).unwrap()).abs() <= 1e-12 * (1.0 + d));
                let di = semi_metric(&a.inverse().unwrap(), &b.inverse().unwrap()).unwrap();
                assert!((d - di).abs() <= 1e-9);
                let q = random_orthogonal(&mut rng, m);
                let aq = congruence(&a, &q).unwrap();
                let bq = congruence(&b, &q).unwrap();
                assert!((d - semi_metric(&aq, &bq).unwrap()).abs() <= 1e-9);
                let dt = thompson_metric(&a, &b).unwrap();
                assert!((dt - thompson_metric(&aq, &bq).unwrap()).abs() <= 1e-9);
            }
        }
    }
}
