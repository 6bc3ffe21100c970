//! Detection of the two-point-spectrum tolerance relations on `𝐏_m` and the
//! closed-form means available under them.
//!
//! * `A σ B`: `σ(A⁻¹B) = {a, b}` for some `a, b > 0` (`a = b` allowed).
//! * `A ~ B`: `A σ B` and additionally `√(ab) = det(A⁻¹B)^{1/m}`.
//!
//! Spectra are read off the symmetric matrix `A^{-1/2} B A^{-1/2}`, which is
//! similar to `A⁻¹B`, and grouped by [`cluster_spectrum`].

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::means::spectral_mean;
use crate::spd::{
    mat_power, rel_frobenius, same_dim, sandwich, sym_eig, symmetric_eigen, SpdMatrix,
};

/// Default relative gap separating two eigenvalue clusters.
pub const DEFAULT_TAU: f64 = 1e-6;
/// Relative tolerance on `√(ab) = det(A⁻¹B)^{1/m}`.
pub const DET_TOL: f64 = 1e-8;
/// Tolerance on `det A = 1` for the unit-determinant formula.
pub const UNIT_DET_TOL: f64 = 1e-8;
/// Relative gap below which `L_{a,b}` switches to its limit `aᵗ(1 − t)`.
pub const L_AB_MERGE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    None,
    Sigma,
    Tilde,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cluster {
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToleranceReport {
    pub relation: Relation,
    /// Smallest cluster value.
    pub a: f64,
    /// Largest cluster value (`a == b` for a single cluster).
    pub b: f64,
    pub multiplicities: (usize, usize),
    /// `|√(ab) − det^{1/m}| / √(ab)`.
    pub det_residual: f64,
    /// Largest relative distance of an eigenvalue from its cluster mean.
    pub cluster_spread: f64,
    pub clusters: Vec<Cluster>,
    pub tau: f64,
}

impl ToleranceReport {
    pub fn sigma(&self) -> bool {
        self.relation != Relation::None
    }

    pub fn tilde(&self) -> bool {
        self.relation == Relation::Tilde
    }
}

fn relative_eigenvalues(a: &SpdMatrix, b: &SpdMatrix) -> Result<Vec<f64>> {
    same_dim(a, b)?;
    let inv_half = sym_eig(a)?.map(|x| x.sqrt().recip());
    Ok(symmetric_eigen(&sandwich(&inv_half, b.as_matrix()))?.values)
}

/// Greedy clustering of an ascending list: a value joins the running cluster
/// unless its relative gap to the cluster mean exceeds `tau`.
pub fn cluster_values(sorted: &[f64], tau: f64) -> Vec<Cluster> {
    let mut out: Vec<Cluster> = Vec::new();
    let mut sum = 0.0;
    for &v in sorted {
        if let Some(last) = out.last_mut() {
            let mean = sum / last.multiplicity as f64;
            if (v - mean).abs() <= tau * mean.abs() {
                sum += v;
                last.multiplicity += 1;
                last.value = sum / last.multiplicity as f64;
                continue;
            }
        }
        sum = v;
        out.push(Cluster {
            value: v,
            multiplicity: 1,
        });
    }
    out
}

/// Clusters of `σ(A⁻¹B)`, ascending.
pub fn cluster_spectrum(a: &SpdMatrix, b: &SpdMatrix, tau: f64) -> Result<Vec<Cluster>> {
    if !(tau > 0.0) {
        return Err(Error::InvalidSchedule(format!("cluster tolerance {tau} must be positive")));
    }
    Ok(cluster_values(&relative_eigenvalues(a, b)?, tau))
}

fn analyze(a: &SpdMatrix, b: &SpdMatrix, tau: f64) -> Result<(ToleranceReport, bool)> {
    if !(tau > 0.0) {
        return Err(Error::InvalidSchedule(format!("cluster tolerance {tau} must be positive")));
    }
    let values = relative_eigenvalues(a, b)?;
    let m = values.len();
    let clusters = cluster_values(&values, tau);
    let first = clusters[0];
    let last = *clusters.last().expect("non-empty spectrum");

    let mut spread: f64 = 0.0;
    let mut k = 0;
    for c in &clusters {
        for &v in &values[k..k + c.multiplicity] {
            spread = spread.max((v - c.value).abs() / c.value);
        }
        k += c.multiplicity;
    }

    let sigma = clusters.len() <= 2;
    let root = (first.value * last.value).sqrt();
    let det_root = (values.iter().map(|v| v.ln()).sum::<f64>() / m as f64).exp();
    let det_residual = (root - det_root).abs() / root;
    let balanced = clusters.len() == 1 || first.multiplicity == last.multiplicity;
    let tilde = sigma && balanced && det_residual <= DET_TOL;

    let multiplicities = if clusters.len() == 1 {
        (first.multiplicity, first.multiplicity)
    } else {
        (first.multiplicity, last.multiplicity)
    };
    let report = ToleranceReport {
        relation: if sigma { Relation::Sigma } else { Relation::None },
        a: first.value,
        b: last.value,
        multiplicities,
        det_residual,
        cluster_spread: spread,
        clusters,
        tau,
    };
    Ok((report, tilde))
}

pub fn check_sigma(a: &SpdMatrix, b: &SpdMatrix) -> Result<ToleranceReport> {
    check_sigma_with(a, b, DEFAULT_TAU)
}

pub fn check_sigma_with(a: &SpdMatrix, b: &SpdMatrix, tau: f64) -> Result<ToleranceReport> {
    Ok(analyze(a, b, tau)?.0)
}

/// Reports `Tilde` when `A ~ B`, otherwise `Sigma` or `None`.
pub fn check_tilde(a: &SpdMatrix, b: &SpdMatrix) -> Result<ToleranceReport> {
    check_tilde_with(a, b, DEFAULT_TAU)
}

pub fn check_tilde_with(a: &SpdMatrix, b: &SpdMatrix, tau: f64) -> Result<ToleranceReport> {
    let (mut report, tilde) = analyze(a, b, tau)?;
    if tilde {
        report.relation = Relation::Tilde;
    }
    Ok(report)
}

/// Sum of two SPD matrices after inverting the first: `A⁻¹ + cB`.
fn inverse_plus(a: &SpdMatrix, b: &SpdMatrix, c: f64) -> Result<SpdMatrix> {
    Ok(SpdMatrix::from_trusted(
        a.inverse()?.as_matrix() + b.as_matrix() * c,
    ))
}

/// `scale · Mᵗ A Mᵗ`.
fn weighted_sandwich(m: &SpdMatrix, a: &SpdMatrix, t: f64, scale: f64) -> Result<SpdMatrix> {
    let mt = mat_power(m, t)?;
    Ok(SpdMatrix::from_trusted(
        sandwich(mt.as_matrix(), a.as_matrix()) * scale,
    ))
}

/// Spectral mean of unit-determinant `A, B` with `A⁻¹ ~ B`:
/// `det(I + AB)^{-2t/m} (A⁻¹ + B)ᵗ A (A⁻¹ + B)ᵗ`.
pub fn tilde_mean_formula(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    same_dim(a, b)?;
    for (which, m) in [("A", a), ("B", b)] {
        let det = m.det()?;
        if (det - 1.0).abs() > UNIT_DET_TOL {
            return Err(Error::DeterminantNotOne {
                which,
                det,
                tolerance: UNIT_DET_TOL,
            });
        }
    }
    let a_inv = a.inverse()?;
    if !check_tilde(&a_inv, b)?.tilde() {
        return Err(Error::RelationAbsent("A⁻¹ ~ B"));
    }
    let m = a.dim() as f64;
    // det(I + AB) = Π (1 + μ) over μ ∈ σ(A^{1/2} B A^{1/2})
    let log_det: f64 = relative_eigenvalues(&a_inv, b)?
        .iter()
        .map(|mu| mu.ln_1p())
        .sum();
    let scale = (-2.0 * t / m * log_det).exp();
    weighted_sandwich(&inverse_plus(a, b, 1.0)?, a, t, scale)
}

/// Spectral mean under `A⁻¹ ~ B` for arbitrary determinants `α = det A`,
/// `β = det B`:
/// `(αβ)^{3t/m} det((αβ)^{1/m} I + AB)^{-2t/m} (A⁻¹ + (αβ)^{-1/m} B)ᵗ A (·)ᵗ`.
pub fn tilde_mean_general(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    same_dim(a, b)?;
    let a_inv = a.inverse()?;
    if !check_tilde(&a_inv, b)?.tilde() {
        return Err(Error::RelationAbsent("A⁻¹ ~ B"));
    }
    let m = a.dim() as f64;
    let a_eig = sym_eig(a)?.values;
    let b_eig = sym_eig(b)?.values;
    let log_ab: f64 = a_eig.iter().chain(&b_eig).map(|x| x.ln()).sum();
    let c = (log_ab / m).exp();
    let log_det: f64 = relative_eigenvalues(&a_inv, b)?
        .iter()
        .map(|mu| (c + mu).ln())
        .sum();
    let scale = (3.0 * t / m * log_ab - 2.0 * t / m * log_det).exp();
    weighted_sandwich(&inverse_plus(a, b, c.recip())?, a, t, scale)
}

/// Closed form valid for every 2×2 pair:
/// `[2√(αβ) + tr(AB)]^{-t} (√(αβ) A⁻¹ + B)ᵗ A (√(αβ) A⁻¹ + B)ᵗ`.
pub fn spectral_mean_p2_closed_form(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    same_dim(a, b)?;
    if a.dim() != 2 {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: 2,
        });
    }
    let g = (a.det()? * b.det()?).sqrt();
    let trace = (a.as_matrix() * b.as_matrix()).trace();
    let scale = (2.0 * g + trace).powf(-t);
    let sum = SpdMatrix::from_trusted(a.inverse()?.as_matrix() * g + b.as_matrix());
    weighted_sandwich(&sum, a, t, scale)
}

/// `(a bᵗ − b aᵗ) / (a − b)`, with the limit `aᵗ(1 − t)` when `a` and `b`
/// agree to a relative gap of `L_AB_MERGE_TOL`.
pub fn l_ab(a: f64, b: f64, t: f64) -> Result<f64> {
    for v in [a, b] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::NonpositiveInput(v));
        }
    }
    if (a - b).abs() <= L_AB_MERGE_TOL * a.max(b) {
        return Ok(a.powf(t) * (1.0 - t));
    }
    // with r = b/a and l = ln r: aᵗ · r (r^{t−1} − 1) / (1 − r)
    let l = (b / a).ln();
    let r = b / a;
    Ok(-a.powf(t) * r * ((t - 1.0) * l).exp_m1() / l.exp_m1())
}

fn check_weight_open(t: f64) -> Result<()> {
    if t > 0.0 && t < 1.0 {
        Ok(())
    } else {
        Err(Error::WeightOutOfRange { t, range: "(0, 1)" })
    }
}

/// `A #ₜ B = L_{a,b}(t) A + L_{a⁻¹,b⁻¹}(1−t) B` under `A σ B`, `σ(A⁻¹B) = {a, b}`.
pub fn sigma_metric_mean_linear(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    check_weight_open(t)?;
    let report = check_sigma(a, b)?;
    if !report.sigma() {
        return Err(Error::RelationAbsent("A σ B"));
    }
    let (x, y) = (report.a, report.b);
    let ca = l_ab(x, y, t)?;
    let cb = l_ab(x.recip(), y.recip(), 1.0 - t)?;
    Ok(SpdMatrix::from_trusted(
        a.as_matrix() * ca + b.as_matrix() * cb,
    ))
}

/// Exponent applied to `c = (√a − √b)/(a − b)` in [`sigma_spectral_mean_with_exponent`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientExponent {
    /// `c^{2t}`, which is what `(A⁻¹ # B)ᵗ A (A⁻¹ # B)ᵗ` expands to.
    TwoT,
    /// `c¹`, the exponent as commonly printed for this identity.
    One,
}

/// Spectral mean under `A⁻¹ σ B` with `σ(AB) = {a, b}`:
/// `c^{2t} (√(ab) A⁻¹ + B)ᵗ A (√(ab) A⁻¹ + B)ᵗ`, `c = 1/(√a + √b)`.
pub fn sigma_spectral_mean_formula(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    sigma_spectral_mean_with_exponent(a, b, t, CoefficientExponent::TwoT)
}

pub fn sigma_spectral_mean_with_exponent(
    a: &SpdMatrix,
    b: &SpdMatrix,
    t: f64,
    exponent: CoefficientExponent,
) -> Result<SpdMatrix> {
    check_weight_open(t)?;
    same_dim(a, b)?;
    let a_inv = a.inverse()?;
    let report = check_sigma(&a_inv, b)?;
    if !report.sigma() {
        return Err(Error::RelationAbsent("A⁻¹ σ B"));
    }
    let (x, y) = (report.a, report.b);
    // (√x − √y)/(x − y) = 1/(√x + √y), also the x = y limit
    let c = (x.sqrt() + y.sqrt()).recip();
    let scale = match exponent {
        CoefficientExponent::TwoT => c.powf(2.0 * t),
        CoefficientExponent::One => c,
    };
    let sum = SpdMatrix::from_trusted(a_inv.as_matrix() * (x * y).sqrt() + b.as_matrix());
    weighted_sandwich(&sum, a, t, scale)
}

/// `‖A⁻¹ # B − det(I + AB)^{-1/m} (A⁻¹ + B)‖_F / ‖A⁻¹ # B‖_F`, the
/// unit-determinant midpoint identity under `A⁻¹ ~ B`.
pub fn tilde_midpoint_residual(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    let a_inv = a.inverse()?;
    let mid = crate::means::inverse_geometric_mean(a, b)?;
    let m = a.dim() as f64;
    let log_det: f64 = relative_eigenvalues(&a_inv, b)?
        .iter()
        .map(|mu| mu.ln_1p())
        .sum();
    let closed: DMatrix<f64> =
        inverse_plus(a, b, 1.0)?.as_matrix() * (-log_det / m).exp();
    Ok(rel_frobenius(&closed, mid.as_matrix()))
}

/// Relative Frobenius distance of a closed form from `A ♮ₜ B`.
pub fn agreement_with_spectral_mean(
    a: &SpdMatrix,
    b: &SpdMatrix,
    t: f64,
    closed: &SpdMatrix,
) -> Result<f64> {
    let direct = spectral_mean(a, b, t)?;
    Ok(rel_frobenius(closed.as_matrix(), direct.as_matrix()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::means::metric_mean;
    use crate::sampling::{
        partner_for_direct, random_spd, seeded_rng, tilde_general_instance,
        tilde_unit_det_instance, two_point_diagonal,
    };

    fn diag(v: &[f64]) -> SpdMatrix {
        SpdMatrix::from_diagonal(v).unwrap()
    }

    #[test]
    fn clustering_examples() {
        let i4 = SpdMatrix::identity(4);
        let c = cluster_spectrum(&i4, &diag(&[2.0, 2.0, 5.0, 5.0]), DEFAULT_TAU).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!((c[0].value, c[0].multiplicity), (2.0, 2));
        assert_eq!((c[1].value, c[1].multiplicity), (5.0, 2));

        let a = diag(&[1.0, 3.0, 7.0]);
        let c = cluster_spectrum(&a, &a, DEFAULT_TAU).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].multiplicity, 3);
        assert!((c[0].value - 1.0).abs() < 1e-14);

        let c = cluster_spectrum(&SpdMatrix::identity(3), &diag(&[1.0, 1.0 + 1e-12, 4.0]), 1e-6)
            .unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].multiplicity, 2);
        assert!((c[0].value - 1.0).abs() < 1e-11);
        assert_eq!((c[1].value, c[1].multiplicity), (4.0, 1));
    }

    #[test]
    fn sigma_examples() {
        let mut rng = seeded_rng(31);
        for _ in 0..20 {
            let a = random_spd(&mut rng, 2);
            let b = random_spd(&mut rng, 2);
            assert!(check_sigma(&a, &b).unwrap().sigma());
        }
        let r = check_sigma(&SpdMatrix::identity(3), &diag(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(r.relation, Relation::None);
        let r = check_sigma(&SpdMatrix::identity(4), &diag(&[2.0, 2.0, 7.0, 7.0])).unwrap();
        assert_eq!(r.relation, Relation::Sigma);
        assert_eq!((r.a, r.b), (2.0, 7.0));
        assert_eq!(r.multiplicities, (2, 2));
    }

    #[test]
    fn tilde_examples() {
        let i4 = SpdMatrix::identity(4);
        let r = check_tilde(&i4, &diag(&[2.0, 2.0, 8.0, 8.0])).unwrap();
        assert_eq!(r.relation, Relation::Tilde);
        let r = check_tilde(&i4, &diag(&[2.0, 2.0, 2.0, 8.0])).unwrap();
        assert_eq!(r.relation, Relation::Sigma);
        // √16 = 4 versus (2³·8)^{1/4} = 2^{3/2}
        assert!((r.det_residual - (4.0 - 2f64.powf(1.5)).abs() / 4.0).abs() < 1e-14);

        let mut rng = seeded_rng(32);
        let a = random_spd(&mut rng, 3);
        let r = check_tilde(&a, &a).unwrap();
        assert_eq!(r.relation, Relation::Tilde);
        assert!((r.a - 1.0).abs() < 1e-12 && (r.b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tilde_with_distinct_values_is_balanced() {
        let mut rng = seeded_rng(33);
        for m in [2, 4, 6] {
            let (a, b) = tilde_general_instance(&mut rng, m);
            let r = check_tilde(&a.inverse().unwrap(), &b).unwrap();
            assert!(r.tilde());
            if r.a != r.b {
                assert_eq!(m % 2, 0);
                assert_eq!(r.multiplicities, (m / 2, m / 2));
            }
        }
    }

    #[test]
    fn unit_det_formula_examples() {
        let i = SpdMatrix::identity(2);
        let f = tilde_mean_formula(&i, &i, 0.3).unwrap();
        assert!(rel_frobenius(f.as_matrix(), i.as_matrix()) < 1e-15);

        // A⁻¹B = diag(1/4, 4): √(ab) = 1 = det^{1/2}
        let a = diag(&[2.0, 0.5]);
        let b = diag(&[0.5, 2.0]);
        let f = tilde_mean_formula(&a, &b, 0.5).unwrap();
        let s = spectral_mean(&a, &b, 0.5).unwrap();
        assert!(rel_frobenius(f.as_matrix(), s.as_matrix()) < 1e-14);
        assert!(rel_frobenius(s.as_matrix(), i.as_matrix()) < 1e-14);

        let mut rng = seeded_rng(34);
        for m in [2, 4, 6] {
            let (a, b) = tilde_unit_det_instance(&mut rng, m);
            let f = tilde_mean_formula(&a, &b, 0.3).unwrap();
            assert!(agreement_with_spectral_mean(&a, &b, 0.3, &f).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn unit_det_formula_errors() {
        let a = diag(&[2.0, 1.0]);
        assert!(matches!(
            tilde_mean_formula(&a, &a, 0.5),
            Err(Error::DeterminantNotOne { which: "A", .. })
        ));
        // unit determinants but σ(AB) = {1/6, 2, 3} is not two-point
        let a = diag(&[1.0, 2.0, 0.5]);
        let b = diag(&[1.0 / 6.0, 1.0, 6.0]);
        assert!(matches!(
            tilde_mean_formula(&a, &b, 0.5),
            Err(Error::RelationAbsent(_))
        ));
    }

    #[test]
    fn general_formula_examples() {
        let mut rng = seeded_rng(35);
        let (a, b) = tilde_unit_det_instance(&mut rng, 4);
        let g = tilde_mean_general(&a, &b, 0.4).unwrap();
        let u = tilde_mean_formula(&a, &b, 0.4).unwrap();
        assert!(rel_frobenius(g.as_matrix(), u.as_matrix()) < 1e-10);

        for _ in 0..20 {
            let a = random_spd(&mut rng, 2);
            let b = random_spd(&mut rng, 2);
            let g = tilde_mean_general(&a, &b, 0.5).unwrap();
            let p2 = spectral_mean_p2_closed_form(&a, &b, 0.5).unwrap();
            assert!(rel_frobenius(g.as_matrix(), p2.as_matrix()) <= 1e-8);
            assert!(agreement_with_spectral_mean(&a, &b, 0.5, &p2).unwrap() <= 1e-8);
        }

        let a = diag(&[6.0, 1.5]);
        let b = diag(&[2.5, 10.0]);
        let g = tilde_mean_general(&a, &b, 0.4).unwrap();
        assert!(agreement_with_spectral_mean(&a, &b, 0.4, &g).unwrap() <= 1e-8);
    }

    #[test]
    fn l_ab_examples() {
        assert!((l_ab(3.0, 5.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(l_ab(3.0, 5.0, 1.0).unwrap().abs() < 1e-15);
        assert!((l_ab(4.0, 1.0, 0.5).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        // symmetric in (a, b)
        assert!((l_ab(4.0, 1.0, 0.3).unwrap() - l_ab(1.0, 4.0, 0.3).unwrap()).abs() < 1e-15);
        // limit branch and its continuity
        assert_eq!(l_ab(2.0, 2.0, 0.25).unwrap(), 2f64.powf(0.25) * 0.75);
        let near = l_ab(2.0, 2.0 * (1.0 + 1e-7), 0.25).unwrap();
        assert!((near - 2f64.powf(0.25) * 0.75).abs() < 1e-7);
        assert!(matches!(l_ab(-1.0, 2.0, 0.5), Err(Error::NonpositiveInput(_))));
    }

    #[test]
    fn sigma_linear_examples() {
        let mut rng = seeded_rng(36);
        let a = random_spd(&mut rng, 3);
        let b = a.scale(2.5).unwrap();
        let lin = sigma_metric_mean_linear(&a, &b, 0.3).unwrap();
        assert!(rel_frobenius(lin.as_matrix(), &(a.as_matrix() * 2.5f64.powf(0.3))) < 1e-12);

        let a = random_spd(&mut rng, 2);
        let b = random_spd(&mut rng, 2);
        let lin = sigma_metric_mean_linear(&a, &b, 0.5).unwrap();
        let direct = metric_mean(&a, &b, 0.5).unwrap();
        assert!(rel_frobenius(lin.as_matrix(), direct.as_matrix()) <= 1e-8);

        let a = random_spd(&mut rng, 4);
        let b = partner_for_direct(&mut rng, &a, &two_point_diagonal(4, 2.0, 7.0));
        let lin = sigma_metric_mean_linear(&a, &b, 0.25).unwrap();
        let direct = metric_mean(&a, &b, 0.25).unwrap();
        assert!(rel_frobenius(lin.as_matrix(), direct.as_matrix()) <= 1e-8);

        assert!(matches!(
            sigma_metric_mean_linear(&SpdMatrix::identity(3), &diag(&[1.0, 2.0, 3.0]), 0.5),
            Err(Error::RelationAbsent(_))
        ));
        assert!(matches!(
            sigma_metric_mean_linear(&a, &b, 1.0),
            Err(Error::WeightOutOfRange { .. })
        ));
    }

    #[test]
    fn sigma_spectral_examples() {
        // AB = diag(4, 1): c = 1/3
        let a = diag(&[2.0, 1.0]);
        let b = diag(&[2.0, 1.0]);
        let f = sigma_spectral_mean_formula(&a, &b, 0.5).unwrap();
        assert!(agreement_with_spectral_mean(&a, &b, 0.5, &f).unwrap() < 1e-14);

        let mut rng = seeded_rng(37);
        for _ in 0..20 {
            let a = random_spd(&mut rng, 2);
            let b = random_spd(&mut rng, 2);
            let f = sigma_spectral_mean_formula(&a, &b, 0.5).unwrap();
            assert!(agreement_with_spectral_mean(&a, &b, 0.5, &f).unwrap() <= 1e-8);
        }

        let i = SpdMatrix::identity(3);
        let f = sigma_spectral_mean_formula(&i, &i, 0.4).unwrap();
        assert!(rel_frobenius(f.as_matrix(), i.as_matrix()) < 1e-14);
    }

    #[test]
    fn printed_exponent_disagrees_off_the_midpoint_scale() {
        let mut rng = seeded_rng(38);
        let a = random_spd(&mut rng, 2);
        let b = random_spd(&mut rng, 2);
        let f = sigma_spectral_mean_with_exponent(&a, &b, 0.3, CoefficientExponent::One).unwrap();
        assert!(agreement_with_spectral_mean(&a, &b, 0.3, &f).unwrap() > 1e-3);
    }

    #[test]
    fn midpoint_identity_on_unit_det_instances() {
        let mut rng = seeded_rng(39);
        for m in [2, 4, 6] {
            let (a, b) = tilde_unit_det_instance(&mut rng, m);
            assert!(tilde_midpoint_residual(&a, &b).unwrap() <= 1e-8);
        }
    }
}
