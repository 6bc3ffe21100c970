//! Seeded random instance generators shared by the verification suites and tests.
//!
//! All randomness flows through [`ChaCha8Rng`] seeded with a `u64`, so a suite
//! run is replayable from its seed.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::pinch::{apply_pinch, PinchKind, PinchStep, PositiveTuple};
use crate::spd::{mat_power, sandwich, SpdMatrix};

/// Name of the generator, recorded in verification reports.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng";

/// Eigenvalues of random SPD matrices are `exp(U(-LOG_SPREAD, LOG_SPREAD))`.
pub const LOG_SPREAD: f64 = 1.5;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for one independent stream under a shared seed; the
/// verification suites each draw from their own stream.
pub fn suite_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix, signs fixed).
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, m: usize) -> DMatrix<f64> {
    let qr = gaussian_matrix(rng, m, m).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..m {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Well-conditioned random invertible matrix: `Q₁ diag(σ) Q₂` with
/// `σ ∈ [0.5, 2]`.
pub fn random_invertible<R: Rng + ?Sized>(rng: &mut R, m: usize) -> DMatrix<f64> {
    let q1 = random_orthogonal(rng, m);
    let q2 = random_orthogonal(rng, m);
    let s = DVector::from_fn(m, |_, _| rng.random_range(0.5..2.0));
    q1 * DMatrix::from_diagonal(&s) * q2
}

pub fn random_log_spectrum<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<f64> {
    (0..m)
        .map(|_| rng.random_range(-LOG_SPREAD..LOG_SPREAD).exp())
        .collect()
}

/// `Q diag(values) Qᵀ`.
pub fn conjugated_diagonal(q: &DMatrix<f64>, values: &[f64]) -> SpdMatrix {
    let d = DMatrix::from_diagonal(&DVector::from_row_slice(values));
    SpdMatrix::from_trusted(q * d * q.transpose())
}

pub fn random_spd<R: Rng + ?Sized>(rng: &mut R, m: usize) -> SpdMatrix {
    let q = random_orthogonal(rng, m);
    let spec = random_log_spectrum(rng, m);
    conjugated_diagonal(&q, &spec)
}

/// Two SPD matrices sharing an eigenbasis.
pub fn random_commuting_pair<R: Rng + ?Sized>(rng: &mut R, m: usize) -> (SpdMatrix, SpdMatrix) {
    let q = random_orthogonal(rng, m);
    let a = random_log_spectrum(rng, m);
    let b = random_log_spectrum(rng, m);
    (conjugated_diagonal(&q, &a), conjugated_diagonal(&q, &b))
}

/// `D_m(a, b)`: `m/2` copies of `a` followed by `m − m/2` copies of `b`.
pub fn two_point_diagonal(m: usize, a: f64, b: f64) -> Vec<f64> {
    (0..m).map(|k| if k < m / 2 { a } else { b }).collect()
}

/// Random SPD matrix scaled to determinant one.
pub fn random_unit_det_spd<R: Rng + ?Sized>(rng: &mut R, m: usize) -> SpdMatrix {
    let q = random_orthogonal(rng, m);
    let mut spec = random_log_spectrum(rng, m);
    let log_mean = spec.iter().map(|x| x.ln()).sum::<f64>() / m as f64;
    for v in &mut spec {
        *v = (v.ln() - log_mean).exp();
    }
    conjugated_diagonal(&q, &spec)
}

/// Given `A`, returns `B` with `A^{1/2} B A^{1/2} = Q diag(spectrum) Qᵀ`, so
/// `σ(AB) = spectrum` (the relation of `A⁻¹` and `B`).
pub fn partner_for_inverse<R: Rng + ?Sized>(rng: &mut R, a: &SpdMatrix, spectrum: &[f64]) -> SpdMatrix {
    let q = random_orthogonal(rng, a.dim());
    let m = conjugated_diagonal(&q, spectrum);
    let inv_half = mat_power(a, -0.5).expect("eigendecomposition of SPD input");
    SpdMatrix::from_trusted(sandwich(inv_half.as_matrix(), m.as_matrix()))
}

/// Given `A`, returns `B` with `A^{-1/2} B A^{-1/2} = Q diag(spectrum) Qᵀ`, so
/// `σ(A⁻¹B) = spectrum`.
pub fn partner_for_direct<R: Rng + ?Sized>(rng: &mut R, a: &SpdMatrix, spectrum: &[f64]) -> SpdMatrix {
    let q = random_orthogonal(rng, a.dim());
    let m = conjugated_diagonal(&q, spectrum);
    let half = mat_power(a, 0.5).expect("eigendecomposition of SPD input");
    SpdMatrix::from_trusted(sandwich(half.as_matrix(), m.as_matrix()))
}

/// Unit-determinant pair with `A⁻¹ ~ B`: `σ(AB) = {a, 1/a}` with equal
/// multiplicities (`m` even).
pub fn tilde_unit_det_instance<R: Rng + ?Sized>(rng: &mut R, m: usize) -> (SpdMatrix, SpdMatrix) {
    let a_val = rng.random_range(-LOG_SPREAD..LOG_SPREAD).exp();
    let a = random_unit_det_spd(rng, m);
    let b = partner_for_inverse(rng, &a, &two_point_diagonal(m, a_val, a_val.recip()));
    (a, b)
}

/// Pair with `A⁻¹ ~ B` and arbitrary determinants (`m` even).
pub fn tilde_general_instance<R: Rng + ?Sized>(rng: &mut R, m: usize) -> (SpdMatrix, SpdMatrix) {
    let a = random_spd(rng, m);
    let x = rng.random_range(-LOG_SPREAD..LOG_SPREAD).exp();
    let y = rng.random_range(-LOG_SPREAD..LOG_SPREAD).exp();
    let b = partner_for_inverse(rng, &a, &two_point_diagonal(m, x, y));
    (a, b)
}

/// Random tuple with entries `exp(U(-2, 2))`.
pub fn random_positive_tuple<R: Rng + ?Sized>(rng: &mut R, m: usize) -> PositiveTuple {
    PositiveTuple::new((0..m).map(|_| rng.random_range(-2.0f64..2.0).exp()).collect())
        .expect("exp is positive")
}

pub fn random_pinch_step<R: Rng + ?Sized>(rng: &mut R, m: usize, kind: PinchKind) -> PinchStep {
    let i = rng.random_range(0..m - 1);
    let j = rng.random_range(i + 1..m);
    PinchStep::new(i, j, rng.random_range(0.0..=1.0), kind).expect("i < j and t in [0, 1]")
}

/// A log-majorized pair `(α, β)`: `β` is `α` after `1..=2m` random
/// multiplicative pinches. Requires `m ≥ 2`.
pub fn log_majorized_pair<R: Rng + ?Sized>(rng: &mut R, m: usize) -> (PositiveTuple, PositiveTuple) {
    let alpha = random_positive_tuple(rng, m);
    let count = rng.random_range(1..=2 * m);
    let mut beta = alpha.clone();
    for _ in 0..count {
        let step = random_pinch_step(rng, m, PinchKind::Multiplicative);
        beta = apply_pinch(&beta, &step).expect("indices in range");
    }
    (alpha, beta)
}
