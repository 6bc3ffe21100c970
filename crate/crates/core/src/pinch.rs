//! Majorization predicates, two-coordinate pinches, and the constructive
//! chain of multiplicative pinches joining log-majorized tuples.
//!
//! A multiplicative pinch on diagonal matrices is exactly the spectral mean
//! `(Pᵀ diag(x) P) ♮ₜ diag(x)` for a transposition `P`, because diagonal
//! matrices commute; [`verify_chain_matrix`] replays chains through that route.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::means::spectral_mean;
use crate::spd::{rel_frobenius, SpdMatrix};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct PositiveTuple(Vec<f64>);

impl PositiveTuple {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(&bad) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::NonpositiveEntry(bad));
        }
        Ok(PositiveTuple(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn logs(&self) -> Vec<f64> {
        self.0.iter().map(|v| v.ln()).collect()
    }

    pub fn sorted_descending(&self) -> PositiveTuple {
        PositiveTuple(sorted_desc(&self.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PinchKind {
    /// `t·x + (1 − t)·Qx`
    Arithmetic,
    /// `x^t · (Qx)^{1−t}` coordinatewise
    Multiplicative,
}

/// One pinch on coordinates `i < j` (0-based).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinchStep {
    pub i: usize,
    pub j: usize,
    pub t: f64,
    pub kind: PinchKind,
}

impl PinchStep {
    pub fn new(i: usize, j: usize, t: f64, kind: PinchKind) -> Result<Self> {
        if i >= j {
            return Err(Error::IndexOutOfRange { i, j, len: j });
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidPinchWeight(t));
        }
        Ok(PinchStep { i, j, t, kind })
    }

    /// `t = 0`: a pure transposition.
    pub fn is_swap(&self) -> bool {
        self.t == 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PinchChain {
    pub source: PositiveTuple,
    pub target: PositiveTuple,
    pub steps: Vec<PinchStep>,
}

impl PinchChain {
    /// Steps that actually average (`0 < t < 1`), the count the `m − 1` bound
    /// speaks about.
    pub fn averaging_steps(&self) -> usize {
        self.steps.iter().filter(|s| s.t > 0.0 && s.t < 1.0).count()
    }
}

fn sorted_desc(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Prefix-sum test for `y ≺ x` on real vectors with an absolute tolerance.
fn majorized_by(x: &[f64], y: &[f64], tol: f64) -> bool {
    let xs = sorted_desc(x);
    let ys = sorted_desc(y);
    let (mut sx, mut sy) = (0.0, 0.0);
    for (a, b) in xs.iter().zip(&ys) {
        sx += a;
        sy += b;
        if sy > sx + tol {
            return false;
        }
    }
    (sx - sy).abs() <= tol
}

fn check_lengths(alpha: &PositiveTuple, beta: &PositiveTuple) -> Result<()> {
    if alpha.len() != beta.len() {
        return Err(Error::LengthMismatch {
            left: alpha.len(),
            right: beta.len(),
        });
    }
    Ok(())
}

/// Tolerance for linear-domain majorization.
pub fn linear_tolerance(alpha: &[f64], beta: &[f64]) -> f64 {
    1e-12 * max_abs(alpha).max(max_abs(beta)) * alpha.len() as f64
}

/// Tolerance for log-domain comparisons: `1e-12·max|log| + 1e-14`.
pub fn log_tolerance(log_alpha: &[f64], log_beta: &[f64]) -> f64 {
    1e-12 * max_abs(log_alpha).max(max_abs(log_beta)) + 1e-14
}

/// `β ≺ α`.
pub fn majorizes(alpha: &PositiveTuple, beta: &PositiveTuple) -> Result<bool> {
    check_lengths(alpha, beta)?;
    let tol = linear_tolerance(&alpha.0, &beta.0);
    Ok(majorized_by(&alpha.0, &beta.0, tol))
}

/// `β ≺_log α`: majorization of the logarithms, with equal products.
pub fn log_majorizes(alpha: &PositiveTuple, beta: &PositiveTuple) -> Result<bool> {
    check_lengths(alpha, beta)?;
    let (la, lb) = (alpha.logs(), beta.logs());
    let tol = log_tolerance(&la, &lb) * alpha.len() as f64;
    Ok(majorized_by(&la, &lb, tol))
}

pub fn apply_pinch(x: &PositiveTuple, step: &PinchStep) -> Result<PositiveTuple> {
    let n = x.len();
    if step.i >= step.j || step.j >= n {
        return Err(Error::IndexOutOfRange {
            i: step.i,
            j: step.j,
            len: n,
        });
    }
    let (xi, xj, t) = (x.0[step.i], x.0[step.j], step.t);
    let (ni, nj) = match step.kind {
        PinchKind::Arithmetic => (t * xi + (1.0 - t) * xj, t * xj + (1.0 - t) * xi),
        PinchKind::Multiplicative => (
            xi.powf(t) * xj.powf(1.0 - t),
            xj.powf(t) * xi.powf(1.0 - t),
        ),
    };
    let mut out = x.0.clone();
    out[step.i] = ni;
    out[step.j] = nj;
    Ok(PositiveTuple(out))
}

/// Builds at most `m − 1` multiplicative pinches taking `α` (sorted
/// descending) to `β` (sorted descending).
///
/// Works on `x = log α`, `y = log β`. While `x ≠ y`: `j` is the first index
/// with `x_j > y_j`, `k` the first index after `j` with `x_k < y_k`,
/// `δ = min(x_j − y_j, y_k − x_k)`, and the pinch with
/// `t = 1 − δ/(x_j − x_k)` moves `δ` from `x_j` to `x_k`. Coordinates before
/// `j` already match, so every prefix sum of `x` stays above that of `y` and
/// each step fixes at least one more coordinate.
pub fn build_pinch_chain(alpha: &PositiveTuple, beta: &PositiveTuple) -> Result<PinchChain> {
    if !log_majorizes(alpha, beta)? {
        return Err(Error::NotLogMajorized);
    }
    let source = alpha.sorted_descending();
    let target = beta.sorted_descending();
    let m = source.len();
    let mut x = source.logs();
    let y = target.logs();
    let tol = log_tolerance(&x, &y);
    let matches = |x: &[f64]| x.iter().zip(&y).filter(|(a, b)| (*a - *b).abs() <= tol).count();

    let mut steps = Vec::new();
    loop {
        let Some(j) = (0..m).find(|&i| x[i] > y[i] + tol) else {
            break;
        };
        // totals agree, so a surplus above tol leaves a deficit somewhere after
        // j; when it is spread thinner than tol per coordinate, stop
        let Some(k) = (j + 1..m).find(|&i| x[i] < y[i] - tol) else {
            break;
        };
        if steps.len() >= m {
            return Err(Error::ChainOverflow { limit: m });
        }
        let before = matches(&x);
        let surplus = x[j] - y[j];
        let deficit = y[k] - x[k];
        let delta = surplus.min(deficit);
        let t = (1.0 - delta / (x[j] - x[k])).clamp(0.0, 1.0);
        if surplus <= deficit {
            x[j] = y[j];
            x[k] += delta;
        } else {
            x[j] -= delta;
            x[k] = y[k];
        }
        if deficit <= surplus {
            x[k] = y[k];
        }
        steps.push(PinchStep::new(j, k, t, PinchKind::Multiplicative)?);

        if matches(&x) <= before || !prefix_dominates(&x, &y, tol * m as f64) {
            return Err(Error::ChainInvariant(steps.len()));
        }
    }
    Ok(PinchChain {
        source,
        target,
        steps,
    })
}

/// Positional prefix sums of `x` dominate those of `y`.
fn prefix_dominates(x: &[f64], y: &[f64], tol: f64) -> bool {
    let (mut sx, mut sy) = (0.0, 0.0);
    x.iter().zip(y).all(|(a, b)| {
        sx += a;
        sy += b;
        sx + tol >= sy
    })
}

/// Transpositions (as `t = 0` pinches) rearranging `from` into `to`, matching
/// values by nearest logarithm.
fn swaps_between(from: &[f64], to: &[f64]) -> Vec<PinchStep> {
    let mut cur: Vec<f64> = from.to_vec();
    let mut out = Vec::new();
    for pos in 0..cur.len() {
        let want = to[pos].ln();
        let idx = (pos..cur.len())
            .min_by(|&a, &b| (cur[a].ln() - want).abs().total_cmp(&(cur[b].ln() - want).abs()))
            .expect("non-empty range");
        if idx != pos {
            cur.swap(pos, idx);
            out.push(PinchStep {
                i: pos,
                j: idx,
                t: 0.0,
                kind: PinchKind::Multiplicative,
            });
        }
    }
    out
}

/// Chain between `α` and `β` in their given coordinate order: swaps sorting
/// `α`, the averaging chain, then swaps placing the result in `β`'s order.
pub fn build_positional_chain(alpha: &PositiveTuple, beta: &PositiveTuple) -> Result<PinchChain> {
    let core = build_pinch_chain(alpha, beta)?;
    let mut steps = swaps_between(alpha.values(), core.source.values());
    steps.extend(core.steps.iter().copied());
    steps.extend(swaps_between(core.target.values(), beta.values()));
    Ok(PinchChain {
        source: alpha.clone(),
        target: beta.clone(),
        steps,
    })
}

pub fn replay(chain: &PinchChain) -> Result<PositiveTuple> {
    chain
        .steps
        .iter()
        .try_fold(chain.source.clone(), |x, s| apply_pinch(&x, s))
}

/// Largest log-domain deviation between the replayed chain and its target,
/// both as sorted multisets.
pub fn verify_chain_scalar(chain: &PinchChain) -> f64 {
    let Ok(end) = replay(chain) else {
        return f64::INFINITY;
    };
    if end.len() != chain.target.len() {
        return f64::INFINITY;
    }
    let a = sorted_desc(&end.logs());
    let b = sorted_desc(&chain.target.logs());
    a.iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn transposition(m: usize, i: usize, j: usize) -> DMatrix<f64> {
    let mut p = DMatrix::identity(m, m);
    p.swap_columns(i, j);
    p
}

/// Replays every step at the matrix level: `(Pᵀ D P) ♮ₜ D` for multiplicative
/// steps, `t D + (1 − t) Pᵀ D P` for arithmetic ones, compared with the
/// diagonal of the scalar replay. Returns the largest relative Frobenius
/// deviation.
pub fn verify_chain_matrix(chain: &PinchChain) -> f64 {
    let m = chain.source.len();
    let mut current = chain.source.clone();
    let mut worst: f64 = 0.0;
    for step in &chain.steps {
        let Ok(next) = apply_pinch(&current, step) else {
            return f64::INFINITY;
        };
        let d = DMatrix::from_diagonal(&DVector::from_row_slice(current.values()));
        let p = transposition(m, step.i, step.j);
        let swapped = p.transpose() * &d * &p;
        let produced = match step.kind {
            PinchKind::Multiplicative => {
                let (Ok(lhs), Ok(rhs)) = (SpdMatrix::new(swapped), SpdMatrix::new(d)) else {
                    return f64::INFINITY;
                };
                match spectral_mean(&lhs, &rhs, step.t) {
                    Ok(s) => s.into_inner(),
                    Err(_) => return f64::INFINITY,
                }
            }
            PinchKind::Arithmetic => &d * step.t + swapped * (1.0 - step.t),
        };
        let expected = DMatrix::from_diagonal(&DVector::from_row_slice(next.values()));
        worst = worst.max(rel_frobenius(&produced, &expected));
        current = next;
    }
    worst
}
