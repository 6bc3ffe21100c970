//! Metric and spectral geometric means of symmetric positive definite
//! matrices, the semi-metric geometry they induce, the σ and ~ tolerance
//! relations, and spectral pinch chains for log-majorized tuples.
//!
//! Every matrix function goes through one symmetric eigendecomposition;
//! see [`spd`].

pub mod error;
pub mod geometry;
pub mod io;
pub mod means;
pub mod pinch;
pub mod sampling;
pub mod spd;
pub mod tolerance;
pub mod verify;

pub use error::{Error, Result};
pub use means::{geometric_mean, metric_mean, spectral_mean};
pub use pinch::{PinchChain, PinchKind, PinchStep, PositiveTuple};
pub use spd::SpdMatrix;
