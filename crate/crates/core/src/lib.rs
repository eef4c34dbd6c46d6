//! Numerically erasure-robust frames.
//!
//! A frame is an `M x N` matrix whose columns span `C^M`. It is a
//! `(p, C)`-robust frame when every submatrix that keeps `N - floor(pN)`
//! columns has condition number at most `C`. This crate builds the frame
//! families for which closed-form guarantees exist, evaluates those
//! guarantees, and checks or attacks them empirically by conditioning
//! analysis of column submatrices.
//!
//! Modules:
//!
//! * [`spectral`]: frames, Gram matrices, Hermitian eigensolver, condition
//!   numbers, coherence.
//! * [`galois`]: `GF(p^n)` arithmetic and Singer difference sets.
//! * [`constructions`]: Gaussian, harmonic/Singer, MUB, simplex and
//!   simplex-group frames.
//! * [`certificates`]: closed-form bounds.
//! * [`erasure`]: exhaustive/sampled search, attacks, certification and the
//!   noisy erasure channel.

pub mod certificates;
pub mod constructions;
pub mod erasure;
mod error;
pub mod galois;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use spectral::{Frame, ScalarField, SpectralSummary, Tolerances};
