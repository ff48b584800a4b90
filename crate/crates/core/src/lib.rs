//! Hybrid digital/analog beamforming design toolkit for large antenna arrays.
//!
//! A transmitter with many antennas but few RF chains sends `x = V_RF · V_D · s`,
//! where the analog stage `V_RF` is built from phase shifters and therefore has
//! unit-modulus entries, while the small digital stage `V_D` is unconstrained.
//! This crate provides:
//!
//! * [`numerics`] — the complex linear-algebra kernels (SVD, Hermitian
//!   eigendecomposition, LU solves) and the shared water-filling allocator,
//! * [`channel`] — geometric multipath channel generation and persistence,
//! * [`hybrid`] — beamformer data types, spectral-efficiency evaluators, the
//!   exact two-chains-per-stream realization, and finite phase alphabets,
//! * [`mimo`] — the point-to-point hybrid design (RF coordinate descent plus
//!   water-filled digital stages on both link ends),
//! * [`miso`] — the multi-user single-antenna-receiver design (zero-forcing
//!   digital stage, weighted water-filling, and the two-candidate phase
//!   descent), with matched-phase and strongest-path baselines.
//!
//! Everything is generic over the real scalar type through the [`Scalar`]
//! trait; [`Matrix64`] and [`Matrix32`] are the concrete aliases most callers
//! want.

pub mod channel;
pub mod error;
pub mod hybrid;
pub mod mimo;
pub mod miso;
pub mod numerics;

pub use error::{Error, Result};

use num_traits::{Float, FloatConst, NumAssign};
use std::fmt;
use std::iter::Sum;

/// Real scalar the toolkit is generic over (`f64` or `f32` in practice).
pub trait Scalar:
    Float + FloatConst + NumAssign + Sum + Send + Sync + fmt::Debug + fmt::Display + 'static
{
    /// Converts an `f64` constant into this scalar type.
    fn lit(x: f64) -> Self {
        Self::from(x).expect("constant representable in scalar type")
    }
}

impl<T> Scalar for T where
    T: Float + FloatConst + NumAssign + Sum + Send + Sync + fmt::Debug + fmt::Display + 'static
{
}

/// Complex number over `f64`.
pub type C64 = num_complex::Complex<f64>;
/// Complex number over `f32`.
pub type C32 = num_complex::Complex<f32>;
/// Complex matrix over `f64`, the default working type.
pub type Matrix64 = numerics::ComplexMatrix<f64>;
/// Complex matrix over `f32`.
pub type Matrix32 = numerics::ComplexMatrix<f32>;
