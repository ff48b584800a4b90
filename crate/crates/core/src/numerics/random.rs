//! Seeded random matrix generation.

use super::matrix::ComplexMatrix;
use crate::Scalar;
use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Matrix of i.i.d. circularly symmetric complex Gaussian entries with unit
/// variance (real and imaginary parts each N(0, 1/2)).
///
/// Entries are drawn in column-major order, real part before imaginary part,
/// so a fixed seed reproduces the matrix exactly.
pub fn complex_gaussian<T, R>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix<T>
where
    T: Scalar,
    StandardNormal: Distribution<T>,
    R: Rng + ?Sized,
{
    let scale = T::lit(0.5).sqrt();
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: T = rng.sample(StandardNormal);
        let im: T = rng.sample(StandardNormal);
        Complex::new(re * scale, im * scale)
    })
}
