//! Complex linear-algebra kernels and the shared water-filling allocator.
//!
//! Only the operations the beamforming designs actually need are provided;
//! this is not a general-purpose linear-algebra layer. All routines are pure
//! functions of their inputs and safe to call concurrently.

mod eig;
mod matrix;
mod random;
mod solve;
mod svd;
mod waterfill;

pub use eig::{herm_eig, inv_sqrt_psd, HermEig};
pub use matrix::ComplexMatrix;
pub use random::complex_gaussian;
pub use solve::{inverse, log2_det, lu, solve, LuFactors};
pub use svd::{svd, Svd};
pub use waterfill::{waterfill, WaterfillResult};
