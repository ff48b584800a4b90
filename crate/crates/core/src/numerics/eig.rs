//! Hermitian eigendecomposition via cyclic complex Jacobi rotations.

use super::matrix::ComplexMatrix;
use crate::{Error, Result, Scalar};
use num_complex::Complex;

/// Eigendecomposition of a Hermitian matrix: `A = V·diag(λ)·Vᴴ`.
#[derive(Debug, Clone)]
pub struct HermEig<T> {
    /// Real eigenvalues in descending order.
    pub values: Vec<T>,
    /// Matching eigenvectors as columns.
    pub vectors: ComplexMatrix<T>,
}

/// Plane rotation `J = [[c, −s·u], [s·conj(u), c]]` that diagonalizes the
/// Hermitian 2×2 block `[[a, g], [conj(g), b]]` under `Jᴴ·(block)·J`.
///
/// Returns `None` when `g = 0` (already diagonal). `c` and `s` are real,
/// `u = g/|g|`.
pub(crate) fn jacobi_rotation<T: Scalar>(
    a: T,
    b: T,
    g: Complex<T>,
) -> Option<(T, T, Complex<T>)> {
    let mag = g.norm();
    if mag == T::zero() {
        return None;
    }
    let u = g / mag;
    let tau = (b - a) / (mag + mag);
    // Inner root of t² − 2τt − 1 = 0; |t| ≤ 1 keeps the rotation small.
    let t = if tau >= T::zero() {
        -(T::one() / (tau + (T::one() + tau * tau).sqrt()))
    } else {
        T::one() / (-tau + (T::one() + tau * tau).sqrt())
    };
    let c = T::one() / (T::one() + t * t).sqrt();
    let s = t * c;
    Some((c, s, u))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
///
/// Input must be Hermitian within `1e-10` relative to its largest entry;
/// asymmetric input is rejected. Ties in the eigenvalue ordering keep the
/// pre-sort (Jacobi) order for determinism.
pub fn herm_eig<T: Scalar>(a: &ComplexMatrix<T>) -> Result<HermEig<T>> {
    assert_eq!(a.rows(), a.cols(), "square matrix required");
    assert!(a.rows() > 0, "empty matrix");
    a.ensure_finite("herm_eig input")?;

    let scale = a.max_abs().max(T::one());
    let deviation = a.hermitian_deviation();
    let tolerance = scale * T::lit(1e-10);
    if deviation > tolerance {
        return Err(Error::NotHermitian {
            deviation: deviation.to_f64().unwrap_or(f64::NAN),
            tolerance: tolerance.to_f64().unwrap_or(f64::NAN),
        });
    }

    let n = a.rows();
    let mut b = a.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let stop = b.max_abs() * T::epsilon() * T::lit(n as f64);

    for _sweep in 0..100 {
        let mut off_max = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                let g = b[(p, q)];
                off_max = off_max.max(g.norm());
                if g.norm() <= stop {
                    continue;
                }
                let (c, s, u) = match jacobi_rotation(b[(p, p)].re, b[(q, q)].re, g) {
                    Some(r) => r,
                    None => continue,
                };
                let su = Complex::new(s, T::zero()) * u;
                // Column update B ← B·J.
                for i in 0..n {
                    let bp = b[(i, p)];
                    let bq = b[(i, q)];
                    b[(i, p)] = bp.scale(c) + bq * su.conj();
                    b[(i, q)] = bq.scale(c) - bp * su;
                }
                // Row update B ← Jᴴ·B.
                for k in 0..n {
                    let rp = b[(p, k)];
                    let rq = b[(q, k)];
                    b[(p, k)] = rp.scale(c) + rq * su;
                    b[(q, k)] = rq.scale(c) - rp * su.conj();
                }
                let zero = Complex::new(T::zero(), T::zero());
                b[(p, q)] = zero;
                b[(q, p)] = zero;
                // Accumulate eigenvectors V ← V·J.
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = vp.scale(c) + vq * su.conj();
                    v[(i, q)] = vq.scale(c) - vp * su;
                }
            }
        }
        if off_max <= stop {
            break;
        }
    }

    let raw: Vec<T> = (0..n).map(|i| b[(i, i)].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| raw[j].partial_cmp(&raw[i]).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| raw[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermEig { values, vectors })
}

/// Inverse square root of a Hermitian PSD matrix with an eigenvalue floor.
///
/// Eigenvalues below `eigen_floor × λ_max` are clamped to that floor before
/// inversion, so near-singular Gram matrices stay usable.
pub fn inv_sqrt_psd<T: Scalar>(q: &ComplexMatrix<T>, eigen_floor: T) -> Result<ComplexMatrix<T>> {
    let eig = herm_eig(&q.hermitian_part())?;
    let lambda_max = eig.values[0];
    // Rejects zero, negative, and NaN leading eigenvalues alike.
    if lambda_max.partial_cmp(&T::zero()) != Some(core::cmp::Ordering::Greater) {
        return Err(Error::Numerical(
            "inverse square root requires a positive leading eigenvalue".into(),
        ));
    }
    let floor = lambda_max * eigen_floor;
    let n = q.rows();
    // V·diag(1/√λ)·Vᴴ, with clamped eigenvalues.
    let mut scaled = eig.vectors.clone();
    for j in 0..n {
        let lambda = eig.values[j].max(floor);
        let inv_sqrt = T::one() / lambda.sqrt();
        for z in scaled.col_mut(j) {
            *z = z.scale(inv_sqrt);
        }
    }
    Ok(scaled.matmul(&eig.vectors.adjoint()))
}
