//! Thin singular value decomposition via one-sided Jacobi rotations.

use super::eig::jacobi_rotation;
use super::matrix::{dot_conj, norm_sqr, ComplexMatrix};
use crate::Scalar;
use num_complex::Complex;

/// Thin SVD `A = U·diag(s)·Vᴴ` with `k = min(rows, cols)` columns each side.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    /// Left singular vectors, `rows × k`.
    pub u: ComplexMatrix<T>,
    /// Singular values, descending and non-negative.
    pub s: Vec<T>,
    /// Right singular vectors, `cols × k`.
    pub v: ComplexMatrix<T>,
}

/// Thin SVD of a complex matrix; singular values sorted descending, ties keep
/// the pre-sort column order.
pub fn svd<T: Scalar>(a: &ComplexMatrix<T>) -> Svd<T> {
    assert!(a.rows() > 0 && a.cols() > 0, "empty matrix");
    if a.rows() >= a.cols() {
        svd_tall(a)
    } else {
        // Decompose the adjoint and swap the factor roles.
        let t = svd_tall(&a.adjoint());
        Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        }
    }
}

/// One-sided Jacobi on a tall (rows ≥ cols) matrix: rotate column pairs until
/// mutually orthogonal, so column norms become the singular values.
fn svd_tall<T: Scalar>(a: &ComplexMatrix<T>) -> Svd<T> {
    let n = a.cols();
    let mut work = a.clone();
    let mut v = ComplexMatrix::identity(n);
    let eps = T::epsilon();

    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let cp = work.col(p);
                let cq = work.col(q);
                let app = norm_sqr(cp);
                let aqq = norm_sqr(cq);
                let g = dot_conj(cp, cq);
                // Orthogonal-enough pairs (relative criterion) are skipped.
                if g.norm() <= eps * (app * aqq).sqrt() {
                    continue;
                }
                let (c, s, u) = match jacobi_rotation(app, aqq, g) {
                    Some(r) => r,
                    None => continue,
                };
                let su = Complex::new(s, T::zero()) * u;
                rotated = true;
                for i in 0..work.rows() {
                    let xp = work[(i, p)];
                    let xq = work[(i, q)];
                    work[(i, p)] = xp.scale(c) + xq * su.conj();
                    work[(i, q)] = xq.scale(c) - xp * su;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = vp.scale(c) + vq * su.conj();
                    v[(i, q)] = vq.scale(c) - vp * su;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<T> = (0..n).map(|j| norm_sqr(work.col(j)).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).expect("finite singular values"));

    let s: Vec<T> = order.iter().map(|&j| norms[j]).collect();
    let mut u = ComplexMatrix::zeros(a.rows(), n);
    for (dst, &src) in order.iter().enumerate() {
        let norm = norms[src];
        if norm > T::zero() {
            let inv = T::one() / norm;
            let col: Vec<Complex<T>> = work.col(src).iter().map(|z| z.scale(inv)).collect();
            u.set_col(dst, &col);
        }
    }
    let v_sorted = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Svd { u, s, v: v_sorted }
}
