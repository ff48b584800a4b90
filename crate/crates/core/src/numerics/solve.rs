//! LU factorization with partial pivoting, linear solves, and log-determinants.

use super::matrix::ComplexMatrix;
use crate::{Error, Result, Scalar};

/// LU factorization of a square matrix with partial pivoting.
#[derive(Debug, Clone)]
pub struct LuFactors<T> {
    lu: ComplexMatrix<T>,
    pivots: Vec<usize>,
}

/// Factors `a` as `P·A = L·U`; fails when a pivot falls below the noise floor.
///
/// `context` names the matrix in the error message.
pub fn lu<T: Scalar>(a: &ComplexMatrix<T>, context: &'static str) -> Result<LuFactors<T>> {
    assert_eq!(a.rows(), a.cols(), "square matrix required");
    let n = a.rows();
    let mut m = a.clone();
    let mut pivots = Vec::with_capacity(n);
    let tol = a.max_abs() * T::epsilon() * T::lit(n.max(1) as f64);

    for k in 0..n {
        let mut p = k;
        let mut best = m[(k, k)].norm();
        for i in k + 1..n {
            let mag = m[(i, k)].norm();
            if mag > best {
                best = mag;
                p = i;
            }
        }
        if best <= tol {
            return Err(Error::Singular(context));
        }
        if p != k {
            for j in 0..n {
                let tmp = m[(k, j)];
                m[(k, j)] = m[(p, j)];
                m[(p, j)] = tmp;
            }
        }
        pivots.push(p);
        let pivot = m[(k, k)];
        for i in k + 1..n {
            let factor = m[(i, k)] / pivot;
            m[(i, k)] = factor;
        }
        for j in k + 1..n {
            let ukj = m[(k, j)];
            if ukj.re == T::zero() && ukj.im == T::zero() {
                continue;
            }
            for i in k + 1..n {
                let lik = m[(i, k)];
                m[(i, j)] -= lik * ukj;
            }
        }
    }
    Ok(LuFactors { lu: m, pivots })
}

impl<T: Scalar> LuFactors<T> {
    /// Solves `A·X = rhs` for `X`.
    pub fn solve(&self, rhs: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let n = self.lu.rows();
        assert_eq!(rhs.rows(), n, "right-hand side row mismatch");
        let mut x = rhs.clone();
        for j in 0..x.cols() {
            // Apply row interchanges in factorization order.
            for k in 0..n {
                let p = self.pivots[k];
                if p != k {
                    let tmp = x[(k, j)];
                    x[(k, j)] = x[(p, j)];
                    x[(p, j)] = tmp;
                }
            }
            // Forward substitution with unit lower triangle.
            for k in 0..n {
                let xk = x[(k, j)];
                if xk.re == T::zero() && xk.im == T::zero() {
                    continue;
                }
                for i in k + 1..n {
                    let lik = self.lu[(i, k)];
                    x[(i, j)] -= lik * xk;
                }
            }
            // Back substitution with the upper triangle.
            for k in (0..n).rev() {
                let mut acc = x[(k, j)];
                for i in k + 1..n {
                    acc -= self.lu[(k, i)] * x[(i, j)];
                }
                x[(k, j)] = acc / self.lu[(k, k)];
            }
        }
        x
    }

    /// Base-2 logarithm of `|det A|`.
    pub fn log2_abs_det(&self) -> T {
        let n = self.lu.rows();
        let mut acc = T::zero();
        for k in 0..n {
            acc += self.lu[(k, k)].norm().log2();
        }
        acc
    }
}

/// Solves `A·X = rhs`.
pub fn solve<T: Scalar>(
    a: &ComplexMatrix<T>,
    rhs: &ComplexMatrix<T>,
    context: &'static str,
) -> Result<ComplexMatrix<T>> {
    Ok(lu(a, context)?.solve(rhs))
}

/// Matrix inverse via LU.
pub fn inverse<T: Scalar>(a: &ComplexMatrix<T>, context: &'static str) -> Result<ComplexMatrix<T>> {
    let id = ComplexMatrix::identity(a.rows());
    solve(a, &id, context)
}

/// Base-2 logarithm of `|det A|`.
pub fn log2_det<T: Scalar>(a: &ComplexMatrix<T>, context: &'static str) -> Result<T> {
    Ok(lu(a, context)?.log2_abs_det())
}
