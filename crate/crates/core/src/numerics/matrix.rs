//! Dense column-major complex matrix type.

use crate::{Error, Result, Scalar};
use num_complex::Complex;
use std::ops::{Index, IndexMut};

/// Dense complex matrix with column-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> ComplexMatrix<T> {
    /// All-zeros matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    /// All-ones matrix.
    pub fn ones(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(T::one(), T::zero()); rows * cols],
        }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    /// Builds a matrix by evaluating `f(row, col)` for every entry.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major literal data; rows must have equal length.
    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged row data");
        Self::from_fn(r, c, |i, j| rows[i][j])
    }

    /// Builds a column vector (n×1 matrix) from a slice.
    pub fn column_vector(values: &[Complex<T>]) -> Self {
        Self {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry accessor; prefer indexing via `m[(i, j)]` in expressions.
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex<T>) {
        self[(i, j)] = value;
    }

    /// Column `j` as a contiguous slice.
    pub fn col(&self, j: usize) -> &[Complex<T>] {
        assert!(j < self.cols, "column out of range");
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [Complex<T>] {
        assert!(j < self.cols, "column out of range");
        let r = self.rows;
        &mut self.data[j * r..(j + 1) * r]
    }

    pub fn set_col(&mut self, j: usize, values: &[Complex<T>]) {
        assert_eq!(values.len(), self.rows, "column length mismatch");
        self.col_mut(j).copy_from_slice(values);
    }

    /// Copy of columns `start..start + count`.
    pub fn columns(&self, start: usize, count: usize) -> Self {
        assert!(start + count <= self.cols, "column range out of bounds");
        Self {
            rows: self.rows,
            cols: count,
            data: self.data[start * self.rows..(start + count) * self.rows].to_vec(),
        }
    }

    /// Copy of the matrix with column `j` removed.
    pub fn drop_column(&self, j: usize) -> Self {
        assert!(j < self.cols, "column out of range");
        let mut data = Vec::with_capacity(self.rows * (self.cols - 1));
        for c in 0..self.cols {
            if c != j {
                data.extend_from_slice(self.col(c));
            }
        }
        Self {
            rows: self.rows,
            cols: self.cols - 1,
            data,
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Matrix product `self · rhs`.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            for k in 0..self.cols {
                let b = rhs[(k, j)];
                if b.re == T::zero() && b.im == T::zero() {
                    continue;
                }
                let a_col = self.col(k);
                let out_col = out.col_mut(j);
                for i in 0..a_col.len() {
                    out_col[i] += a_col[i] * b;
                }
            }
        }
        out
    }

    /// Entrywise sum.
    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a + b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// Entrywise difference.
    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// Scales every entry by a complex factor.
    pub fn scale(&self, factor: Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * factor).collect(),
        }
    }

    /// Scales every entry by a real factor.
    pub fn scale_real(&self, factor: T) -> Self {
        self.scale(Complex::new(factor, T::zero()))
    }

    /// Adds `s·I` in place (square matrices only).
    pub fn add_scaled_identity(&mut self, s: T) {
        assert_eq!(self.rows, self.cols, "square matrix required");
        for i in 0..self.rows {
            let d = self[(i, i)];
            self[(i, i)] = Complex::new(d.re + s, d.im);
        }
    }

    pub fn trace(&self) -> Complex<T> {
        assert_eq!(self.rows, self.cols, "square matrix required");
        let mut t = Complex::new(T::zero(), T::zero());
        for i in 0..self.rows {
            t += self[(i, i)];
        }
        t
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> T {
        self.data
            .iter()
            .map(|z| z.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), T::max)
    }

    /// Largest entrywise difference to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch"
        );
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    /// True when every entry is finite.
    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Returns an error when any entry is non-finite.
    pub fn ensure_finite(&self, context: &'static str) -> Result<()> {
        if self.all_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite(context))
        }
    }

    /// Largest deviation from Hermitian symmetry, `max |A(i,j) − conj(A(j,i))|`.
    pub fn hermitian_deviation(&self) -> T {
        assert_eq!(self.rows, self.cols, "square matrix required");
        let mut dev = T::zero();
        for j in 0..self.cols {
            for i in 0..=j {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                dev = dev.max(d);
            }
        }
        dev
    }

    /// Hermitian part `(A + Aᴴ)/2`, exactly Hermitian entrywise.
    pub fn hermitian_part(&self) -> Self {
        assert_eq!(self.rows, self.cols, "square matrix required");
        let half = T::lit(0.5);
        let mut out = Self::zeros(self.rows, self.cols);
        for j in 0..self.cols {
            for i in 0..=j {
                let avg = (self[(i, j)] + self[(j, i)].conj()).scale(half);
                out[(i, j)] = avg;
                out[(j, i)] = avg.conj();
            }
        }
        out
    }

    /// Raw column-major storage.
    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }
}

impl<T: Scalar> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;

    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &self.data[j * self.rows + i]
    }
}

impl<T: Scalar> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &mut self.data[j * self.rows + i]
    }
}

/// Conjugated dot product `Σ conj(a_i)·b_i`.
pub(crate) fn dot_conj<T: Scalar>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Complex::new(T::zero(), T::zero());
    for (x, y) in a.iter().zip(b) {
        acc += x.conj() * y;
    }
    acc
}

/// Squared Euclidean norm of a complex slice.
pub(crate) fn norm_sqr<T: Scalar>(a: &[Complex<T>]) -> T {
    a.iter().map(|z| z.norm_sqr()).fold(T::zero(), |x, y| x + y)
}
