//! Dense complex matrix carrier.
//!
//! Inner products follow one convention everywhere in the crate:
//! `(x, y) = Σ x_j · conj(y_j)`, linear in the first slot, so the Rayleigh
//! quotient of `T` at `x` is `(Tx, x) = x^H T x`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::NumlinError;

/// Dense complex matrix stored in an nalgebra buffer.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<Complex64>,
}

impl ComplexMatrix {
    /// Build from row-major entries. Rejects length mismatches and non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self, NumlinError> {
        if data.len() != rows * cols {
            return Err(NumlinError::ShapeMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(NumlinError::NonFinite { index: pos });
        }
        Ok(Self {
            inner: DMatrix::from_row_slice(rows, cols, &data),
        })
    }

    /// Row-major construction for literals; panics on a length mismatch.
    pub fn from_row_slice(rows: usize, cols: usize, data: &[Complex64]) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data length mismatch");
        Self {
            inner: DMatrix::from_row_slice(rows, cols, data),
        }
    }

    /// Row-major construction from real entries.
    pub fn from_real_rows(rows: usize, cols: usize, data: &[f64]) -> Self {
        let data: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_row_slice(rows, cols, &data)
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self {
            inner: DMatrix::from_fn(rows, cols, f),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: DMatrix::identity(n, n),
        }
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { Complex64::new(0.0, 0.0) })
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let d: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_diag(&d)
    }

    /// Matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_columns(rows: usize, columns: &[Vec<Complex64>]) -> Self {
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i])
    }

    pub(crate) fn from_nalgebra(inner: DMatrix<Complex64>) -> Self {
        Self { inner }
    }

    pub(crate) fn as_nalgebra(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn require_square(&self) -> Result<usize, NumlinError> {
        if self.is_square() {
            Ok(self.rows())
        } else {
            Err(NumlinError::NotSquare {
                rows: self.rows(),
                cols: self.cols(),
            })
        }
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<Complex64> {
        let (r, c) = (self.rows(), self.cols());
        let mut out = Vec::with_capacity(r * c);
        for i in 0..r {
            for j in 0..c {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.inner.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        self.inner.column(j).iter().copied().collect()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        self.inner.diagonal().iter().copied().collect()
    }

    /// Copy of the `nrows × ncols` block starting at `(row, col)`.
    pub fn block(&self, row: usize, col: usize, nrows: usize, ncols: usize) -> Self {
        Self {
            inner: self.inner.view((row, col), (nrows, ncols)).into_owned(),
        }
    }

    /// Stack `top` above `bottom`.
    pub fn vstack(top: &Self, bottom: &Self) -> Self {
        assert_eq!(top.cols(), bottom.cols(), "vstack column mismatch");
        let r = top.rows();
        Self::from_fn(
            r + bottom.rows(),
            top.cols(),
            |i, j| {
                if i < r {
                    top[(i, j)]
                } else {
                    bottom[(i - r, j)]
                }
            },
        )
    }

    pub fn hstack(left: &Self, right: &Self) -> Self {
        assert_eq!(left.rows(), right.rows(), "hstack row mismatch");
        let c = left.cols();
        Self::from_fn(
            left.rows(),
            c + right.cols(),
            |i, j| {
                if j < c {
                    left[(i, j)]
                } else {
                    right[(i, j - c)]
                }
            },
        )
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            inner: self.inner.transpose(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { inner: &self.inner * s }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// `self + shift·I` for square matrices.
    pub fn shifted(&self, shift: Complex64) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows().min(self.cols()) {
            out.inner[(i, i)] += shift;
        }
        out
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols(), "vector length mismatch");
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.inner[(i, j)] * x[j]).sum())
            .collect()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        Self {
            inner: self.inner.kronecker(&other.inner),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.inner.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.inner.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Spectral (operator 2-) norm, the largest singular value.
    pub fn norm2(&self) -> f64 {
        if self.rows() == 0 || self.cols() == 0 {
            return 0.0;
        }
        self.inner.singular_values().iter().copied().fold(0.0, f64::max)
    }

    /// LU-based inverse; `None` when the factorization hits an exact zero pivot.
    pub fn inverse(&self) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        self.inner.clone().lu().try_inverse().map(Self::from_nalgebra)
    }

    /// `‖self − other‖_2`.
    pub fn distance(&self, other: &Self) -> f64 {
        (self - other).norm2()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.inner[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut Complex64 {
        &mut self.inner[idx]
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols(), rhs.rows(), "matrix product shape mismatch");
        ComplexMatrix::from_nalgebra(&self.inner * &rhs.inner)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_nalgebra(&self.inner + &rhs.inner)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_nalgebra(&self.inner - &rhs.inner)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix::from_nalgebra(-&self.inner)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.inner[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// `(x, y) = Σ x_j · conj(y_j)`.
pub fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    assert_eq!(x.len(), y.len(), "inner product length mismatch");
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

pub fn vec_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Scale `x` to unit length; returns `None` for the zero vector.
pub fn normalized(x: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = vec_norm(x);
    if n == 0.0 || !n.is_finite() {
        return None;
    }
    Some(x.iter().map(|z| z / n).collect())
}

/// Rayleigh quotient `(Tx, x) / (x, x)`.
pub fn rayleigh_quotient(t: &ComplexMatrix, x: &[Complex64]) -> Complex64 {
    let tx = t.apply(x);
    inner(&tx, x) / inner(x, x).re
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_bad_length_and_nan() {
        assert!(matches!(
            ComplexMatrix::new(2, 2, vec![c(1.0, 0.0); 3]),
            Err(NumlinError::ShapeMismatch { expected: 4, actual: 3 })
        ));
        let mut data = vec![c(1.0, 0.0); 4];
        data[2] = c(f64::NAN, 0.0);
        assert!(matches!(ComplexMatrix::new(2, 2, data), Err(NumlinError::NonFinite { index: 2 })));
    }

    #[test]
    fn row_major_round_trip() {
        let data = vec![c(1.0, 2.0), c(3.0, 4.0), c(5.0, 6.0), c(7.0, 8.0), c(9.0, 0.0), c(0.0, 1.0)];
        let m = ComplexMatrix::new(2, 3, data.clone()).unwrap();
        assert_eq!(m[(0, 1)], c(3.0, 4.0));
        assert_eq!(m[(1, 0)], c(7.0, 8.0));
        assert_eq!(m.to_row_major(), data);
    }

    #[test]
    fn inner_is_linear_in_first_slot() {
        let x = vec![c(1.0, 1.0), c(0.0, 2.0)];
        let y = vec![c(2.0, 0.0), c(1.0, -1.0)];
        let i = c(0.0, 1.0);
        let ix: Vec<_> = x.iter().map(|z| z * i).collect();
        let iy: Vec<_> = y.iter().map(|z| z * i).collect();
        assert!((inner(&ix, &y) - i * inner(&x, &y)).norm() < 1e-15);
        assert!((inner(&x, &iy) + i * inner(&x, &y)).norm() < 1e-15);
    }

    #[test]
    fn stacking_and_blocks() {
        let a = ComplexMatrix::identity(2);
        let b = ComplexMatrix::from_real_diag(&[2.0, 3.0]);
        let s = ComplexMatrix::vstack(&a, &b);
        assert_eq!(s.rows(), 4);
        assert_eq!(s.block(2, 0, 2, 2), b);
        let h = ComplexMatrix::hstack(&a, &b);
        assert_eq!(h.block(0, 2, 2, 2), b);
    }

    #[test]
    fn norm2_of_nilpotent() {
        let m = ComplexMatrix::from_real_rows(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!((m.norm2() - 1.0).abs() < 1e-14);
        assert_eq!(ComplexMatrix::zeros(0, 3).norm2(), 0.0);
    }
}
