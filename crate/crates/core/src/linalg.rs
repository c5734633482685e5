//! Small dense linear algebra: row-major matrices and a packed Cholesky
//! factor.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn scalar(value: f64) -> Self {
        Self {
            rows: 1,
            cols: 1,
            data: vec![value],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Returns the diagonal when every off-diagonal entry is zero.
    pub fn diagonal_if_diagonal(&self) -> Option<Vec<f64>> {
        if !self.is_square() {
            return None;
        }
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j && self[(i, j)] != 0.0 {
                    return None;
                }
            }
        }
        Some((0..self.rows).map(|i| self[(i, i)]).collect())
    }

    /// `out = self * x`.
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.mul_vec_into(x, &mut out);
        out
    }

    /// `(A + Aᵀ) / 2`.
    pub fn symmetric_part(&self) -> Self {
        let mut m = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = 0.5 * (self[(i, j)] + self[(j, i)]);
            }
        }
        m
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        (0..self.rows)
            .map(|i| x[i] * self.row(i).iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
            .sum()
    }
}

impl core::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Lower-triangular Cholesky factor stored row-packed.
#[derive(Debug, Clone)]
pub struct PackedCholesky {
    n: usize,
    packed: Vec<f64>,
}

#[inline]
fn row_start(i: usize) -> usize {
    i * (i + 1) / 2
}

impl PackedCholesky {
    /// Factors the symmetric Toeplitz matrix whose first row is `first_row`.
    pub fn toeplitz(first_row: &[f64]) -> Result<Self> {
        Self::factor(first_row.len(), |i, j| first_row[i.abs_diff(j)])
    }

    /// Factors the symmetric matrix with entries `entry(i, j)` (only `j <= i` is queried).
    pub fn factor(n: usize, entry: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut packed = vec![0.0; row_start(n)];
        for i in 0..n {
            let ri = row_start(i);
            for j in 0..=i {
                let rj = row_start(j);
                let dot: f64 = packed[ri..ri + j]
                    .iter()
                    .zip(&packed[rj..rj + j])
                    .map(|(a, b)| a * b)
                    .sum();
                let v = entry(i, j) - dot;
                if i == j {
                    if !(v > 0.0) || !v.is_finite() {
                        return Err(Error::NotPositiveDefinite { row: i, pivot: v });
                    }
                    packed[ri + i] = math::sqrt(v);
                } else {
                    packed[ri + j] = v / packed[rj + j];
                }
            }
        }
        Ok(Self { n, packed })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.packed[row_start(i)..row_start(i) + i + 1]
    }

    /// `out = L z`.
    pub fn mul_lower_into(&self, z: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate().take(self.n) {
            *o = self.row(i).iter().zip(z).map(|(a, b)| a * b).sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_reconstructs_matrix() {
        let row = [4.0, 1.0, 0.5];
        let l = PackedCholesky::toeplitz(&row).unwrap();
        for i in 0..3 {
            for j in 0..=i {
                let s: f64 = (0..=j).map(|k| l.row(i)[k] * l.row(j)[k]).sum();
                assert!((s - row[i - j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let err = PackedCholesky::toeplitz(&[1.0, 2.0]).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { row: 1, .. }));
    }

    #[test]
    fn symmetric_part_and_forms() {
        let a = DenseMatrix::from_row_major(2, 2, vec![1.0, 2.0, 0.0, 3.0]).unwrap();
        let s = a.symmetric_part();
        assert_eq!(s.as_slice(), &[1.0, 1.0, 1.0, 3.0]);
        assert_eq!(a.quadratic_form(&[1.0, 1.0]), 6.0);
        assert_eq!(a.mul_vec(&[1.0, 1.0]), vec![3.0, 3.0]);
        assert!(a.diagonal_if_diagonal().is_none());
        assert_eq!(DenseMatrix::from_diagonal(&[2.0, 5.0]).diagonal_if_diagonal(), Some(vec![2.0, 5.0]));
    }
}
