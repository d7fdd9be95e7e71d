//! Small dense row-major matrices, generic over the float type.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Tolerance on the Gram-matrix deviation for orthonormal rows.
pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// Tolerance on `det = +1` for rotations.
pub const DET_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { T::one() } else { T::zero() })
    }

    pub fn diag(d: &[T]) -> Self {
        let n = d.len();
        Self::from_fn(n, n, |r, c| if r == c { d[r] } else { T::zero() })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: rhs.rows,
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let src = rhs.row(k);
                let dst = out.row_mut(i);
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d = *d + a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: v.len(),
            });
        }
        Ok((0..self.rows).map(|r| dot(self.row(r), v)).collect())
    }

    /// `selfᵀ · v`.
    pub fn tr_matvec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                actual: v.len(),
            });
        }
        let mut out = vec![T::zero(); self.cols];
        for (r, &vr) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(r)) {
                *o = *o + a * vr;
            }
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a + b)
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                actual: rhs.rows * rhs.cols,
            });
        }
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| a * s).collect(),
        }
    }

    pub fn frobenius(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &a| acc + a * a).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &a| acc.max(a.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|a| a.is_finite())
    }

    /// Max absolute entry of `self · selfᵀ − I`.
    pub fn gram_deviation(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in i..self.rows {
                let g = dot(self.row(i), self.row(j));
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }

    /// Determinant by LU with partial pivoting.
    pub fn det(&self) -> Result<T> {
        if !self.is_square() {
            return Err(Error::InvalidArgument("determinant of non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = T::one();
        for k in 0..n {
            let pivot = (k..n)
                .max_by(|&x, &y| {
                    a[x * n + k]
                        .abs()
                        .partial_cmp(&a[y * n + k].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(k);
            if a[pivot * n + k] == T::zero() {
                return Ok(T::zero());
            }
            if pivot != k {
                for c in 0..n {
                    a.swap(k * n + c, pivot * n + c);
                }
                det = -det;
            }
            let p = a[k * n + k];
            det = det * p;
            for r in k + 1..n {
                let f = a[r * n + k] / p;
                if f != T::zero() {
                    for c in k..n {
                        a[r * n + c] = a[r * n + c] - f * a[k * n + c];
                    }
                }
            }
        }
        Ok(det)
    }

    /// Orthonormalizes the rows in place with two passes of modified
    /// Gram–Schmidt. Fails if the rows are linearly dependent.
    pub fn orthonormalize_rows(&mut self) -> Result<()> {
        for _pass in 0..2 {
            for i in 0..self.rows {
                for j in 0..i {
                    let (head, tail) = self.data.split_at_mut(i * self.cols);
                    let rj = &head[j * self.cols..(j + 1) * self.cols];
                    let ri = &mut tail[..self.cols];
                    let p = dot(ri, rj);
                    for (x, &y) in ri.iter_mut().zip(rj) {
                        *x = *x - p * y;
                    }
                }
                let ri = self.row_mut(i);
                let norm = dot(ri, ri).sqrt();
                if !(norm > T::epsilon()) {
                    return Err(Error::Degenerate("rank-deficient rows".into()));
                }
                for x in ri.iter_mut() {
                    *x = *x / norm;
                }
            }
        }
        Ok(())
    }

    /// The first `m` rows.
    pub fn top_rows(&self, m: usize) -> Result<Self> {
        if m > self.rows {
            return Err(Error::InvalidArgument(format!(
                "cannot take {m} rows of a {}-row matrix",
                self.rows
            )));
        }
        Ok(Self {
            rows: m,
            cols: self.cols,
            data: self.data[..m * self.cols].to_vec(),
        })
    }

    pub fn cast<U: Real>(&self) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|a| U::from_f64_lossy(a.to_f64_lossy()))
                .collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

#[inline]
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm<T: Real>(v: &[T]) -> T {
    dot(v, v).sqrt()
}

/// An element of SO(n): orthonormal rows and determinant +1.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationMatrix(Mat<f64>);

impl RotationMatrix {
    pub fn new(m: Mat<f64>) -> Result<Self> {
        if !m.is_square() || m.rows() == 0 {
            return Err(Error::NotOrthogonal(format!(
                "shape {}x{} is not square",
                m.rows(),
                m.cols()
            )));
        }
        let dev = m.gram_deviation();
        if !(dev <= ORTHONORMAL_TOL) {
            return Err(Error::NotOrthogonal(format!("Gram deviation {dev:e}")));
        }
        let det = m.det()?;
        if !((det - 1.0).abs() <= DET_TOL) {
            return Err(Error::NotOrthogonal(format!("determinant {det}")));
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Self {
        Self(Mat::identity(n))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> Mat<f64> {
        self.0
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.transpose())
    }

    /// Product of two rotations; stays within tolerance for short chains.
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        Ok(Self(self.0.matmul(&rhs.0)?))
    }

    /// The first `m` rows as a projection.
    pub fn truncate(&self, m: usize) -> Result<ProjectionMatrix> {
        ProjectionMatrix::new(self.0.top_rows(m)?)
    }
}

/// An `m̃ × m` matrix with orthonormal rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix(Mat<f64>);

impl ProjectionMatrix {
    pub fn new(m: Mat<f64>) -> Result<Self> {
        if m.rows() == 0 || m.rows() > m.cols() {
            return Err(Error::NotOrthogonal(format!(
                "projection shape {}x{} invalid",
                m.rows(),
                m.cols()
            )));
        }
        let dev = m.gram_deviation();
        if !(dev <= ORTHONORMAL_TOL) {
            return Err(Error::NotOrthogonal(format!("Gram deviation {dev:e}")));
        }
        Ok(Self(m))
    }

    pub fn out_dim(&self) -> usize {
        self.0.rows()
    }

    pub fn in_dim(&self) -> usize {
        self.0.cols()
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.0
    }

    pub fn apply(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.0.matvec(w)
    }

    pub fn apply_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.0.tr_matvec(x)
    }
}

/// Wire form of a matrix: a `dim`/`rows`/`cols` header and row-major entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<f64>,
}

impl From<&Mat<f64>> for MatrixJson {
    fn from(m: &Mat<f64>) -> Self {
        Self {
            dim: m.is_square().then_some(m.rows()),
            rows: m.rows(),
            cols: m.cols(),
            entries: m.as_slice().to_vec(),
        }
    }
}

impl TryFrom<MatrixJson> for Mat<f64> {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        if let Some(d) = j.dim {
            if d != j.rows || d != j.cols {
                return Err(Error::Malformed(format!(
                    "dim {d} disagrees with shape {}x{}",
                    j.rows, j.cols
                )));
            }
        }
        Mat::from_vec(j.rows, j.cols, j.entries)
    }
}

impl Serialize for Mat<f64> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mat<f64> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        Mat::try_from(j).map_err(serde::de::Error::custom)
    }
}
