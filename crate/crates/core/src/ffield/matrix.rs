use std::fmt;

use super::{FieldError, Gf};
use crate::rng::LabRng;

/// Dense row-major matrix over a [`Gf`].
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: Gf,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over {:?} [", self.rows, self.cols, self.field)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|&v| self.field.to_hex(v)).collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zero(field: &Gf, rows: usize, cols: usize) -> Self {
        Matrix { field: field.clone(), rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(field: &Gf, n: usize) -> Self {
        Self::scalar(field, n, 1)
    }

    pub fn scalar(field: &Gf, n: usize, c: u32) -> Self {
        let mut m = Self::zero(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = c;
        }
        m
    }

    pub fn from_flat(field: &Gf, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self, FieldError> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(FieldError::DimensionMismatch(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        if let Some(&v) = data.iter().find(|&&v| !field.contains(v)) {
            return Err(FieldError::ElementOutOfRange { value: v as u64, q: field.order() });
        }
        Ok(Matrix { field: field.clone(), rows, cols, data })
    }

    pub fn from_rows(field: &Gf, rows: &[Vec<u32>]) -> Result<Self, FieldError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(FieldError::DimensionMismatch("ragged rows".into()));
        }
        Self::from_flat(field, rows.len(), cols, rows.concat())
    }

    /// Square matrix from a row-major flattened vector of length `n²`.
    pub fn unflatten_square(field: &Gf, v: &[u32]) -> Result<Self, FieldError> {
        let n = (v.len() as f64).sqrt().round() as usize;
        if n * n != v.len() {
            return Err(FieldError::DimensionMismatch(format!("{} is not a perfect square", v.len())));
        }
        Self::from_flat(field, n, n, v.to_vec())
    }

    pub fn random(field: &Gf, rows: usize, cols: usize, rng: &mut LabRng) -> Self {
        let data = (0..rows * cols).map(|_| field.random(rng)).collect();
        Matrix { field: field.clone(), rows, cols, data }
    }

    /// Rejection-samples until invertible.
    pub fn random_invertible(field: &Gf, n: usize, rng: &mut LabRng) -> Self {
        loop {
            let m = Self::random(field, n, n, rng);
            if m.is_invertible() {
                return m;
            }
        }
    }

    pub fn field(&self) -> &Gf {
        &self.field
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

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Row-major entries; this is the matrix-as-vector flattening.
    pub fn as_flat(&self) -> &[u32] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [u32] {
        &mut self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    fn check_field(&self, other: &Matrix) -> Result<(), FieldError> {
        if self.field != other.field {
            Err(FieldError::FieldMismatch)
        } else {
            Ok(())
        }
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, FieldError> {
        self.check_field(other)?;
        if self.cols != other.rows {
            return Err(FieldError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = Matrix::zero(f, self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0 {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o = f.add(*o, f.mul(a, b));
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix, FieldError> {
        self.check_field(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(FieldError::DimensionMismatch("addition of differently shaped matrices".into()));
        }
        let f = &self.field;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.add(a, b)).collect();
        Ok(Matrix { field: f.clone(), rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, c: u32) -> Matrix {
        let f = &self.field;
        let data = self.data.iter().map(|&a| f.mul(a, c)).collect();
        Matrix { field: f.clone(), rows: self.rows, cols: self.cols, data }
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zero(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.get(r, c);
            }
        }
        out
    }

    /// Gauss–Jordan inverse. A singular input yields `Err(FieldError::Singular)`,
    /// which callers treat as an ordinary outcome.
    pub fn inverse(&self) -> Result<Matrix, FieldError> {
        if !self.is_square() {
            return Err(FieldError::DimensionMismatch("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let f = &self.field;
        let mut a = self.data.clone();
        let mut inv = Matrix::identity(f, n).data;
        for col in 0..n {
            let pivot = (col..n).find(|&r| a[r * n + col] != 0).ok_or(FieldError::Singular)?;
            if pivot != col {
                for c in 0..n {
                    a.swap(pivot * n + c, col * n + c);
                    inv.swap(pivot * n + c, col * n + c);
                }
            }
            let s = f.inv(a[col * n + col]);
            for c in 0..n {
                a[col * n + c] = f.mul(a[col * n + c], s);
                inv[col * n + c] = f.mul(inv[col * n + c], s);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[r * n + col];
                if factor == 0 {
                    continue;
                }
                for c in 0..n {
                    a[r * n + c] = f.sub(a[r * n + c], f.mul(factor, a[col * n + c]));
                    inv[r * n + c] = f.sub(inv[r * n + c], f.mul(factor, inv[col * n + c]));
                }
            }
        }
        Ok(Matrix { field: f.clone(), rows: n, cols: n, data: inv })
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    pub fn rank(&self) -> usize {
        let mut rows = self.to_rows();
        super::subspace::rref_in_place(&self.field, &mut rows, self.cols).len()
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && (0..self.rows).all(|r| (0..self.cols).all(|c| self.get(r, c) == u32::from(r == c)))
    }
}
