//! Row-major dense matrices and the handful of vector kernels the layers need.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShapeError {
    #[error("{op}: expected {expected}, got {got}")]
    Mismatch {
        op: &'static str,
        expected: String,
        got: String,
    },
    #[error("matrix data length {len} does not match {rows}x{cols}")]
    DataLength { rows: usize, cols: usize, len: usize },
    #[error("matrix dimensions must be positive, got {rows}x{cols}")]
    EmptyMatrix { rows: usize, cols: usize },
    #[error("matrix contains a non-finite entry")]
    NonFinite,
}

fn mismatch(op: &'static str, expected: impl ToString, got: impl ToString) -> ShapeError {
    ShapeError::Mismatch {
        op,
        expected: expected.to_string(),
        got: got.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, ShapeError> {
        if rows == 0 || cols == 0 {
            return Err(ShapeError::EmptyMatrix { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(ShapeError::DataLength {
                rows,
                cols,
                len: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(ShapeError::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, ShapeError> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(mismatch("from_rows", cols, bad.len()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// # Panics
    /// If either dimension is zero.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `W v`.
pub fn matvec(w: &Matrix, v: &[f64]) -> Result<Vec<f64>, ShapeError> {
    if w.cols != v.len() {
        return Err(mismatch("matvec", w.cols, v.len()));
    }
    Ok((0..w.rows).map(|r| dot(w.row(r), v)).collect())
}

/// `Wᵀ v`.
pub fn transpose_matvec(w: &Matrix, v: &[f64]) -> Result<Vec<f64>, ShapeError> {
    if w.rows != v.len() {
        return Err(mismatch("transpose_matvec", w.rows, v.len()));
    }
    let mut out = vec![0.0; w.cols];
    for (r, &vr) in v.iter().enumerate() {
        if vr == 0.0 {
            continue;
        }
        for (o, &wv) in out.iter_mut().zip(w.row(r)) {
            *o += wv * vr;
        }
    }
    Ok(out)
}

/// `acc += g hᵀ`, in place.
pub fn outer_accumulate(g: &[f64], h: &[f64], acc: &mut Matrix) -> Result<(), ShapeError> {
    if acc.shape() != (g.len(), h.len()) {
        return Err(mismatch(
            "outer_accumulate",
            format!("{}x{}", g.len(), h.len()),
            format!("{}x{}", acc.rows, acc.cols),
        ));
    }
    for (r, &gr) in g.iter().enumerate() {
        if gr == 0.0 {
            continue;
        }
        for (a, &hv) in acc.row_mut(r).iter_mut().zip(h) {
            *a += gr * hv;
        }
    }
    Ok(())
}

/// `a x + y`.
pub fn axpy(a: f64, x: &[f64], y: &[f64]) -> Result<Vec<f64>, ShapeError> {
    if x.len() != y.len() {
        return Err(mismatch("axpy", y.len(), x.len()));
    }
    Ok(x.iter().zip(y).map(|(xv, yv)| a * xv + yv).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_matvec() {
        let v = matvec(&Matrix::identity(3), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(v, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn zero_matvec() {
        let v = matvec(&Matrix::zeros(2, 3), &[4.0, -1.0, 9.0]).unwrap();
        assert_eq!(v, vec![0.0, 0.0]);
    }

    #[test]
    fn small_matvec() {
        let w = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(matvec(&w, &[1.0, 1.0]).unwrap(), vec![3.0, 7.0]);
        assert!(matvec(&w, &[1.0]).is_err());
    }

    #[test]
    fn outer_product_accumulates() {
        let mut acc = Matrix::zeros(2, 2);
        outer_accumulate(&[1.0, 0.0], &[2.0, 3.0], &mut acc).unwrap();
        assert_eq!(acc.data(), &[2.0, 3.0, 0.0, 0.0]);
        outer_accumulate(&[1.0, 0.0], &[2.0, 3.0], &mut acc).unwrap();
        assert_eq!(acc.data(), &[4.0, 6.0, 0.0, 0.0]);
        let before = acc.clone();
        outer_accumulate(&[0.0, 0.0], &[2.0, 3.0], &mut acc).unwrap();
        assert_eq!(acc, before);
        assert!(outer_accumulate(&[1.0], &[2.0, 3.0], &mut acc).is_err());
    }

    #[test]
    fn axpy_and_transpose() {
        assert_eq!(axpy(0.0, &[5.0, 6.0], &[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
        assert!(axpy(1.0, &[1.0], &[1.0, 2.0]).is_err());
        assert_eq!(
            transpose_matvec(&Matrix::identity(3), &[1.0, 2.0, 3.0]).unwrap(),
            vec![1.0, 2.0, 3.0]
        );
        let w = Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        assert_eq!(transpose_matvec(&w, &[0.0, 1.0]).unwrap(), w.row(1).to_vec());
        assert_eq!(transpose_matvec(&w, &[1.0, 0.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(matches!(
            Matrix::new(2, 2, vec![1.0; 3]),
            Err(ShapeError::DataLength { .. })
        ));
        assert!(matches!(
            Matrix::new(1, 1, vec![f64::NAN]),
            Err(ShapeError::NonFinite)
        ));
        assert!(Matrix::new(0, 2, vec![]).is_err());
    }

    proptest! {
        #[test]
        fn adjoint_identity(
            rows in 1usize..6, cols in 1usize..6,
            seed in proptest::collection::vec(-1.0f64..1.0, 36 + 12)
        ) {
            let w = Matrix::new(rows, cols, seed[..rows * cols].to_vec()).unwrap();
            let v = &seed[36..36 + cols];
            let u = &seed[42..42 + rows];
            let lhs = dot(&matvec(&w, v).unwrap(), u);
            let rhs = dot(v, &transpose_matvec(&w, u).unwrap());
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }
    }
}
