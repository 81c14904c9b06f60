//! Dense component arrays on a single chart.
//!
//! A [`Tensor`] stores `dim^(upper+lower)` components in row-major order, upper
//! indices first. Rank-2 objects convert to and from [`Mat`] for linear algebra.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dim: usize,
    upper: usize,
    lower: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(dim: usize, upper: usize, lower: usize) -> Self {
        Tensor { dim, upper, lower, data: vec![0.0; dim.pow((upper + lower) as u32)] }
    }

    pub fn from_vec(dim: usize, upper: usize, lower: usize, data: Vec<f64>) -> Result<Self> {
        let want = dim.pow((upper + lower) as u32);
        if data.len() != want {
            return Err(Error::ValenceMismatch {
                expected: format!("{want} components for valence ({upper},{lower}) in dim {dim}"),
                found: format!("{} components", data.len()),
            });
        }
        Ok(Tensor { dim, upper, lower, data })
    }

    pub fn scalar(v: f64) -> Self {
        Tensor { dim: 1, upper: 0, lower: 0, data: vec![v] }
    }

    pub fn vector(v: &[f64]) -> Self {
        Tensor { dim: v.len(), upper: 1, lower: 0, data: v.to_vec() }
    }

    pub fn covector(v: &[f64]) -> Self {
        Tensor { dim: v.len(), upper: 0, lower: 1, data: v.to_vec() }
    }

    pub fn from_mat(m: &Mat, upper: usize, lower: usize) -> Self {
        assert_eq!(upper + lower, 2);
        let n = m.nrows();
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(m[(i, j)]);
            }
        }
        Tensor { dim: n, upper, lower, data }
    }

    pub fn to_mat(&self) -> Mat {
        assert_eq!(self.rank(), 2, "to_mat needs a rank-2 tensor");
        Mat::from_row_slice(self.dim, self.dim, &self.data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn upper(&self) -> usize {
        self.upper
    }
    pub fn lower(&self) -> usize {
        self.lower
    }
    pub fn rank(&self) -> usize {
        self.upper + self.lower
    }
    pub fn valence(&self) -> (usize, usize) {
        (self.upper, self.lower)
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

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    pub fn add_at(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.data[o] += v;
    }

    /// Multi-index of a flat offset.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let r = self.rank();
        let mut idx = vec![0; r];
        for k in (0..r).rev() {
            idx[k] = flat % self.dim;
            flat /= self.dim;
        }
        idx
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Tensor {
        let mut t = self.clone();
        t.data.iter_mut().for_each(|v| *v *= s);
        t
    }

    pub fn sub(&self, other: &Tensor) -> Tensor {
        assert_eq!(self.data.len(), other.data.len());
        let mut t = self.clone();
        t.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a -= b);
        t
    }

    pub fn add(&self, other: &Tensor) -> Tensor {
        assert_eq!(self.data.len(), other.data.len());
        let mut t = self.clone();
        t.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += b);
        t
    }

    pub fn max_abs_diff(&self, other: &Tensor) -> f64 {
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Skew part ½(A − Aᵀ).
pub fn skew(a: &Mat) -> Mat {
    (a - a.transpose()) * 0.5
}

/// Symmetric part ½(A + Aᵀ).
pub fn sym(a: &Mat) -> Mat {
    (a + a.transpose()) * 0.5
}

pub fn max_abs(a: &Mat) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn inverse(a: &Mat) -> Option<Mat> {
    a.clone().try_inverse()
}

pub fn mat_from_rows(rows: &[&[f64]]) -> Mat {
    let n = rows.len();
    let m = rows[0].len();
    let flat: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
    Mat::from_row_slice(n, m, &flat)
}

/// Row-major flattening of a matrix.
pub fn mat_to_vec(a: &Mat) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len());
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            out.push(a[(i, j)]);
        }
    }
    out
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// ⟨u, v⟩_g.
pub fn inner(g: &Mat, u: &[f64], v: &[f64]) -> f64 {
    let n = u.len();
    let mut s = 0.0;
    for a in 0..n {
        for b in 0..n {
            s += u[a] * g[(a, b)] * v[b];
        }
    }
    s
}

pub fn mat_vec(a: &Mat, v: &[f64]) -> Vec<f64> {
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)] * v[j]).sum()).collect()
}

/// Full contraction A^{ab} B_{ab}.
pub fn contract2(a: &Mat, b: &Mat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}
