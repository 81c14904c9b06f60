//! Rectilinear node sets shared by grid-sampled metrics, reference bodies and
//! space-time grids. Nodes are numbered row-major with the last axis fastest.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectGrid {
    pub origin: Vec<f64>,
    pub spacing: Vec<f64>,
    pub counts: Vec<usize>,
}

impl RectGrid {
    pub fn new(origin: Vec<f64>, spacing: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        let d = origin.len();
        if d == 0 || d > 3 || spacing.len() != d || counts.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "grid axes: origin {}, spacing {}, counts {}",
                origin.len(),
                spacing.len(),
                counts.len()
            )));
        }
        if spacing.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
            return Err(Error::DimensionMismatch("grid spacing must be positive".into()));
        }
        if counts.iter().any(|&n| n < 2) {
            return Err(Error::DimensionMismatch("grid needs at least two nodes per axis".into()));
        }
        Ok(RectGrid { origin, spacing, counts })
    }

    /// Grid covering the box `[lo, hi]` with `n` nodes per axis.
    pub fn cube(lo: &[f64], hi: &[f64], n: usize) -> Result<Self> {
        let spacing = lo.iter().zip(hi).map(|(a, b)| (b - a) / (n as f64 - 1.0)).collect();
        RectGrid::new(lo.to_vec(), spacing, vec![n; lo.len()])
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.counts[axis + 1..].iter().product()
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.counts).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn multi(&self, mut flat: usize) -> Vec<usize> {
        let d = self.dim();
        let mut idx = vec![0; d];
        for k in (0..d).rev() {
            idx[k] = flat % self.counts[k];
            flat /= self.counts[k];
        }
        idx
    }

    pub fn coords(&self, flat: usize) -> Vec<f64> {
        self.multi(flat)
            .iter()
            .enumerate()
            .map(|(k, &i)| self.origin[k] + i as f64 * self.spacing[k])
            .collect()
    }

    pub fn upper(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|k| self.origin[k] + (self.counts[k] - 1) as f64 * self.spacing[k])
            .collect()
    }

    pub fn is_interior(&self, flat: usize) -> bool {
        self.multi(flat).iter().zip(&self.counts).all(|(&i, &n)| i > 0 && i + 1 < n)
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&n| self.is_interior(n)).collect()
    }

    /// Node shifted by `offset` along `axis`, if it exists.
    pub fn neighbor(&self, flat: usize, axis: usize, offset: isize) -> Option<usize> {
        let i = self.multi(flat)[axis] as isize + offset;
        if i < 0 || i >= self.counts[axis] as isize {
            return None;
        }
        Some((flat as isize + offset * self.stride(axis) as isize) as usize)
    }

    /// Whether a point lies inside the hull, keeping `margin` spacings clear of every face.
    pub fn contains(&self, point: &[f64], margin: f64) -> bool {
        point.len() == self.dim()
            && (0..self.dim()).all(|k| {
                let lo = self.origin[k] + margin * self.spacing[k];
                let hi = self.origin[k] + ((self.counts[k] - 1) as f64 - margin) * self.spacing[k];
                point[k] >= lo && point[k] <= hi
            })
    }

    /// Multilinear interpolation weights: (node, weight) pairs.
    pub fn interpolation_weights(&self, point: &[f64]) -> Option<Vec<(usize, f64)>> {
        if !self.contains(point, 0.0) {
            return None;
        }
        let d = self.dim();
        let mut base = vec![0usize; d];
        let mut frac = vec![0.0; d];
        for k in 0..d {
            let s = (point[k] - self.origin[k]) / self.spacing[k];
            let mut i = s.floor() as usize;
            if i + 1 >= self.counts[k] {
                i = self.counts[k] - 2;
            }
            base[k] = i;
            frac[k] = s - i as f64;
        }
        let mut out = Vec::with_capacity(1 << d);
        for corner in 0..(1usize << d) {
            let mut idx = base.clone();
            let mut w = 1.0;
            for k in 0..d {
                if corner >> k & 1 == 1 {
                    idx[k] += 1;
                    w *= frac[k];
                } else {
                    w *= 1.0 - frac[k];
                }
            }
            if w != 0.0 {
                out.push((self.flat(&idx), w));
            }
        }
        Some(out)
    }

    /// Node index nearest to a point (clamped to the grid).
    pub fn nearest(&self, point: &[f64]) -> usize {
        let idx: Vec<usize> = (0..self.dim())
            .map(|k| {
                let s = ((point[k] - self.origin[k]) / self.spacing[k]).round();
                s.clamp(0.0, (self.counts[k] - 1) as f64) as usize
            })
            .collect();
        self.flat(&idx)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }
}
