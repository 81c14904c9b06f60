//! Trapezoidal (cell midpoint of corner averages) quadrature over index boxes
//! of the reference grid, pulled back to the deformed configuration.

use crate::error::{Error, Result};
use crate::grid::RectGrid;
use crate::kinematics::DeformedFields;

/// Axis-aligned box of reference nodes, bounds inclusive. Every node of the
/// box is an interior grid node, so central stencils are available throughout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subbody {
    pub lo: Vec<usize>,
    pub hi: Vec<usize>,
}

impl Subbody {
    pub fn new(grid: &RectGrid, lo: Vec<usize>, hi: Vec<usize>) -> Result<Self> {
        let d = grid.dim();
        if lo.len() != d || hi.len() != d {
            return Err(Error::DimensionMismatch("subbody bounds must match the grid dimension".into()));
        }
        for k in 0..d {
            if lo[k] < 1 || hi[k] + 2 > grid.counts[k] || lo[k] >= hi[k] {
                return Err(Error::DimensionMismatch(format!(
                    "subbody axis {k}: [{}, {}] must lie strictly inside 0..{}",
                    lo[k],
                    hi[k],
                    grid.counts[k] - 1
                )));
            }
        }
        Ok(Subbody { lo, hi })
    }

    /// The box that keeps `margin` ≥ 1 node layers clear of the grid boundary.
    pub fn inset(grid: &RectGrid, margin: usize) -> Result<Self> {
        let m = margin.max(1);
        let hi = grid.counts.iter().map(|&n| n.saturating_sub(1 + m)).collect();
        Subbody::new(grid, vec![m; grid.dim()], hi)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    fn index_boxes(&self, fixed: Option<(usize, usize)>) -> Vec<Vec<usize>> {
        let d = self.dim();
        let mut out = vec![Vec::new()];
        for k in 0..d {
            let range: Vec<usize> = match fixed {
                Some((axis, v)) if axis == k => vec![v],
                _ => (self.lo[k]..=self.hi[k]).collect(),
            };
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    range.iter().map(move |&i| {
                        let mut p = prefix.clone();
                        p.push(i);
                        p
                    })
                })
                .collect();
        }
        out
    }

    /// Nodes of the box in grid order.
    pub fn nodes(&self, grid: &RectGrid) -> Vec<usize> {
        self.index_boxes(None).iter().map(|idx| grid.flat(idx)).collect()
    }

    fn trapezoid_weight(&self, grid: &RectGrid, idx: &[usize], skip: Option<usize>) -> f64 {
        let mut w = 1.0;
        for k in 0..self.dim() {
            if Some(k) == skip {
                continue;
            }
            let h = grid.spacing[k];
            w *= if idx[k] == self.lo[k] || idx[k] == self.hi[k] { 0.5 * h } else { h };
        }
        w
    }

    /// (node, w) with Σ w f ≈ ∫ f dv over the deformed subbody; w includes J√G.
    pub fn volume_weights(&self, fields: &DeformedFields) -> Result<Vec<(usize, f64)>> {
        let grid = &fields.body.grid;
        self.index_boxes(None)
            .into_iter()
            .map(|idx| {
                let node = grid.flat(&idx);
                let sqrt_g = fields.body.chart.volume_density(&grid.coords(node))?;
                Ok((node, self.trapezoid_weight(grid, &idx, None) * fields.jac(node) * sqrt_g))
            })
            .collect()
    }

    /// (node, axis, w) such that Σ w Q^axis ≈ ∮ Q^A N_A dA for a reference
    /// vector density Q; w carries the outward sign and √G.
    pub fn face_weights(&self, fields: &DeformedFields) -> Result<Vec<(usize, usize, f64)>> {
        let grid = &fields.body.grid;
        let mut out = Vec::new();
        for axis in 0..self.dim() {
            for (v, sign) in [(self.lo[axis], -1.0), (self.hi[axis], 1.0)] {
                for idx in self.index_boxes(Some((axis, v))) {
                    let node = grid.flat(&idx);
                    let sqrt_g = fields.body.chart.volume_density(&grid.coords(node))?;
                    out.push((node, axis, sign * self.trapezoid_weight(grid, &idx, Some(axis)) * sqrt_g));
                }
            }
        }
        Ok(out)
    }

    /// ∫ f dv for a nodal scalar f indexed by node.
    pub fn integrate(&self, fields: &DeformedFields, f: &[f64]) -> Result<f64> {
        Ok(self.volume_weights(fields)?.iter().map(|&(n, w)| w * f[n]).sum())
    }

    /// ∮ Q^A N_A dA for a reference flux density given per node.
    pub fn flux(&self, fields: &DeformedFields, q: impl Fn(usize) -> Vec<f64>) -> Result<f64> {
        Ok(self.face_weights(fields)?.iter().map(|&(n, axis, w)| w * q(n)[axis]).sum())
    }
}
