//! Nodal differential operators on the current level of a [`DeformedFields`].

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{christoffel, MetricChart};
use crate::kinematics::DeformedFields;
use crate::tensor::{Mat, Tensor};

/// Connection acting on the free (non-contracted) index of a two-index field.
#[derive(Clone, Copy)]
pub enum LeadingIndex<'a> {
    /// Ambient tangent index: Γ(x).
    Ambient,
    /// Microstructure chart index: γ̃(p) pulled back through F₀.
    Micro(&'a MetricChart),
    /// No connection term.
    Plain,
}

fn pack(values: &[Mat]) -> Vec<f64> {
    values.iter().flat_map(crate::tensor::mat_to_vec).collect()
}

/// Covariant divergence S^{ib}_{|b} of one `r × dim` matrix per node.
pub fn divergence(fields: &DeformedFields, values: &[Mat], lead: LeadingIndex<'_>) -> Result<Vec<Vec<f64>>> {
    let d = fields.dim();
    let n = fields.len();
    if values.len() != n {
        return Err(Error::DimensionMismatch(format!("{} nodal values for {} nodes", values.len(), n)));
    }
    let r = values.first().map(|m| m.nrows()).unwrap_or(0);
    if values.iter().any(|m| m.nrows() != r || m.ncols() != d) {
        return Err(Error::DimensionMismatch(format!("divergence needs {r} × {d} matrices at every node")));
    }
    let packed = pack(values);
    (0..n)
        .into_par_iter()
        .map(|node| {
            let (grad, _) = fields.spatial_gradient(&packed, r * d, node)?;
            let gamma = christoffel(&fields.ambient, fields.x(node))?;
            let s = &values[node];
            let mut out = vec![0.0; r];
            for (i, o) in out.iter_mut().enumerate() {
                for b in 0..d {
                    *o += grad[(i * d + b) * d + b];
                    for c in 0..d {
                        *o += gamma.get(&[b, b, c]) * s[(i, c)];
                    }
                }
            }
            match lead {
                LeadingIndex::Ambient => {
                    if r != d {
                        return Err(Error::DimensionMismatch("ambient leading index needs a square field".into()));
                    }
                    for (i, o) in out.iter_mut().enumerate() {
                        for b in 0..d {
                            for c in 0..d {
                                *o += gamma.get(&[i, b, c]) * s[(c, b)];
                            }
                        }
                    }
                }
                LeadingIndex::Micro(chart) => {
                    let gm = christoffel(chart, fields.p(node))?;
                    let f0 = fields
                        .f0(node)
                        .ok_or_else(|| Error::DimensionMismatch("micro divergence needs F₀".into()))?;
                    for (a, o) in out.iter_mut().enumerate() {
                        for g in 0..r {
                            for be in 0..r {
                                let gg = gm.get(&[a, g, be]);
                                if gg == 0.0 {
                                    continue;
                                }
                                for b in 0..d {
                                    *o += gg * f0[(g, b)] * s[(be, b)];
                                }
                            }
                        }
                    }
                }
                LeadingIndex::Plain => {}
            }
            Ok(out)
        })
        .collect()
}

/// v^a_{|b} = ∂_b v^a + Γ^a_{bc} v^c for an ambient vector field stored `dim`
/// per node.
pub fn vector_gradient(fields: &DeformedFields, values: &[f64], node: usize) -> Result<Mat> {
    let d = fields.dim();
    let (grad, _) = fields.spatial_gradient(values, d, node)?;
    let gamma = christoffel(&fields.ambient, fields.x(node))?;
    let v = &values[node * d..(node + 1) * d];
    let mut out = Mat::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            out[(a, b)] = grad[a * d + b] + (0..d).map(|c| gamma.get(&[a, b, c]) * v[c]).sum::<f64>();
        }
    }
    Ok(out)
}

/// K[a, b, c] = g_{ae} σ̃^{ec} p^b, the layout used for ρ ∂e/∂Γ^a_{bc}.
pub fn micro_stress_connection(sigma_tilde: &Mat, p: &[f64], g: &Mat) -> Tensor {
    let d = g.nrows();
    let low = g * sigma_tilde;
    let mut k = Tensor::zeros(d, 1, 2);
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                k.set(&[a, b, c], low[(a, c)] * p[b]);
            }
        }
    }
    k
}

/// Vector f^e = g^{ed} K[a, b, c] R^a_{bdc}, the curvature force of a
/// connection-conjugate array K.
pub fn curvature_force(k: &Tensor, riemann: &Tensor, g: &Mat) -> Result<Vec<f64>> {
    let d = g.nrows();
    let ginv = crate::tensor::inverse(g).ok_or(Error::SingularMetric { point: vec![] })?;
    let mut low = vec![0.0; d];
    for (dd, l) in low.iter_mut().enumerate() {
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    *l += k.get(&[a, b, c]) * riemann.get(&[a, b, dd, c]);
                }
            }
        }
    }
    Ok((0..d).map(|e| (0..d).map(|dd| ginv[(e, dd)] * low[dd]).sum()).collect())
}
