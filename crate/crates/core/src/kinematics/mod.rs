//! Kinematics of a structured continuum: the deformation map φ, the director
//! map φ̃, their rates and gradients, sampled on a rectilinear reference grid.
//!
//! Gradients over the reference grid use second-order central differences at
//! interior nodes (exact for affine maps) and one-sided second-order stencils at
//! boundary nodes, which are flagged.

mod body;
mod fields;
mod motion;

pub use body::ReferenceBody;
pub use fields::{spatial_fields, DeformedFields, LevelFields};
pub use motion::{AnalyticMotion, DirectorKind, MotionState, Snapshot, TimeField};

use crate::error::{Error, Result};
use crate::geometry::christoffel;
use crate::grid::RectGrid;
use crate::tensor::Mat;

/// Reference-grid gradient of a nodal field with `ncomp` components.
///
/// Returns the row-major `ncomp × dim` array ∂f^i/∂X^A and whether a one-sided
/// stencil was used.
pub fn grid_gradient(
    grid: &RectGrid,
    values: &[f64],
    ncomp: usize,
    node: usize,
    allow_one_sided: bool,
) -> Result<(Vec<f64>, bool)> {
    let d = grid.dim();
    let mut out = vec![0.0; ncomp * d];
    let mut one_sided = false;
    let at = |n: usize, i: usize| values[n * ncomp + i];
    for axis in 0..d {
        let h = grid.spacing[axis];
        let prev = grid.neighbor(node, axis, -1);
        let next = grid.neighbor(node, axis, 1);
        for i in 0..ncomp {
            out[i * d + axis] = match (prev, next) {
                (Some(m), Some(p)) => (at(p, i) - at(m, i)) / (2.0 * h),
                (None, Some(p1)) => {
                    if !allow_one_sided {
                        return Err(Error::BoundaryNode { node });
                    }
                    one_sided = true;
                    match grid.neighbor(node, axis, 2) {
                        Some(p2) => (-3.0 * at(node, i) + 4.0 * at(p1, i) - at(p2, i)) / (2.0 * h),
                        None => (at(p1, i) - at(node, i)) / h,
                    }
                }
                (Some(m1), None) => {
                    if !allow_one_sided {
                        return Err(Error::BoundaryNode { node });
                    }
                    one_sided = true;
                    match grid.neighbor(node, axis, -2) {
                        Some(m2) => (3.0 * at(node, i) - 4.0 * at(m1, i) + at(m2, i)) / (2.0 * h),
                        None => (at(node, i) - at(m1, i)) / h,
                    }
                }
                (None, None) => unreachable!("grids have at least two nodes per axis"),
            };
        }
    }
    Ok((out, one_sided))
}

pub(crate) fn level_deformation_gradient(
    state: &MotionState,
    level: usize,
    node: usize,
    allow_one_sided: bool,
) -> Result<(Mat, bool)> {
    let d = state.dim();
    let (g, flag) = grid_gradient(&state.body.grid, &state.levels[level].phi, d, node, allow_one_sided)?;
    let f = Mat::from_row_slice(d, d, &g);
    let det = f.determinant();
    if !(det > 0.0) {
        return Err(Error::DegenerateF { node, det });
    }
    Ok((f, flag))
}

/// F^a_A at an interior node (central differences of φ over the reference grid).
pub fn deformation_gradient(state: &MotionState, node: usize) -> Result<Mat> {
    level_deformation_gradient(state, state.current, node, false).map(|r| r.0)
}

/// F^a_A at any node; the flag reports a one-sided boundary stencil.
pub fn deformation_gradient_with_fallback(state: &MotionState, node: usize) -> Result<(Mat, bool)> {
    level_deformation_gradient(state, state.current, node, true)
}

/// Director gradient. Scalar and free-vector directors return ∂φ̃/∂X^A
/// (material lower index); tangent-of-ambient directors return the composed
/// spatial gradient ∂p^a/∂x^b = ∂p^a/∂X^A (F⁻¹)^A_b.
pub fn micro_deformation_gradient(state: &MotionState, node: usize) -> Result<Mat> {
    micro_gradient_impl(state, state.current, node, false).map(|r| r.0)
}

pub(crate) fn micro_gradient_impl(
    state: &MotionState,
    level: usize,
    node: usize,
    allow_one_sided: bool,
) -> Result<(Mat, bool)> {
    let d = state.dim();
    let m = state.director_dim();
    if m == 0 {
        return Err(Error::DimensionMismatch("motion has no director".into()));
    }
    let (g, flag) = grid_gradient(&state.body.grid, &state.levels[level].micro, m, node, allow_one_sided)?;
    let raw = Mat::from_row_slice(m, d, &g);
    match state.director {
        DirectorKind::TangentOfAmbient => {
            let (f, _) = level_deformation_gradient(state, level, node, true)?;
            let finv = f.try_inverse().ok_or(Error::DegenerateF { node, det: 0.0 })?;
            Ok((raw * finv, flag))
        }
        _ => Ok((raw, flag)),
    }
}

/// C_AB = F^a_A g_ab F^b_B.
pub fn pullback_metric(state: &MotionState, node: usize) -> Result<Mat> {
    let (f, _) = deformation_gradient_with_fallback(state, node)?;
    let g = state.ambient.metric(state.position(node))?;
    Ok(f.transpose() * g * f)
}

/// J = sqrt(det g / det G) det F.
pub fn jacobian(state: &MotionState, node: usize) -> Result<f64> {
    let (f, _) = deformation_gradient_with_fallback(state, node)?;
    jacobian_from(state, state.current, node, &f)
}

pub(crate) fn jacobian_from(state: &MotionState, level: usize, node: usize, f: &Mat) -> Result<f64> {
    let d = state.dim();
    let x = &state.levels[level].phi[node * d..(node + 1) * d];
    let g = state.ambient.metric(x)?;
    let big_g = state.body.chart.metric(&state.body.grid.coords(node))?;
    Ok((g.determinant() / big_g.determinant()).sqrt() * f.determinant())
}

/// ṽ^a = ∂p^a/∂t + (∂p^a/∂x^b) v^b + γ^a_{bc} v^b p^c, i.e. the material rate of
/// the stored director plus the ambient connection term.
pub fn scs_micro_velocity(state: &MotionState, node: usize) -> Result<Vec<f64>> {
    if !matches!(state.director, DirectorKind::TangentOfAmbient) {
        return Err(Error::DimensionMismatch("scs_micro_velocity needs a tangent-of-ambient director".into()));
    }
    if state.levels.len() < 2 {
        return Err(Error::MissingTimeLevel("director rate needs two time levels".into()));
    }
    scs_rate_at(state, state.current, node)
}

pub(crate) fn scs_rate_at(state: &MotionState, level: usize, node: usize) -> Result<Vec<f64>> {
    let d = state.dim();
    let s = &state.levels[level];
    let x = &s.phi[node * d..(node + 1) * d];
    let v = &s.phi_dot[node * d..(node + 1) * d];
    let p = &s.micro[node * d..(node + 1) * d];
    let pdot = director_rate(state, level, node);
    let gamma = christoffel(&state.ambient, x)?;
    Ok((0..d)
        .map(|a| {
            let mut r = pdot[a];
            for b in 0..d {
                for c in 0..d {
                    r += gamma.get(&[a, b, c]) * v[b] * p[c];
                }
            }
            r
        })
        .collect())
}

/// Material rate of the stored director at fixed X.
fn director_rate(state: &MotionState, level: usize, node: usize) -> Vec<f64> {
    let m = state.director_dim();
    state.levels[level].micro_dot[node * m..(node + 1) * m].to_vec()
}
