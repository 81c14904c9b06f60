use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{christoffel, MetricChart};
use crate::tensor::Mat;

use super::body::ReferenceBody;
use super::motion::{DirectorKind, MotionState};
use super::{grid_gradient, jacobian_from, level_deformation_gradient, micro_gradient_impl, scs_rate_at};

/// Spatial quantities at one time level, node-major.
#[derive(Debug, Clone)]
pub struct LevelFields {
    pub time: f64,
    /// x = φ(X), `dim` per node.
    pub x: Vec<f64>,
    /// v = V ∘ φ⁻¹ evaluated at x.
    pub v: Vec<f64>,
    /// Director values p.
    pub p: Vec<f64>,
    /// Micro velocity ṽ (for tangent-of-ambient directors includes the connection term).
    pub p_rate: Vec<f64>,
    /// F^a_A, row-major dim×dim per node.
    pub f: Vec<f64>,
    pub f_inv: Vec<f64>,
    pub jac: Vec<f64>,
    pub rho: Vec<f64>,
    /// Spatial micro-inertia j.
    pub inertia: Vec<f64>,
    pub one_sided: Vec<bool>,
}

/// Everything derived from a [`MotionState`] that the residual evaluators need.
#[derive(Debug, Clone)]
pub struct DeformedFields {
    pub body: Arc<ReferenceBody>,
    pub ambient: Arc<MetricChart>,
    pub director: DirectorKind,
    pub dt: f64,
    pub levels: Vec<LevelFields>,
    pub current: usize,
    /// F̃ at the current level: `m × dim` per node.
    pub micro_grad: Vec<f64>,
    /// F₀ = F̃F⁻¹ (free-vector directors only), `m × dim` per node.
    pub f0: Option<Vec<f64>>,
    /// C_AB per node.
    pub c: Vec<f64>,
    /// Covariant acceleration a (three levels only).
    pub accel: Option<Vec<f64>>,
    /// Micro acceleration ã (three levels only).
    pub micro_accel: Option<Vec<f64>>,
}

fn check_injective(x: &[f64], d: usize, tol: f64) -> Result<()> {
    let n = x.len() / d;
    let key = |i: usize| -> Vec<i64> { (0..d).map(|k| (x[i * d + k] / tol).floor() as i64).collect() };
    let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for i in 0..n {
        buckets.entry(key(i)).or_default().push(i);
    }
    for i in 0..n {
        let base = key(i);
        for shift in 0..3usize.pow(d as u32) {
            let mut k = base.clone();
            let mut s = shift;
            for kk in k.iter_mut() {
                *kk += (s % 3) as i64 - 1;
                s /= 3;
            }
            if let Some(list) = buckets.get(&k) {
                for &j in list {
                    if j > i {
                        let dist = (0..d).map(|c| (x[i * d + c] - x[j * d + c]).abs()).fold(0.0, f64::max);
                        if dist <= tol {
                            return Err(Error::NonInjectiveMotion { first: i, second: j });
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn level_fields(state: &MotionState, level: usize) -> Result<LevelFields> {
    let d = state.dim();
    let m = state.director_dim();
    let n = state.body.len();
    let s = &state.levels[level];
    let per_node: Vec<(Mat, Mat, f64, bool, Vec<f64>)> = (0..n)
        .into_par_iter()
        .map(|node| {
            let (f, flag) = level_deformation_gradient(state, level, node, true)?;
            let finv = f.clone().try_inverse().ok_or(Error::DegenerateF { node, det: 0.0 })?;
            let jac = jacobian_from(state, level, node, &f)?;
            let rate = match state.director {
                DirectorKind::TangentOfAmbient => scs_rate_at(state, level, node)?,
                _ => s.micro_dot[node * m..(node + 1) * m].to_vec(),
            };
            Ok((f, finv, jac, flag, rate))
        })
        .collect::<Result<_>>()?;
    let mut out = LevelFields {
        time: s.time,
        x: s.phi.clone(),
        v: s.phi_dot.clone(),
        p: s.micro.clone(),
        p_rate: Vec::with_capacity(n * m),
        f: Vec::with_capacity(n * d * d),
        f_inv: Vec::with_capacity(n * d * d),
        jac: Vec::with_capacity(n),
        rho: Vec::with_capacity(n),
        inertia: state.body.micro_inertia0.clone(),
        one_sided: Vec::with_capacity(n),
    };
    for (node, (f, finv, jac, flag, rate)) in per_node.into_iter().enumerate() {
        out.f.extend(crate::tensor::mat_to_vec(&f));
        out.f_inv.extend(crate::tensor::mat_to_vec(&finv));
        out.rho.push(state.body.density0[node] / jac);
        out.jac.push(jac);
        out.one_sided.push(flag);
        out.p_rate.extend(rate);
    }
    Ok(out)
}

/// Assembles v, ṽ, F, F̃, F₀, C, J, ρ = ρ₀/J and j = j₀∘φ⁻¹ at every stored level.
pub fn spatial_fields(state: &MotionState) -> Result<DeformedFields> {
    let d = state.dim();
    let m = state.director_dim();
    let n = state.body.len();
    let cur = &state.levels[state.current];
    let scale = cur.phi.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let min_h = state.body.grid.spacing.iter().cloned().fold(f64::INFINITY, f64::min);
    check_injective(&cur.phi, d, (1e-9 * scale).min(1e-3 * min_h))?;

    let levels: Vec<LevelFields> = (0..state.levels.len()).map(|l| level_fields(state, l)).collect::<Result<_>>()?;
    let lf = &levels[state.current];

    let mut micro_grad = Vec::new();
    let mut f0 = Vec::new();
    let mut c = Vec::with_capacity(n * d * d);
    for node in 0..n {
        let f = Mat::from_row_slice(d, d, &lf.f[node * d * d..(node + 1) * d * d]);
        let g = state.ambient.metric(&lf.x[node * d..(node + 1) * d])?;
        c.extend(crate::tensor::mat_to_vec(&(f.transpose() * g * &f)));
        if m > 0 {
            let (ft, _) = micro_gradient_impl(state, state.current, node, true)?;
            micro_grad.extend(crate::tensor::mat_to_vec(&ft));
            if let DirectorKind::FreeVector(_) = state.director {
                let finv = Mat::from_row_slice(d, d, &lf.f_inv[node * d * d..(node + 1) * d * d]);
                f0.extend(crate::tensor::mat_to_vec(&(ft * finv)));
            }
        }
    }

    let (accel, micro_accel) = if state.levels.len() == 3 {
        let (lo, hi) = (&levels[0], &levels[2]);
        let dt2 = 2.0 * state.dt;
        let mut a = vec![0.0; n * d];
        let mut at = vec![0.0; n * m];
        for node in 0..n {
            let x = &lf.x[node * d..(node + 1) * d];
            let v = &lf.v[node * d..(node + 1) * d];
            let gamma = christoffel(&state.ambient, x)?;
            for i in 0..d {
                let mut s = (hi.v[node * d + i] - lo.v[node * d + i]) / dt2;
                for b in 0..d {
                    for cc in 0..d {
                        s += gamma.get(&[i, b, cc]) * v[b] * v[cc];
                    }
                }
                a[node * d + i] = s;
            }
            if m > 0 {
                let pr = &lf.p_rate[node * m..(node + 1) * m];
                let extra: Vec<f64> = match &state.director {
                    DirectorKind::TangentOfAmbient => (0..m)
                        .map(|i| {
                            let mut s = 0.0;
                            for b in 0..d {
                                for cc in 0..d {
                                    s += gamma.get(&[i, b, cc]) * v[b] * pr[cc];
                                }
                            }
                            s
                        })
                        .collect(),
                    DirectorKind::FreeVector(chart) => {
                        let gm = christoffel(chart, &lf.p[node * m..(node + 1) * m])?;
                        (0..m)
                            .map(|i| {
                                let mut s = 0.0;
                                for b in 0..m {
                                    for cc in 0..m {
                                        s += gm.get(&[i, b, cc]) * pr[b] * pr[cc];
                                    }
                                }
                                s
                            })
                            .collect()
                    }
                    _ => vec![0.0; m],
                };
                for i in 0..m {
                    at[node * m + i] = (hi.p_rate[node * m + i] - lo.p_rate[node * m + i]) / dt2 + extra[i];
                }
            }
        }
        (Some(a), if m > 0 { Some(at) } else { None })
    } else {
        (None, None)
    };

    Ok(DeformedFields {
        body: state.body.clone(),
        ambient: state.ambient.clone(),
        director: state.director.clone(),
        dt: state.dt,
        levels,
        current: state.current,
        micro_grad,
        f0: if f0.is_empty() { None } else { Some(f0) },
        c,
        accel,
        micro_accel,
    })
}

impl DeformedFields {
    pub fn dim(&self) -> usize {
        self.body.dim()
    }

    pub fn director_dim(&self) -> usize {
        self.director.dim(self.dim())
    }

    pub fn len(&self) -> usize {
        self.body.len()
    }

    pub fn is_empty(&self) -> bool {
        self.body.is_empty()
    }

    pub fn now(&self) -> &LevelFields {
        &self.levels[self.current]
    }

    pub fn time(&self) -> f64 {
        self.now().time
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        self.body.grid.interior_nodes()
    }

    pub fn x(&self, node: usize) -> &[f64] {
        let d = self.dim();
        &self.now().x[node * d..(node + 1) * d]
    }

    pub fn v(&self, node: usize) -> &[f64] {
        let d = self.dim();
        &self.now().v[node * d..(node + 1) * d]
    }

    pub fn p(&self, node: usize) -> &[f64] {
        let m = self.director_dim();
        &self.now().p[node * m..(node + 1) * m]
    }

    pub fn p_rate(&self, node: usize) -> &[f64] {
        let m = self.director_dim();
        &self.now().p_rate[node * m..(node + 1) * m]
    }

    pub fn rho(&self, node: usize) -> f64 {
        self.now().rho[node]
    }

    pub fn inertia(&self, node: usize) -> f64 {
        self.now().inertia[node]
    }

    pub fn jac(&self, node: usize) -> f64 {
        self.now().jac[node]
    }

    pub fn f(&self, node: usize) -> Mat {
        let d = self.dim();
        Mat::from_row_slice(d, d, &self.now().f[node * d * d..(node + 1) * d * d])
    }

    pub fn f_inv(&self, node: usize) -> Mat {
        let d = self.dim();
        Mat::from_row_slice(d, d, &self.now().f_inv[node * d * d..(node + 1) * d * d])
    }

    pub fn micro_grad(&self, node: usize) -> Mat {
        let (d, m) = (self.dim(), self.director_dim());
        Mat::from_row_slice(m, d, &self.micro_grad[node * m * d..(node + 1) * m * d])
    }

    pub fn f0(&self, node: usize) -> Option<Mat> {
        let (d, m) = (self.dim(), self.director_dim());
        self.f0.as_ref().map(|f0| Mat::from_row_slice(m, d, &f0[node * m * d..(node + 1) * m * d]))
    }

    pub fn c(&self, node: usize) -> Mat {
        let d = self.dim();
        Mat::from_row_slice(d, d, &self.c[node * d * d..(node + 1) * d * d])
    }

    pub fn accel(&self, node: usize) -> Result<&[f64]> {
        let d = self.dim();
        self.accel
            .as_ref()
            .map(|a| &a[node * d..(node + 1) * d])
            .ok_or_else(|| Error::MissingTimeLevel("acceleration needs three time levels".into()))
    }

    pub fn micro_accel(&self, node: usize) -> Result<&[f64]> {
        let m = self.director_dim();
        self.micro_accel
            .as_ref()
            .map(|a| &a[node * m..(node + 1) * m])
            .ok_or_else(|| Error::MissingTimeLevel("micro acceleration needs three time levels".into()))
    }

    pub fn metric(&self, node: usize) -> Result<Mat> {
        self.ambient.metric(self.x(node))
    }

    /// Overrides ρ at every level with a prescribed spatial field ρ(t, x).
    pub fn with_density(mut self, rho: impl Fn(f64, &[f64]) -> f64) -> Self {
        let d = self.dim();
        for lf in &mut self.levels {
            lf.rho = (0..lf.jac.len()).map(|n| rho(lf.time, &lf.x[n * d..(n + 1) * d])).collect();
        }
        self
    }

    /// Overrides j at every level with a prescribed spatial field j(t, x).
    pub fn with_micro_inertia(mut self, j: impl Fn(f64, &[f64]) -> f64) -> Self {
        let d = self.dim();
        for lf in &mut self.levels {
            lf.inertia = (0..lf.jac.len()).map(|n| j(lf.time, &lf.x[n * d..(n + 1) * d])).collect();
        }
        self
    }

    /// Spatial gradient ∂f^i/∂x^b = ∂f^i/∂X^A (F⁻¹)^A_b of a nodal field at the
    /// current level; returns the row-major `ncomp × dim` array and the one-sided flag.
    pub fn spatial_gradient(&self, values: &[f64], ncomp: usize, node: usize) -> Result<(Vec<f64>, bool)> {
        let d = self.dim();
        let (g, flag) = grid_gradient(&self.body.grid, values, ncomp, node, true)?;
        let finv = &self.now().f_inv[node * d * d..(node + 1) * d * d];
        let mut out = vec![0.0; ncomp * d];
        for i in 0..ncomp {
            for b in 0..d {
                out[i * d + b] = (0..d).map(|a| g[i * d + a] * finv[a * d + b]).sum();
            }
        }
        Ok((out, flag))
    }

    /// Material time derivative of a per-node scalar sampled at every level:
    /// central in time with three levels, one-sided with two.
    pub fn material_rate(&self, per_level: &[Vec<f64>], node: usize) -> Result<f64> {
        match self.levels.len() {
            3 => Ok((per_level[2][node] - per_level[0][node]) / (2.0 * self.dt)),
            2 => Ok((per_level[1][node] - per_level[0][node]) / self.dt),
            _ => Err(Error::MissingTimeLevel("time derivative needs two time levels".into())),
        }
    }
}
