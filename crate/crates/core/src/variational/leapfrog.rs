use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{MetricChart, PolyVectorField};
use crate::kinematics::{DirectorKind, ReferenceBody, Snapshot};

use super::{args_from, micro_momentum, momentum, LagrangianModel, SpacetimeGrid, Splitting};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeapfrogConfig {
    pub dt: f64,
    pub steps: usize,
    /// Store every n-th level (the initial level is always stored).
    pub record_every: usize,
}

struct Discrete<'a> {
    body: &'a ReferenceBody,
    ambient: &'a MetricChart,
    director: &'a DirectorKind,
    split: &'a Splitting,
    constrained: bool,
    weights: Vec<f64>,
}

impl Discrete<'_> {
    fn node_energy(&self, s: &Snapshot, node: usize) -> Result<f64> {
        let a = args_from(self.body, self.ambient, self.director, s, node)?;
        let e = self.split.energy.evaluate(&a.energy_args(self.constrained));
        if !e.is_finite() {
            return Err(Error::NonFiniteDensity);
        }
        Ok(self.weights[node] * self.split.rho0 * e)
    }

    /// Nodes whose gradient stencil reads `node`.
    fn support(&self, node: usize) -> Vec<usize> {
        let g = &self.body.grid;
        let mut out = vec![node];
        for axis in 0..g.dim() {
            for off in [-2isize, -1, 1, 2] {
                if let Some(j) = g.neighbor(node, axis, off) {
                    out.push(j);
                }
            }
        }
        out
    }

    /// −∂V/∂q for every entry of `phi` (micro = false) or `micro`.
    fn forces(&self, s: &mut Snapshot, micro: bool) -> Result<Vec<f64>> {
        let ncomp = if micro { s.micro.len() / self.body.len() } else { s.phi.len() / self.body.len() };
        let mut out = vec![0.0; ncomp * self.body.len()];
        for node in 0..self.body.len() {
            let support = self.support(node);
            for c in 0..ncomp {
                let k = node * ncomp + c;
                let base = if micro { s.micro[k] } else { s.phi[k] };
                let eps = 1e-6 * (1.0 + base.abs());
                let energy = |v: f64, s: &mut Snapshot| -> Result<f64> {
                    if micro {
                        s.micro[k] = v;
                    } else {
                        s.phi[k] = v;
                    }
                    support.iter().map(|&j| self.node_energy(s, j)).sum()
                };
                let up = energy(base + eps, s)?;
                let down = energy(base - eps, s)?;
                if micro {
                    s.micro[k] = base;
                } else {
                    s.phi[k] = base;
                }
                out[k] = -(up - down) / (2.0 * eps);
            }
        }
        Ok(out)
    }
}

/// Velocity-Verlet integration of the discrete Euler–Lagrange equations of a
/// split model with free boundaries. Masses are ρ₀w and ρ̃₀w, w the nodal
/// quadrature weight; the potential is Σ w ρ₀ e at the nodes.
///
/// Only Euclidean ambient and director charts are supported.
pub fn leapfrog_trajectory(
    model: &LagrangianModel,
    body: Arc<ReferenceBody>,
    ambient: Arc<MetricChart>,
    director: DirectorKind,
    initial: Snapshot,
    cfg: &LeapfrogConfig,
) -> Result<SpacetimeGrid> {
    let split = model.splitting.as_ref().ok_or_else(|| Error::Unsupported("leapfrog needs a declared splitting".into()))?;
    if !ambient.is_euclidean() {
        return Err(Error::NonEuclideanChart);
    }
    if let DirectorKind::FreeVector(chart) = &director {
        if !chart.is_euclidean() {
            return Err(Error::NonEuclideanChart);
        }
    }
    if cfg.record_every == 0 || !(cfg.dt > 0.0) {
        return Err(Error::DimensionMismatch("leapfrog needs dt > 0 and record_every ≥ 1".into()));
    }
    let m = director.dim(body.dim());
    if m > 0 && !(split.rho0_micro > 0.0) {
        return Err(Error::Unsupported("director dynamics need a positive micro density".into()));
    }
    let probe = SpacetimeGrid::new(body.clone(), ambient.clone(), director.clone(), cfg.dt, vec![initial.clone()])?;
    probe.check_model(model)?;
    let weights = (0..body.len()).map(|i| probe.node_weight(i)).collect::<Result<Vec<_>>>()?;
    let sys = Discrete { body: &body, ambient: &ambient, director: &director, split, constrained: model.constrained, weights };
    let mass: Vec<f64> = sys.weights.iter().map(|w| w * split.rho0).collect();
    let micro_mass: Vec<f64> = sys.weights.iter().map(|w| w * split.rho0_micro).collect();
    let d = body.dim();

    let mut s = initial;
    let mut levels = vec![s.clone()];
    let mut fq = sys.forces(&mut s, false)?;
    let mut fp = if m > 0 { sys.forces(&mut s, true)? } else { vec![] };
    for step in 1..=cfg.steps {
        for (k, v) in s.phi_dot.iter_mut().enumerate() {
            *v += 0.5 * cfg.dt * fq[k] / mass[k / d];
        }
        for (k, v) in s.micro_dot.iter_mut().enumerate() {
            *v += 0.5 * cfg.dt * fp[k] / micro_mass[k / m];
        }
        for (q, v) in s.phi.iter_mut().zip(&s.phi_dot) {
            *q += cfg.dt * v;
        }
        for (q, v) in s.micro.iter_mut().zip(&s.micro_dot) {
            *q += cfg.dt * v;
        }
        fq = sys.forces(&mut s, false)?;
        if m > 0 {
            fp = sys.forces(&mut s, true)?;
        }
        for (k, v) in s.phi_dot.iter_mut().enumerate() {
            *v += 0.5 * cfg.dt * fq[k] / mass[k / d];
        }
        for (k, v) in s.micro_dot.iter_mut().enumerate() {
            *v += 0.5 * cfg.dt * fp[k] / micro_mass[k / m];
        }
        s.time += cfg.dt;
        if !s.phi.iter().chain(&s.phi_dot).all(|v| v.is_finite()) {
            return Err(Error::NumericBlowUp(format!("non-finite state at step {step}")));
        }
        if step % cfg.record_every == 0 {
            levels.push(s.clone());
        }
    }
    SpacetimeGrid::new(body, ambient, director, cfg.dt * cfg.record_every as f64, levels)
}

/// Discrete momentum map per stored level and its drift relative to t₀.
#[derive(Debug, Clone, PartialEq)]
pub struct NoetherDrift {
    pub times: Vec<f64>,
    pub momentum: Vec<f64>,
    /// (J_k − J_0)/|J_0|.
    pub drift: Vec<f64>,
}

impl NoetherDrift {
    pub fn max_drift(&self) -> f64 {
        self.drift.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

/// J = Σ w (∂𝓛/∂φ̇·w(φ) + ∂𝓛/∂φ̃̇·∇w φ̃), the director term for constrained models only.
pub fn noether_drift(model: &LagrangianModel, grid: &SpacetimeGrid, flow: &PolyVectorField) -> Result<NoetherDrift> {
    grid.check_model(model)?;
    let mut times = Vec::with_capacity(grid.level_count());
    let mut values = Vec::with_capacity(grid.level_count());
    for k in 0..grid.level_count() {
        let mut total = 0.0;
        for i in 0..grid.len() {
            let a = grid.args(k, i)?;
            let w = grid.node_weight(i)?;
            let pm = momentum(model, &a)?;
            let wv = flow.eval(&a.phi);
            let mut v: f64 = pm.iter().zip(&wv).map(|(p, x)| p * x).sum();
            if model.constrained {
                let pu = micro_momentum(model, &a)?;
                let jac = flow.jacobian(&a.phi);
                for (al, p) in pu.iter().enumerate() {
                    v += p * (0..a.dim()).map(|b| jac[al][b] * a.micro[b]).sum::<f64>();
                }
            }
            total += w * v;
        }
        times.push(grid.levels[k].time);
        values.push(total);
    }
    let j0 = values[0];
    let denom = if j0.abs() > 0.0 { j0.abs() } else { 1.0 };
    let drift = values.iter().map(|v| (v - j0) / denom).collect();
    Ok(NoetherDrift { times, momentum: values, drift })
}
