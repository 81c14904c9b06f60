//! Lagrangian field theory for the two maps: discrete action, Euler–Lagrange
//! residuals, Noether identity checks and a leapfrog integrator.

use std::fmt;
use std::sync::Arc;

use crate::constitutive::derivative::{central_richardson, PERTURBATION};
use crate::constitutive::{EnergyArgs, EnergyModel};
use crate::error::{Error, Result};
use crate::geometry::{christoffel, MetricChart};
use crate::kinematics::{grid_gradient, AnalyticMotion, DirectorKind, MotionState, ReferenceBody, Snapshot};
use crate::tensor::{inner, Mat, Tensor};

mod leapfrog;
mod noether;
mod residuals;

pub use leapfrog::{leapfrog_trajectory, noether_drift, LeapfrogConfig, NoetherDrift};
pub use noether::{
    canonical_momentum_flux, energy_piola_from_flux, CanonicalFlux, noether_constrained_check, noether_micro_check,
    noether_spatial_check, ConstrainedDefects, MicroDefects, SpatialDefects,
};
pub use residuals::{action, euler_lagrange_residuals, variational_action_test, ActionVariation, ElResiduals};

/// Pointwise arguments of the Lagrangian density.
///
/// `f_micro` is the material gradient ∂φ̃^α/∂X^A (m × d). `g_micro` is g̃ at φ̃
/// for free directors and empty otherwise; for constrained models the director
/// metric is `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianArgs {
    pub t: f64,
    pub big_x: Vec<f64>,
    pub phi: Vec<f64>,
    pub phi_dot: Vec<f64>,
    pub f: Mat,
    pub big_g: Mat,
    pub g: Mat,
    pub micro: Vec<f64>,
    pub micro_dot: Vec<f64>,
    pub f_micro: Mat,
    pub g_micro: Mat,
    /// Γ^a_{bc} of g at φ, filled for tangent-of-ambient directors.
    pub gamma: Option<Tensor>,
}

impl LagrangianArgs {
    pub fn dim(&self) -> usize {
        self.phi.len()
    }

    pub fn micro_dim(&self) -> usize {
        self.micro.len()
    }

    /// Energy arguments seen by an [`EnergyModel`] inside a split density.
    ///
    /// Tangent-of-ambient directors get the spatial director gradient F̃F⁻¹.
    pub fn energy_args(&self, constrained: bool) -> EnergyArgs {
        let m = self.micro_dim();
        let mut e = EnergyArgs::identity(self.dim());
        e.t = self.t;
        e.x = self.phi.clone();
        e.big_x = self.big_x.clone();
        e.f = self.f.clone();
        e.big_g = self.big_g.clone();
        e.g = self.g.clone();
        e.p = self.micro.clone();
        if m > 0 {
            if constrained {
                let finv = self.f.clone().try_inverse().unwrap_or_else(|| Mat::from_element(m, m, f64::NAN));
                e.f_micro = Some(&self.f_micro * finv);
                e.gamma = self.gamma.clone();
            } else {
                e.f_micro = Some(self.f_micro.clone());
                e.g_micro = Some(self.g_micro.clone());
            }
        }
        e
    }
}

pub type DensityFn = Arc<dyn Fn(&LagrangianArgs) -> f64 + Send + Sync>;

/// Declared form 𝓛 = ½ρ₀ g(V,V) + ½ρ̃₀ g̃(Ṽ,Ṽ) − ρ₀e.
#[derive(Clone)]
pub struct Splitting {
    pub energy: Arc<dyn EnergyModel>,
    pub rho0: f64,
    pub rho0_micro: f64,
}

impl Splitting {
    pub fn kinetic(&self, a: &LagrangianArgs, constrained: bool) -> f64 {
        let mut k = 0.5 * self.rho0 * inner(&a.g, &a.phi_dot, &a.phi_dot);
        if a.micro_dim() > 0 {
            let gm = if constrained { &a.g } else { &a.g_micro };
            k += 0.5 * self.rho0_micro * inner(gm, &a.micro_dot, &a.micro_dot);
        }
        k
    }

    pub fn evaluate(&self, a: &LagrangianArgs, constrained: bool) -> f64 {
        self.kinetic(a, constrained) - self.rho0 * self.energy.evaluate(&a.energy_args(constrained))
    }
}

impl fmt::Debug for Splitting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Splitting({}, ρ₀ {}, ρ̃₀ {})", self.energy.name(), self.rho0, self.rho0_micro)
    }
}

#[derive(Clone)]
pub struct LagrangianModel {
    pub name: String,
    pub density: DensityFn,
    pub splitting: Option<Splitting>,
    /// Director lives in the ambient tangent space.
    pub constrained: bool,
}

impl fmt::Debug for LagrangianModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LagrangianModel({}, constrained: {}, {:?})", self.name, self.constrained, self.splitting)
    }
}

impl LagrangianModel {
    pub fn new(name: &str, density: impl Fn(&LagrangianArgs) -> f64 + Send + Sync + 'static) -> Self {
        LagrangianModel { name: name.into(), density: Arc::new(density), splitting: None, constrained: false }
    }

    pub fn constrained(mut self) -> Self {
        self.constrained = true;
        self
    }

    /// Density built from the splitting itself.
    pub fn split(name: &str, energy: Arc<dyn EnergyModel>, rho0: f64, rho0_micro: f64, constrained: bool) -> Self {
        let splitting = Splitting { energy, rho0, rho0_micro };
        let s = splitting.clone();
        LagrangianModel {
            name: name.into(),
            density: Arc::new(move |a| s.evaluate(a, constrained)),
            splitting: Some(splitting),
            constrained,
        }
    }

    /// Attaches a splitting to a directly written density. The declaration
    /// is checked against the density at `probe` (relative 1e-12).
    pub fn declare_splitting(mut self, splitting: Splitting, probe: &[LagrangianArgs]) -> Result<Self> {
        for a in probe {
            let direct = self.eval(a)?;
            let split = splitting.evaluate(a, self.constrained);
            if (direct - split).abs() > 1e-12 * (1.0 + direct.abs()) {
                return Err(Error::Unsupported(format!(
                    "declared splitting differs from the density by {:e}",
                    (direct - split).abs()
                )));
            }
        }
        self.splitting = Some(splitting);
        Ok(self)
    }

    /// |𝓛 − split sum| at `a`; `None` without a declared splitting.
    pub fn splitting_gap(&self, a: &LagrangianArgs) -> Option<f64> {
        self.splitting.as_ref().map(|s| ((self.density)(a) - s.evaluate(a, self.constrained)).abs())
    }

    pub fn eval(&self, a: &LagrangianArgs) -> Result<f64> {
        let v = (self.density)(a);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteDensity)
        }
    }
}

/// ∂𝓛 with respect to every argument slot.
///
/// `f` and `f_micro` are indexed like their arguments ([a, A], [α, A]); the
/// metric derivatives are symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct Partials {
    pub phi: Vec<f64>,
    pub phi_dot: Vec<f64>,
    pub f: Mat,
    pub g: Mat,
    pub micro: Vec<f64>,
    pub micro_dot: Vec<f64>,
    pub f_micro: Mat,
    pub g_micro: Mat,
}

fn d_vec(model: &LagrangianModel, a: &LagrangianArgs, slot: fn(&mut LagrangianArgs) -> &mut Vec<f64>) -> Result<Vec<f64>> {
    let mut probe = a.clone();
    let n = slot(&mut probe).len();
    (0..n)
        .map(|i| {
            let base = slot(&mut probe)[i];
            let eps = PERTURBATION * (1.0 + base.abs());
            central_richardson(
                |delta| {
                    let mut p = a.clone();
                    slot(&mut p)[i] += delta;
                    model.eval(&p)
                },
                eps,
            )
        })
        .collect()
}

fn d_mat(
    model: &LagrangianModel,
    a: &LagrangianArgs,
    slot: fn(&mut LagrangianArgs) -> &mut Mat,
    symmetric: bool,
) -> Result<Mat> {
    let mut probe = a.clone();
    let base = slot(&mut probe).clone();
    let (r, c) = base.shape();
    let mut out = Mat::zeros(r, c);
    for i in 0..r {
        for j in 0..c {
            if symmetric && j < i {
                continue;
            }
            let eps = PERTURBATION * (1.0 + base[(i, j)].abs());
            let v = central_richardson(
                |delta| {
                    let mut p = a.clone();
                    let m = slot(&mut p);
                    m[(i, j)] += delta;
                    if symmetric && i != j {
                        m[(j, i)] += delta;
                    }
                    model.eval(&p)
                },
                eps,
            )?;
            if symmetric && i != j {
                out[(i, j)] = 0.5 * v;
                out[(j, i)] = 0.5 * v;
            } else {
                out[(i, j)] = v;
            }
        }
    }
    Ok(out)
}

/// All partial derivatives of 𝓛 at `a` by central perturbation.
pub fn partials(model: &LagrangianModel, a: &LagrangianArgs) -> Result<Partials> {
    model.eval(a)?;
    Ok(Partials {
        phi: d_vec(model, a, |p| &mut p.phi)?,
        phi_dot: d_vec(model, a, |p| &mut p.phi_dot)?,
        f: d_mat(model, a, |p| &mut p.f, false)?,
        g: d_mat(model, a, |p| &mut p.g, true)?,
        micro: d_vec(model, a, |p| &mut p.micro)?,
        micro_dot: d_vec(model, a, |p| &mut p.micro_dot)?,
        f_micro: d_mat(model, a, |p| &mut p.f_micro, false)?,
        g_micro: d_mat(model, a, |p| &mut p.g_micro, true)?,
    })
}

/// ∂𝓛/∂F and ∂𝓛/∂F̃ alone.
pub(crate) fn flux_partials(model: &LagrangianModel, a: &LagrangianArgs) -> Result<(Mat, Mat)> {
    Ok((d_mat(model, a, |p| &mut p.f, false)?, d_mat(model, a, |p| &mut p.f_micro, false)?))
}

/// ∂𝓛/∂φ̇ alone.
pub fn momentum(model: &LagrangianModel, a: &LagrangianArgs) -> Result<Vec<f64>> {
    d_vec(model, a, |p| &mut p.phi_dot)
}

/// ∂𝓛/∂φ̃̇ alone.
pub fn micro_momentum(model: &LagrangianModel, a: &LagrangianArgs) -> Result<Vec<f64>> {
    d_vec(model, a, |p| &mut p.micro_dot)
}

/// Reference grid × uniform time levels carrying φ, φ̃ and their rates.
#[derive(Debug, Clone)]
pub struct SpacetimeGrid {
    pub body: Arc<ReferenceBody>,
    pub ambient: Arc<MetricChart>,
    pub director: DirectorKind,
    pub dt: f64,
    pub levels: Vec<Snapshot>,
}

impl SpacetimeGrid {
    pub fn new(
        body: Arc<ReferenceBody>,
        ambient: Arc<MetricChart>,
        director: DirectorKind,
        dt: f64,
        levels: Vec<Snapshot>,
    ) -> Result<Self> {
        let d = body.dim();
        if ambient.dim() != d {
            return Err(Error::DimensionMismatch(format!("ambient dim {} vs body dim {d}", ambient.dim())));
        }
        if matches!(director, DirectorKind::Scalar) {
            return Err(Error::Unsupported("scalar directors have no Lagrangian form here".into()));
        }
        if levels.is_empty() {
            return Err(Error::MissingTimeLevel("a space-time grid needs at least one level".into()));
        }
        if !(dt > 0.0) {
            return Err(Error::DimensionMismatch("time step must be positive".into()));
        }
        let (n, m) = (body.len(), director.dim(d));
        for s in &levels {
            if s.phi.len() != n * d || s.phi_dot.len() != n * d || s.micro.len() != n * m || s.micro_dot.len() != n * m {
                return Err(Error::DimensionMismatch("snapshot arrays do not match node count".into()));
            }
        }
        Ok(SpacetimeGrid { body, ambient, director, dt, levels })
    }

    /// Samples `count` levels t₀, t₀ + dt, … of an analytic motion.
    pub fn sample(
        motion: &AnalyticMotion,
        body: Arc<ReferenceBody>,
        ambient: Arc<MetricChart>,
        director: DirectorKind,
        t0: f64,
        dt: f64,
        count: usize,
    ) -> Result<Self> {
        let levels = (0..count)
            .map(|k| {
                let st = motion.sample(body.clone(), ambient.clone(), director.clone(), t0 + k as f64 * dt, dt, 1)?;
                Ok(st.levels.into_iter().next().expect("one level"))
            })
            .collect::<Result<Vec<_>>>()?;
        SpacetimeGrid::new(body, ambient, director, dt, levels)
    }

    pub fn dim(&self) -> usize {
        self.body.dim()
    }

    pub fn micro_dim(&self) -> usize {
        self.director.dim(self.dim())
    }

    pub fn len(&self) -> usize {
        self.body.len()
    }

    pub fn is_empty(&self) -> bool {
        self.body.is_empty()
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub(crate) fn check_model(&self, model: &LagrangianModel) -> Result<()> {
        if model.constrained && !matches!(self.director, DirectorKind::TangentOfAmbient) {
            return Err(Error::DimensionMismatch("constrained models need a tangent-of-ambient director".into()));
        }
        Ok(())
    }

    /// Trapezoid quadrature weight of a node times √det G.
    pub fn node_weight(&self, node: usize) -> Result<f64> {
        let grid = &self.body.grid;
        let idx = grid.multi(node);
        let mut w = 1.0;
        for (axis, &i) in idx.iter().enumerate() {
            let edge = i == 0 || i + 1 == grid.counts[axis];
            w *= grid.spacing[axis] * if edge { 0.5 } else { 1.0 };
        }
        Ok(w * self.body.chart.volume_density(&grid.coords(node))?)
    }

    /// Lagrangian arguments at a node of a level (one-sided stencils at the boundary).
    pub fn args(&self, level: usize, node: usize) -> Result<LagrangianArgs> {
        let s = self.levels.get(level).ok_or_else(|| Error::MissingTimeLevel(format!("level {level}")))?;
        args_from(&self.body, &self.ambient, &self.director, s, node)
    }

    /// A motion state centred on `level` (up to three levels).
    pub fn motion_state(&self, level: usize) -> Result<MotionState> {
        if level >= self.levels.len() {
            return Err(Error::MissingTimeLevel(format!("level {level}")));
        }
        let lo = level.saturating_sub(1);
        let hi = (level + 1).min(self.levels.len() - 1);
        MotionState::new(
            self.body.clone(),
            self.ambient.clone(),
            self.director.clone(),
            self.dt,
            self.levels[lo..=hi].to_vec(),
            level - lo,
        )
    }
}

pub(crate) fn args_from(
    body: &ReferenceBody,
    ambient: &MetricChart,
    director: &DirectorKind,
    s: &Snapshot,
    node: usize,
) -> Result<LagrangianArgs> {
    let d = body.dim();
    let m = director.dim(d);
    let grid = &body.grid;
    let big_x = grid.coords(node);
    let phi = s.phi[node * d..(node + 1) * d].to_vec();
    let (fg, _) = grid_gradient(grid, &s.phi, d, node, true)?;
    let f = Mat::from_row_slice(d, d, &fg);
    let f_micro = if m > 0 {
        Mat::from_row_slice(m, d, &grid_gradient(grid, &s.micro, m, node, true)?.0)
    } else {
        Mat::zeros(0, d)
    };
    let micro = s.micro[node * m..(node + 1) * m].to_vec();
    let (g_micro, gamma) = match director {
        DirectorKind::FreeVector(chart) => (chart.metric(&micro)?, None),
        DirectorKind::TangentOfAmbient => (Mat::zeros(0, 0), Some(christoffel(ambient, &phi)?)),
        _ => (Mat::zeros(0, 0), None),
    };
    Ok(LagrangianArgs {
        t: s.time,
        big_g: body.chart.metric(&big_x)?,
        g: ambient.metric(&phi)?,
        big_x,
        phi_dot: s.phi_dot[node * d..(node + 1) * d].to_vec(),
        phi,
        f,
        micro,
        micro_dot: s.micro_dot[node * m..(node + 1) * m].to_vec(),
        f_micro,
        g_micro,
        gamma,
    })
}
