use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{residual_equilibrated_inertia, residual_scalar_doyle_ericksen, InertiaForm, VoidState};
use crate::constitutive::VoidsQuadratic;
use crate::covariance::residual_mass;
use crate::error::{Error, Result};
use crate::geometry::MetricChart;
use crate::grid::RectGrid;
use crate::kinematics::{spatial_fields, DirectorKind, MotionState, ReferenceBody, Snapshot};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoidsCoefficients {
    pub c_nu: f64,
    pub nu_ref: f64,
    pub alpha: f64,
    pub mu: f64,
    pub lambda: f64,
}

impl VoidsCoefficients {
    pub fn model(&self, rho0_ref: f64) -> VoidsQuadratic {
        VoidsQuadratic {
            c_nu: self.c_nu,
            nu_ref: self.nu_ref,
            alpha: self.alpha,
            mu: self.mu,
            lambda: self.lambda,
            rho0_ref,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// u = 0, ν = ν_ref, at rest.
    Rest,
    /// u = 0, ν = ν_ref + amplitude everywhere.
    VoidOscillation { amplitude: f64 },
    /// u = d sin(πX/L), ν = ν_ref + a cos(πX/L).
    Mixed { displacement: f64, void_amplitude: f64 },
}

fn default_safety() -> f64 {
    0.5
}

fn default_every() -> usize {
    100
}

fn default_dim() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoidsBarConfig {
    #[serde(default = "default_dim")]
    pub dim: usize,
    pub length: f64,
    pub nodes: usize,
    pub dt: f64,
    pub steps: usize,
    /// Reference density ρ₀, uniform.
    pub rho0: f64,
    /// Equilibrated inertia κ, uniform.
    pub kappa: f64,
    pub coefficients: VoidsCoefficients,
    #[serde(default)]
    pub inertia_form: InertiaForm,
    pub initial: InitialCondition,
    #[serde(default = "default_safety")]
    pub cfl_safety: f64,
    /// Residual diagnostics every this many steps (0 disables them).
    #[serde(default = "default_every")]
    pub diagnostics_every: usize,
}

/// Energy per unit reference length of the discrete bar, with closed-form partials.
///
/// Cells carry s[α/2 (ν_X/F)² + μ/2 (F² − 1) + λ/4 (F² − 1)²] and nodes carry
/// s c_ν (ν − ν_ref)², s = ρ₀/ρ_ref.
#[derive(Debug, Clone, PartialEq)]
pub struct BarEnergy {
    pub coefficients: VoidsCoefficients,
    pub scale: f64,
}

impl BarEnergy {
    /// (W, ∂W/∂F, ∂W/∂ν_X) for one cell.
    pub fn cell(&self, f: f64, nux: f64) -> (f64, f64, f64) {
        let c = &self.coefficients;
        let t = f * f - 1.0;
        let tn = nux / f;
        let w = 0.5 * c.alpha * tn * tn + 0.5 * c.mu * t + 0.25 * c.lambda * t * t;
        let dw_df = -c.alpha * nux * nux / (f * f * f) + c.mu * f + c.lambda * t * f;
        let dw_dnux = c.alpha * nux / (f * f);
        (self.scale * w, self.scale * dw_df, self.scale * dw_dnux)
    }

    /// ∂²W/∂F² for one cell.
    pub fn cell_stiffness(&self, f: f64, nux: f64) -> f64 {
        let c = &self.coefficients;
        self.scale * (3.0 * c.alpha * nux * nux / f.powi(4) + c.mu + c.lambda * (3.0 * f * f - 1.0))
    }

    /// (W, ∂W/∂ν) for one node.
    pub fn node(&self, nu: f64) -> (f64, f64) {
        let c = &self.coefficients;
        let d = nu - c.nu_ref;
        (self.scale * c.c_nu * d * d, self.scale * 2.0 * c.c_nu * d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoidsBarRecord {
    pub step: usize,
    pub time: f64,
    pub kinetic: f64,
    pub internal: f64,
    pub total_energy: f64,
    /// ν at the middle node.
    pub probe: f64,
    pub mass_residual: Option<f64>,
    pub inertia_residual: Option<f64>,
    pub scalar_de_residual: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct VoidsBarRun {
    pub stability_limit: f64,
    pub records: Vec<VoidsBarRecord>,
    pub displacement: Vec<f64>,
    pub velocity: Vec<f64>,
    pub volume_fraction: Vec<f64>,
    pub void_rate: Vec<f64>,
    pub void_state: VoidState,
    pub final_state: MotionState,
}

impl VoidsBarRun {
    /// Largest |E − E₀| / |E₀| over the run.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.records[0].total_energy;
        let scale = if e0.abs() > 0.0 { e0.abs() } else { 1.0 };
        self.records.iter().map(|r| (r.total_energy - e0).abs() / scale).fold(0.0, f64::max)
    }
}

struct Bar<'a> {
    cfg: &'a VoidsBarConfig,
    energy: BarEnergy,
    h: f64,
    weights: Vec<f64>,
    void_mass_factor: f64,
}

impl<'a> Bar<'a> {
    fn new(cfg: &'a VoidsBarConfig) -> Result<Self> {
        if cfg.dim != 1 {
            return Err(Error::Unsupported(format!("voids bar simulation in {} dimensions", cfg.dim)));
        }
        if cfg.nodes < 3 || !(cfg.length > 0.0) || !(cfg.dt > 0.0) {
            return Err(Error::DimensionMismatch("bar needs length > 0, dt > 0 and at least 3 nodes".into()));
        }
        if !(cfg.rho0 > 0.0) || !(cfg.kappa > 0.0) {
            return Err(Error::NonFiniteDensity);
        }
        let h = cfg.length / (cfg.nodes - 1) as f64;
        let mut weights = vec![h; cfg.nodes];
        weights[0] = 0.5 * h;
        weights[cfg.nodes - 1] = 0.5 * h;
        let void_mass_factor = match cfg.inertia_form {
            InertiaForm::Printed => 1.0,
            InertiaForm::KineticConsistent => cfg.kappa,
        };
        let energy = BarEnergy { coefficients: cfg.coefficients.clone(), scale: 1.0 };
        Ok(Bar { cfg, energy, h, weights, void_mass_factor })
    }

    fn initial(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.cfg.nodes;
        let nu_ref = self.cfg.coefficients.nu_ref;
        let xs: Vec<f64> = (0..n).map(|i| i as f64 * self.h).collect();
        let pi_l = std::f64::consts::PI / self.cfg.length;
        match self.cfg.initial {
            InitialCondition::Rest => (vec![0.0; n], vec![nu_ref; n]),
            InitialCondition::VoidOscillation { amplitude } => (vec![0.0; n], vec![nu_ref + amplitude; n]),
            InitialCondition::Mixed { displacement, void_amplitude } => (
                xs.iter().map(|x| displacement * (pi_l * x).sin()).collect(),
                xs.iter().map(|x| nu_ref + void_amplitude * (pi_l * x).cos()).collect(),
            ),
        }
    }

    fn cell_state(&self, u: &[f64], nu: &[f64], c: usize) -> (f64, f64) {
        (1.0 + (u[c + 1] - u[c]) / self.h, (nu[c + 1] - nu[c]) / self.h)
    }

    /// Energy per unit reference volume is ρ₀ e = (ρ₀/ρ_ref) W; with ρ_ref = ρ₀ the scale is one.
    fn potential(&self, u: &[f64], nu: &[f64]) -> f64 {
        let n = u.len();
        let mut v = 0.0;
        for c in 0..n - 1 {
            let (f, nux) = self.cell_state(u, nu, c);
            v += self.h * self.energy.cell(f, nux).0;
        }
        for i in 0..n {
            v += self.weights[i] * self.energy.node(nu[i]).0;
        }
        v
    }

    fn kinetic(&self, ud: &[f64], nud: &[f64]) -> f64 {
        let rho = self.cfg.rho0;
        (0..ud.len())
            .map(|i| 0.5 * self.weights[i] * rho * (ud[i] * ud[i] + self.void_mass_factor * nud[i] * nud[i]))
            .sum()
    }

    fn accelerations(&self, u: &[f64], nu: &[f64], au: &mut [f64], anu: &mut [f64]) -> Result<()> {
        let n = u.len();
        au.iter_mut().for_each(|a| *a = 0.0);
        anu.iter_mut().for_each(|a| *a = 0.0);
        for c in 0..n - 1 {
            let (f, nux) = self.cell_state(u, nu, c);
            if !(f > 0.0) {
                return Err(Error::DegenerateF { node: c, det: f });
            }
            let (_, p, q) = self.energy.cell(f, nux);
            au[c] += p;
            au[c + 1] -= p;
            anu[c] += q;
            anu[c + 1] -= q;
        }
        let rho = self.cfg.rho0;
        for i in 0..n {
            let (_, dn) = self.energy.node(nu[i]);
            anu[i] -= self.weights[i] * dn;
            au[i] /= self.weights[i] * rho;
            anu[i] /= self.weights[i] * rho * self.void_mass_factor;
        }
        au[0] = 0.0;
        au[n - 1] = 0.0;
        if au.iter().chain(anu.iter()).any(|a| !a.is_finite()) {
            return Err(Error::NumericBlowUp("non-finite bar acceleration".into()));
        }
        Ok(())
    }

    fn stability_limit(&self, u: &[f64], nu: &[f64]) -> f64 {
        let rho = self.cfg.rho0;
        let c = &self.cfg.coefficients;
        let mut omega2: f64 = 0.0;
        for cell in 0..u.len() - 1 {
            let (f, nux) = self.cell_state(u, nu, cell);
            let kf = self.energy.cell_stiffness(f, nux).max(0.0);
            omega2 = omega2.max(4.0 * kf / (rho * self.h * self.h));
            let kn = 4.0 * c.alpha / (f * f * self.h * self.h) + 2.0 * c.c_nu;
            omega2 = omega2.max(kn.max(0.0) / (rho * self.void_mass_factor));
        }
        if omega2 > 0.0 {
            2.0 / omega2.sqrt()
        } else {
            f64::INFINITY
        }
    }
}

/// Explicit velocity-Verlet evolution of a 1D bar with voids: fixed
/// displacement at both ends, zero void traction.
pub fn simulate_voids_bar(cfg: &VoidsBarConfig) -> Result<VoidsBarRun> {
    let bar = Bar::new(cfg)?;
    let n = cfg.nodes;
    let (mut u, mut nu) = bar.initial();
    super::check_fraction(&nu, 0)?;
    let limit = bar.stability_limit(&u, &nu);
    if cfg.dt > cfg.cfl_safety * limit {
        return Err(Error::CflViolation { dt: cfg.dt, limit: cfg.cfl_safety * limit });
    }

    let grid = RectGrid::cube(&[0.0], &[cfg.length], n)?;
    let chart = Arc::new(MetricChart::euclidean(1));
    let body = Arc::new(ReferenceBody::uniform(chart.clone(), grid, cfg.rho0, cfg.kappa)?);
    let model = cfg.coefficients.model(cfg.rho0);
    let xs: Vec<f64> = (0..n).map(|i| i as f64 * bar.h).collect();
    let snapshot = |t: f64, u: &[f64], ud: &[f64], nu: &[f64], nud: &[f64]| Snapshot {
        time: t,
        phi: xs.iter().zip(u).map(|(x, v)| x + v).collect(),
        phi_dot: ud.to_vec(),
        micro: nu.to_vec(),
        micro_dot: nud.to_vec(),
    };

    let mut ud = vec![0.0; n];
    let mut nud = vec![0.0; n];
    let mut au = vec![0.0; n];
    let mut anu = vec![0.0; n];
    bar.accelerations(&u, &nu, &mut au, &mut anu)?;
    let mid = n / 2;
    let record = |step: usize, u: &[f64], ud: &[f64], nu: &[f64], nud: &[f64]| {
        let kinetic = bar.kinetic(ud, nud);
        let internal = bar.potential(u, nu);
        VoidsBarRecord {
            step,
            time: step as f64 * cfg.dt,
            kinetic,
            internal,
            total_energy: kinetic + internal,
            probe: nu[mid],
            mass_residual: None,
            inertia_residual: None,
            scalar_de_residual: None,
        }
    };
    let mut records = Vec::with_capacity(cfg.steps + 1);
    records.push(record(0, &u, &ud, &nu, &nud));
    let mut history: VecDeque<Snapshot> = VecDeque::with_capacity(3);
    history.push_back(snapshot(0.0, &u, &ud, &nu, &nud));

    let dt = cfg.dt;
    for step in 1..=cfg.steps {
        for i in 0..n {
            ud[i] += 0.5 * dt * au[i];
            nud[i] += 0.5 * dt * anu[i];
            u[i] += dt * ud[i];
            nu[i] += dt * nud[i];
        }
        if let Some(node) = nu.iter().position(|v| !(*v > 0.0 && *v <= 1.0)) {
            return Err(Error::VoidFractionOutOfRange { node, value: nu[node], step });
        }
        bar.accelerations(&u, &nu, &mut au, &mut anu)?;
        for i in 0..n {
            ud[i] += 0.5 * dt * au[i];
            nud[i] += 0.5 * dt * anu[i];
        }
        records.push(record(step, &u, &ud, &nu, &nud));

        if history.len() == 3 {
            history.pop_front();
        }
        history.push_back(snapshot(step as f64 * dt, &u, &ud, &nu, &nud));
        let centre = step - 1;
        if cfg.diagnostics_every > 0 && centre > 0 && centre % cfg.diagnostics_every == 0 && history.len() == 3 {
            let state = MotionState::new(body.clone(), chart.clone(), DirectorKind::Scalar, dt, history.iter().cloned().collect(), 1)?;
            let fields = spatial_fields(&state)?;
            let nodes = fields.interior_nodes();
            let voids = VoidState::from_fields(&fields)?.with_model_stress(&model, &fields)?;
            let r = &mut records[centre];
            r.mass_residual = Some(residual_mass(&fields)?.linf(&nodes));
            r.inertia_residual = Some(residual_equilibrated_inertia(&fields)?.linf(&nodes));
            r.scalar_de_residual = Some(residual_scalar_doyle_ericksen(&voids, &fields, &model)?.linf(&nodes));
        }
    }

    let final_state = MotionState::new(body, chart, DirectorKind::Scalar, dt, vec![snapshot(cfg.steps as f64 * dt, &u, &ud, &nu, &nud)], 0)?;
    let fields = spatial_fields(&final_state)?;
    let void_state = VoidState::from_fields(&fields)?;
    Ok(VoidsBarRun {
        stability_limit: limit,
        records,
        displacement: u,
        velocity: ud,
        volume_fraction: nu,
        void_rate: nud,
        void_state,
        final_state,
    })
}

/// Angular frequency from upward crossings of `mean`, linearly interpolated.
pub fn oscillation_frequency(times: &[f64], signal: &[f64], mean: f64) -> Option<f64> {
    let mut crossings = Vec::new();
    for k in 1..signal.len().min(times.len()) {
        let (a, b) = (signal[k - 1] - mean, signal[k] - mean);
        if a < 0.0 && b >= 0.0 {
            let s = a / (a - b);
            crossings.push(times[k - 1] + s * (times[k] - times[k - 1]));
        }
    }
    if crossings.len() < 2 {
        return None;
    }
    let span = crossings[crossings.len() - 1] - crossings[0];
    Some(2.0 * std::f64::consts::PI * (crossings.len() - 1) as f64 / span)
}
