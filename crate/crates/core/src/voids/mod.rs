//! Elastic solids with distributed voids: a scalar director ν (matrix volume
//! fraction), the equilibrated inertia κ carried as the body's micro inertia,
//! the equilibrated momentum balance and the scalar Doyle-Ericksen formula,
//! plus a one-dimensional bar simulator.

mod bar;

pub use bar::{
    oscillation_frequency, simulate_voids_bar, BarEnergy, InitialCondition, VoidsBarConfig, VoidsBarRecord,
    VoidsBarRun, VoidsCoefficients,
};

use serde::{Deserialize, Serialize};

use crate::constitutive::{void_gradient_derivative, EnergyArgs, EnergyModel};
use crate::covariance::{divergence, residual_micro_inertia, LeadingIndex, NodalField};
use crate::error::{Error, Result};
use crate::kinematics::{DeformedFields, DirectorKind};
use crate::tensor::Mat;

/// Which inertia multiplies ã in the equilibrated momentum balance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InertiaForm {
    /// ρã
    #[default]
    Printed,
    /// ρκã, the form implied by the ½κṽ² kinetic energy.
    KineticConsistent,
}

/// Void fields at one instant. ρ₀ is stored factored as ρ̄₀ ν₀.
#[derive(Debug, Clone, PartialEq)]
pub struct VoidState {
    matrix_density0: Vec<f64>,
    volume_fraction0: Vec<f64>,
    /// σ̃^a per node, `dim` entries each.
    pub void_stress: Vec<f64>,
    /// b̃ per node.
    pub void_body_force: Vec<f64>,
    /// t̃ per node (used only on the boundary).
    pub void_traction: Vec<f64>,
}

impl VoidState {
    pub fn new(matrix_density0: Vec<f64>, volume_fraction0: Vec<f64>, dim: usize) -> Result<Self> {
        let n = matrix_density0.len();
        if volume_fraction0.len() != n {
            return Err(Error::DimensionMismatch("one volume fraction per node".into()));
        }
        if matrix_density0.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(Error::NonFiniteDensity);
        }
        check_fraction(&volume_fraction0, 0)?;
        Ok(VoidState {
            matrix_density0,
            volume_fraction0,
            void_stress: vec![0.0; n * dim],
            void_body_force: vec![0.0; n],
            void_traction: vec![0.0; n],
        })
    }

    /// Factors the body's ρ₀ by the current ν: ρ̄₀ = ρ₀ / ν₀.
    pub fn from_fields(fields: &DeformedFields) -> Result<Self> {
        need_scalar(fields)?;
        let nu: Vec<f64> = (0..fields.len()).map(|n| fields.p(n)[0]).collect();
        check_fraction(&nu, 0)?;
        let bar = fields.body.density0.iter().zip(&nu).map(|(r, v)| r / v).collect();
        VoidState::new(bar, nu, fields.dim())
    }

    /// σ̃^a = ρ ∂e/∂(Tν)_a at every interior node; boundary nodes use one-sided gradients.
    pub fn with_model_stress(mut self, model: &dyn EnergyModel, fields: &DeformedFields) -> Result<Self> {
        let d = fields.dim();
        for n in 0..fields.len() {
            let args = EnergyArgs::at_node(fields, n)?;
            let de = void_gradient_derivative(model, &args)?;
            for a in 0..d {
                self.void_stress[n * d + a] = fields.rho(n) * de[a];
            }
        }
        Ok(self)
    }

    /// Sets σ̃ from a closure of the current position.
    pub fn with_void_stress(mut self, fields: &DeformedFields, sigma: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        let d = fields.dim();
        for n in 0..fields.len() {
            self.void_stress[n * d..(n + 1) * d].copy_from_slice(&sigma(fields.x(n)));
        }
        self
    }

    pub fn with_body_force(mut self, fields: &DeformedFields, b: impl Fn(&[f64]) -> f64) -> Self {
        for n in 0..fields.len() {
            self.void_body_force[n] = b(fields.x(n));
        }
        self
    }

    pub fn len(&self) -> usize {
        self.matrix_density0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix_density0.is_empty()
    }

    pub fn matrix_density0(&self, node: usize) -> f64 {
        self.matrix_density0[node]
    }

    pub fn volume_fraction0(&self, node: usize) -> f64 {
        self.volume_fraction0[node]
    }

    /// ρ₀ = ρ̄₀ ν₀.
    pub fn density0(&self, node: usize) -> f64 {
        self.matrix_density0[node] * self.volume_fraction0[node]
    }

    /// Updates ν₀ keeping ρ₀ fixed, as the void fraction evolves.
    pub fn set_volume_fraction(&mut self, node: usize, nu: f64, step: usize) -> Result<()> {
        if !(nu > 0.0 && nu <= 1.0) {
            return Err(Error::VoidFractionOutOfRange { node, value: nu, step });
        }
        let rho0 = self.density0(node);
        self.volume_fraction0[node] = nu;
        self.matrix_density0[node] = rho0 / nu;
        Ok(())
    }

    fn stress_row(&self, node: usize, dim: usize) -> Mat {
        Mat::from_row_slice(1, dim, &self.void_stress[node * dim..(node + 1) * dim])
    }
}

fn check_fraction(nu: &[f64], step: usize) -> Result<()> {
    match nu.iter().position(|v| !(*v > 0.0 && *v <= 1.0)) {
        Some(node) => Err(Error::VoidFractionOutOfRange { node, value: nu[node], step }),
        None => Ok(()),
    }
}

fn need_scalar(fields: &DeformedFields) -> Result<()> {
    if !matches!(fields.director, DirectorKind::Scalar) {
        return Err(Error::DimensionMismatch(format!("voids need a scalar director, got {:?}", fields.director)));
    }
    Ok(())
}

/// (Tν)_a = F^{-A}_a ∂ν/∂X^A at an interior node.
pub fn void_gradient(fields: &DeformedFields, node: usize) -> Result<Vec<f64>> {
    need_scalar(fields)?;
    if !fields.body.grid.is_interior(node) {
        return Err(Error::BoundaryNode { node });
    }
    let finv = fields.f_inv(node);
    if !finv.iter().all(|v| v.is_finite()) || fields.jac(node).abs() < 1e-14 {
        return Err(Error::DegenerateF { node, det: fields.jac(node) });
    }
    let tn = fields.micro_grad(node) * finv;
    Ok(tn.row(0).iter().copied().collect())
}

/// div σ̃ + ρb̃ − ρã (printed) or div σ̃ + ρb̃ − ρκã (kinetic-consistent).
pub fn residual_equilibrated_momentum(state: &VoidState, fields: &DeformedFields, form: InertiaForm) -> Result<NodalField> {
    need_scalar(fields)?;
    let d = fields.dim();
    let rows: Vec<Mat> = (0..fields.len()).map(|n| state.stress_row(n, d)).collect();
    let div = divergence(fields, &rows, LeadingIndex::Plain)?;
    let out = (0..fields.len())
        .map(|n| {
            let a = fields.micro_accel(n)?[0];
            let inertia = match form {
                InertiaForm::Printed => 1.0,
                InertiaForm::KineticConsistent => fields.inertia(n),
            };
            let rho = fields.rho(n);
            Ok(vec![div[n][0] + rho * state.void_body_force[n] - rho * inertia * a])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NodalField::from_rows(out, 1))
}

/// F^{-A}_a σ̃^a ν_{,A} − ρ ∂e/∂ν_{,A} ν_{,A}. Both sides are evaluated through
/// Tν, since ∂e/∂ν_{,A} ν_{,A} = ∂e/∂(Tν)_a (Tν)_a.
pub fn residual_scalar_doyle_ericksen(state: &VoidState, fields: &DeformedFields, model: &dyn EnergyModel) -> Result<NodalField> {
    need_scalar(fields)?;
    let d = fields.dim();
    let out = (0..fields.len())
        .map(|n| {
            let args = EnergyArgs::at_node(fields, n)?;
            let tn = args.grad_nu.clone().unwrap_or_else(|| vec![0.0; d]);
            let lhs: f64 = (0..d).map(|a| state.void_stress[n * d + a] * tn[a]).sum();
            let de = void_gradient_derivative(model, &args)?;
            let rhs: f64 = fields.rho(n) * de.iter().zip(&tn).map(|(x, y)| x * y).sum::<f64>();
            Ok(vec![lhs - rhs])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NodalField::from_rows(out, 1))
}

/// κ̇ along the motion.
pub fn residual_equilibrated_inertia(fields: &DeformedFields) -> Result<NodalField> {
    need_scalar(fields)?;
    residual_micro_inertia(fields)
}
