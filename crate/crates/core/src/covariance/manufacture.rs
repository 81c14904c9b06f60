//! Manufactured states: stresses from the energy and loads solved from the
//! momentum balances, so every residual vanishes by construction.

use crate::constitutive::{doyle_ericksen_stress, micro_doyle_ericksen_stress, EnergyModel, StressState};
use crate::error::Result;
use crate::kinematics::{DeformedFields, DirectorKind};

use super::loads::BodyLoads;
use super::residuals::{micro_stress_divergence, stress_divergence};
use super::scs::scs_curvature_force;

/// σ = 2ρ∂e/∂g and, for free-vector directors, σ̃ = F₀⁻¹(2ρ∂e/∂g̃).
pub fn free_regime_stresses(model: &dyn EnergyModel, fields: &DeformedFields) -> Result<StressState> {
    let mut s = doyle_ericksen_stress(model, fields)?;
    if let DirectorKind::FreeVector(_) = fields.director {
        s.micro_cauchy = micro_doyle_ericksen_stress(model, fields)?.into_iter().map(|m| m.sigma).collect();
        crate::constitutive::piola_transform(&mut s, fields)?;
    }
    Ok(s)
}

/// b = a − div σ/ρ (plus (σ̃⊗p):ℛ/ρ for tangent-of-ambient directors) and
/// b̃ = jã − div σ̃/ρ, using the same discrete divergence as the residuals.
pub fn balancing_loads(stress: &StressState, fields: &DeformedFields) -> Result<BodyLoads> {
    let d = fields.dim();
    let m = fields.director_dim();
    let mut loads = BodyLoads::zeros(fields);
    let div = stress_divergence(stress, fields)?;
    let force = if matches!(fields.director, DirectorKind::TangentOfAmbient) {
        Some(scs_curvature_force(stress, fields)?)
    } else {
        None
    };
    for n in 0..fields.len() {
        let a = fields.accel(n)?;
        let rho = fields.rho(n);
        for i in 0..d {
            let f = force.as_ref().map(|f| f.at(n)[i]).unwrap_or(0.0);
            loads.b[n * d + i] = a[i] + (f - div[n][i]) / rho;
        }
    }
    if m > 0 {
        let div_t = micro_stress_divergence(stress, fields)?;
        for n in 0..fields.len() {
            let at = fields.micro_accel(n)?;
            let (rho, j) = (fields.rho(n), fields.inertia(n));
            for i in 0..m {
                loads.b_micro[n * m + i] = j * at[i] - div_t[n][i] / rho;
            }
        }
    }
    Ok(loads)
}
