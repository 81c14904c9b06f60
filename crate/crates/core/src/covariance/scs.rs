//! Residuals for continua whose director is a tangent vector of the ambient
//! space, including the curvature force and the two-flow refinement.

use rayon::prelude::*;

use crate::constitutive::{connection_derivative, metric_derivative, EnergyArgs, EnergyModel, MetricSlot, StressState};
use crate::error::{Error, Result};
use crate::geometry::{curvature, Connection};
use crate::kinematics::{DeformedFields, DirectorKind};
use crate::tensor::{skew, Mat, Tensor};

use super::loads::BodyLoads;
use super::ops::{curvature_force, micro_stress_connection, vector_gradient};
use super::report::NodalField;
use super::residuals::{micro_stress_divergence, stress_divergence};

fn need_scs(fields: &DeformedFields) -> Result<()> {
    if !matches!(fields.director, DirectorKind::TangentOfAmbient) {
        return Err(Error::DimensionMismatch(format!(
            "SCS residuals need a tangent-of-ambient director, found {}",
            fields.director.tag()
        )));
    }
    Ok(())
}

/// R^a_{dbc} of the ambient Levi-Civita connection at every node.
pub fn ambient_curvature(fields: &DeformedFields) -> Result<Vec<Tensor>> {
    let conn = Connection::levi_civita(fields.ambient.clone());
    (0..fields.len()).into_par_iter().map(|n| curvature(&conn, fields.x(n))).collect()
}

/// (σ̃⊗p) in the [a, b, c] layout of ∂e/∂Γ^a_{bc}.
pub fn micro_stress_tensor(stress: &StressState, fields: &DeformedFields, node: usize) -> Result<Tensor> {
    Ok(micro_stress_connection(&stress.micro_cauchy[node], fields.p(node), &fields.metric(node)?))
}

fn momentum_with_force(
    stress: &StressState,
    fields: &DeformedFields,
    loads: &BodyLoads,
    conjugate: impl Fn(usize) -> Result<Tensor> + Sync,
) -> Result<NodalField> {
    loads.check(fields)?;
    let d = fields.dim();
    let div = stress_divergence(stress, fields)?;
    let riemann = ambient_curvature(fields)?;
    let rows = (0..fields.len())
        .into_par_iter()
        .map(|n| {
            let a = fields.accel(n)?;
            let rho = fields.rho(n);
            let b = loads.b(n, d);
            let f = curvature_force(&conjugate(n)?, &riemann[n], &fields.metric(n)?)?;
            Ok((0..d).map(|i| div[n][i] + rho * (b[i] - a[i]) - f[i]).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NodalField::from_rows(rows, d))
}

/// div σ + ρb − ρa − (σ̃⊗p):ℛ.
pub fn residual_scs_linear_momentum(
    stress: &StressState,
    fields: &DeformedFields,
    loads: &BodyLoads,
    _model: &dyn EnergyModel,
) -> Result<NodalField> {
    need_scs(fields)?;
    momentum_with_force(stress, fields, loads, |n| micro_stress_tensor(stress, fields, n))
}

/// Curvature force (σ̃⊗p):ℛ per node, raised with g.
pub fn scs_curvature_force(stress: &StressState, fields: &DeformedFields) -> Result<NodalField> {
    need_scs(fields)?;
    let riemann = ambient_curvature(fields)?;
    let rows = (0..fields.len())
        .map(|n| curvature_force(&micro_stress_tensor(stress, fields, n)?, &riemann[n], &fields.metric(n)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(NodalField::from_rows(rows, fields.dim()))
}

/// div(σ̃⊗p) + ρ(b̃ − jã)⊗p with components (σ̃^{ac} p^b)_{|c} + ρ(b̃^a − jã^a)p^b.
pub fn micro_momentum_tensor(stress: &StressState, fields: &DeformedFields, loads: &BodyLoads) -> Result<Vec<Mat>> {
    need_scs(fields)?;
    loads.check(fields)?;
    let d = fields.dim();
    let div_t = micro_stress_divergence(stress, fields)?;
    let p_all = &fields.now().p;
    (0..fields.len())
        .into_par_iter()
        .map(|n| {
            let grad_p = vector_gradient(fields, p_all, n)?;
            let p = fields.p(n);
            let at = fields.micro_accel(n)?;
            let bt = loads.b_micro(n, d);
            let (rho, j) = (fields.rho(n), fields.inertia(n));
            let st = &stress.micro_cauchy[n];
            let mut out = Mat::zeros(d, d);
            for a in 0..d {
                for b in 0..d {
                    let mut v = (div_t[n][a] + rho * (bt[a] - j * at[a])) * p[b];
                    for c in 0..d {
                        v += st[(a, c)] * grad_p[(b, c)];
                    }
                    out[(a, b)] = v;
                }
            }
            Ok(out)
        })
        .collect()
}

/// σ + (div σ̃)⊗p + σ̃·∇p + ρ(b̃ − jã)⊗p at every node. Both the
/// Doyle-Ericksen and the angular residual read this one expression.
pub fn scs_bracket(stress: &StressState, fields: &DeformedFields, loads: &BodyLoads) -> Result<Vec<Mat>> {
    let m = micro_momentum_tensor(stress, fields, loads)?;
    Ok(m.into_iter().zip(&stress.cauchy).map(|(mm, s)| s + mm).collect())
}

/// Left side minus right side of 2ρ ∂e/∂g = σ + ρ(b̃ − jã)⊗p + div(σ̃⊗p).
#[derive(Debug, Clone, PartialEq)]
pub struct ScsDoyleEricksen {
    pub defect: NodalField,
    /// The right-hand side exactly as used for the defect.
    pub rhs: Vec<Mat>,
}

pub fn residual_scs_doyle_ericksen(
    stress: &StressState,
    fields: &DeformedFields,
    loads: &BodyLoads,
    model: &dyn EnergyModel,
) -> Result<ScsDoyleEricksen> {
    let rhs = scs_bracket(stress, fields, loads)?;
    let defect: Vec<Mat> = (0..fields.len())
        .into_par_iter()
        .map(|n| {
            let args = EnergyArgs::at_node(fields, n)?;
            Ok(metric_derivative(model, &args, MetricSlot::Spatial)? * (2.0 * fields.rho(n)) - &rhs[n])
        })
        .collect::<Result<_>>()?;
    Ok(ScsDoyleEricksen { defect: NodalField::from_mats(&defect), rhs })
}

/// Skew part of the bracket returned by [`scs_bracket`].
pub fn residual_scs_angular(stress: &StressState, fields: &DeformedFields, loads: &BodyLoads) -> Result<NodalField> {
    let b = scs_bracket(stress, fields, loads)?;
    Ok(skew_field(&b))
}

pub fn skew_field(mats: &[Mat]) -> NodalField {
    let s: Vec<Mat> = mats.iter().map(skew).collect();
    NodalField::from_mats(&s)
}

/// Residuals implied by invariance under two independent flows.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedResiduals {
    /// div σ + ρb − ρa − ρ(∂e/∂∇):ℛ
    pub macro_momentum: NodalField,
    /// div(σ̃⊗p) + ρb̃⊗p − ρjã⊗p
    pub micro_momentum: NodalField,
    /// ρ ∂e/∂∇ − σ̃⊗p
    pub connection: NodalField,
    /// 2ρ ∂e/∂g − σ
    pub doyle_ericksen: NodalField,
    /// skew σ
    pub symmetry: NodalField,
}

pub fn residual_generalized_covariance(
    stress: &StressState,
    fields: &DeformedFields,
    loads: &BodyLoads,
    model: &dyn EnergyModel,
) -> Result<GeneralizedResiduals> {
    need_scs(fields)?;
    let n = fields.len();
    let conj: Vec<Tensor> = (0..n)
        .into_par_iter()
        .map(|node| {
            let args = EnergyArgs::at_node(fields, node)?;
            Ok(connection_derivative(model, &args)?.scaled(fields.rho(node)))
        })
        .collect::<Result<_>>()?;
    let macro_momentum = momentum_with_force(stress, fields, loads, |node| Ok(conj[node].clone()))?;
    let micro = micro_momentum_tensor(stress, fields, loads)?;
    let mut connection = NodalField::zeros(n, conj.first().map(|t| t.data().len()).unwrap_or(0));
    for (node, k) in conj.iter().enumerate() {
        let st = micro_stress_tensor(stress, fields, node)?;
        connection.at_mut(node).copy_from_slice(k.sub(&st).data());
    }
    let de: Vec<Mat> = (0..n)
        .into_par_iter()
        .map(|node| {
            let args = EnergyArgs::at_node(fields, node)?;
            Ok(metric_derivative(model, &args, MetricSlot::Spatial)? * (2.0 * fields.rho(node)) - &stress.cauchy[node])
        })
        .collect::<Result<_>>()?;
    Ok(GeneralizedResiduals {
        macro_momentum,
        micro_momentum: NodalField::from_mats(&micro),
        connection,
        doyle_ericksen: NodalField::from_mats(&de),
        symmetry: skew_field(&stress.cauchy),
    })
}
