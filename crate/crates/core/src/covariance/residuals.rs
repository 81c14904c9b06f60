use crate::constitutive::StressState;
use crate::error::{Error, Result};
use crate::kinematics::{DeformedFields, DirectorKind};
use crate::tensor::{skew, Mat};

use super::loads::BodyLoads;
use super::ops::{divergence, LeadingIndex};
use super::report::NodalField;

fn need_levels(fields: &DeformedFields, what: &str) -> Result<()> {
    if fields.levels.len() < 2 {
        return Err(Error::MissingTimeLevel(format!("{what} needs two time levels")));
    }
    Ok(())
}

/// 𝔏_v ρ per node, evaluated as (ρJ)˙/J, which equals ∂ρ/∂t + div(ρv).
pub fn residual_mass(fields: &DeformedFields) -> Result<NodalField> {
    need_levels(fields, "mass balance")?;
    let per_level: Vec<Vec<f64>> =
        fields.levels.iter().map(|l| l.rho.iter().zip(&l.jac).map(|(r, j)| r * j).collect()).collect();
    let rows = (0..fields.len())
        .map(|n| Ok(vec![fields.material_rate(&per_level, n)? / fields.jac(n)]))
        .collect::<Result<Vec<_>>>()?;
    Ok(NodalField::from_rows(rows, 1))
}

/// 𝔏_v j per node: the material rate of j.
pub fn residual_micro_inertia(fields: &DeformedFields) -> Result<NodalField> {
    need_levels(fields, "micro-inertia balance")?;
    let per_level: Vec<Vec<f64>> = fields.levels.iter().map(|l| l.inertia.clone()).collect();
    let rows = (0..fields.len()).map(|n| Ok(vec![fields.material_rate(&per_level, n)?])).collect::<Result<Vec<_>>>()?;
    Ok(NodalField::from_rows(rows, 1))
}

/// div σ at every node.
pub fn stress_divergence(stress: &StressState, fields: &DeformedFields) -> Result<Vec<Vec<f64>>> {
    divergence(fields, &stress.cauchy, LeadingIndex::Ambient)
}

/// div σ̃ at every node, with the connection appropriate to the director kind.
pub fn micro_stress_divergence(stress: &StressState, fields: &DeformedFields) -> Result<Vec<Vec<f64>>> {
    match &fields.director {
        DirectorKind::None => Err(Error::DimensionMismatch("motion has no director".into())),
        DirectorKind::Scalar => divergence(fields, &stress.micro_cauchy, LeadingIndex::Plain),
        DirectorKind::FreeVector(chart) => divergence(fields, &stress.micro_cauchy, LeadingIndex::Micro(chart)),
        DirectorKind::TangentOfAmbient => divergence(fields, &stress.micro_cauchy, LeadingIndex::Ambient),
    }
}

/// div σ + ρb − ρa.
pub fn residual_linear_momentum(stress: &StressState, fields: &DeformedFields, loads: &BodyLoads) -> Result<NodalField> {
    loads.check(fields)?;
    let d = fields.dim();
    let div = stress_divergence(stress, fields)?;
    let rows = (0..fields.len())
        .map(|n| {
            let a = fields.accel(n)?;
            let rho = fields.rho(n);
            let b = loads.b(n, d);
            Ok((0..d).map(|i| div[n][i] + rho * (b[i] - a[i])).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NodalField::from_rows(rows, d))
}

/// div σ̃ + ρb̃ − ρjã.
pub fn residual_micro_linear_momentum(
    stress: &StressState,
    fields: &DeformedFields,
    loads: &BodyLoads,
) -> Result<NodalField> {
    loads.check(fields)?;
    let m = fields.director_dim();
    let div = micro_stress_divergence(stress, fields)?;
    let rows = (0..fields.len())
        .map(|n| {
            let at = fields.micro_accel(n)?;
            let (rho, j) = (fields.rho(n), fields.inertia(n));
            let bt = loads.b_micro(n, m);
            Ok((0..m).map(|i| div[n][i] + rho * (bt[i] - j * at[i])).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NodalField::from_rows(rows, m))
}

/// Skew parts of σ and of F₀σ̃.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularDefects {
    pub sigma: NodalField,
    /// Present for free-vector directors only.
    pub f0_sigma: Option<NodalField>,
}

/// (F₀σ̃)^{αβ} = (F₀)^α_b σ̃^{βb}.
pub fn f0_sigma(fields: &DeformedFields, stress: &StressState, node: usize) -> Option<Mat> {
    fields.f0(node).map(|f0| f0 * stress.micro_cauchy[node].transpose())
}

pub fn residual_angular_free(stress: &StressState, fields: &DeformedFields) -> Result<AngularDefects> {
    let sigma: Vec<Mat> = stress.cauchy.iter().map(skew).collect();
    let f0s = if fields.f0.is_some() {
        let mats: Vec<Mat> = (0..fields.len()).map(|n| skew(&f0_sigma(fields, stress, n).expect("F₀ present"))).collect();
        Some(NodalField::from_mats(&mats))
    } else {
        None
    };
    Ok(AngularDefects { sigma: NodalField::from_mats(&sigma), f0_sigma: f0s })
}
