use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kinematics::DeformedFields;
use crate::tensor::{inverse, skew, Mat};

use super::derivative::{metric_derivative, void_gradient_derivative};
use super::model::{EnergyArgs, EnergyModel, MetricSlot, Signature};

/// Cauchy-type stresses and their Piola transforms, one matrix per node.
///
/// `cauchy[n]` is σ^{ab}; `micro_cauchy[n]` is σ̃^{αb} (one row for a scalar
/// director); `piola[n]` is P^{aA} and `micro_piola[n]` is P̃^{αA}.
#[derive(Debug, Clone, PartialEq)]
pub struct StressState {
    pub cauchy: Vec<Mat>,
    pub micro_cauchy: Vec<Mat>,
    pub piola: Vec<Mat>,
    pub micro_piola: Vec<Mat>,
}

impl StressState {
    /// Zero stresses for `n` nodes.
    pub fn zeros(n: usize, dim: usize, micro_dim: usize) -> Self {
        StressState {
            cauchy: vec![Mat::zeros(dim, dim); n],
            micro_cauchy: vec![Mat::zeros(micro_dim, dim); n],
            piola: vec![Mat::zeros(dim, dim); n],
            micro_piola: vec![Mat::zeros(micro_dim, dim); n],
        }
    }

    /// Spatial stresses from nodal closures; Piola fields are filled by
    /// [`piola_transform`].
    pub fn from_cauchy(fields: &DeformedFields, cauchy: Vec<Mat>, micro_cauchy: Vec<Mat>) -> Result<Self> {
        let mut s = StressState { cauchy, micro_cauchy, piola: vec![], micro_piola: vec![] };
        piola_transform(&mut s, fields)?;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.cauchy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cauchy.is_empty()
    }

    pub fn scaled(&self, s: f64) -> Self {
        StressState {
            cauchy: self.cauchy.iter().map(|m| m * s).collect(),
            micro_cauchy: self.micro_cauchy.iter().map(|m| m * s).collect(),
            piola: self.piola.iter().map(|m| m * s).collect(),
            micro_piola: self.micro_piola.iter().map(|m| m * s).collect(),
        }
    }
}

/// σ = 2ρ ∂e/∂g at every node.
pub fn doyle_ericksen_stress(model: &dyn EnergyModel, fields: &DeformedFields) -> Result<StressState> {
    let slot = match model.signature() {
        Signature::Free | Signature::Voids | Signature::Scs => MetricSlot::Spatial,
        Signature::Mixture => MetricSlot::First,
        Signature::Material => {
            return Err(Error::SlotNotInSignature { slot: "g".into(), signature: "material".into() });
        }
    };
    let d = fields.dim();
    let m = fields.director_dim();
    let cauchy: Vec<Mat> = (0..fields.len())
        .into_par_iter()
        .map(|node| {
            let args = EnergyArgs::at_node(fields, node)?;
            Ok(metric_derivative(model, &args, slot)? * (2.0 * fields.rho(node)))
        })
        .collect::<Result<_>>()?;
    let micro = if model.signature() == Signature::Voids {
        (0..fields.len()).map(|node| void_stress(model, fields, node)).collect::<Result<_>>()?
    } else {
        vec![Mat::zeros(m, d); fields.len()]
    };
    StressState::from_cauchy(fields, cauchy, micro)
}

/// Void stress σ̃^a = ρ ∂e/∂(Tν)_a (the closure that makes the scalar
/// Doyle-Ericksen formula an identity), as a 1 × dim row.
pub fn void_stress(model: &dyn EnergyModel, fields: &DeformedFields, node: usize) -> Result<Mat> {
    let args = EnergyArgs::at_node(fields, node)?;
    let de = void_gradient_derivative(model, &args)?;
    let rho = fields.rho(node);
    Ok(Mat::from_row_slice(1, de.len(), &de.iter().map(|v| rho * v).collect::<Vec<_>>()))
}

/// Micro-Cauchy stress from F₀σ̃ = 2ρ ∂e/∂g̃_M at one node.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroStress {
    /// σ̃^{βb}
    pub sigma: Mat,
    /// (F₀σ̃)^{αβ} = (F₀)^α_b σ̃^{βb}
    pub f0_sigma: Mat,
    /// max |skew(F₀σ̃)|
    pub symmetry_defect: f64,
}

/// Solves (F₀)^α_b σ̃^{βb} = M^{αβ} for σ̃.
pub fn micro_stress_from_f0(f0: &Mat, m: &Mat, node: usize) -> Result<MicroStress> {
    if f0.nrows() != f0.ncols() {
        return Err(Error::SingularF0 { node });
    }
    let inv = inverse(f0).ok_or(Error::SingularF0 { node })?;
    if !inv.iter().all(|v| v.is_finite()) || f0.determinant().abs() < 1e-14 {
        return Err(Error::SingularF0 { node });
    }
    let sigma = (inv * m).transpose();
    let f0_sigma = f0 * sigma.transpose();
    let symmetry_defect = crate::tensor::max_abs(&skew(&f0_sigma));
    Ok(MicroStress { sigma, f0_sigma, symmetry_defect })
}

/// σ̃ = F₀⁻¹ (2ρ ∂e/∂g̃_M) at every node, with the symmetry defect of F₀σ̃.
pub fn micro_doyle_ericksen_stress(model: &dyn EnergyModel, fields: &DeformedFields) -> Result<Vec<MicroStress>> {
    (0..fields.len())
        .into_par_iter()
        .map(|node| {
            let args = EnergyArgs::at_node(fields, node)?;
            let de = metric_derivative(model, &args, MetricSlot::Micro)? * (2.0 * fields.rho(node));
            let f0 = fields.f0(node).ok_or(Error::SingularF0 { node })?;
            micro_stress_from_f0(&f0, &de, node)
        })
        .collect()
}

/// P^{aA} = J (F⁻¹)^A_b σ^{ab} and P̃^{αA} = J (F⁻¹)^A_b σ̃^{αb}.
pub fn piola_transform(stress: &mut StressState, fields: &DeformedFields) -> Result<()> {
    let n = stress.len();
    let mut piola = Vec::with_capacity(n);
    let mut micro = Vec::with_capacity(n);
    for node in 0..n {
        let j = fields.jac(node);
        if j <= 0.0 {
            return Err(Error::DegenerateF { node, det: j });
        }
        let finv_t = fields.f_inv(node).transpose();
        piola.push(&stress.cauchy[node] * &finv_t * j);
        micro.push(&stress.micro_cauchy[node] * &finv_t * j);
    }
    stress.piola = piola;
    stress.micro_piola = micro;
    Ok(())
}

/// σ^{ab} = P^{aA} F^b_A / J (and the micro analogue), overwriting the Cauchy fields.
pub fn inverse_piola_transform(stress: &mut StressState, fields: &DeformedFields) -> Result<()> {
    for node in 0..stress.len() {
        let j = fields.jac(node);
        if j <= 0.0 {
            return Err(Error::DegenerateF { node, det: j });
        }
        let ft = fields.f(node).transpose();
        stress.cauchy[node] = &stress.piola[node] * &ft / j;
        stress.micro_cauchy[node] = &stress.micro_piola[node] * &ft / j;
    }
    Ok(())
}

/// t^a = σ^{ab} n̂_b with n̂ the g-normalised covector (σ may be the micro stress).
pub fn traction(sigma: &Mat, g: &Mat, normal: &[f64]) -> Result<Vec<f64>> {
    let ginv = inverse(g).ok_or(Error::SingularMetric { point: vec![] })?;
    let len2 = crate::tensor::inner(&ginv, normal, normal);
    if len2 <= 0.0 || !len2.is_finite() {
        return Err(Error::ZeroNormal);
    }
    let s = 1.0 / len2.sqrt();
    let unit: Vec<f64> = normal.iter().map(|v| v * s).collect();
    Ok(crate::tensor::mat_vec(sigma, &unit))
}
