use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Monomial, PolyVectorField};
use crate::kinematics::DeformedFields;
use crate::tensor::Mat;

/// Prescribed loads per node. Accelerations are not stored here; they come
/// from the time levels of [`DeformedFields`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyLoads {
    /// b per unit mass, `dim` per node.
    pub b: Vec<f64>,
    /// b̃ per unit mass, one director value per node.
    pub b_micro: Vec<f64>,
    /// Heat supply r.
    pub r: Vec<f64>,
    /// Boundary heat flux h.
    pub h: Vec<f64>,
}

impl BodyLoads {
    pub fn zeros(fields: &DeformedFields) -> Self {
        let n = fields.len();
        BodyLoads {
            b: vec![0.0; n * fields.dim()],
            b_micro: vec![0.0; n * fields.director_dim()],
            r: vec![0.0; n],
            h: vec![0.0; n],
        }
    }

    pub fn check(&self, fields: &DeformedFields) -> Result<()> {
        let n = fields.len();
        if self.b.len() != n * fields.dim() {
            return Err(Error::DimensionMismatch(format!("b has {} entries, expected {}", self.b.len(), n * fields.dim())));
        }
        if self.b_micro.len() != n * fields.director_dim() {
            return Err(Error::DimensionMismatch(format!(
                "micro body force has {} entries, expected {} for a {} director",
                self.b_micro.len(),
                n * fields.director_dim(),
                fields.director.tag()
            )));
        }
        if self.r.len() != n || self.h.len() != n {
            return Err(Error::DimensionMismatch("heat supply and flux need one value per node".into()));
        }
        Ok(())
    }

    pub fn b(&self, node: usize, dim: usize) -> &[f64] {
        &self.b[node * dim..(node + 1) * dim]
    }

    pub fn b_micro(&self, node: usize, m: usize) -> &[f64] {
        &self.b_micro[node * m..(node + 1) * m]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowKind {
    RigidTranslation,
    RigidRotation,
    GeneralSpatial,
    Micro,
    Material,
    GeneralizedPair,
}

/// Generator data of a flow that is the identity at t₀. Only the velocity
/// fields at t₀ (and their derivatives) enter the experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSpec {
    pub kind: FlowKind,
    pub w: Option<PolyVectorField>,
    pub z: Option<PolyVectorField>,
    pub big_w: Option<PolyVectorField>,
    pub c: Option<Vec<f64>>,
    pub omega: Option<Mat>,
}

impl FlowSpec {
    fn bare(kind: FlowKind) -> Self {
        FlowSpec { kind, w: None, z: None, big_w: None, c: None, omega: None }
    }

    /// x' = x + (t − t₀)c.
    pub fn translation(c: Vec<f64>) -> Self {
        let mut f = FlowSpec::bare(FlowKind::RigidTranslation);
        f.w = Some(PolyVectorField {
            dim: c.len(),
            terms: vec![Monomial { exponents: vec![0; c.len()], coefficients: c.clone() }],
        });
        f.c = Some(c);
        f
    }

    /// x' = exp(Ω(t − t₀))x; Ω must be exactly skew.
    pub fn rotation(omega: Mat) -> Result<Self> {
        let d = omega.nrows();
        if omega.ncols() != d {
            return Err(Error::DimensionMismatch("Ω must be square".into()));
        }
        for i in 0..d {
            for j in 0..d {
                if omega[(i, j)] != -omega[(j, i)] {
                    return Err(Error::DimensionMismatch("Ω must satisfy Ωᵀ = −Ω exactly".into()));
                }
            }
        }
        let rows: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| omega[(i, j)]).collect()).collect();
        let mut f = FlowSpec::bare(FlowKind::RigidRotation);
        f.w = Some(PolyVectorField::affine(&rows, &vec![0.0; d]));
        f.omega = Some(omega);
        Ok(f)
    }

    pub fn spatial(w: PolyVectorField) -> Self {
        let mut f = FlowSpec::bare(FlowKind::GeneralSpatial);
        f.w = Some(w);
        f
    }

    pub fn micro(z: PolyVectorField) -> Self {
        let mut f = FlowSpec::bare(FlowKind::Micro);
        f.z = Some(z);
        f
    }

    pub fn material(big_w: PolyVectorField) -> Self {
        let mut f = FlowSpec::bare(FlowKind::Material);
        f.big_w = Some(big_w);
        f
    }

    /// ξ_t acts with w on macro quantities, η_t with z on micro quantities.
    pub fn generalized_pair(w: PolyVectorField, z: PolyVectorField) -> Self {
        let mut f = FlowSpec::bare(FlowKind::GeneralizedPair);
        f.w = Some(w);
        f.z = Some(z);
        f
    }

    pub fn spatial_generator(&self) -> Result<&PolyVectorField> {
        self.w.as_ref().ok_or_else(|| Error::DimensionMismatch(format!("{:?} flow has no spatial generator", self.kind)))
    }

    pub fn micro_generator(&self) -> Result<&PolyVectorField> {
        self.z.as_ref().ok_or_else(|| Error::DimensionMismatch(format!("{:?} flow has no micro generator", self.kind)))
    }
}
