use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::christoffel;
use crate::kinematics::{DeformedFields, DirectorKind};
use crate::tensor::{Mat, Tensor};

/// Argument signature of an internal-energy density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signature {
    /// e(t, x, g, p, g̃_M)
    Free,
    /// e(t, x, p, g, ∇)
    Scs,
    /// e(t, x, g, ν, Tν)
    Voids,
    /// e_i(t, x, ¹g, ²g)
    Mixture,
    /// E(t, X, G)
    Material,
}

impl Signature {
    pub fn name(self) -> &'static str {
        match self {
            Signature::Free => "free",
            Signature::Scs => "scs",
            Signature::Voids => "voids",
            Signature::Mixture => "mixture",
            Signature::Material => "material",
        }
    }

    pub fn slots(self) -> &'static [MetricSlot] {
        match self {
            Signature::Free => &[MetricSlot::Spatial, MetricSlot::Micro],
            Signature::Scs | Signature::Voids => &[MetricSlot::Spatial],
            Signature::Mixture => &[MetricSlot::First, MetricSlot::Second],
            Signature::Material => &[MetricSlot::Reference],
        }
    }
}

/// Which metric argument a derivative is taken with respect to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricSlot {
    /// g
    Spatial,
    /// g̃_M
    Micro,
    /// G
    Reference,
    /// ¹g (stored in `EnergyArgs::g`)
    First,
    /// ²g (stored in `EnergyArgs::g2`)
    Second,
}

impl MetricSlot {
    pub fn name(self) -> &'static str {
        match self {
            MetricSlot::Spatial => "g",
            MetricSlot::Micro => "g_M",
            MetricSlot::Reference => "G",
            MetricSlot::First => "g1",
            MetricSlot::Second => "g2",
        }
    }
}

/// Pointwise arguments handed to an energy density. Fields not used by a
/// signature stay `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyArgs {
    pub t: f64,
    pub x: Vec<f64>,
    pub big_x: Vec<f64>,
    /// F^a_A (for mixtures: constituent 1).
    pub f: Mat,
    /// G_AB at X.
    pub big_g: Mat,
    /// g_ab at x (for mixtures: ¹g).
    pub g: Mat,
    /// Director value p (ν for voids).
    pub p: Vec<f64>,
    /// F̃^α_A.
    pub f_micro: Option<Mat>,
    /// g̃_αβ at p.
    pub g_micro: Option<Mat>,
    /// Γ^a_{bc} at x.
    pub gamma: Option<Tensor>,
    /// (Tν)_a.
    pub grad_nu: Option<Vec<f64>>,
    /// Mixture constituent 2: ²F, ²G, ²g.
    pub f2: Option<Mat>,
    pub big_g2: Option<Mat>,
    pub g2: Option<Mat>,
}

impl EnergyArgs {
    /// Plain arguments for an identity configuration in `dim` dimensions.
    pub fn identity(dim: usize) -> Self {
        EnergyArgs {
            t: 0.0,
            x: vec![0.0; dim],
            big_x: vec![0.0; dim],
            f: Mat::identity(dim, dim),
            big_g: Mat::identity(dim, dim),
            g: Mat::identity(dim, dim),
            p: vec![],
            f_micro: None,
            g_micro: None,
            gamma: None,
            grad_nu: None,
            f2: None,
            big_g2: None,
            g2: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.f.nrows()
    }

    pub fn metric(&self, slot: MetricSlot) -> Option<&Mat> {
        match slot {
            MetricSlot::Spatial | MetricSlot::First => Some(&self.g),
            MetricSlot::Micro => self.g_micro.as_ref(),
            MetricSlot::Reference => Some(&self.big_g),
            MetricSlot::Second => self.g2.as_ref(),
        }
    }

    pub fn metric_mut(&mut self, slot: MetricSlot) -> Option<&mut Mat> {
        match slot {
            MetricSlot::Spatial | MetricSlot::First => Some(&mut self.g),
            MetricSlot::Micro => self.g_micro.as_mut(),
            MetricSlot::Reference => Some(&mut self.big_g),
            MetricSlot::Second => self.g2.as_mut(),
        }
    }

    /// Arguments at a node of the current level of `fields`.
    pub fn at_node(fields: &DeformedFields, node: usize) -> Result<Self> {
        let d = fields.dim();
        let big_x = fields.body.grid.coords(node);
        let x = fields.x(node).to_vec();
        let mut args = EnergyArgs {
            t: fields.time(),
            big_g: fields.body.chart.metric(&big_x)?,
            g: fields.ambient.metric(&x)?,
            f: fields.f(node),
            x,
            big_x,
            p: fields.p(node).to_vec(),
            f_micro: None,
            g_micro: None,
            gamma: None,
            grad_nu: None,
            f2: None,
            big_g2: None,
            g2: None,
        };
        match &fields.director {
            DirectorKind::None => {}
            DirectorKind::Scalar => {
                let ft = fields.micro_grad(node);
                let tn = ft * fields.f_inv(node);
                args.grad_nu = Some((0..d).map(|a| tn[(0, a)]).collect());
                args.f_micro = Some(fields.micro_grad(node));
            }
            DirectorKind::FreeVector(chart) => {
                args.g_micro = Some(chart.metric(fields.p(node))?);
                args.f_micro = Some(fields.micro_grad(node));
            }
            DirectorKind::TangentOfAmbient => {
                args.gamma = Some(christoffel(&fields.ambient, &args.x)?);
                args.f_micro = Some(fields.micro_grad(node));
            }
        }
        Ok(args)
    }
}

/// An internal-energy density per unit mass.
pub trait EnergyModel: Send + Sync {
    fn name(&self) -> &str;

    fn signature(&self) -> Signature;

    fn evaluate(&self, args: &EnergyArgs) -> f64;

    /// Closed-form ∂e/∂(metric slot), used only as an oracle.
    fn analytic_metric_derivative(&self, _args: &EnergyArgs, _slot: MetricSlot) -> Option<Mat> {
        None
    }

    /// Closed-form ∂e/∂Γ^a_{bc} as a (1,2)-slot array indexed [a, b, c].
    fn analytic_connection_derivative(&self, _args: &EnergyArgs) -> Option<Tensor> {
        None
    }
}

impl fmt::Debug for dyn EnergyModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EnergyModel({}, {})", self.name(), self.signature().name())
    }
}

pub type EnergyFn = Arc<dyn Fn(&EnergyArgs) -> f64 + Send + Sync>;

/// Energy given by an arbitrary closure.
#[derive(Clone)]
pub struct FnModel {
    pub name: String,
    pub signature: Signature,
    pub energy: EnergyFn,
}

impl FnModel {
    pub fn new(name: &str, signature: Signature, energy: impl Fn(&EnergyArgs) -> f64 + Send + Sync + 'static) -> Self {
        FnModel { name: name.to_string(), signature, energy: Arc::new(energy) }
    }
}

impl EnergyModel for FnModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn signature(&self) -> Signature {
        self.signature
    }

    fn evaluate(&self, args: &EnergyArgs) -> f64 {
        (self.energy)(args)
    }
}

pub(crate) fn check_slot(model: &dyn EnergyModel, slot: MetricSlot) -> Result<()> {
    if model.signature().slots().contains(&slot) {
        Ok(())
    } else {
        Err(Error::SlotNotInSignature { slot: slot.name().into(), signature: model.signature().name().into() })
    }
}
