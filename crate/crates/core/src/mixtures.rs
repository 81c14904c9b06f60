//! Two-constituent mixtures: two motions into one coordinate chart, each
//! constituent measuring lengths with its own ambient metric.

use crate::constitutive::{metric_derivative, EnergyArgs, EnergyModel, MetricSlot, Signature, StressState};
use crate::covariance::{residual_linear_momentum, residual_mass, BodyLoads, NodalField};
use crate::error::{Error, Result};
use crate::kinematics::DeformedFields;
use crate::tensor::Mat;

/// Kinematics, stress and loads of one constituent. `fields.ambient` is its metric ⁱg.
#[derive(Debug, Clone)]
pub struct Constituent {
    pub fields: DeformedFields,
    pub stress: StressState,
    pub loads: BodyLoads,
}

#[derive(Debug, Clone)]
pub struct MixtureState {
    pub constituents: [Constituent; 2],
    /// ν₁, ν₂ per node, summing to one.
    pub volume_fractions: Option<(Vec<f64>, Vec<f64>)>,
}

impl MixtureState {
    /// Both motions must map into the same chart and put node n of each
    /// constituent at the same spatial point at the evaluation instant.
    pub fn new(first: Constituent, second: Constituent) -> Result<Self> {
        let (a, b) = (&first.fields, &second.fields);
        if a.dim() != b.dim() || a.len() != b.len() {
            return Err(Error::DimensionMismatch("constituents need the same dimension and node count".into()));
        }
        for c in [&first, &second] {
            c.loads.check(&c.fields)?;
            if c.stress.cauchy.len() != c.fields.len() {
                return Err(Error::DimensionMismatch("one stress per node".into()));
            }
        }
        let scale = a.now().x.iter().chain(&b.now().x).fold(1.0f64, |m, v| m.max(v.abs()));
        if let Some(i) = a.now().x.iter().zip(&b.now().x).position(|(p, q)| (p - q).abs() > 1e-9 * scale) {
            return Err(Error::DimensionMismatch(format!(
                "constituent motions disagree at node {} on the shared evaluation set",
                i / a.dim()
            )));
        }
        Ok(MixtureState { constituents: [first, second], volume_fractions: None })
    }

    pub fn with_volume_fractions(mut self, nu1: Vec<f64>) -> Result<Self> {
        if nu1.len() != self.len() || nu1.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::DimensionMismatch("one volume fraction in [0, 1] per node".into()));
        }
        let nu2 = nu1.iter().map(|v| 1.0 - v).collect();
        self.volume_fractions = Some((nu1, nu2));
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.constituents[0].fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn constituent(&self, i: usize) -> Result<&Constituent> {
        self.constituents.get(i).ok_or_else(|| Error::DimensionMismatch(format!("no constituent {i}")))
    }

    /// Constituent labels 1 ↔ 2 exchanged.
    pub fn relabeled(&self) -> Self {
        MixtureState {
            constituents: [self.constituents[1].clone(), self.constituents[0].clone()],
            volume_fractions: self.volume_fractions.clone().map(|(a, b)| (b, a)),
        }
    }

    /// ρ = ν₁ρ₁ + ν₂ρ₂.
    pub fn total_density(&self, node: usize) -> Option<f64> {
        let (n1, n2) = self.volume_fractions.as_ref()?;
        Some(n1[node] * self.constituents[0].fields.rho(node) + n2[node] * self.constituents[1].fields.rho(node))
    }

    /// Energy arguments with constituent 1 in (F, G, g) and constituent 2 in (F₂, G₂, g₂).
    pub fn energy_args(&self, node: usize) -> Result<EnergyArgs> {
        let (a, b) = (&self.constituents[0].fields, &self.constituents[1].fields);
        let mut args = EnergyArgs::at_node(a, node)?;
        args.f2 = Some(b.f(node));
        args.big_g2 = Some(b.body.chart.metric(&b.body.grid.coords(node))?);
        args.g2 = Some(b.metric(node)?);
        Ok(args)
    }
}

/// 𝔏_{ⁱv} ρᵢ for constituent i.
pub fn residual_constituent_mass(mix: &MixtureState, i: usize) -> Result<NodalField> {
    residual_mass(&mix.constituent(i)?.fields)
}

/// divᵢ ⁱσ + ρᵢ ⁱb − ρᵢ ⁱa with the Levi-Civita connection of ⁱg.
pub fn residual_constituent_momentum(mix: &MixtureState, i: usize) -> Result<NodalField> {
    let c = mix.constituent(i)?;
    residual_linear_momentum(&c.stress, &c.fields, &c.loads)
}

/// ⁱσ − 2ρᵢ ∂(e₁ + e₂)/∂ⁱg for both constituents.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledDefects {
    pub first: Vec<Mat>,
    pub second: Vec<Mat>,
}

impl CoupledDefects {
    pub fn fields(&self) -> (NodalField, NodalField) {
        (NodalField::from_mats(&self.first), NodalField::from_mats(&self.second))
    }
}

pub fn coupled_doyle_ericksen(
    mix: &MixtureState,
    first: &dyn EnergyModel,
    second: &dyn EnergyModel,
) -> Result<CoupledDefects> {
    for m in [first, second] {
        if m.signature() != Signature::Mixture {
            return Err(Error::SlotNotInSignature { slot: "g2".into(), signature: m.signature().name().into() });
        }
    }
    let total = Pair(first, second);
    let mut out = [Vec::with_capacity(mix.len()), Vec::with_capacity(mix.len())];
    for node in 0..mix.len() {
        let args = mix.energy_args(node)?;
        for (i, slot) in [MetricSlot::First, MetricSlot::Second].into_iter().enumerate() {
            let c = &mix.constituents[i];
            let d = metric_derivative(&total, &args, slot)? * (2.0 * c.fields.rho(node));
            out[i].push(&c.stress.cauchy[node] - d);
        }
    }
    let [first, second] = out;
    Ok(CoupledDefects { first, second })
}

/// Stresses ⁱσ = 2ρᵢ ∂(e₁ + e₂)/∂ⁱg for both constituents.
pub fn coupled_stresses(mix: &MixtureState, first: &dyn EnergyModel, second: &dyn EnergyModel) -> Result<[Vec<Mat>; 2]> {
    let zero = |c: &Constituent| StressState::zeros(c.fields.len(), c.fields.dim(), c.fields.director_dim());
    let mut probe = mix.clone();
    for c in probe.constituents.iter_mut() {
        c.stress = zero(c);
    }
    let d = coupled_doyle_ericksen(&probe, first, second)?;
    Ok([d.first.into_iter().map(|m| -m).collect(), d.second.into_iter().map(|m| -m).collect()])
}

/// e₁ + e₂ over borrowed models.
struct Pair<'a>(&'a dyn EnergyModel, &'a dyn EnergyModel);

impl EnergyModel for Pair<'_> {
    fn name(&self) -> &str {
        "mixture_pair"
    }

    fn signature(&self) -> Signature {
        Signature::Mixture
    }

    fn evaluate(&self, args: &EnergyArgs) -> f64 {
        self.0.evaluate(args) + self.1.evaluate(args)
    }

    fn analytic_metric_derivative(&self, args: &EnergyArgs, slot: MetricSlot) -> Option<Mat> {
        Some(self.0.analytic_metric_derivative(args, slot)? + self.1.analytic_metric_derivative(args, slot)?)
    }
}
