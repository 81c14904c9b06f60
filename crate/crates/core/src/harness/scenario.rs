use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Monomial, PolyVectorField};
use crate::voids::{InertiaForm, InitialCondition, VoidsCoefficients};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Free,
    Scs,
    Gnr,
    Material,
    Voids,
    Mixture,
    Variational,
}

impl Regime {
    pub const ALL: [Regime; 7] =
        [Regime::Free, Regime::Scs, Regime::Gnr, Regime::Material, Regime::Voids, Regime::Mixture, Regime::Variational];

    pub fn name(self) -> &'static str {
        match self {
            Regime::Free => "free",
            Regime::Scs => "scs",
            Regime::Gnr => "gnr",
            Regime::Material => "material",
            Regime::Voids => "voids",
            Regime::Mixture => "mixture",
            Regime::Variational => "variational",
        }
    }

    /// Law names that can appear in this regime's reports (tolerance keys).
    pub fn laws(self) -> &'static [&'static str] {
        match self {
            Regime::Free => &[
                "mass",
                "micro_inertia",
                "linear_momentum",
                "micro_linear_momentum",
                "doyle_ericksen",
                "micro_doyle_ericksen",
                "angular_momentum",
                "micro_angular_momentum",
                "spatial_covariance",
                "micro_covariance",
            ],
            Regime::Scs => &["mass", "scs_linear_momentum", "micro_linear_momentum", "scs_doyle_ericksen", "scs_angular"],
            Regime::Gnr => &["mass", "linear_momentum", "micro_linear_momentum", "bracket_symmetry", "gnr_bracket", "director_momentum_shift"],
            Regime::Material => &["material_p0", "material_balance"],
            Regime::Voids => &[
                "mass",
                "equilibrated_inertia",
                "equilibrated_momentum",
                "scalar_doyle_ericksen",
                "energy_drift",
                "bar_mass",
                "void_frequency",
            ],
            Regime::Mixture => &[
                "mass_1",
                "mass_2",
                "momentum_1",
                "momentum_2",
                "coupled_doyle_ericksen_1",
                "coupled_doyle_ericksen_2",
                "relabel_symmetry",
            ],
            Regime::Variational => &[
                "noether_doyle_ericksen",
                "noether_micro_doyle_ericksen",
                "micro_cross_module",
                "noether_drift_translation",
                "noether_drift_rotation",
            ],
        }
    }

    /// Laws a scenario may violate on purpose.
    pub fn injectable(self) -> &'static [&'static str] {
        match self {
            Regime::Free => &["linear_momentum", "micro_linear_momentum", "doyle_ericksen"],
            Regime::Scs => &["scs_linear_momentum"],
            Regime::Gnr => &["bracket_symmetry"],
            Regime::Material => &["material_p0"],
            Regime::Voids => &["equilibrated_momentum"],
            Regime::Mixture => &["coupled_doyle_ericksen_1"],
            Regime::Variational => &["noether_doyle_ericksen"],
        }
    }

    pub fn default_tolerance(self, law: &str) -> f64 {
        match (self, law) {
            (Regime::Free, "spatial_covariance" | "micro_covariance") => 1e-7,
            (Regime::Gnr, "director_momentum_shift") => 1e-10,
            (Regime::Material, _) => 1e-7,
            (Regime::Voids, "energy_drift") => 1e-3,
            (Regime::Voids, "void_frequency") => 0.02,
            (Regime::Mixture, "coupled_doyle_ericksen_1" | "coupled_doyle_ericksen_2") => 1e-7,
            (Regime::Mixture, "relabel_symmetry") => 0.0,
            (Regime::Variational, "noether_drift_rotation") => 1e-5,
            (Regime::Variational, "micro_cross_module") => 1e-8,
            (Regime::Variational, _) => 1e-6,
            _ => 1e-9,
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Regime::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::Schema { path: "regime".into(), message: format!("unknown regime '{s}'") })
    }
}

/// Rectangular reference region, `nodes` per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub nodes: usize,
    pub rho0: f64,
    /// Micro inertia j₀ (κ for voids).
    pub inertia0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChartSpec {
    Euclidean,
    Polar,
    Sphere { radius: f64 },
    /// Constant metric given by its rows.
    Constant { metric: Vec<Vec<f64>> },
}

/// Named analytic motion families.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum BaseMotion {
    #[default]
    Identity,
    /// (λX¹, X²).
    Stretch { lambda: f64 },
    /// (X¹ + γX², X²).
    Shear { gamma: f64 },
    /// R(θ + ωt)X.
    RigidRotation {
        angle: f64,
        #[serde(default)]
        rate: f64,
    },
    /// X + u(X) + t v(X) with explicit monomials.
    Polynomial {
        displacement: Vec<Monomial>,
        #[serde(default)]
        velocity: Vec<Monomial>,
    },
}

impl BaseMotion {
    pub fn eval(&self, t: f64, x: &[f64]) -> Vec<f64> {
        match self {
            BaseMotion::Identity => x.to_vec(),
            BaseMotion::Stretch { lambda } => vec![lambda * x[0], x[1]],
            BaseMotion::Shear { gamma } => vec![x[0] + gamma * x[1], x[1]],
            BaseMotion::RigidRotation { angle, rate } => {
                let (s, c) = (angle + rate * t).sin_cos();
                vec![c * x[0] - s * x[1], s * x[0] + c * x[1]]
            }
            BaseMotion::Polynomial { displacement, velocity } => {
                let u = PolyVectorField { dim: 2, terms: displacement.clone() }.eval(x);
                let v = PolyVectorField { dim: 2, terms: velocity.clone() }.eval(x);
                (0..2).map(|i| x[i] + u[i] + t * v[i]).collect()
            }
        }
    }

    /// Affine in X at every t.
    pub fn is_affine(&self) -> bool {
        match self {
            BaseMotion::Polynomial { displacement, velocity } => {
                displacement.iter().chain(velocity).all(|m| m.exponents.iter().sum::<u32>() <= 1)
            }
            _ => true,
        }
    }
}

/// Motion φ = B(t, X) + P(X) + t v(X) + ½t² a(X): a named base plus a seeded
/// polynomial whose coefficients are bounded by `amplitude` (P) and `rate`
/// (v, a). Directors are drawn the same way around a regime-specific offset,
/// without the base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionSpec {
    #[serde(default)]
    pub base: BaseMotion,
    pub amplitude: f64,
    pub degree: u32,
    pub rate: f64,
}

impl MotionSpec {
    fn seeded(amplitude: f64, degree: u32, rate: f64) -> Self {
        MotionSpec { base: BaseMotion::Identity, amplitude, degree, rate }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstituentSpec {
    pub mu: f64,
    pub lambda: f64,
    pub coupling: f64,
    pub rho0: f64,
}

/// `{"model": "<name>", "coeffs": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", content = "coeffs", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    QuadraticFree { mu: f64, lambda: f64, kappa_m: f64, coupling: f64 },
    ScsLinear { mu: f64, lambda: f64 },
    Mixture { first: ConstituentSpec, second: ConstituentSpec },
    /// e = μ/4 |C − G|² + λ/8 (tr C − n)² + κ/4 |C̃ − G|²; ρ̃₀ is the director inertia density.
    StVenant { mu: f64, lambda: f64, kappa_m: f64, rho0_micro: f64 },
}

impl ModelSpec {
    fn kind(&self) -> &'static str {
        match self {
            ModelSpec::QuadraticFree { .. } => "quadratic_free",
            ModelSpec::ScsLinear { .. } => "scs_linear",
            ModelSpec::Mixture { .. } => "mixture",
            ModelSpec::StVenant { .. } => "st_venant",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadsSpec {
    /// Loads solved from the momentum residuals.
    #[default]
    Balancing,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FlowEntry {
    /// `count` seeded polynomial generators on the ambient chart.
    Spatial { degree: u32, scale: f64, count: usize },
    /// `count` seeded polynomial generators on the director chart.
    Micro { degree: u32, scale: f64, count: usize },
    Translation { c: Vec<f64> },
    /// Plane rotation with angular rate `rate`.
    Rotation { rate: f64 },
}

impl FlowEntry {
    fn kind(&self) -> &'static str {
        match self {
            FlowEntry::Spatial { .. } => "spatial",
            FlowEntry::Micro { .. } => "micro",
            FlowEntry::Translation { .. } => "translation",
            FlowEntry::Rotation { .. } => "rotation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Injection {
    pub law: String,
    pub amplitude: f64,
}

/// Bar simulation settings of the voids regime; Δt and the step count are
/// the scenario's top-level `dt` and `steps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoidsSpec {
    pub length: f64,
    pub nodes: usize,
    pub rho0: f64,
    pub kappa: f64,
    pub coefficients: VoidsCoefficients,
    #[serde(default)]
    pub inertia_form: InertiaForm,
    pub initial: InitialCondition,
    #[serde(default = "default_safety")]
    pub cfl_safety: f64,
    #[serde(default = "default_every")]
    pub diagnostics_every: usize,
}

fn default_safety() -> f64 {
    0.5
}

fn default_every() -> usize {
    100
}

fn default_record() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    pub regime: Regime,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<BodySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambient: Option<ChartSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motion: Option<MotionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loads: Option<LoadsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flows: Option<Vec<FlowEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub injection: Option<Injection>,
    /// Per-law overrides of the regime's default tolerances.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    /// Simulation time step (voids, variational).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// Stored levels of a variational trajectory: every n-th step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_every: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub voids: Option<VoidsSpec>,
}

fn schema(path: &str, message: impl Into<String>) -> Error {
    Error::Schema { path: path.into(), message: message.into() }
}

impl Scenario {
    /// A scenario with only the required keys; [`Scenario::with_defaults`] fills the rest.
    pub fn minimal(regime: Regime, seed: u64) -> Self {
        let (dt, steps) = match regime {
            Regime::Voids => (Some(2.5e-3), Some(2000)),
            Regime::Variational => (Some(4e-3), Some(1000)),
            _ => (None, None),
        };
        Scenario {
            schema_version: SCHEMA_VERSION,
            name: format!("{}-{seed}", regime.name()),
            regime,
            seed,
            body: None,
            ambient: None,
            motion: None,
            model: None,
            loads: None,
            flows: None,
            injection: None,
            tolerances: BTreeMap::new(),
            dt,
            steps,
            record_every: None,
            voids: None,
        }
    }

    pub fn tolerance(&self, law: &str) -> f64 {
        self.tolerances.get(law).copied().unwrap_or_else(|| self.regime.default_tolerance(law))
    }

    /// Fills every optional section the regime uses with its default.
    pub fn with_defaults(mut self) -> Self {
        let r = self.regime;
        let unit = |nodes, rho0, inertia0| BodySpec { lower: vec![0.0, 0.0], upper: vec![1.0, 1.0], nodes, rho0, inertia0 };
        if self.body.is_none() {
            self.body = Some(match r {
                Regime::Free => unit(9, 1.4, 0.8),
                Regime::Scs => BodySpec { lower: vec![0.7, 0.1], upper: vec![1.2, 0.6], nodes: 11, rho0: 1.1, inertia0: 0.9 },
                Regime::Gnr => unit(13, 1.2, 0.5),
                Regime::Material => unit(9, 2.0, 1.0),
                Regime::Voids => unit(7, 1.3, 0.3),
                Regime::Mixture => unit(7, 1.0, 1.0),
                Regime::Variational => unit(6, 1.1, 1.0),
            });
        }
        if self.ambient.is_none() {
            self.ambient = Some(match r {
                Regime::Scs => ChartSpec::Sphere { radius: 1.0 },
                Regime::Mixture => ChartSpec::Constant { metric: vec![vec![2.0, 0.3], vec![0.3, 1.0]] },
                _ => ChartSpec::Euclidean,
            });
        }
        if self.motion.is_none() {
            self.motion = Some(match r {
                Regime::Free => MotionSpec::seeded(0.05, 2, 0.1),
                Regime::Scs => MotionSpec::seeded(0.1, 1, 0.0),
                Regime::Gnr => MotionSpec::seeded(0.05, 2, 0.2),
                Regime::Material => MotionSpec::seeded(0.1, 1, 0.0),
                Regime::Voids => MotionSpec::seeded(0.05, 2, 0.1),
                Regime::Mixture => MotionSpec::seeded(0.05, 2, 0.2),
                Regime::Variational => MotionSpec::seeded(0.05, 2, 0.3),
            });
        }
        if self.model.is_none() {
            self.model = match r {
                Regime::Free => Some(ModelSpec::QuadraticFree { mu: 1.3, lambda: 0.7, kappa_m: 0.9, coupling: 0.25 }),
                Regime::Scs => Some(ModelSpec::ScsLinear { mu: 1.1, lambda: 0.3 }),
                Regime::Mixture => Some(ModelSpec::Mixture {
                    first: ConstituentSpec { mu: 1.0, lambda: 0.5, coupling: 0.3, rho0: 1.5 },
                    second: ConstituentSpec { mu: 0.6, lambda: 0.2, coupling: 0.15, rho0: 0.8 },
                }),
                Regime::Variational => Some(ModelSpec::StVenant { mu: 1.0, lambda: 0.5, kappa_m: 0.8, rho0_micro: 0.7 }),
                _ => None,
            };
        }
        if self.loads.is_none() && matches!(r, Regime::Free | Regime::Scs | Regime::Gnr | Regime::Mixture) {
            self.loads = Some(LoadsSpec::Balancing);
        }
        if self.flows.is_none() {
            self.flows = match r {
                Regime::Free => Some(vec![
                    FlowEntry::Spatial { degree: 2, scale: 0.5, count: 10 },
                    FlowEntry::Micro { degree: 2, scale: 0.5, count: 3 },
                ]),
                Regime::Gnr => Some(vec![FlowEntry::Translation { c: vec![0.4, -0.3] }, FlowEntry::Rotation { rate: 0.8 }]),
                Regime::Variational => {
                    Some(vec![FlowEntry::Translation { c: vec![1.0, 0.4] }, FlowEntry::Rotation { rate: 1.0 }])
                }
                _ => None,
            };
        }
        if r == Regime::Variational && self.record_every.is_none() {
            self.record_every = Some(default_record());
        }
        if r == Regime::Voids && self.voids.is_none() {
            self.voids = Some(VoidsSpec {
                length: 1.0,
                nodes: 33,
                rho0: 1.2,
                kappa: 0.4,
                coefficients: VoidsCoefficients { c_nu: 3.0, nu_ref: 0.6, alpha: 1e-3, mu: 1.0, lambda: 0.5 },
                inertia_form: InertiaForm::KineticConsistent,
                initial: InitialCondition::VoidOscillation { amplitude: 1e-3 },
                cfl_safety: default_safety(),
                diagnostics_every: default_every(),
            });
        }
        self
    }

    /// Regime-level checks: required fields present, unused sections absent,
    /// tolerance and injection names known.
    pub fn validate(&self) -> Result<()> {
        let r = self.regime;
        if self.schema_version != SCHEMA_VERSION {
            return Err(schema("schema_version", format!("expected {SCHEMA_VERSION}, found {}", self.schema_version)));
        }
        let simulates = matches!(r, Regime::Voids | Regime::Variational);
        if simulates {
            match self.dt {
                None => return Err(Error::RegimeFieldMissing("dt".into())),
                Some(dt) if !(dt > 0.0 && dt.is_finite()) => return Err(schema("dt", "must be positive")),
                _ => {}
            }
            if self.steps.is_none() {
                return Err(Error::RegimeFieldMissing("steps".into()));
            }
        } else {
            for (key, present) in [("dt", self.dt.is_some()), ("steps", self.steps.is_some())] {
                if present {
                    return Err(schema(key, format!("not used by the {} regime", r.name())));
                }
            }
        }
        let unused = |key: &str, present: bool, ok: bool| -> Result<()> {
            if present && !ok {
                Err(schema(key, format!("not used by the {} regime", r.name())))
            } else {
                Ok(())
            }
        };
        unused("record_every", self.record_every.is_some(), r == Regime::Variational)?;
        unused("voids", self.voids.is_some(), r == Regime::Voids)?;
        unused("loads", self.loads.is_some(), matches!(r, Regime::Free | Regime::Scs | Regime::Gnr | Regime::Mixture))?;
        unused("flows", self.flows.is_some(), matches!(r, Regime::Free | Regime::Gnr | Regime::Variational))?;
        if let Some(m) = &self.model {
            let ok = matches!(
                (r, m),
                (Regime::Free, ModelSpec::QuadraticFree { .. })
                    | (Regime::Scs, ModelSpec::ScsLinear { .. })
                    | (Regime::Mixture, ModelSpec::Mixture { .. })
                    | (Regime::Variational, ModelSpec::StVenant { .. } | ModelSpec::QuadraticFree { .. })
            );
            if !ok {
                return Err(schema("model.model", format!("'{}' is not available in the {} regime", m.kind(), r.name())));
            }
        }
        if let Some(flows) = &self.flows {
            for (i, f) in flows.iter().enumerate() {
                let ok = match r {
                    Regime::Free => matches!(f, FlowEntry::Spatial { .. } | FlowEntry::Micro { .. }),
                    _ => matches!(f, FlowEntry::Translation { .. } | FlowEntry::Rotation { .. }),
                };
                if !ok {
                    return Err(schema(&format!("flows[{i}].kind"), format!("'{}' flows are not used by the {} regime", f.kind(), r.name())));
                }
                if let FlowEntry::Translation { c } = f {
                    if c.len() != 2 {
                        return Err(schema(&format!("flows[{i}].c"), "needs two components"));
                    }
                }
            }
        }
        if let Some(ChartSpec::Constant { metric }) = &self.ambient {
            if metric.len() != 2 || metric.iter().any(|row| row.len() != 2) {
                return Err(schema("ambient.metric", "needs a 2 × 2 matrix"));
            }
        }
        if let Some(b) = &self.body {
            if b.lower.len() != 2 || b.upper.len() != 2 {
                return Err(schema("body", "lower and upper need two coordinates"));
            }
            if b.nodes < 5 {
                return Err(schema("body.nodes", "at least 5 nodes per axis"));
            }
            if !(b.rho0 > 0.0) {
                return Err(schema("body.rho0", "must be positive"));
            }
        }
        if let Some(m) = &self.motion {
            if r == Regime::Material && m.degree != 1 {
                return Err(schema("motion.degree", "the material regime needs an affine motion (degree 1)"));
            }
            if r == Regime::Material && !m.base.is_affine() {
                return Err(schema("motion.base", "the material regime needs an affine motion"));
            }
            match &m.base {
                BaseMotion::Stretch { lambda } if !(*lambda > 0.0) => {
                    return Err(schema("motion.base.lambda", "must be positive"))
                }
                BaseMotion::Polynomial { displacement, velocity } => {
                    if displacement.iter().chain(velocity).any(|t| t.exponents.len() != 2 || t.coefficients.len() != 2) {
                        return Err(schema("motion.base", "monomials need two exponents and two coefficients"));
                    }
                }
                _ => {}
            }
        }
        for law in self.tolerances.keys() {
            if !r.laws().contains(&law.as_str()) {
                return Err(schema(&format!("tolerances.{law}"), format!("no law '{law}' in the {} regime", r.name())));
            }
        }
        if let Some(inj) = &self.injection {
            if !r.injectable().contains(&inj.law.as_str()) {
                return Err(schema("injection.law", format!("'{}' cannot be injected in the {} regime", inj.law, r.name())));
            }
        }
        Ok(())
    }
}

/// Parses and validates a scenario document. Defaults are filled in.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let scenario: Scenario = serde_path_to_error::deserialize(value).map_err(|e| {
        // the path already ends at an unknown key
        let path = e.path().to_string();
        let message = e.into_inner().to_string();
        Error::Schema { path, message }
    })?;
    scenario.validate()?;
    Ok(scenario.with_defaults())
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_scenario(&text)
}
