//! Seeded manufactured states. Stresses come from the energy (or are drawn
//! and the energy built around them) and loads are solved from the momentum
//! residuals, so every balance law of the regime holds by construction.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constitutive::{
    doyle_ericksen_stress, inverse_piola_transform, EnergyModel, FnModel, MixtureConstituent, QuadraticFree, ScsLinear,
    Signature, StressState, VoidsQuadratic,
};
use crate::covariance::{balancing_loads, free_regime_stresses, micro_momentum_tensor, vector_gradient, BodyLoads};
use crate::error::{Error, Result};
use crate::geometry::{MetricChart, PolyVectorField};
use crate::grid::RectGrid;
use crate::kinematics::{spatial_fields, AnalyticMotion, DeformedFields, DirectorKind, ReferenceBody, Snapshot};
use crate::mixtures::{coupled_stresses, Constituent, MixtureState};
use crate::tensor::{contract2, mat_from_rows, skew, Mat};
use crate::variational::LagrangianModel;
use crate::voids::{residual_equilibrated_momentum, InertiaForm, VoidState};

use super::scenario::{BodySpec, ChartSpec, LoadsSpec, ModelSpec, MotionSpec, Regime, Scenario};

/// Time at which manufactured states are evaluated and the level spacing.
pub const T0: f64 = 0.3;
pub const LEVEL_DT: f64 = 1e-3;

type MatField = Arc<dyn Fn(&[f64]) -> Mat + Send + Sync>;

/// Continuum state: fields, stresses, loads and the energy they came from.
#[derive(Clone)]
pub struct ContinuumBundle {
    pub fields: DeformedFields,
    pub stress: StressState,
    pub loads: BodyLoads,
    pub model: Arc<dyn EnergyModel>,
}

#[derive(Clone)]
pub struct VoidsBundle {
    pub fields: DeformedFields,
    pub state: VoidState,
    pub model: VoidsQuadratic,
    pub form: InertiaForm,
}

#[derive(Clone)]
pub struct MixtureBundle {
    pub mixture: MixtureState,
    pub models: [MixtureConstituent; 2],
}

/// Initial data and model of a variational trajectory.
#[derive(Clone)]
pub struct VariationalBundle {
    pub model: LagrangianModel,
    pub energy: Arc<dyn EnergyModel>,
    pub body: Arc<ReferenceBody>,
    pub ambient: Arc<MetricChart>,
    pub director: DirectorKind,
    pub initial: Snapshot,
}

#[derive(Clone)]
pub enum Bundle {
    Free(ContinuumBundle),
    Scs(ContinuumBundle),
    Gnr(ContinuumBundle),
    Material(ContinuumBundle),
    Voids(VoidsBundle),
    Mixture(MixtureBundle),
    Variational(VariationalBundle),
}

impl Bundle {
    pub fn regime(&self) -> Regime {
        match self {
            Bundle::Free(_) => Regime::Free,
            Bundle::Scs(_) => Regime::Scs,
            Bundle::Gnr(_) => Regime::Gnr,
            Bundle::Material(_) => Regime::Material,
            Bundle::Voids(_) => Regime::Voids,
            Bundle::Mixture(_) => Regime::Mixture,
            Bundle::Variational(_) => Regime::Variational,
        }
    }

    /// Every nodal number of the bundle in a fixed order, for determinism checks
    /// and inspection dumps.
    pub fn values(&self) -> Vec<(&'static str, Vec<f64>)> {
        fn continuum(b: &ContinuumBundle) -> Vec<(&'static str, Vec<f64>)> {
            let flat = |m: &[Mat]| m.iter().flat_map(crate::tensor::mat_to_vec).collect::<Vec<_>>();
            vec![
                ("x", b.fields.now().x.clone()),
                ("p", b.fields.now().p.clone()),
                ("cauchy", flat(&b.stress.cauchy)),
                ("micro_cauchy", flat(&b.stress.micro_cauchy)),
                ("b", b.loads.b.clone()),
                ("b_micro", b.loads.b_micro.clone()),
            ]
        }
        match self {
            Bundle::Free(b) | Bundle::Scs(b) | Bundle::Gnr(b) | Bundle::Material(b) => continuum(b),
            Bundle::Voids(b) => vec![
                ("x", b.fields.now().x.clone()),
                ("nu", b.fields.now().p.clone()),
                ("void_stress", b.state.void_stress.clone()),
                ("void_body_force", b.state.void_body_force.clone()),
            ],
            Bundle::Mixture(b) => {
                let mut out = Vec::new();
                for (i, c) in b.mixture.constituents.iter().enumerate() {
                    let names = if i == 0 { ["x_1", "cauchy_1", "b_1"] } else { ["x_2", "cauchy_2", "b_2"] };
                    out.push((names[0], c.fields.now().x.clone()));
                    out.push((names[1], c.stress.cauchy.iter().flat_map(crate::tensor::mat_to_vec).collect()));
                    out.push((names[2], c.loads.b.clone()));
                }
                out
            }
            Bundle::Variational(b) => vec![
                ("phi", b.initial.phi.clone()),
                ("phi_dot", b.initial.phi_dot.clone()),
                ("micro", b.initial.micro.clone()),
                ("micro_dot", b.initial.micro_dot.clone()),
            ],
        }
    }
}

struct Draw(ChaCha8Rng);

impl Draw {
    fn new(seed: u64) -> Self {
        Draw(ChaCha8Rng::seed_from_u64(seed))
    }

    fn uniform(&mut self, scale: f64) -> f64 {
        if scale > 0.0 {
            self.0.random_range(-scale..scale)
        } else {
            0.0
        }
    }

    fn poly(&mut self, degree: u32, scale: f64) -> PolyVectorField {
        if scale > 0.0 {
            PolyVectorField::random(2, degree, scale, &mut self.0)
        } else {
            PolyVectorField::zero(2)
        }
    }

    /// 2 × 2 matrix field with polynomial entries.
    fn matrix(&mut self, degree: u32, scale: f64, symmetric: bool) -> MatField {
        let (r0, r1) = (self.poly(degree, scale), self.poly(degree, scale));
        Arc::new(move |x: &[f64]| {
            let (a, b) = (r0.eval(x), r1.eval(x));
            if symmetric {
                mat_from_rows(&[&[1.0 + a[0], a[1]], &[a[1], 1.0 + b[0]]])
            } else {
                mat_from_rows(&[&[a[0], a[1]], &[b[0], b[1]]])
            }
        })
    }

    /// B(t, X) + P(X) + t v(X) + ½t² a(X).
    fn motion(&mut self, spec: &MotionSpec) -> Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync> {
        let base = spec.base.clone();
        let (p, v, a) = self.seeded(spec);
        Arc::new(move |t, x: &[f64]| {
            let (b, pp, vv, aa) = (base.eval(t, x), p.eval(x), v.eval(x), a.eval(x));
            (0..2).map(|i| b[i] + pp[i] + t * vv[i] + 0.5 * t * t * aa[i]).collect()
        })
    }

    /// Director X + c + P(X) + t v(X) + ½t² a(X).
    fn director(&mut self, spec: &MotionSpec, c: Vec<f64>) -> Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync> {
        let (p, v, a) = self.seeded(spec);
        Arc::new(move |t, x: &[f64]| {
            let (pp, vv, aa) = (p.eval(x), v.eval(x), a.eval(x));
            (0..2).map(|i| x[i] + c[i] + pp[i] + t * vv[i] + 0.5 * t * t * aa[i]).collect()
        })
    }

    fn seeded(&mut self, spec: &MotionSpec) -> (PolyVectorField, PolyVectorField, PolyVectorField) {
        (self.poly(spec.degree, spec.amplitude), self.poly(spec.degree, spec.rate), self.poly(spec.degree, spec.rate))
    }
}

pub(crate) fn chart(spec: &ChartSpec) -> Arc<MetricChart> {
    Arc::new(match spec {
        ChartSpec::Euclidean => MetricChart::euclidean(2),
        ChartSpec::Polar => MetricChart::polar(),
        ChartSpec::Sphere { radius } => MetricChart::sphere(*radius),
        ChartSpec::Constant { metric } => {
            let m = mat_from_rows(&[&metric[0], &metric[1]]);
            MetricChart::analytic(2, "constant", Arc::new(move |_| m.clone()))
        }
    })
}

fn flat() -> Arc<MetricChart> {
    Arc::new(MetricChart::euclidean(2))
}

fn body(spec: &BodySpec, chart: Arc<MetricChart>, rho0: f64) -> Result<Arc<ReferenceBody>> {
    let grid = RectGrid::cube(&spec.lower, &spec.upper, spec.nodes)?;
    Ok(Arc::new(ReferenceBody::uniform(chart, grid, rho0, spec.inertia0)?))
}

fn sample(motion: &AnalyticMotion, body: Arc<ReferenceBody>, ambient: Arc<MetricChart>, dir: DirectorKind) -> Result<DeformedFields> {
    spatial_fields(&motion.sample(body, ambient, dir, T0, LEVEL_DT, 3)?)
}

fn required<'a, T>(v: &'a Option<T>, key: &str) -> Result<&'a T> {
    v.as_ref().ok_or_else(|| Error::RegimeFieldMissing(key.into()))
}

fn loads_for(spec: Option<LoadsSpec>, stress: &StressState, fields: &DeformedFields) -> Result<BodyLoads> {
    match spec.unwrap_or_default() {
        LoadsSpec::Balancing => balancing_loads(stress, fields),
        LoadsSpec::Zero => Ok(BodyLoads::zeros(fields)),
    }
}

/// Builds the regime's state from a scenario (defaults must be filled).
pub fn build(s: &Scenario) -> Result<Bundle> {
    let b = required(&s.body, "body")?;
    let ms = required(&s.motion, "motion")?;
    let ambient = chart(required(&s.ambient, "ambient")?);
    let mut draw = Draw::new(s.seed);
    match s.regime {
        Regime::Free => {
            let Some(ModelSpec::QuadraticFree { mu, lambda, kappa_m, coupling }) = s.model.clone() else {
                return Err(Error::RegimeFieldMissing("model".into()));
            };
            let model: Arc<dyn EnergyModel> = Arc::new(QuadraticFree { mu, lambda, kappa_m, coupling });
            let phi = draw.motion(ms);
            let c = vec![0.4 + draw.uniform(0.1), -0.2 + draw.uniform(0.1)];
            let micro = draw.director(ms, c);
            let m = AnalyticMotion::new(phi).with_micro(micro);
            let fields = sample(&m, body(b, flat(), b.rho0)?, ambient, DirectorKind::FreeVector(flat()))?;
            let stress = free_regime_stresses(model.as_ref(), &fields)?;
            let loads = loads_for(s.loads, &stress, &fields)?;
            Ok(Bundle::Free(ContinuumBundle { fields, stress, loads, model }))
        }
        Regime::Scs => {
            let Some(ModelSpec::ScsLinear { mu, lambda }) = s.model.clone() else {
                return Err(Error::RegimeFieldMissing("model".into()));
            };
            // the macro motion is the base alone; the seeded part shapes the director
            let p0 = [draw.uniform(0.5), draw.uniform(0.5)];
            let q = draw.poly(ms.degree, ms.amplitude);
            let u = draw.poly(ms.degree, ms.rate);
            let st = draw.matrix(2, 0.5, false);
            let (q2, u2) = (q.clone(), u.clone());
            let director: Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync> = Arc::new(move |t: f64, x: &[f64]| {
                let (a, c) = (q2.eval(x), u2.eval(x));
                (0..2).map(|i| p0[i] + a[i] + t * c[i]).collect()
            });
            let at_t0 = director.clone();
            let rho0 = b.rho0;
            let model = ScsLinear::from_micro_stress(
                mu,
                lambda,
                ambient.clone(),
                st.clone(),
                Arc::new(move |x| at_t0(T0, x)),
                Arc::new(move |_| rho0),
            );
            let base = ms.base.clone();
            let m = AnalyticMotion::new(Arc::new(move |t, x: &[f64]| base.eval(t, x))).with_micro(director);
            let fields = sample(&m, body(b, ambient.clone(), b.rho0)?, ambient, DirectorKind::TangentOfAmbient)?;
            let energy = doyle_ericksen_stress(&model, &fields)?.cauchy;
            let micro: Vec<Mat> = (0..fields.len()).map(|n| st(fields.x(n))).collect();
            // σ = 2ρ∂e/∂g − div(σ̃⊗p) − ρ(b̃ − jã)⊗p, so the bracket is the energy stress
            let trial = StressState::from_cauchy(&fields, energy.clone(), micro.clone())?;
            let tensor = micro_momentum_tensor(&trial, &fields, &balancing_loads(&trial, &fields)?)?;
            let cauchy = energy.iter().zip(&tensor).map(|(e, m)| e - m).collect();
            let stress = StressState::from_cauchy(&fields, cauchy, micro)?;
            let loads = loads_for(s.loads, &stress, &fields)?;
            Ok(Bundle::Scs(ContinuumBundle { fields, stress, loads, model: Arc::new(model) }))
        }
        Regime::Gnr => {
            let phi = draw.motion(ms);
            let c = vec![0.3 + draw.uniform(0.1), -0.1 + draw.uniform(0.1)];
            let pm = draw.director(ms, c);
            // director p = c + X + …: the tangent director lives in the ambient plane
            let m = AnalyticMotion::new(phi).with_micro(pm);
            let fields = sample(&m, body(b, flat(), b.rho0)?, ambient, DirectorKind::TangentOfAmbient)?;
            let sym = draw.matrix(2, 0.5, true);
            let st = draw.matrix(2, 0.5, false);
            let micro: Vec<Mat> = (0..fields.len()).map(|n| st(fields.x(n))).collect();
            // σ = S − skew(σ̃·∇p) keeps the bracket σ + σ̃·∇p symmetric
            let cauchy = (0..fields.len())
                .map(|n| {
                    let gp = vector_gradient(&fields, &fields.now().p, n)?;
                    let st_gp = Mat::from_fn(2, 2, |a, c| (0..2).map(|k| micro[n][(a, k)] * gp[(c, k)]).sum());
                    Ok(sym(fields.x(n)) - skew(&st_gp))
                })
                .collect::<Result<Vec<_>>>()?;
            let stress = StressState::from_cauchy(&fields, cauchy, micro)?;
            let loads = loads_for(s.loads, &stress, &fields)?;
            let model: Arc<dyn EnergyModel> = Arc::new(FnModel::new("none", Signature::Scs, |_| 0.0));
            Ok(Bundle::Gnr(ContinuumBundle { fields, stress, loads, model }))
        }
        Regime::Material => {
            let phi = draw.motion(ms);
            let c = vec![0.5 + draw.uniform(0.1), 0.2 + draw.uniform(0.1)];
            let micro = draw.director(ms, c);
            let m = AnalyticMotion::new(phi).with_micro(micro);
            let fields = sample(&m, body(b, flat(), b.rho0)?, ambient, DirectorKind::FreeVector(flat()))?;
            let s1 = draw.matrix(2, 0.5, true);
            let s2 = draw.matrix(2, 0.5, true);
            // P = F⁻ᵀS₁, P̃ = F̃⁻ᵀS₂ and E = −G:(S₁ + S₂)/(2ρ₀), so 2ρ₀∂E/∂G = −FᵀP − F̃ᵀP̃
            let n = fields.len();
            let mut stress = StressState::zeros(n, 2, 2);
            for i in 0..n {
                let x = fields.body.grid.coords(i);
                let fit = fields.f(i).transpose().try_inverse().ok_or(Error::DegenerateF { node: i, det: 0.0 })?;
                let gt = fields.micro_grad(i).transpose().try_inverse().ok_or(Error::SingularF0 { node: i })?;
                stress.piola[i] = fit * s1(&x);
                stress.micro_piola[i] = gt * s2(&x);
            }
            inverse_piola_transform(&mut stress, &fields)?;
            let rho0 = b.rho0;
            let model: Arc<dyn EnergyModel> = Arc::new(FnModel::new("material_invariant", Signature::Material, move |a| {
                -contract2(&a.big_g, &(s1(&a.big_x) + s2(&a.big_x))) / (2.0 * rho0)
            }));
            let loads = BodyLoads::zeros(&fields);
            Ok(Bundle::Material(ContinuumBundle { fields, stress, loads, model }))
        }
        Regime::Voids => {
            let vs = required(&s.voids, "voids")?;
            let model = vs.coefficients.model(b.rho0);
            let phi = draw.motion(ms);
            let q = draw.poly(ms.degree, ms.amplitude);
            let u = draw.poly(ms.degree, ms.rate);
            let nu_ref = vs.coefficients.nu_ref;
            let nu = move |t: f64, x: &[f64]| vec![nu_ref + q.eval(x)[0] + t * u.eval(x)[0]];
            let m = AnalyticMotion::new(phi).with_micro(Arc::new(nu));
            let fields = sample(&m, body(b, flat(), b.rho0)?, ambient, DirectorKind::Scalar)?;
            let mut state = VoidState::from_fields(&fields)?.with_model_stress(&model, &fields)?;
            let r = residual_equilibrated_momentum(&state, &fields, vs.inertia_form)?;
            for n in 0..fields.len() {
                state.void_body_force[n] = -r.at(n)[0] / fields.rho(n);
            }
            Ok(Bundle::Voids(VoidsBundle { fields, state, model, form: vs.inertia_form }))
        }
        Regime::Mixture => {
            let Some(ModelSpec::Mixture { first, second }) = s.model.clone() else {
                return Err(Error::RegimeFieldMissing("model".into()));
            };
            let shared = draw.poly(ms.degree, ms.amplitude);
            let base = ms.base.clone();
            let mut constituent = |rho0: f64, amb: Arc<MetricChart>| -> Result<Constituent> {
                let (v, a) = (draw.poly(ms.degree, ms.rate), draw.poly(ms.degree, ms.rate));
                let (sh, base) = (shared.clone(), base.clone());
                let m = AnalyticMotion::new(Arc::new(move |t, x: &[f64]| {
                    let s = t - T0;
                    let (b, p, vv, aa) = (base.eval(t, x), sh.eval(x), v.eval(x), a.eval(x));
                    (0..2).map(|i| b[i] + p[i] + s * vv[i] + 0.5 * s * s * aa[i]).collect()
                }));
                let fields = sample(&m, body(b, flat(), rho0)?, amb, DirectorKind::None)?;
                let n = fields.len();
                let stress = StressState::zeros(n, 2, 0);
                let loads = BodyLoads::zeros(&fields);
                Ok(Constituent { fields, stress, loads })
            };
            let c1 = constituent(first.rho0, flat())?;
            let c2 = constituent(second.rho0, ambient)?;
            let models = [
                MixtureConstituent { mu: first.mu, lambda: first.lambda, coupling: first.coupling, own: 0, coupling_slots: (0, 1) },
                MixtureConstituent { mu: second.mu, lambda: second.lambda, coupling: second.coupling, own: 1, coupling_slots: (1, 0) },
            ];
            let mut mixture = MixtureState::new(c1, c2)?;
            let built = coupled_stresses(&mixture, &models[0], &models[1])?;
            for (c, cauchy) in mixture.constituents.iter_mut().zip(built) {
                let n = c.fields.len();
                c.stress = StressState::from_cauchy(&c.fields, cauchy, vec![Mat::zeros(0, 2); n])?;
                c.loads = loads_for(s.loads, &c.stress, &c.fields)?;
            }
            Ok(Bundle::Mixture(MixtureBundle { mixture, models }))
        }
        Regime::Variational => {
            let model_spec = required(&s.model, "model")?.clone();
            let (energy, rho0_micro): (Arc<dyn EnergyModel>, f64) = match model_spec {
                ModelSpec::StVenant { mu, lambda, kappa_m, rho0_micro } => (st_venant(mu, lambda, kappa_m), rho0_micro),
                ModelSpec::QuadraticFree { mu, lambda, kappa_m, coupling } => {
                    (Arc::new(QuadraticFree { mu, lambda, kappa_m, coupling }), 1.0)
                }
                _ => return Err(Error::RegimeFieldMissing("model".into())),
            };
            let phi = draw.motion(ms);
            let c = vec![0.4 + draw.uniform(0.1), 0.4 + draw.uniform(0.1)];
            let micro = draw.director(ms, c);
            let m = AnalyticMotion::new(phi).with_micro(micro);
            let body = body(b, flat(), b.rho0)?;
            let director = DirectorKind::FreeVector(flat());
            let st = m.sample(body.clone(), ambient.clone(), director.clone(), 0.0, LEVEL_DT, 1)?;
            let initial = st.levels.into_iter().next().expect("one level");
            let model = LagrangianModel::split(energy.name(), energy.clone(), b.rho0, rho0_micro, false);
            Ok(Bundle::Variational(VariationalBundle { model, energy, body, ambient, director, initial }))
        }
    }
}

/// e = μ/4 |C − G|² + λ/8 (tr C − n)² + κ/4 |C̃ − G|², minimal at the identity.
pub fn st_venant(mu: f64, lambda: f64, kappa_m: f64) -> Arc<dyn EnergyModel> {
    Arc::new(FnModel::new("st_venant", Signature::Free, move |a| {
        let c = a.f.transpose() * &a.g * &a.f - &a.big_g;
        let mut e = 0.25 * mu * c.norm_squared() + 0.125 * lambda * c.trace().powi(2);
        if let (Some(ft), Some(gm)) = (a.f_micro.as_ref(), a.g_micro.as_ref()) {
            let ct = ft.transpose() * gm * ft - &a.big_g;
            e += 0.25 * kappa_m * ct.norm_squared();
        }
        e
    }))
}

/// Manufactured state of a regime with default settings.
///
/// Deterministic in `seed`; the built-in defaults are valid for every
/// regime, so this never fails.
pub fn manufacture(regime: Regime, seed: u64) -> Bundle {
    build(&Scenario::minimal(regime, seed).with_defaults()).expect("built-in scenario defaults are consistent")
}
