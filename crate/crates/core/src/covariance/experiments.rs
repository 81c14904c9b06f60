//! Energy-balance experiments under flows that are the identity at t₀.
//!
//! Each experiment evaluates the energy-balance difference in two ways: the
//! raw form (flow-pulled-back energy, inertia and loads against boundary
//! tractions through Piola fluxes) and the collapsed form (a sum of balance
//! residuals weighted by the generator). Integrals use [`Subbody`] quadrature.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constitutive::{metric_derivative, EnergyArgs, EnergyModel, MetricSlot, StressState};
use crate::error::{Error, Result};
use crate::fd;
use crate::geometry::{christoffel, lie_metric_from_gradient, MetricChart, PolyVectorField};
use crate::kinematics::{DeformedFields, DirectorKind};
use crate::tensor::{contract2, inner, skew, Mat, Tensor};

use super::loads::{BodyLoads, FlowKind, FlowSpec};
use super::quadrature::Subbody;
use super::report::{BalanceReport, NodalField};
use super::residuals::{
    f0_sigma, micro_stress_divergence, residual_linear_momentum, residual_mass, residual_micro_inertia,
    residual_micro_linear_momentum,
};

/// Value, coordinate gradient w^a_{|b} (covariant) and lowered gradient of a
/// polynomial generator at a point of a chart.
struct GeneratorJet {
    value: Vec<f64>,
    partial: Mat,
    lowered: Mat,
    lie_metric: Mat,
}

fn generator_jet(field: &PolyVectorField, chart: &MetricChart, point: &[f64]) -> Result<GeneratorJet> {
    let d = chart.dim();
    if field.dim != d {
        return Err(Error::DimensionMismatch(format!("generator in dim {} on a {d}-dimensional chart", field.dim)));
    }
    let value = field.eval(point);
    let jac = field.jacobian(point);
    let gamma = christoffel(chart, point)?;
    let g = chart.metric(point)?;
    let mut cov = Tensor::zeros(d, 1, 1);
    let mut partial = Mat::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            partial[(a, b)] = jac[a][b];
            let v = jac[a][b] + (0..d).map(|c| gamma.get(&[a, b, c]) * value[c]).sum::<f64>();
            cov.set(&[a, b], v);
        }
    }
    let cov_m = cov.to_mat();
    Ok(GeneratorJet { lie_metric: lie_metric_from_gradient(&g, &cov), lowered: &g * cov_m, value, partial })
}

/// d/ds e with the metric slot replaced by the pullback of the chart metric
/// along s ↦ y + s u(y), at s = 0.
fn pulled_back_energy_rate(
    model: &dyn EnergyModel,
    args: &EnergyArgs,
    slot: MetricSlot,
    chart: &MetricChart,
    point: &[f64],
    jet: &GeneratorJet,
) -> Result<f64> {
    let d = chart.dim();
    let failure = std::cell::RefCell::new(None);
    let rate = fd::derivative_scalar(
        |s| {
            let moved: Vec<f64> = point.iter().zip(&jet.value).map(|(y, u)| y + s * u).collect();
            match chart.metric(&moved) {
                Ok(gm) => {
                    let j = Mat::identity(d, d) + &jet.partial * s;
                    let mut a = args.clone();
                    *a.metric_mut(slot).expect("slot present") = j.transpose() * gm * j;
                    model.evaluate(&a)
                }
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    f64::NAN
                }
            }
        },
        0.0,
        1e-3,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    if !rate.is_finite() {
        return Err(Error::NonFiniteEnergy);
    }
    Ok(rate)
}

fn subbody_nodes(fields: &DeformedFields, sub: &Subbody) -> Result<Vec<usize>> {
    if sub.dim() != fields.dim() {
        return Err(Error::DimensionMismatch("subbody dimension differs from the body".into()));
    }
    Subbody::new(&fields.body.grid, sub.lo.clone(), sub.hi.clone())?;
    Ok(sub.nodes(&fields.body.grid))
}

/// Per-node integrands of one collapsed term, indexed by node (zero outside the subbody).
struct Term {
    law: &'static str,
    residual: NodalField,
    integrand: Vec<f64>,
}

fn assemble(
    regime: &str,
    fields: &DeformedFields,
    sub: &Subbody,
    nodes: &[usize],
    terms: Vec<Term>,
    raw: f64,
    tol: f64,
) -> Result<BalanceReport> {
    let mut report = BalanceReport::new(regime);
    let mut total = 0.0;
    for t in terms {
        let integral = sub.integrate(fields, &t.integrand)?;
        total += integral;
        report.push(t.law, t.residual.norms(nodes), tol, Some(integral));
    }
    report.total = Some(total);
    report.diagnostics.insert("raw_energy_difference".into(), raw);
    report.diagnostics.insert("collapse_gap".into(), raw - total);
    Ok(report)
}

/// Collapse test for a spatial flow with generator w:
///
/// raw   = ∫ [𝔏_vρ(½⟨w,w⟩ + ⟨v,w⟩) + ρ d/ds e(ψ_s*g) + ρ⟨a − b, w⟩] dv − ∮ ⟨t, w⟩ da
/// total = ∫ 𝔏_vρ(…) + (2ρ∂e/∂g − σ):½𝔏_w g + σ:ω − ⟨div σ + ρ(b − a), w⟩ dv
///
/// with ω_ab = ½(w_{b|a} − w_{a|b}), so that σ:ω + σ:½𝔏_w g = σ^{ab} w_{a|b}
/// for tractions t^a = σ^{ab} n_b. The two agree up to quadrature error.
pub fn spatial_covariance_experiment(
    fields: &DeformedFields,
    stress: &StressState,
    loads: &BodyLoads,
    model: &dyn EnergyModel,
    flow: &FlowSpec,
    sub: &Subbody,
    tol: f64,
) -> Result<BalanceReport> {
    let w = flow.spatial_generator()?;
    let nodes = subbody_nodes(fields, sub)?;
    let n = fields.len();
    let d = fields.dim();
    let mass = residual_mass(fields)?;
    let momentum = residual_linear_momentum(stress, fields, loads)?;
    let slot = match model.signature() {
        crate::constitutive::Signature::Mixture => MetricSlot::First,
        _ => MetricSlot::Spatial,
    };

    struct NodeTerms {
        mass: f64,
        de: f64,
        angular: f64,
        momentum: f64,
        raw_volume: f64,
        de_residual: Mat,
    }
    let per_node: Vec<(usize, NodeTerms)> = nodes
        .par_iter()
        .map(|&node| {
            let x = fields.x(node);
            let jet = generator_jet(w, &fields.ambient, x)?;
            let g = fields.metric(node)?;
            let rho = fields.rho(node);
            let args = EnergyArgs::at_node(fields, node)?;
            let de_res = metric_derivative(model, &args, slot)? * (2.0 * rho) - &stress.cauchy[node];
            let sigma = &stress.cauchy[node];
            let mut angular = 0.0;
            for a in 0..d {
                for b in 0..d {
                    angular += sigma[(a, b)] * 0.5 * (jet.lowered[(b, a)] - jet.lowered[(a, b)]);
                }
            }
            let m_w = inner(&g, momentum.at(node), &jet.value);
            let v = fields.v(node);
            let mass_t = mass.at(node)[0] * (0.5 * inner(&g, &jet.value, &jet.value) + inner(&g, v, &jet.value));
            let rate = pulled_back_energy_rate(model, &args, slot, &fields.ambient, x, &jet)?;
            let a = fields.accel(node)?;
            let b = loads.b(node, d);
            let amb: Vec<f64> = (0..d).map(|i| a[i] - b[i]).collect();
            Ok((
                node,
                NodeTerms {
                    mass: mass_t,
                    de: 0.5 * contract2(&de_res, &jet.lie_metric),
                    angular,
                    momentum: -m_w,
                    raw_volume: mass_t + rho * rate + rho * inner(&g, &amb, &jet.value),
                    de_residual: de_res,
                },
            ))
        })
        .collect::<Result<_>>()?;

    let mut ints = vec![vec![0.0; n]; 5];
    let mut de_field = NodalField::zeros(n, d * d);
    for (node, t) in &per_node {
        ints[0][*node] = t.mass;
        ints[1][*node] = t.de;
        ints[2][*node] = t.angular;
        ints[3][*node] = t.momentum;
        ints[4][*node] = t.raw_volume;
        de_field.at_mut(*node).copy_from_slice(&crate::tensor::mat_to_vec(&t.de_residual));
    }
    let surface = sub.flux(fields, |node| {
        let g = fields.metric(node).unwrap_or_else(|_| Mat::identity(d, d));
        let wv = w.eval(fields.x(node));
        let wl = crate::tensor::mat_vec(&g, &wv);
        let p = &stress.piola[node];
        (0..d).map(|k| (0..d).map(|a| wl[a] * p[(a, k)]).sum()).collect()
    })?;
    let raw = sub.integrate(fields, &ints[4])? - surface;
    let skew_sigma: Vec<Mat> = stress.cauchy.iter().map(skew).collect();
    let terms = vec![
        Term { law: "mass", residual: mass, integrand: std::mem::take(&mut ints[0]) },
        Term { law: "doyle_ericksen", residual: de_field, integrand: std::mem::take(&mut ints[1]) },
        Term { law: "angular_momentum", residual: NodalField::from_mats(&skew_sigma), integrand: std::mem::take(&mut ints[2]) },
        Term { law: "linear_momentum", residual: momentum, integrand: std::mem::take(&mut ints[3]) },
    ];
    assemble("spatial_covariance", fields, sub, &nodes, terms, raw, tol)
}

/// Collapse test for a microstructure flow with generator z on the micro chart:
///
/// raw   = ∫ [𝔏_v(ρj)(½⟨z,z⟩ + ⟨ṽ,z⟩) + ρ d/ds e(η_s*g̃) + ρ⟨jã − b̃, z⟩] dv − ∮ ⟨t̃, z⟩ da
/// total = ∫ 𝔏_v(ρj)(…) + (2ρ∂e/∂g̃ − F₀σ̃):½𝔏_z g̃ − (F₀σ̃)^{γα}½(z_{α|γ} − z_{γ|α})
///         − ⟨div σ̃ + ρ(b̃ − jã), z⟩ dv
pub fn micro_covariance_experiment(
    fields: &DeformedFields,
    stress: &StressState,
    loads: &BodyLoads,
    model: &dyn EnergyModel,
    flow: &FlowSpec,
    sub: &Subbody,
    tol: f64,
) -> Result<BalanceReport> {
    let chart = match &fields.director {
        DirectorKind::FreeVector(c) => c.clone(),
        other => {
            return Err(Error::DimensionMismatch(format!(
                "micro covariance needs a free-vector director, found {}",
                other.tag()
            )))
        }
    };
    let z = flow.micro_generator()?;
    let nodes = subbody_nodes(fields, sub)?;
    let n = fields.len();
    let m = fields.director_dim();
    let mass = residual_mass(fields)?;
    let inertia = residual_micro_inertia(fields)?;
    let momentum = residual_micro_linear_momentum(stress, fields, loads)?;

    let per_node: Vec<(usize, [f64; 5], Mat, Mat)> = nodes
        .par_iter()
        .map(|&node| {
            let p = fields.p(node);
            let jet = generator_jet(z, &chart, p)?;
            let gm = chart.metric(p)?;
            let (rho, j) = (fields.rho(node), fields.inertia(node));
            let args = EnergyArgs::at_node(fields, node)?;
            let f0s = f0_sigma(fields, stress, node).ok_or(Error::SingularF0 { node })?;
            let de_res = metric_derivative(model, &args, MetricSlot::Micro)? * (2.0 * rho) - &f0s;
            let mut angular = 0.0;
            for g in 0..m {
                for a in 0..m {
                    angular -= f0s[(g, a)] * 0.5 * (jet.lowered[(a, g)] - jet.lowered[(g, a)]);
                }
            }
            let rho_j_rate = j * mass.at(node)[0] + rho * inertia.at(node)[0];
            let inert = rho_j_rate * (0.5 * inner(&gm, &jet.value, &jet.value) + inner(&gm, fields.p_rate(node), &jet.value));
            let rate = pulled_back_energy_rate(model, &args, MetricSlot::Micro, &chart, p, &jet)?;
            let at = fields.micro_accel(node)?;
            let bt = loads.b_micro(node, m);
            let jab: Vec<f64> = (0..m).map(|i| j * at[i] - bt[i]).collect();
            let terms = [
                inert,
                0.5 * contract2(&de_res, &jet.lie_metric),
                angular,
                -inner(&gm, momentum.at(node), &jet.value),
                inert + rho * rate + rho * inner(&gm, &jab, &jet.value),
            ];
            Ok((node, terms, de_res, skew(&f0s)))
        })
        .collect::<Result<_>>()?;

    let mut ints = vec![vec![0.0; n]; 5];
    let mut de_field = NodalField::zeros(n, m * m);
    let mut skew_field = NodalField::zeros(n, m * m);
    for (node, t, de, sk) in &per_node {
        for k in 0..5 {
            ints[k][*node] = t[k];
        }
        de_field.at_mut(*node).copy_from_slice(&crate::tensor::mat_to_vec(de));
        skew_field.at_mut(*node).copy_from_slice(&crate::tensor::mat_to_vec(sk));
    }
    let surface = sub.flux(fields, |node| {
        let p = fields.p(node);
        let gm = chart.metric(p).unwrap_or_else(|_| Mat::identity(m, m));
        let zl = crate::tensor::mat_vec(&gm, &z.eval(p));
        let pt = &stress.micro_piola[node];
        (0..fields.dim()).map(|k| (0..m).map(|a| zl[a] * pt[(a, k)]).sum()).collect()
    })?;
    let raw = sub.integrate(fields, &ints[4])? - surface;
    let mut rho_j = NodalField::zeros(n, 1);
    for node in 0..n {
        rho_j.at_mut(node)[0] = fields.inertia(node) * mass.at(node)[0] + fields.rho(node) * inertia.at(node)[0];
    }
    let terms = vec![
        Term { law: "micro_inertia", residual: rho_j, integrand: std::mem::take(&mut ints[0]) },
        Term { law: "micro_doyle_ericksen", residual: de_field, integrand: std::mem::take(&mut ints[1]) },
        Term { law: "micro_angular_momentum", residual: skew_field, integrand: std::mem::take(&mut ints[2]) },
        Term { law: "micro_linear_momentum", residual: momentum, integrand: std::mem::take(&mut ints[3]) },
    ];
    assemble("micro_covariance", fields, sub, &nodes, terms, raw, tol)
}

/// Outcome of a rigid-flow (Galilean) experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnrOutcome {
    /// Energy balance in the moved frame minus the original one.
    pub defect: f64,
    /// −∫ B:Ω dv for rotations, B = σ + (div σ̃)⊗p + σ̃·∇p + ρ(b̃ − jã)⊗p.
    pub bracket_integral: Option<f64>,
    /// −∫ ⟨div σ + ρ(b − a), w⟩ dv.
    pub momentum_integral: f64,
    /// ∫ 𝔏_vρ(½|w|² + ⟨v,w⟩) + 𝔏_v(ρj)(½|Ωp|² + ⟨ṽ,Ωp⟩) dv.
    pub mass_integral: f64,
    /// max |skew B| over the subbody (rotations).
    pub bracket_skew: Option<f64>,
    pub terms: BTreeMap<String, f64>,
}

/// Rigid translation or rotation of a Euclidean ambient space acting on a
/// body whose director is a vector of the same space.
pub fn gnr_experiment(
    fields: &DeformedFields,
    stress: &StressState,
    loads: &BodyLoads,
    flow: &FlowSpec,
    sub: &Subbody,
) -> Result<GnrOutcome> {
    if !fields.ambient.is_euclidean() {
        return Err(Error::NonEuclideanChart);
    }
    let d = fields.dim();
    match &fields.director {
        DirectorKind::TangentOfAmbient => {}
        DirectorKind::FreeVector(c) if c.is_euclidean() && c.dim() == d => {}
        other => {
            return Err(Error::DimensionMismatch(format!(
                "rigid-flow experiment needs a director in the ambient vector space, found {}",
                other.tag()
            )))
        }
    }
    let omega = match flow.kind {
        FlowKind::RigidTranslation => Mat::zeros(d, d),
        FlowKind::RigidRotation => flow.omega.clone().ok_or_else(|| Error::DimensionMismatch("rotation without Ω".into()))?,
        other => return Err(Error::DimensionMismatch(format!("rigid-flow experiment cannot use a {other:?} flow"))),
    };
    let w = flow.spatial_generator()?;
    loads.check(fields)?;
    let nodes = subbody_nodes(fields, sub)?;
    let n = fields.len();
    let mass = residual_mass(fields)?;
    let inertia = residual_micro_inertia(fields)?;
    let momentum = residual_linear_momentum(stress, fields, loads)?;
    let div_t = micro_stress_divergence(stress, fields)?;
    let p_all = &fields.now().p;

    let mut ints = vec![vec![0.0; n]; 5];
    let mut skew_max: f64 = 0.0;
    for &node in &nodes {
        let x = fields.x(node);
        let wv = w.eval(x);
        let p = fields.p(node);
        let zp = crate::tensor::mat_vec(&omega, p);
        let (rho, j) = (fields.rho(node), fields.inertia(node));
        let a = fields.accel(node)?;
        let at = fields.micro_accel(node)?;
        let b = loads.b(node, d);
        let bt = loads.b_micro(node, d);
        let v = fields.v(node);
        let vt = fields.p_rate(node);
        let dot = crate::tensor::dot;
        let rho_j_rate = j * mass.at(node)[0] + rho * inertia.at(node)[0];
        ints[0][node] = mass.at(node)[0] * (0.5 * dot(&wv, &wv) + dot(v, &wv)) + rho_j_rate * (0.5 * dot(&zp, &zp) + dot(vt, &zp));
        let amb: Vec<f64> = (0..d).map(|i| a[i] - b[i]).collect();
        let jab: Vec<f64> = (0..d).map(|i| j * at[i] - bt[i]).collect();
        ints[1][node] = rho * dot(&amb, &wv) + rho * dot(&jab, &zp);
        ints[2][node] = -dot(momentum.at(node), &wv);
        let (gp, _) = fields.spatial_gradient(p_all, d, node)?;
        let st = &stress.micro_cauchy[node];
        let mut bracket = stress.cauchy[node].clone();
        for i in 0..d {
            for k in 0..d {
                let mut v = (div_t[node][i] + rho * (bt[i] - j * at[i])) * p[k];
                for c in 0..d {
                    v += st[(i, c)] * gp[k * d + c];
                }
                bracket[(i, k)] += v;
            }
        }
        ints[3][node] = -contract2(&bracket, &omega);
        skew_max = skew_max.max(crate::tensor::max_abs(&skew(&bracket)));
    }
    let surface = sub.flux(fields, |node| {
        let wv = w.eval(fields.x(node));
        let zp = crate::tensor::mat_vec(&omega, fields.p(node));
        let (pp, pt) = (&stress.piola[node], &stress.micro_piola[node]);
        (0..d).map(|k| (0..d).map(|a| wv[a] * pp[(a, k)] + zp[a] * pt[(a, k)]).sum()).collect()
    })?;
    let mass_integral = sub.integrate(fields, &ints[0])?;
    let volume = sub.integrate(fields, &ints[1])?;
    let momentum_integral = sub.integrate(fields, &ints[2])?;
    let defect = mass_integral + volume - surface;
    let rotating = flow.kind == FlowKind::RigidRotation;
    let bracket_integral = if rotating { Some(sub.integrate(fields, &ints[3])?) } else { None };
    let mut terms = BTreeMap::new();
    terms.insert("volume".to_string(), volume);
    terms.insert("surface".to_string(), surface);
    Ok(GnrOutcome {
        defect,
        bracket_integral,
        momentum_integral,
        mass_integral,
        bracket_skew: if rotating { Some(skew_max) } else { None },
        terms,
    })
}
