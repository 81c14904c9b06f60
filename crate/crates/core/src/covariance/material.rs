//! Configurational tensors produced by reframing the reference configuration.

use rayon::prelude::*;

use crate::constitutive::{metric_derivative, EnergyArgs, EnergyModel, MetricSlot, Signature, StressState};
use crate::error::{Error, Result};
use crate::geometry::{christoffel, MetricChart};
use crate::kinematics::{grid_gradient, DeformedFields, DirectorKind};
use crate::tensor::{inverse, mat_to_vec, Mat};

use super::report::{NodalField, Norms};

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialTensors {
    /// P₀^{AB} = 2ρ₀ ∂E/∂G_AB + G^{AC}(F^a_C g_ab P^{bB} + F̃^α_C g̃_αβ P̃^{βB}).
    pub p0: Vec<Mat>,
    /// B₀_A = Div(FᵀP + F̃ᵀP̃ − P₀)_A − (FᵀDiv P)_A − (F̃ᵀDiv P̃)_A.
    pub b0: NodalField,
    /// (boundary node, T₀^A = P₀^{AB} N̂_B) with N̂ the outward unit covector.
    pub t0: Vec<(usize, Vec<f64>)>,
    /// Div(FᵀP + F̃ᵀP̃) − FᵀDiv P − F̃ᵀDiv P̃, i.e. B₀ when P₀ = 0.
    pub balance: NodalField,
}

struct MicroGeom<'a> {
    chart: Option<&'a MetricChart>,
    m: usize,
}

fn micro_geom(fields: &DeformedFields) -> Result<MicroGeom<'_>> {
    match &fields.director {
        DirectorKind::None => Ok(MicroGeom { chart: None, m: 0 }),
        DirectorKind::Scalar => Ok(MicroGeom { chart: None, m: 1 }),
        DirectorKind::FreeVector(c) => Ok(MicroGeom { chart: Some(c), m: c.dim() }),
        DirectorKind::TangentOfAmbient => {
            Err(Error::Unsupported("material transform for tangent-of-ambient directors".into()))
        }
    }
}

fn micro_metric(geom: &MicroGeom<'_>, p: &[f64]) -> Result<Mat> {
    match geom.chart {
        Some(c) => c.metric(p),
        None => Ok(Mat::identity(geom.m, geom.m)),
    }
}

/// FᵀgP + F̃ᵀg̃P̃ with index layout (A, B) = (lower, upper).
fn mixed_flux(fields: &DeformedFields, stress: &StressState, geom: &MicroGeom<'_>, node: usize) -> Result<Mat> {
    let g = fields.metric(node)?;
    let mut x = fields.f(node).transpose() * g * &stress.piola[node];
    if geom.m > 0 {
        let gm = micro_metric(geom, fields.p(node))?;
        x += fields.micro_grad(node).transpose() * gm * &stress.micro_piola[node];
    }
    Ok(x)
}

/// Material divergence of a nodal field of `r × dim` matrices whose second
/// index is a reference vector index. `lead` adds the connection of the
/// first index along F (spatial), F̃ (micro) or the reference chart itself
/// (mixed tensors with a lower reference index).
enum Lead<'a> {
    Spatial,
    Micro(&'a MicroGeom<'a>),
    ReferenceLower,
}

fn material_divergence(fields: &DeformedFields, values: &[Mat], lead: Lead<'_>) -> Result<Vec<Vec<f64>>> {
    let d = fields.dim();
    let grid = &fields.body.grid;
    let r = values.first().map(|m| m.nrows()).unwrap_or(0);
    let packed: Vec<f64> = values.iter().flat_map(mat_to_vec).collect();
    (0..fields.len())
        .into_par_iter()
        .map(|node| {
            let (grad, _) = grid_gradient(grid, &packed, r * d, node, true)?;
            let big_x = grid.coords(node);
            let gref = christoffel(&fields.body.chart, &big_x)?;
            let s = &values[node];
            let mut out = vec![0.0; r];
            for (i, o) in out.iter_mut().enumerate() {
                for bb in 0..d {
                    *o += grad[(i * d + bb) * d + bb];
                    for c in 0..d {
                        *o += gref.get(&[bb, bb, c]) * s[(i, c)];
                    }
                }
            }
            match lead {
                Lead::Spatial => {
                    let gamma = christoffel(&fields.ambient, fields.x(node))?;
                    let f = fields.f(node);
                    for (a, o) in out.iter_mut().enumerate() {
                        for b in 0..d {
                            for c in 0..d {
                                let gg = gamma.get(&[a, b, c]);
                                if gg != 0.0 {
                                    *o += gg * (0..d).map(|aa| f[(b, aa)] * s[(c, aa)]).sum::<f64>();
                                }
                            }
                        }
                    }
                }
                Lead::Micro(geom) => {
                    if let Some(chart) = geom.chart {
                        let gm = christoffel(chart, fields.p(node))?;
                        let ft = fields.micro_grad(node);
                        for (a, o) in out.iter_mut().enumerate() {
                            for b in 0..geom.m {
                                for c in 0..geom.m {
                                    let gg = gm.get(&[a, b, c]);
                                    if gg != 0.0 {
                                        *o += gg * (0..d).map(|aa| ft[(b, aa)] * s[(c, aa)]).sum::<f64>();
                                    }
                                }
                            }
                        }
                    }
                }
                Lead::ReferenceLower => {
                    for (a, o) in out.iter_mut().enumerate() {
                        for bb in 0..d {
                            for c in 0..d {
                                *o -= gref.get(&[c, bb, a]) * s[(c, bb)];
                            }
                        }
                    }
                }
            }
            Ok(out)
        })
        .collect()
}

fn outward_normal(fields: &DeformedFields, node: usize) -> Option<Vec<f64>> {
    let grid = &fields.body.grid;
    let idx = grid.multi(node);
    let d = grid.dim();
    for k in 0..d {
        let sign = if idx[k] == 0 {
            -1.0
        } else if idx[k] + 1 == grid.counts[k] {
            1.0
        } else {
            continue;
        };
        let mut n = vec![0.0; d];
        n[k] = sign;
        return Some(n);
    }
    None
}

pub fn material_transform_tensors(
    fields: &DeformedFields,
    stress: &StressState,
    model: &dyn EnergyModel,
) -> Result<MaterialTensors> {
    if model.signature() != Signature::Material {
        return Err(Error::SlotNotInSignature { slot: "G".into(), signature: model.signature().name().into() });
    }
    let geom = micro_geom(fields)?;
    let n = fields.len();
    let d = fields.dim();
    let mixed: Vec<Mat> = (0..n).map(|node| mixed_flux(fields, stress, &geom, node)).collect::<Result<_>>()?;
    let energy: Vec<Mat> = (0..n)
        .into_par_iter()
        .map(|node| {
            let args = EnergyArgs::at_node(fields, node)?;
            Ok(metric_derivative(model, &args, MetricSlot::Reference)? * (2.0 * fields.body.density0[node]))
        })
        .collect::<Result<_>>()?;
    let mut p0 = Vec::with_capacity(n);
    let mut rest = Vec::with_capacity(n);
    for node in 0..n {
        let big_g = fields.body.chart.metric(&fields.body.grid.coords(node))?;
        let ginv = inverse(&big_g).ok_or(Error::SingularMetric { point: fields.body.grid.coords(node) })?;
        p0.push(&energy[node] + &ginv * &mixed[node]);
        rest.push(-(&big_g * &energy[node]));
    }
    let div_p = material_divergence(fields, &stress.piola, Lead::Spatial)?;
    let div_pt = if geom.m > 0 { Some(material_divergence(fields, &stress.micro_piola, Lead::Micro(&geom))?) } else { None };
    let div_mixed = material_divergence(fields, &mixed, Lead::ReferenceLower)?;
    let div_rest = material_divergence(fields, &rest, Lead::ReferenceLower)?;

    let mut b0 = NodalField::zeros(n, d);
    let mut balance = NodalField::zeros(n, d);
    for node in 0..n {
        let g = fields.metric(node)?;
        let f = fields.f(node);
        let pulled = f.transpose() * &g * nalgebra::DVector::from_vec(div_p[node].clone());
        let mut pulled_total: Vec<f64> = pulled.iter().copied().collect();
        if let Some(dt) = &div_pt {
            let gm = micro_metric(&geom, fields.p(node))?;
            let pm = fields.micro_grad(node).transpose() * gm * nalgebra::DVector::from_vec(dt[node].clone());
            for (t, v) in pulled_total.iter_mut().zip(pm.iter()) {
                *t += v;
            }
        }
        for a in 0..d {
            b0.at_mut(node)[a] = div_rest[node][a] - pulled_total[a];
            balance.at_mut(node)[a] = div_mixed[node][a] - pulled_total[a];
        }
    }
    let mut t0 = Vec::new();
    for node in 0..n {
        if let Some(nrm) = outward_normal(fields, node) {
            let big_x = fields.body.grid.coords(node);
            let ginv = fields.body.chart.metric_inverse(&big_x)?;
            let len = crate::tensor::inner(&ginv, &nrm, &nrm).sqrt();
            let unit: Vec<f64> = nrm.iter().map(|v| v / len).collect();
            t0.push((node, crate::tensor::mat_vec(&p0[node], &unit)));
        }
    }
    Ok(MaterialTensors { p0, b0, t0, balance })
}

/// Norms over interior nodes of the two conditions for invariance under
/// material reframings: P₀ = 0 and Div(FᵀP + F̃ᵀP̃) = FᵀDiv P + F̃ᵀDiv P̃.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialConditions {
    pub p0: Norms,
    pub balance: Norms,
}

pub fn material_covariance_conditions(
    fields: &DeformedFields,
    stress: &StressState,
    model: &dyn EnergyModel,
) -> Result<MaterialConditions> {
    let t = material_transform_tensors(fields, stress, model)?;
    let nodes = fields.interior_nodes();
    Ok(MaterialConditions { p0: NodalField::from_mats(&t.p0).norms(&nodes), balance: t.balance.norms(&nodes) })
}
