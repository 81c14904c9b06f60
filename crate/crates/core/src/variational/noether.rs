use rayon::prelude::*;

use crate::constitutive::derivative::{central_richardson, PERTURBATION};
use crate::covariance::NodalField;
use crate::error::{Error, Result};
use crate::geometry::PolyVectorField;
use crate::kinematics::DirectorKind;
use crate::tensor::{inverse, mat_vec, Mat};

use super::{partials, LagrangianArgs, LagrangianModel, SpacetimeGrid};

fn level_args(grid: &SpacetimeGrid, level: usize) -> Result<Vec<LagrangianArgs>> {
    (0..grid.len()).map(|i| grid.args(level, i)).collect()
}

fn ginv(g: &Mat) -> Result<Mat> {
    inverse(g).ok_or(Error::SingularMetric { point: vec![] })
}

fn grad_w(w: &PolyVectorField, x: &[f64]) -> Mat {
    let j = w.jacobian(x);
    Mat::from_fn(x.len(), x.len(), |a, b| j[a][b])
}

/// d/ds 𝓛 along the flow of w: φ ↦ ψ_s(φ), tangent quantities pushed by Tψ_s
/// and g replaced by ψ_s* g. With `carry_micro` the director quantities are
/// pushed too (tangent-of-ambient directors).
fn invariance_rate(model: &LagrangianModel, a: &LagrangianArgs, w: &PolyVectorField, carry_micro: bool) -> Result<f64> {
    let m_w = grad_w(w, &a.phi);
    let wv = w.eval(&a.phi);
    let dg = m_w.transpose() * &a.g + &a.g * &m_w;
    let push = |v: &[f64]| mat_vec(&m_w, v);
    let (dv, df) = (push(&a.phi_dot), &m_w * &a.f);
    let (dp, dpd, dft) = if carry_micro {
        (push(&a.micro), push(&a.micro_dot), &m_w * &a.f_micro)
    } else {
        (vec![0.0; a.micro_dim()], vec![0.0; a.micro_dim()], Mat::zeros(a.f_micro.nrows(), a.f_micro.ncols()))
    };
    central_richardson(
        |s| {
            let mut p = a.clone();
            p.phi.iter_mut().zip(&wv).for_each(|(x, d)| *x += s * d);
            p.phi_dot.iter_mut().zip(&dv).for_each(|(x, d)| *x += s * d);
            p.f += &df * s;
            p.g -= &dg * s;
            p.micro.iter_mut().zip(&dp).for_each(|(x, d)| *x += s * d);
            p.micro_dot.iter_mut().zip(&dpd).for_each(|(x, d)| *x += s * d);
            p.f_micro += &dft * s;
            model.eval(&p)
        },
        PERTURBATION,
    )
}

/// Spatial Doyle–Ericksen and homogeneity defects per node.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialDefects {
    /// 2∂𝓛/∂g_{ab} − g^{bc}(∂𝓛/∂F^c_A F^a_A + ∂𝓛/∂φ̇^c φ̇^a), row a, column b.
    pub doyle_ericksen: NodalField,
    /// ∂𝓛/∂φ^a with the metric slot held fixed.
    pub homogeneity: NodalField,
    /// d𝓛/ds along the flow of w, when a flow is supplied.
    pub invariance_rate: Option<NodalField>,
}

pub fn noether_spatial_check(
    model: &LagrangianModel,
    grid: &SpacetimeGrid,
    level: usize,
    flow: Option<&PolyVectorField>,
) -> Result<SpatialDefects> {
    if model.constrained {
        return Err(Error::Unsupported("constrained models use the combined check".into()));
    }
    let args = level_args(grid, level)?;
    let rows = args
        .par_iter()
        .map(|a| {
            let p = partials(model, a)?;
            let gi = ginv(&a.g)?;
            let rhs = &gi * (&p.f * a.f.transpose() + col(&p.phi_dot) * col(&a.phi_dot).transpose());
            let de = &p.g * 2.0 - rhs.transpose();
            let rate = match flow {
                Some(w) => Some(invariance_rate(model, a, w, false)?),
                None => None,
            };
            Ok((de, p.phi, rate))
        })
        .collect::<Result<Vec<_>>>()?;
    let d = grid.dim();
    let de: Vec<Mat> = rows.iter().map(|r| r.0.clone()).collect();
    let hom = rows.iter().map(|r| r.1.clone()).collect();
    let rate = flow.map(|_| NodalField::from_rows(rows.iter().map(|r| vec![r.2.unwrap_or(0.0)]).collect(), 1));
    Ok(SpatialDefects {
        doyle_ericksen: NodalField::from_mats(&de),
        homogeneity: NodalField::from_rows(hom, d),
        invariance_rate: rate,
    })
}

fn col(v: &[f64]) -> Mat {
    Mat::from_column_slice(v.len(), 1, v)
}

/// Micro Doyle–Ericksen and micro-homogeneity defects per node.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroDefects {
    /// 2∂𝓛/∂g̃_{αβ} − F̃^α_A g̃^{βμ}∂𝓛/∂F̃^μ_A − g̃^{βμ}∂𝓛/∂φ̃̇^μ φ̃̇^α.
    pub doyle_ericksen: NodalField,
    /// ∂𝓛/∂φ̃^α.
    pub homogeneity: NodalField,
    /// For split models: −(Doyle–Ericksen defect)/J, which equals 2ρ∂e/∂g̃ − F₀σ̃.
    pub reduced: Option<NodalField>,
}

pub fn noether_micro_check(model: &LagrangianModel, grid: &SpacetimeGrid, level: usize) -> Result<MicroDefects> {
    if model.constrained || !matches!(grid.director, DirectorKind::FreeVector(_)) {
        return Err(Error::Unsupported("the micro check needs an independent director manifold".into()));
    }
    let args = level_args(grid, level)?;
    let rows = args
        .par_iter()
        .map(|a| {
            let p = partials(model, a)?;
            let gi = ginv(&a.g_micro)?;
            let de = &p.g_micro * 2.0
                - &a.f_micro * p.f_micro.transpose() * &gi
                - col(&a.micro_dot) * (&gi * col(&p.micro_dot)).transpose();
            let jac = a.f.determinant() * (a.g.determinant() / a.big_g.determinant()).sqrt();
            Ok((de.clone(), p.micro, de * (-1.0 / jac)))
        })
        .collect::<Result<Vec<_>>>()?;
    let de: Vec<Mat> = rows.iter().map(|r| r.0.clone()).collect();
    let reduced = model.splitting.as_ref().map(|_| NodalField::from_mats(&rows.iter().map(|r| r.2.clone()).collect::<Vec<_>>()));
    Ok(MicroDefects {
        doyle_ericksen: NodalField::from_mats(&de),
        homogeneity: NodalField::from_rows(rows.iter().map(|r| r.1.clone()).collect(), grid.micro_dim()),
        reduced,
    })
}

/// Combined defects when the director rides on the ambient tangent space.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedDefects {
    pub doyle_ericksen: NodalField,
    /// ∂𝓛/∂φ^a − K_c^b γ^c_{ab}, K_c^b = ∂𝓛/∂φ̃^c φ̃^b + ∂𝓛/∂φ̃̇^c φ̃̇^b + ∂𝓛/∂F̃^c_A F̃^b_A.
    pub homogeneity: NodalField,
    pub invariance_rate: Option<NodalField>,
}

pub fn noether_constrained_check(
    model: &LagrangianModel,
    grid: &SpacetimeGrid,
    level: usize,
    flow: Option<&PolyVectorField>,
) -> Result<ConstrainedDefects> {
    let d = grid.dim();
    if grid.micro_dim() != d {
        return Err(Error::DimensionMismatch("the combined check needs a director of ambient dimension".into()));
    }
    let args = level_args(grid, level)?;
    let rows = args
        .par_iter()
        .map(|a| {
            let p = partials(model, a)?;
            let gi = ginv(&a.g)?;
            // k[(c, b)] = K_c^b
            let k = col(&p.micro) * col(&a.micro).transpose()
                + col(&p.micro_dot) * col(&a.micro_dot).transpose()
                + &p.f_micro * a.f_micro.transpose();
            let inner = &p.f * a.f.transpose() + col(&p.phi_dot) * col(&a.phi_dot).transpose() + &k;
            let de = &p.g * 2.0 - (&gi * inner).transpose();
            let gamma = crate::geometry::christoffel(&grid.ambient, &a.phi)?;
            let hom: Vec<f64> = (0..d)
                .map(|ai| {
                    let mut v = p.phi[ai];
                    for c in 0..d {
                        for b in 0..d {
                            v -= k[(c, b)] * gamma.get(&[c, ai, b]);
                        }
                    }
                    v
                })
                .collect();
            let rate = match flow {
                Some(w) => Some(invariance_rate(model, a, w, true)?),
                None => None,
            };
            Ok((de, hom, rate))
        })
        .collect::<Result<Vec<_>>>()?;
    let de: Vec<Mat> = rows.iter().map(|r| r.0.clone()).collect();
    let rate = flow.map(|_| NodalField::from_rows(rows.iter().map(|r| vec![r.2.unwrap_or(0.0)]).collect(), 1));
    Ok(ConstrainedDefects {
        doyle_ericksen: NodalField::from_mats(&de),
        homogeneity: NodalField::from_rows(rows.iter().map(|r| r.1.clone()).collect(), d),
        invariance_rate: rate,
    })
}

/// Canonical fluxes P_a^A = −∂𝓛/∂F^a_A and P̃_α^A = −∂𝓛/∂F̃^α_A per node.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalFlux {
    pub flux: Vec<Mat>,
    pub micro_flux: Vec<Mat>,
}

pub fn canonical_momentum_flux(model: &LagrangianModel, grid: &SpacetimeGrid, level: usize) -> Result<CanonicalFlux> {
    let args = level_args(grid, level)?;
    let parts = args.par_iter().map(|a| partials(model, a)).collect::<Result<Vec<_>>>()?;
    Ok(CanonicalFlux {
        flux: parts.iter().map(|p| -&p.f).collect(),
        micro_flux: parts.iter().map(|p| -&p.f_micro).collect(),
    })
}

/// Energy-derived Piola stresses P^{aA}, P̃^{αA} from the canonical fluxes of a
/// split model: with 𝓛 = kinetic − ρ₀e the flux equals ρ₀∂e/∂F, so only the
/// leading index is raised.
pub fn energy_piola_from_flux(
    model: &LagrangianModel,
    grid: &SpacetimeGrid,
    level: usize,
    flux: &CanonicalFlux,
) -> Result<(Vec<Mat>, Vec<Mat>)> {
    if model.splitting.is_none() {
        return Err(Error::Unsupported("the Piola bridge needs a declared splitting".into()));
    }
    let mut piola = Vec::with_capacity(grid.len());
    let mut micro = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let a = grid.args(level, i)?;
        piola.push(ginv(&a.g)? * &flux.flux[i]);
        micro.push(match &grid.director {
            DirectorKind::FreeVector(_) => ginv(&a.g_micro)? * &flux.micro_flux[i],
            DirectorKind::TangentOfAmbient => ginv(&a.g)? * &flux.micro_flux[i],
            _ => flux.micro_flux[i].clone(),
        });
    }
    Ok((piola, micro))
}
