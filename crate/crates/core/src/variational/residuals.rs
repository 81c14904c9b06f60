use rayon::prelude::*;

use crate::covariance::NodalField;
use crate::error::{Error, Result};
use crate::geometry::christoffel;
use crate::kinematics::DirectorKind;
use crate::tensor::{Mat, Tensor};

use super::{flux_partials, micro_momentum, momentum, partials, LagrangianArgs, LagrangianModel, Partials, SpacetimeGrid};

/// Midpoint-rule arguments at the centre of a space-time cell.
fn cell_args(grid: &SpacetimeGrid, k: usize, corner: &[usize]) -> Result<LagrangianArgs> {
    let g = &grid.body.grid;
    let (d, m) = (grid.dim(), grid.micro_dim());
    let (s0, s1) = (&grid.levels[k], &grid.levels[k + 1]);
    let ncorner = 1usize << d;
    let mut phi = vec![0.0; d];
    let mut phi_dot = vec![0.0; d];
    let mut micro = vec![0.0; m];
    let mut micro_dot = vec![0.0; m];
    let mut f = Mat::zeros(d, d);
    let mut f_micro = Mat::zeros(m, d);
    let wc = 1.0 / ncorner as f64;
    let wf = 2.0 / ncorner as f64;
    for bits in 0..ncorner {
        let idx: Vec<usize> = (0..d).map(|a| corner[a] + ((bits >> a) & 1)).collect();
        let n = g.flat(&idx);
        for i in 0..d {
            let (a, b) = (s0.phi[n * d + i], s1.phi[n * d + i]);
            phi[i] += wc * 0.5 * (a + b);
            phi_dot[i] += wc * (b - a) / grid.dt;
            for axis in 0..d {
                let sign = if (bits >> axis) & 1 == 1 { 1.0 } else { -1.0 };
                f[(i, axis)] += sign * wf * 0.5 * (a + b) / g.spacing[axis];
            }
        }
        for i in 0..m {
            let (a, b) = (s0.micro[n * m + i], s1.micro[n * m + i]);
            micro[i] += wc * 0.5 * (a + b);
            micro_dot[i] += wc * (b - a) / grid.dt;
            for axis in 0..d {
                let sign = if (bits >> axis) & 1 == 1 { 1.0 } else { -1.0 };
                f_micro[(i, axis)] += sign * wf * 0.5 * (a + b) / g.spacing[axis];
            }
        }
    }
    let big_x: Vec<f64> = (0..d).map(|a| g.origin[a] + (corner[a] as f64 + 0.5) * g.spacing[a]).collect();
    let (g_micro, gamma) = match &grid.director {
        DirectorKind::FreeVector(chart) => (chart.metric(&micro)?, None),
        DirectorKind::TangentOfAmbient => (Mat::zeros(0, 0), Some(christoffel(&grid.ambient, &phi)?)),
        _ => (Mat::zeros(0, 0), None),
    };
    Ok(LagrangianArgs {
        t: 0.5 * (s0.time + s1.time),
        big_g: grid.body.chart.metric(&big_x)?,
        g: grid.ambient.metric(&phi)?,
        big_x,
        phi,
        phi_dot,
        f,
        micro,
        micro_dot,
        f_micro,
        g_micro,
        gamma,
    })
}

fn cells(grid: &SpacetimeGrid) -> Vec<Vec<usize>> {
    let g = &grid.body.grid;
    (0..g.len()).map(|n| g.multi(n)).filter(|idx| idx.iter().zip(&g.counts).all(|(&i, &c)| i + 1 < c)).collect()
}

/// S = Σ dt Σ_cells vol 𝓛 at cell centres, with rates from level differences.
pub fn action(model: &LagrangianModel, grid: &SpacetimeGrid) -> Result<f64> {
    grid.check_model(model)?;
    if grid.level_count() < 2 {
        return Err(Error::MissingTimeLevel("the action needs two time levels".into()));
    }
    let g = &grid.body.grid;
    let cell_vol: f64 = g.spacing.iter().product();
    let cs = cells(grid);
    let per_level = (0..grid.level_count() - 1)
        .map(|k| {
            cs.par_iter()
                .map(|c| {
                    let a = cell_args(grid, k, c)?;
                    Ok(model.eval(&a)? * cell_vol * grid.body.chart.volume_density(&a.big_x)?)
                })
                .collect::<Result<Vec<f64>>>()
                .map(|v| v.iter().sum::<f64>())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(per_level.iter().sum::<f64>() * grid.dt)
}

/// Euler–Lagrange residuals per interior level (1..L−2). Boundary nodes hold zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct ElResiduals {
    pub levels: Vec<usize>,
    pub macro_residual: Vec<NodalField>,
    pub micro_residual: Vec<NodalField>,
    pub nodes: Vec<usize>,
}

impl ElResiduals {
    pub fn macro_linf(&self) -> f64 {
        self.macro_residual.iter().map(|f| f.linf(&self.nodes)).fold(0.0, f64::max)
    }

    pub fn micro_linf(&self) -> f64 {
        self.micro_residual.iter().map(|f| f.linf(&self.nodes)).fold(0.0, f64::max)
    }
}

/// Arguments midway between node `i` and its neighbour `j` along `axis`; the
/// gradient column along `axis` is the two-point difference.
fn half_args(grid: &SpacetimeGrid, a: &LagrangianArgs, b: &LagrangianArgs, axis: usize, h: f64) -> Result<LagrangianArgs> {
    let mid = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(x, y)| 0.5 * (x + y)).collect::<Vec<f64>>();
    let mut out = a.clone();
    out.big_x = mid(&a.big_x, &b.big_x);
    out.phi = mid(&a.phi, &b.phi);
    out.phi_dot = mid(&a.phi_dot, &b.phi_dot);
    out.micro = mid(&a.micro, &b.micro);
    out.micro_dot = mid(&a.micro_dot, &b.micro_dot);
    out.f = (&a.f + &b.f) * 0.5;
    out.f_micro = (&a.f_micro + &b.f_micro) * 0.5;
    for r in 0..a.dim() {
        out.f[(r, axis)] = (b.phi[r] - a.phi[r]) / h;
    }
    for r in 0..a.micro_dim() {
        out.f_micro[(r, axis)] = (b.micro[r] - a.micro[r]) / h;
    }
    out.big_g = grid.body.chart.metric(&out.big_x)?;
    out.g = grid.ambient.metric(&out.phi)?;
    match &grid.director {
        DirectorKind::FreeVector(chart) => out.g_micro = chart.metric(&out.micro)?,
        DirectorKind::TangentOfAmbient => out.gamma = Some(christoffel(&grid.ambient, &out.phi)?),
        _ => {}
    }
    Ok(out)
}

/// ∂_A Y^A for the macro and micro fluxes at an interior node, from fluxes at
/// the half points on either side along each axis.
fn compact_divergence(
    model: &LagrangianModel,
    grid: &SpacetimeGrid,
    level: &[LagrangianArgs],
    node: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let g = &grid.body.grid;
    let (d, m) = (grid.dim(), grid.micro_dim());
    let mut div = vec![0.0; d];
    let mut div_m = vec![0.0; m];
    for axis in 0..d {
        let h = g.spacing[axis];
        let (lo, hi) = match (g.neighbor(node, axis, -1), g.neighbor(node, axis, 1)) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => return Err(Error::BoundaryNode { node }),
        };
        let (y_hi, yt_hi) = flux_partials(model, &half_args(grid, &level[node], &level[hi], axis, h)?)?;
        let (y_lo, yt_lo) = flux_partials(model, &half_args(grid, &level[lo], &level[node], axis, h)?)?;
        for a in 0..d {
            div[a] += (y_hi[(a, axis)] - y_lo[(a, axis)]) / h;
        }
        for a in 0..m {
            div_m[a] += (yt_hi[(a, axis)] - yt_lo[(a, axis)]) / h;
        }
    }
    Ok((div, div_m))
}

/// Y_a^A|_A = ∂_A Y_a^A + Γ^A_{AB} Y_a^B − γ^c_{ab} F^b_A Y_c^A, with γ the
/// connection of the leading index and F the gradient of its base map.
fn covariant_divergence(
    div: &[f64],
    y: &Mat,
    big_gamma: &Tensor,
    gamma: Option<&Tensor>,
    base_f: &Mat,
) -> Vec<f64> {
    let (rows, d) = y.shape();
    (0..rows)
        .map(|a| {
            let mut v = div[a];
            for cap in 0..d {
                for b in 0..d {
                    v += big_gamma.get(&[cap, cap, b]) * y[(a, b)];
                }
            }
            if let Some(gm) = gamma {
                for c in 0..rows {
                    for b in 0..rows {
                        let coef = gm.get(&[c, a, b]);
                        if coef != 0.0 {
                            for cap in 0..d {
                                v -= coef * base_f[(b, cap)] * y[(c, cap)];
                            }
                        }
                    }
                }
            }
            v
        })
        .collect()
}

/// The Euler–Lagrange pair at interior nodes of levels 1..L−2.
pub fn euler_lagrange_residuals(model: &LagrangianModel, grid: &SpacetimeGrid) -> Result<ElResiduals> {
    grid.check_model(model)?;
    let nl = grid.level_count();
    if nl < 3 {
        return Err(Error::MissingTimeLevel("Euler–Lagrange residuals need three time levels".into()));
    }
    let (d, m, n) = (grid.dim(), grid.micro_dim(), grid.len());
    let nodes = grid.body.grid.interior_nodes();
    let all_args: Vec<Vec<LagrangianArgs>> =
        (0..nl).map(|k| (0..n).map(|i| grid.args(k, i)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
    let momenta: Vec<Vec<(Vec<f64>, Vec<f64>)>> = (0..nl)
        .map(|k| {
            all_args[k]
                .par_iter()
                .map(|a| Ok((momentum(model, a)?, micro_momentum(model, a)?)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut macro_residual = Vec::new();
    let mut micro_residual = Vec::new();
    for k in 1..nl - 1 {
        let parts: Vec<Partials> = all_args[k].par_iter().map(|a| partials(model, a)).collect::<Result<_>>()?;
        let rows = nodes
            .par_iter()
            .map(|&i| {
                let a = &all_args[k][i];
                let p = &parts[i];
                let big_gamma = christoffel(&grid.body.chart, &a.big_x)?;
                let gamma = christoffel(&grid.ambient, &a.phi)?;
                let rate: Vec<f64> =
                    (0..d).map(|c| (momenta[k + 1][i].0[c] - momenta[k - 1][i].0[c]) / (2.0 * grid.dt)).collect();
                let (plain, plain_m) = compact_divergence(model, grid, &all_args[k], i)?;
                let div = covariant_divergence(&plain, &p.f, &big_gamma, Some(&gamma), &a.f);
                let mut r = vec![0.0; d];
                for ai in 0..d {
                    let mut v = p.phi[ai] - rate[ai] - div[ai];
                    for b in 0..d {
                        for c in 0..d {
                            let gb = gamma.get(&[b, ai, c]);
                            if gb == 0.0 {
                                continue;
                            }
                            for cap in 0..d {
                                v -= p.f[(b, cap)] * a.f[(c, cap)] * gb;
                            }
                            for dd in 0..d {
                                v += 2.0 * p.g[(c, dd)] * a.g[(b, dd)] * gb;
                            }
                        }
                    }
                    r[ai] = v;
                }
                let mut rm = vec![0.0; m];
                if m > 0 {
                    let (mgamma, base_f) = match &grid.director {
                        DirectorKind::FreeVector(chart) => (christoffel(chart, &a.micro)?, &a.f_micro),
                        _ => (gamma.clone(), &a.f),
                    };
                    let rate: Vec<f64> =
                        (0..m).map(|c| (momenta[k + 1][i].1[c] - momenta[k - 1][i].1[c]) / (2.0 * grid.dt)).collect();
                    let div = covariant_divergence(&plain_m, &p.f_micro, &big_gamma, Some(&mgamma), base_f);
                    let free = matches!(grid.director, DirectorKind::FreeVector(_));
                    for al in 0..m {
                        let mut v = p.micro[al] - rate[al] - div[al];
                        for be in 0..m {
                            for mu in 0..m {
                                let gb = mgamma.get(&[be, al, mu]);
                                if gb == 0.0 {
                                    continue;
                                }
                                for cap in 0..d {
                                    v -= p.f_micro[(be, cap)] * a.f_micro[(mu, cap)] * gb;
                                }
                                if free {
                                    for la in 0..m {
                                        v += 2.0 * p.g_micro[(mu, la)] * a.g_micro[(be, la)] * gb;
                                    }
                                }
                            }
                        }
                        rm[al] = v;
                    }
                }
                Ok((i, r, rm))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut fm = NodalField::zeros(n, d);
        let mut fu = NodalField::zeros(n, m);
        for (i, r, rm) in rows {
            fm.at_mut(i).copy_from_slice(&r);
            if m > 0 {
                fu.at_mut(i).copy_from_slice(&rm);
            }
        }
        macro_residual.push(fm);
        micro_residual.push(fu);
    }
    Ok(ElResiduals { levels: (1..nl - 1).collect(), macro_residual, micro_residual, nodes })
}

/// Directional derivative of the discrete action against its weak form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionVariation {
    /// dS·(δφ, δφ̃) by central difference in the variation amplitude.
    pub directional: f64,
    /// Σ dt Σ w (EL·δφ + EL̃·δφ̃) over interior levels and nodes.
    pub interior: f64,
    /// Spatial flux ∮ Y·δφ N plus the temporal end terms [∂𝓛/∂φ̇·δφ].
    pub boundary: f64,
    /// directional − interior − boundary.
    pub mismatch: f64,
}

fn shifted(grid: &SpacetimeGrid, dphi: &[Vec<f64>], dmicro: &[Vec<f64>], s: f64) -> SpacetimeGrid {
    let mut out = grid.clone();
    for (k, lvl) in out.levels.iter_mut().enumerate() {
        for (v, dv) in lvl.phi.iter_mut().zip(&dphi[k]) {
            *v += s * dv;
        }
        if let Some(dm) = dmicro.get(k) {
            for (v, dv) in lvl.micro.iter_mut().zip(dm) {
                *v += s * dv;
            }
        }
    }
    out
}

/// Compares the action derivative along (δφ, δφ̃) with the residual inner
/// product and the boundary terms. `dmicro` may be empty.
pub fn variational_action_test(
    model: &LagrangianModel,
    grid: &SpacetimeGrid,
    dphi: &[Vec<f64>],
    dmicro: &[Vec<f64>],
) -> Result<ActionVariation> {
    let (d, m, n, nl) = (grid.dim(), grid.micro_dim(), grid.len(), grid.level_count());
    let bad = dphi.len() != nl
        || dphi.iter().any(|v| v.len() != n * d)
        || !(dmicro.is_empty() || (dmicro.len() == nl && dmicro.iter().all(|v| v.len() == n * m)));
    if bad {
        return Err(Error::DimensionMismatch("variation arrays do not match the grid".into()));
    }
    let scale = dphi.iter().chain(dmicro).flat_map(|v| v.iter()).fold(0.0f64, |a, v| a.max(v.abs()));
    let el = euler_lagrange_residuals(model, grid)?;
    if scale == 0.0 {
        return Ok(ActionVariation { directional: 0.0, interior: 0.0, boundary: 0.0, mismatch: 0.0 });
    }
    let eps = 1e-5 / scale;
    let directional =
        (action(model, &shifted(grid, dphi, dmicro, eps))? - action(model, &shifted(grid, dphi, dmicro, -eps))?)
            / (2.0 * eps);

    let zero_micro = vec![0.0; n * m];
    let dm = |k: usize| dmicro.get(k).unwrap_or(&zero_micro);
    let mut interior = 0.0;
    for (slot, &k) in el.levels.iter().enumerate() {
        for &i in &el.nodes {
            let w = grid.node_weight(i)?;
            let r = el.macro_residual[slot].at(i);
            let mut v: f64 = (0..d).map(|c| r[c] * dphi[k][i * d + c]).sum();
            if m > 0 {
                let rm = el.micro_residual[slot].at(i);
                v += (0..m).map(|c| rm[c] * dm(k)[i * m + c]).sum::<f64>();
            }
            interior += grid.dt * w * v;
        }
    }

    let g = &grid.body.grid;
    let mut boundary = 0.0;
    for k in 0..nl {
        let tw = if k == 0 || k + 1 == nl { 0.5 } else { 1.0 } * grid.dt;
        for i in 0..n {
            let idx = g.multi(i);
            let on_face: Vec<(usize, f64)> = (0..d)
                .filter_map(|axis| {
                    if idx[axis] == 0 {
                        Some((axis, -1.0))
                    } else if idx[axis] + 1 == g.counts[axis] {
                        Some((axis, 1.0))
                    } else {
                        None
                    }
                })
                .collect();
            if on_face.is_empty() {
                continue;
            }
            let a = grid.args(k, i)?;
            let p = partials(model, &a)?;
            let sqrt_g = grid.body.chart.volume_density(&a.big_x)?;
            for (axis, sign) in on_face {
                let mut face_w = sqrt_g;
                for (other, &j) in idx.iter().enumerate() {
                    if other != axis {
                        let edge = j == 0 || j + 1 == g.counts[other];
                        face_w *= g.spacing[other] * if edge { 0.5 } else { 1.0 };
                    }
                }
                let mut flux: f64 = (0..d).map(|c| p.f[(c, axis)] * dphi[k][i * d + c]).sum();
                if m > 0 {
                    flux += (0..m).map(|c| p.f_micro[(c, axis)] * dm(k)[i * m + c]).sum::<f64>();
                }
                boundary += tw * sign * face_w * flux;
            }
        }
    }
    for (k, sign) in [(0usize, -1.0), (nl - 1, 1.0)] {
        for i in 0..n {
            let a = grid.args(k, i)?;
            let w = grid.node_weight(i)?;
            let pm = momentum(model, &a)?;
            let mut v: f64 = (0..d).map(|c| pm[c] * dphi[k][i * d + c]).sum();
            if m > 0 {
                let pu = micro_momentum(model, &a)?;
                v += (0..m).map(|c| pu[c] * dm(k)[i * m + c]).sum::<f64>();
            }
            boundary += sign * w * v;
        }
    }
    Ok(ActionVariation { directional, interior, boundary, mismatch: directional - interior - boundary })
}
