//! Riemannian geometry on a single coordinate chart.
//!
//! Index conventions, fixed once for the whole crate:
//!
//! * Connection coefficients carry the derivative index first:
//!   `∇_b v^a = ∂_b v^a + Γ^a_{bc} v^c`.
//! * [`curvature`] returns `R^a_{dbc}` with
//!   `(∇_b∇_c − ∇_c∇_b) v^a = R^a_{dbc} v^d` (torsion-free case), so it is
//!   antisymmetric in its last two lower indices.
//! * The second covariant derivative `w^a_{b|c}` differentiates along `b`
//!   first and then along `c`, i.e. `w^a_{b|c} = ∇_c ∇_b w^a`.
//! * With these choices the Lie derivative of a torsion-free connection reads
//!   `(𝔏_w∇)^a_{bc} = w^a_{b|c} + R^a_{bdc} w^d`. The curvature factor that
//!   multiplies `w^d` in that formula is therefore our `R^a_{bdc}`; the SCS
//!   momentum term in [`crate::covariance`] contracts against the same slots.

mod chart;
mod connection;
mod field;
mod poly;

pub use chart::{DomainFn, MetricChart, MetricFn, MetricKind, MetricSource};
pub use connection::{CoefficientFn, Connection};
pub use field::{ComponentFn, TensorField};
pub use poly::{exponents_up_to, Monomial, PolyVectorField};

use crate::error::{Error, Result};
use crate::fd;
use crate::tensor::{Mat, Tensor};

/// Levi-Civita coefficients Γ^a_{bc} of the chart metric.
pub fn christoffel(chart: &MetricChart, point: &[f64]) -> Result<Tensor> {
    let d = chart.dim();
    let g = chart.metric(point)?;
    if chart.is_euclidean() {
        return Ok(Tensor::zeros(d, 1, 2));
    }
    let ginv = g.try_inverse().ok_or_else(|| Error::SingularMetric { point: point.to_vec() })?;
    let dg = chart.metric_gradient(point)?;
    Ok(christoffel_from_jet(&ginv, &dg))
}

/// Γ^a_{bc} from g⁻¹ and ∂_c g_ab (stored as [a, b, c]).
pub fn christoffel_from_jet(ginv: &Mat, dg: &Tensor) -> Tensor {
    let d = ginv.nrows();
    let mut out = Tensor::zeros(d, 1, 2);
    for a in 0..d {
        for b in 0..d {
            for c in b..d {
                let mut s = 0.0;
                for e in 0..d {
                    s += ginv[(a, e)] * (dg.get(&[e, c, b]) + dg.get(&[e, b, c]) - dg.get(&[b, c, e]));
                }
                out.set(&[a, b, c], 0.5 * s);
                out.set(&[a, c, b], 0.5 * s);
            }
        }
    }
    out
}

/// Partial derivatives of the Levi-Civita coefficients: [a, b, c, e] is ∂_e Γ^a_{bc}.
pub fn christoffel_derivatives(chart: &MetricChart, point: &[f64]) -> Result<Tensor> {
    let d = chart.dim();
    let g = chart.metric(point)?;
    if chart.is_euclidean() {
        return Ok(Tensor::zeros(d, 1, 3));
    }
    let ginv = g.try_inverse().ok_or_else(|| Error::SingularMetric { point: point.to_vec() })?;
    let dg = chart.metric_gradient(point)?;
    let ddg = chart.metric_hessian(point)?;
    let gamma = christoffel_from_jet(&ginv, &dg);
    let mut out = Tensor::zeros(d, 1, 3);
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    let mut s = 0.0;
                    for p in 0..d {
                        let mut lowered = 0.0;
                        for q in 0..d {
                            lowered -= dg.get(&[p, q, e]) * gamma.get(&[q, b, c]);
                        }
                        let second = 0.5
                            * (ddg.get(&[p, c, b, e]) + ddg.get(&[p, b, c, e]) - ddg.get(&[b, c, p, e]));
                        s += ginv[(a, p)] * (lowered + second);
                    }
                    out.set(&[a, b, c, e], s);
                }
            }
        }
    }
    Ok(out)
}

/// Curvature R^a_{dbc} = ∂_bΓ^a_{cd} − ∂_cΓ^a_{bd} + Γ^a_{be}Γ^e_{cd} − Γ^a_{ce}Γ^e_{bd}.
pub fn curvature(conn: &Connection, point: &[f64]) -> Result<Tensor> {
    let gamma = conn.coefficients(point)?;
    let dgamma = conn.coefficient_derivatives(point)?;
    Ok(curvature_from_jet(&gamma, &dgamma))
}

pub fn curvature_from_jet(gamma: &Tensor, dgamma: &Tensor) -> Tensor {
    let n = gamma.dim();
    let mut r = Tensor::zeros(n, 1, 3);
    for a in 0..n {
        for d in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut s = dgamma.get(&[a, c, d, b]) - dgamma.get(&[a, b, d, c]);
                    for e in 0..n {
                        s += gamma.get(&[a, b, e]) * gamma.get(&[e, c, d])
                            - gamma.get(&[a, c, e]) * gamma.get(&[e, b, d]);
                    }
                    r.set(&[a, d, b, c], s);
                }
            }
        }
    }
    r
}

/// Gaussian curvature of a 2D chart, R_{1212}/det g.
pub fn gaussian_curvature(chart: &std::sync::Arc<MetricChart>, point: &[f64]) -> Result<f64> {
    if chart.dim() != 2 {
        return Err(Error::DimensionMismatch("gaussian curvature needs a 2D chart".into()));
    }
    let g = chart.metric(point)?;
    let r = curvature(&Connection::levi_civita(chart.clone()), point)?;
    let r0101: f64 = (0..2).map(|e| g[(0, e)] * r.get(&[e, 1, 0, 1])).sum();
    Ok(r0101 / g.determinant())
}

/// Adds the connection terms to coordinate partials.
///
/// `partials[k]` holds ∂_k of the components of `value`; the returned tensor has
/// valence (r, s+1) with the derivative index last.
pub fn covariant_from_partials(value: &Tensor, partials: &[Vec<f64>], gamma: &Tensor) -> Tensor {
    let d = value.dim();
    let (r, s) = value.valence();
    let mut out = Tensor::zeros(d, r, s + 1);
    let n = value.data().len();
    for flat in 0..n {
        let idx = value.multi_index(flat);
        for k in 0..d {
            let mut v = partials[k][flat];
            let mut probe = idx.clone();
            for slot in 0..r + s {
                let orig = idx[slot];
                for e in 0..d {
                    probe[slot] = e;
                    let t = value.get(&probe);
                    if slot < r {
                        v += gamma.get(&[orig, k, e]) * t;
                    } else {
                        v -= gamma.get(&[e, k, orig]) * t;
                    }
                }
                probe[slot] = orig;
            }
            let mut oi = idx.clone();
            oi.push(k);
            out.set(&oi, v);
        }
    }
    out
}

/// ∇T with the derivative index appended last.
pub fn covariant_derivative(field: &TensorField, conn: &Connection, point: &[f64]) -> Result<Tensor> {
    if field.dim() != conn.dim() {
        return Err(Error::ValenceMismatch {
            expected: format!("field in dim {}", conn.dim()),
            found: format!("field in dim {}", field.dim()),
        });
    }
    let value = field.eval(point)?;
    let gamma = conn.coefficients(point)?;
    let partials = fd::gradient(&|p: &[f64]| field.components(p), point)?;
    Ok(covariant_from_partials(&value, &partials, &gamma))
}

/// Contracts the last upper index of ∇T with the derivative index.
pub fn contract_divergence(grad: &Tensor, upper: usize) -> Result<Tensor> {
    let d = grad.dim();
    let (r, s1) = grad.valence();
    if upper == 0 || r != upper {
        return Err(Error::ValenceMismatch { expected: "≥1 upper index".into(), found: format!("({r},{})", s1 - 1) });
    }
    let mut out = Tensor::zeros(d, r - 1, s1 - 1);
    let rank = r + s1;
    for flat in 0..out.data().len() {
        let idx = out.multi_index(flat);
        let mut v = 0.0;
        for k in 0..d {
            let mut full = Vec::with_capacity(rank);
            full.extend_from_slice(&idx[..r - 1]);
            full.push(k);
            full.extend_from_slice(&idx[r - 1..]);
            full.push(k);
            v += grad.get(&full);
        }
        out.data_mut()[flat] = v;
    }
    Ok(out)
}

/// Divergence with respect to the chart metric.
pub fn divergence(field: &TensorField, chart: &std::sync::Arc<MetricChart>, point: &[f64]) -> Result<Tensor> {
    let (r, _) = field.valence();
    if r == 0 {
        return Err(Error::ValenceMismatch { expected: "≥1 upper index".into(), found: "0 upper indices".into() });
    }
    let grad = covariant_derivative(field, &Connection::levi_civita(chart.clone()), point)?;
    contract_divergence(&grad, r)
}

/// 𝔏_w g = w_{a|b} + w_{b|a}.
pub fn lie_derivative_metric(w: &TensorField, chart: &std::sync::Arc<MetricChart>, point: &[f64]) -> Result<Mat> {
    check_vector(w)?;
    let g = chart.metric(point)?;
    let grad = covariant_derivative(w, &Connection::levi_civita(chart.clone()), point)?;
    Ok(lie_metric_from_gradient(&g, &grad))
}

/// 𝔏_w g from g and the (1,1) array w^a_{|b}.
pub fn lie_metric_from_gradient(g: &Mat, grad: &Tensor) -> Mat {
    let d = g.nrows();
    let mut low = Mat::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            low[(a, b)] = (0..d).map(|c| g[(a, c)] * grad.get(&[c, b])).sum();
        }
    }
    &low + low.transpose()
}

fn check_vector(w: &TensorField) -> Result<()> {
    if w.valence() != (1, 0) {
        return Err(Error::ValenceMismatch { expected: "(1,0)".into(), found: format!("{:?}", w.valence()) });
    }
    Ok(())
}

/// Second covariant derivative w^a_{b|c} = ∇_c∇_b w^a, stored [a, b, c].
pub fn second_covariant_derivative(w: &TensorField, conn: &Connection, point: &[f64]) -> Result<Tensor> {
    check_vector(w)?;
    let value = w.components(point)?;
    let dw = fd::gradient(&|p: &[f64]| w.components(p), point)?;
    let ddw = fd::hessian(&|p: &[f64]| w.components(p), point)?;
    let gamma = conn.coefficients(point)?;
    let dgamma = conn.coefficient_derivatives(point)?;
    Ok(second_covariant_from_jet(&value, &dw, &ddw, &gamma, &dgamma))
}

/// `dw[k][a] = ∂_k w^a`, `ddw[j][k][a] = ∂_j∂_k w^a`.
pub fn second_covariant_from_jet(
    w: &[f64],
    dw: &[Vec<f64>],
    ddw: &[Vec<Vec<f64>>],
    gamma: &Tensor,
    dgamma: &Tensor,
) -> Tensor {
    let n = w.len();
    // first[a][b] = ∇_b w^a
    let first: Vec<Vec<f64>> = (0..n)
        .map(|a| (0..n).map(|b| dw[b][a] + (0..n).map(|e| gamma.get(&[a, b, e]) * w[e]).sum::<f64>()).collect())
        .collect();
    let mut out = Tensor::zeros(n, 1, 2);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                // ∂_c (∇_b w^a)
                let mut v = ddw[c][b][a];
                for e in 0..n {
                    v += dgamma.get(&[a, b, e, c]) * w[e] + gamma.get(&[a, b, e]) * dw[c][e];
                }
                for f in 0..n {
                    v += gamma.get(&[a, c, f]) * first[f][b];
                    v -= gamma.get(&[f, c, b]) * first[a][f];
                }
                out.set(&[a, b, c], v);
            }
        }
    }
    out
}

/// (𝔏_w∇)^a_{bc} = w^a_{b|c} + R^a_{bdc} w^d for a torsion-free connection.
pub fn lie_derivative_connection(
    w: &TensorField,
    conn: &Connection,
    chart: &MetricChart,
    point: &[f64],
) -> Result<Tensor> {
    check_vector(w)?;
    if !conn.torsion_free() {
        return Err(Error::Unsupported("Lie derivative of a connection with torsion".into()));
    }
    if !chart.contains(point) {
        return Err(Error::PointOutsideChart { point: point.to_vec() });
    }
    let value = w.components(point)?;
    let dw = fd::gradient(&|p: &[f64]| w.components(p), point)?;
    let ddw = fd::hessian(&|p: &[f64]| w.components(p), point)?;
    let gamma = conn.coefficients(point)?;
    let dgamma = conn.coefficient_derivatives(point)?;
    Ok(lie_connection_from_jet(&value, &dw, &ddw, &gamma, &dgamma))
}

pub fn lie_connection_from_jet(
    w: &[f64],
    dw: &[Vec<f64>],
    ddw: &[Vec<Vec<f64>>],
    gamma: &Tensor,
    dgamma: &Tensor,
) -> Tensor {
    let n = w.len();
    let mut out = second_covariant_from_jet(w, dw, ddw, gamma, dgamma);
    let r = curvature_from_jet(gamma, dgamma);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let s: f64 = (0..n).map(|d| r.get(&[a, b, d, c]) * w[d]).sum();
                out.add_at(&[a, b, c], s);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn polar_christoffels() {
        let g = christoffel(&MetricChart::polar(), &[2.0, 0.3]).unwrap();
        assert!((g.get(&[0, 1, 1]) + 2.0).abs() < 1e-9);
        assert!((g.get(&[1, 0, 1]) - 0.5).abs() < 1e-9);
        assert!((g.get(&[1, 1, 0]) - 0.5).abs() < 1e-9);
        assert!(g.get(&[0, 0, 0]).abs() < 1e-9);
    }

    #[test]
    fn sphere_gaussian_curvature() {
        let chart = Arc::new(MetricChart::sphere(1.0));
        let k = gaussian_curvature(&chart, &[std::f64::consts::FRAC_PI_3, 0.4]).unwrap();
        assert!((k - 1.0).abs() < 1e-8, "K = {k}");
    }

    #[test]
    fn outside_polar_domain() {
        assert!(matches!(
            christoffel(&MetricChart::polar(), &[-1.0, 0.0]),
            Err(Error::PointOutsideChart { .. })
        ));
    }
}
