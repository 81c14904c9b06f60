use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fd;
use crate::tensor::Tensor;

use super::chart::MetricChart;

pub type CoefficientFn = Arc<dyn Fn(&[f64]) -> Tensor + Send + Sync>;

#[derive(Clone)]
enum Kind {
    LeviCivita(Arc<MetricChart>),
    Coefficients(CoefficientFn),
}

/// An affine connection given by its coefficients Γ^a_{bc}, with the
/// derivative index first: ∇_b v^a = ∂_b v^a + Γ^a_{bc} v^c.
#[derive(Clone)]
pub struct Connection {
    dim: usize,
    kind: Kind,
    torsion_free: bool,
    metric_compatible_with: Option<Arc<MetricChart>>,
}

impl fmt::Debug for Connection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Connection")
            .field("dim", &self.dim)
            .field("levi_civita", &matches!(self.kind, Kind::LeviCivita(_)))
            .field("torsion_free", &self.torsion_free)
            .finish()
    }
}

impl Connection {
    pub fn levi_civita(chart: Arc<MetricChart>) -> Self {
        Connection {
            dim: chart.dim(),
            kind: Kind::LeviCivita(chart.clone()),
            torsion_free: true,
            metric_compatible_with: Some(chart),
        }
    }

    /// A connection from explicit coefficients. Torsionful connections are
    /// accepted for coefficient and curvature queries only.
    pub fn from_coefficients(
        dim: usize,
        coefficients: CoefficientFn,
        torsion_free: bool,
        metric_compatible_with: Option<Arc<MetricChart>>,
    ) -> Self {
        Connection { dim, kind: Kind::Coefficients(coefficients), torsion_free, metric_compatible_with }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn torsion_free(&self) -> bool {
        self.torsion_free
    }

    pub fn metric_compatible_with(&self) -> Option<&Arc<MetricChart>> {
        self.metric_compatible_with.as_ref()
    }

    pub fn is_levi_civita(&self) -> bool {
        matches!(self.kind, Kind::LeviCivita(_))
    }

    pub fn coefficients(&self, point: &[f64]) -> Result<Tensor> {
        match &self.kind {
            Kind::LeviCivita(chart) => super::christoffel(chart, point),
            Kind::Coefficients(f) => {
                if point.len() != self.dim {
                    return Err(Error::PointOutsideChart { point: point.to_vec() });
                }
                let g = f(point);
                if g.valence() != (1, 2) || g.dim() != self.dim {
                    return Err(Error::ValenceMismatch {
                        expected: format!("(1,2) in dim {}", self.dim),
                        found: format!("{:?} in dim {}", g.valence(), g.dim()),
                    });
                }
                if self.torsion_free {
                    let d = self.dim;
                    for a in 0..d {
                        for b in 0..d {
                            for c in 0..b {
                                if (g.get(&[a, b, c]) - g.get(&[a, c, b])).abs() > 1e-12 {
                                    return Err(Error::ValenceMismatch {
                                        expected: "symmetric coefficients for a torsion-free connection".into(),
                                        found: format!("asymmetry in Γ^{a}_({b},{c})"),
                                    });
                                }
                            }
                        }
                    }
                }
                Ok(g)
            }
        }
    }

    /// Component [a, b, c, d] is ∂_d Γ^a_{bc}.
    pub fn coefficient_derivatives(&self, point: &[f64]) -> Result<Tensor> {
        match &self.kind {
            Kind::LeviCivita(chart) => super::christoffel_derivatives(chart, point),
            Kind::Coefficients(_) => {
                let d = self.dim;
                let grads = fd::gradient(&|p: &[f64]| self.coefficients(p).map(Tensor::into_data), point)?;
                let mut out = Tensor::zeros(d, 1, 3);
                for (e, gr) in grads.iter().enumerate() {
                    for (k, v) in gr.iter().enumerate() {
                        let (a, b, c) = (k / (d * d), (k / d) % d, k % d);
                        out.set(&[a, b, c, e], *v);
                    }
                }
                Ok(out)
            }
        }
    }
}
