use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fd;
use crate::grid::RectGrid;
use crate::tensor::{Mat, Tensor};

pub type MetricFn = Arc<dyn Fn(&[f64]) -> Mat + Send + Sync>;
pub type DomainFn = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Analytic,
    GridSampled,
}

#[derive(Clone)]
pub enum MetricSource {
    Euclidean,
    /// (r, θ) with g = diag(1, r²).
    Polar,
    /// (θ, φ) with g = R² diag(1, sin²θ).
    Sphere { radius: f64 },
    Analytic { metric: MetricFn, domain: Option<DomainFn> },
    /// Row-major dim×dim blocks, one per node.
    Grid { grid: RectGrid, values: Arc<Vec<f64>> },
}

/// A single coordinate chart carrying a Riemannian metric.
#[derive(Clone)]
pub struct MetricChart {
    dim: usize,
    source: MetricSource,
    name: String,
}

impl fmt::Debug for MetricChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricChart").field("dim", &self.dim).field("name", &self.name).finish()
    }
}

impl MetricChart {
    pub fn euclidean(dim: usize) -> Self {
        MetricChart { dim, source: MetricSource::Euclidean, name: "euclidean".into() }
    }

    pub fn polar() -> Self {
        MetricChart { dim: 2, source: MetricSource::Polar, name: "polar".into() }
    }

    pub fn sphere(radius: f64) -> Self {
        MetricChart { dim: 2, source: MetricSource::Sphere { radius }, name: "sphere".into() }
    }

    pub fn analytic(dim: usize, name: &str, metric: MetricFn) -> Self {
        MetricChart { dim, source: MetricSource::Analytic { metric, domain: None }, name: name.into() }
    }

    pub fn analytic_with_domain(dim: usize, name: &str, metric: MetricFn, domain: DomainFn) -> Self {
        MetricChart {
            dim,
            source: MetricSource::Analytic { metric, domain: Some(domain) },
            name: name.into(),
        }
    }

    /// Metric sampled at grid nodes; `values` holds one row-major dim×dim block per node.
    pub fn grid_sampled(grid: RectGrid, values: Vec<f64>) -> Result<Self> {
        let d = grid.dim();
        if values.len() != grid.len() * d * d {
            return Err(Error::DimensionMismatch(format!(
                "grid metric needs {} values, got {}",
                grid.len() * d * d,
                values.len()
            )));
        }
        Ok(MetricChart {
            dim: d,
            source: MetricSource::Grid { grid, values: Arc::new(values) },
            name: "grid".into(),
        })
    }

    /// Samples another chart's metric on a grid.
    pub fn sample_on_grid(chart: &MetricChart, grid: RectGrid) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len() * chart.dim * chart.dim);
        for n in 0..grid.len() {
            let g = chart.metric(&grid.coords(n))?;
            values.extend(crate::tensor::mat_to_vec(&g));
        }
        MetricChart::grid_sampled(grid, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &MetricSource {
        &self.source
    }

    pub fn kind(&self) -> MetricKind {
        match self.source {
            MetricSource::Grid { .. } => MetricKind::GridSampled,
            _ => MetricKind::Analytic,
        }
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.source, MetricSource::Euclidean)
    }

    pub fn grid(&self) -> Option<&RectGrid> {
        match &self.source {
            MetricSource::Grid { grid, .. } => Some(grid),
            _ => None,
        }
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        if point.len() != self.dim || point.iter().any(|x| !x.is_finite()) {
            return false;
        }
        match &self.source {
            MetricSource::Euclidean => true,
            MetricSource::Polar => point[0] > 0.0,
            MetricSource::Sphere { .. } => point[0] > 0.0 && point[0] < std::f64::consts::PI,
            MetricSource::Analytic { domain, .. } => domain.as_ref().map_or(true, |d| d(point)),
            MetricSource::Grid { grid, .. } => grid.contains(point, 0.0),
        }
    }

    fn check_point(&self, point: &[f64]) -> Result<()> {
        if self.contains(point) {
            Ok(())
        } else {
            Err(Error::PointOutsideChart { point: point.to_vec() })
        }
    }

    /// Metric components without the positivity check.
    pub fn metric_raw(&self, point: &[f64]) -> Result<Mat> {
        self.check_point(point)?;
        let d = self.dim;
        Ok(match &self.source {
            MetricSource::Euclidean => Mat::identity(d, d),
            MetricSource::Polar => Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, point[0] * point[0]])),
            MetricSource::Sphere { radius } => {
                let s = point[0].sin();
                let r2 = radius * radius;
                Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![r2, r2 * s * s]))
            }
            MetricSource::Analytic { metric, .. } => {
                let g = metric(point);
                if g.nrows() != d || g.ncols() != d {
                    return Err(Error::DimensionMismatch(format!(
                        "metric callable returned {}x{}, chart dim {d}",
                        g.nrows(),
                        g.ncols()
                    )));
                }
                g
            }
            MetricSource::Grid { grid, values } => {
                let w = grid
                    .interpolation_weights(point)
                    .ok_or_else(|| Error::PointOutsideChart { point: point.to_vec() })?;
                let mut g = Mat::zeros(d, d);
                for (node, wt) in w {
                    let block = &values[node * d * d..(node + 1) * d * d];
                    for a in 0..d {
                        for b in 0..d {
                            g[(a, b)] += wt * block[a * d + b];
                        }
                    }
                }
                g
            }
        })
    }

    /// Metric components, checked symmetric and positive definite.
    pub fn metric(&self, point: &[f64]) -> Result<Mat> {
        let g = self.metric_raw(point)?;
        let scale = g.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let defect = crate::tensor::max_abs(&(&g - g.transpose()));
        if !defect.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularMetric { point: point.to_vec() });
        }
        if defect > 1e-14 * scale {
            return Err(Error::AsymmetricMetric { point: point.to_vec(), defect });
        }
        if g.clone().cholesky().is_none() {
            return Err(Error::SingularMetric { point: point.to_vec() });
        }
        Ok(g)
    }

    pub fn metric_inverse(&self, point: &[f64]) -> Result<Mat> {
        let g = self.metric(point)?;
        g.try_inverse().ok_or_else(|| Error::SingularMetric { point: point.to_vec() })
    }

    pub fn volume_density(&self, point: &[f64]) -> Result<f64> {
        Ok(self.metric(point)?.determinant().sqrt())
    }

    fn metric_vec(&self, point: &[f64]) -> Result<Vec<f64>> {
        Ok(crate::tensor::mat_to_vec(&self.metric_raw(point)?))
    }

    /// First partials: component [a, b, c] is ∂_c g_ab.
    pub fn metric_gradient(&self, point: &[f64]) -> Result<Tensor> {
        self.metric(point)?;
        let d = self.dim;
        let mut out = Tensor::zeros(d, 0, 3);
        let partials: Vec<Vec<f64>> = match &self.source {
            MetricSource::Euclidean => return Ok(out),
            MetricSource::Grid { grid, .. } => {
                if !grid.contains(point, 1.0) {
                    return Err(Error::PointOutsideChart { point: point.to_vec() });
                }
                (0..d)
                    .map(|c| {
                        let h = grid.spacing[c];
                        let mut p = point.to_vec();
                        p[c] += h;
                        let up = self.metric_vec(&p)?;
                        p[c] -= 2.0 * h;
                        let dn = self.metric_vec(&p)?;
                        Ok(up.iter().zip(&dn).map(|(u, v)| (u - v) / (2.0 * h)).collect())
                    })
                    .collect::<Result<_>>()?
            }
            _ => fd::gradient(&|p: &[f64]| self.metric_vec(p), point)?,
        };
        for c in 0..d {
            for a in 0..d {
                for b in 0..d {
                    out.set(&[a, b, c], partials[c][a * d + b]);
                }
            }
        }
        Ok(out)
    }

    /// Second partials: component [a, b, c, e] is ∂_c ∂_e g_ab.
    pub fn metric_hessian(&self, point: &[f64]) -> Result<Tensor> {
        self.metric(point)?;
        let d = self.dim;
        let mut out = Tensor::zeros(d, 0, 4);
        let hess: Vec<Vec<Vec<f64>>> = match &self.source {
            MetricSource::Euclidean => return Ok(out),
            MetricSource::Grid { grid, .. } => {
                if !grid.contains(point, 1.0) {
                    return Err(Error::PointOutsideChart { point: point.to_vec() });
                }
                let centre = self.metric_vec(point)?;
                let at = |shift: &[(usize, f64)]| {
                    let mut p = point.to_vec();
                    for &(k, s) in shift {
                        p[k] += s * grid.spacing[k];
                    }
                    self.metric_vec(&p)
                };
                let mut h = vec![vec![Vec::new(); d]; d];
                for i in 0..d {
                    let hi = grid.spacing[i];
                    let up = at(&[(i, 1.0)])?;
                    let dn = at(&[(i, -1.0)])?;
                    h[i][i] = (0..d * d).map(|k| (up[k] - 2.0 * centre[k] + dn[k]) / (hi * hi)).collect();
                    for j in 0..i {
                        let hj = grid.spacing[j];
                        let pp = at(&[(i, 1.0), (j, 1.0)])?;
                        let pm = at(&[(i, 1.0), (j, -1.0)])?;
                        let mp = at(&[(i, -1.0), (j, 1.0)])?;
                        let mm = at(&[(i, -1.0), (j, -1.0)])?;
                        let v: Vec<f64> =
                            (0..d * d).map(|k| (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * hi * hj)).collect();
                        h[i][j] = v.clone();
                        h[j][i] = v;
                    }
                }
                h
            }
            _ => fd::hessian(&|p: &[f64]| self.metric_vec(p), point)?,
        };
        for c in 0..d {
            for e in 0..d {
                for a in 0..d {
                    for b in 0..d {
                        out.set(&[a, b, c, e], hess[c][e][a * d + b]);
                    }
                }
            }
        }
        Ok(out)
    }
}
