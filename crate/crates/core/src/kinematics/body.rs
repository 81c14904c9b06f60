use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::MetricChart;
use crate::grid::RectGrid;

/// Reference configuration: chart with metric G, node set, ρ₀ and j₀ per node.
#[derive(Debug, Clone)]
pub struct ReferenceBody {
    pub chart: Arc<MetricChart>,
    pub grid: RectGrid,
    pub density0: Vec<f64>,
    pub micro_inertia0: Vec<f64>,
}

impl ReferenceBody {
    pub fn new(chart: Arc<MetricChart>, grid: RectGrid, density0: Vec<f64>, micro_inertia0: Vec<f64>) -> Result<Self> {
        if chart.dim() != grid.dim() {
            return Err(Error::DimensionMismatch(format!("chart dim {} vs grid dim {}", chart.dim(), grid.dim())));
        }
        if density0.len() != grid.len() || micro_inertia0.len() != grid.len() {
            return Err(Error::DimensionMismatch("one density and inertia value per node".into()));
        }
        if density0.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(Error::NonFiniteDensity);
        }
        if micro_inertia0.iter().any(|j| !(*j >= 0.0)) {
            return Err(Error::DimensionMismatch("micro inertia j0 must be non-negative".into()));
        }
        Ok(ReferenceBody { chart, grid, density0, micro_inertia0 })
    }

    pub fn uniform(chart: Arc<MetricChart>, grid: RectGrid, rho0: f64, j0: f64) -> Result<Self> {
        let n = grid.len();
        ReferenceBody::new(chart, grid, vec![rho0; n], vec![j0; n])
    }

    /// Reference density from a callable ρ₀(X).
    pub fn with_fields(
        chart: Arc<MetricChart>,
        grid: RectGrid,
        rho0: impl Fn(&[f64]) -> f64,
        j0: impl Fn(&[f64]) -> f64,
    ) -> Result<Self> {
        let d: Vec<f64> = (0..grid.len()).map(|n| rho0(&grid.coords(n))).collect();
        let j: Vec<f64> = (0..grid.len()).map(|n| j0(&grid.coords(n))).collect();
        ReferenceBody::new(chart, grid, d, j)
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}
