use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub type ComponentFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A tensor field of valence (r, s) given by a component callable on a chart.
#[derive(Clone)]
pub struct TensorField {
    dim: usize,
    upper: usize,
    lower: usize,
    components: ComponentFn,
}

impl fmt::Debug for TensorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TensorField(dim={}, valence=({},{}))", self.dim, self.upper, self.lower)
    }
}

impl TensorField {
    pub fn new(dim: usize, upper: usize, lower: usize, components: ComponentFn) -> Self {
        TensorField { dim, upper, lower, components }
    }

    pub fn vector(dim: usize, f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        TensorField::new(dim, 1, 0, Arc::new(f))
    }

    pub fn scalar(dim: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        TensorField::new(dim, 0, 0, Arc::new(move |p| vec![f(p)]))
    }

    pub fn zero_vector(dim: usize) -> Self {
        TensorField::vector(dim, move |_| vec![0.0; dim])
    }

    pub fn constant(t: Tensor) -> Self {
        let (dim, (u, l)) = (t.dim(), t.valence());
        let data = t.into_data();
        TensorField::new(dim, u, l, Arc::new(move |_| data.clone()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn valence(&self) -> (usize, usize) {
        (self.upper, self.lower)
    }

    pub fn components_fn(&self) -> &ComponentFn {
        &self.components
    }

    pub fn components(&self, point: &[f64]) -> Result<Vec<f64>> {
        let v = (self.components)(point);
        let want = self.dim.pow((self.upper + self.lower) as u32);
        if v.len() != want {
            return Err(Error::ValenceMismatch {
                expected: format!("{want} components"),
                found: format!("{} components", v.len()),
            });
        }
        Ok(v)
    }

    pub fn eval(&self, point: &[f64]) -> Result<Tensor> {
        Tensor::from_vec(self.dim, self.upper, self.lower, self.components(point)?)
    }
}
