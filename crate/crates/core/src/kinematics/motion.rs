use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{MetricChart, PolyVectorField};
use crate::tensor::Mat;

use super::body::ReferenceBody;

/// How director values are stored and interpreted.
#[derive(Clone)]
pub enum DirectorKind {
    None,
    /// Scalar order parameter (void fraction).
    Scalar,
    /// Vector in an independent microstructure chart with metric g_M.
    FreeVector(Arc<MetricChart>),
    /// Vector in the ambient tangent space at x (SCS continua).
    TangentOfAmbient,
}

impl fmt::Debug for DirectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DirectorKind::None => write!(f, "None"),
            DirectorKind::Scalar => write!(f, "Scalar"),
            DirectorKind::FreeVector(c) => write!(f, "FreeVector({})", c.name()),
            DirectorKind::TangentOfAmbient => write!(f, "TangentOfAmbient"),
        }
    }
}

impl DirectorKind {
    pub fn dim(&self, ambient_dim: usize) -> usize {
        match self {
            DirectorKind::None => 0,
            DirectorKind::Scalar => 1,
            DirectorKind::FreeVector(c) => c.dim(),
            DirectorKind::TangentOfAmbient => ambient_dim,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            DirectorKind::None => "none",
            DirectorKind::Scalar => "scalar",
            DirectorKind::FreeVector(_) => "free-vector",
            DirectorKind::TangentOfAmbient => "tangent-of-ambient",
        }
    }
}

/// Nodal values of both maps and their rates at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub phi: Vec<f64>,
    pub phi_dot: Vec<f64>,
    pub micro: Vec<f64>,
    pub micro_dot: Vec<f64>,
}

/// Discretized deformation and director maps on up to three time levels
/// separated by `dt`; `current` marks the evaluation instant t₀.
#[derive(Debug, Clone)]
pub struct MotionState {
    pub body: Arc<ReferenceBody>,
    pub ambient: Arc<MetricChart>,
    pub director: DirectorKind,
    pub dt: f64,
    pub levels: Vec<Snapshot>,
    pub current: usize,
}

impl MotionState {
    pub fn new(
        body: Arc<ReferenceBody>,
        ambient: Arc<MetricChart>,
        director: DirectorKind,
        dt: f64,
        levels: Vec<Snapshot>,
        current: usize,
    ) -> Result<Self> {
        let d = body.dim();
        if ambient.dim() != d {
            return Err(Error::DimensionMismatch(format!("ambient dim {} vs body dim {d}", ambient.dim())));
        }
        if levels.is_empty() || current >= levels.len() || levels.len() > 3 {
            return Err(Error::MissingTimeLevel("between one and three levels with a valid current index".into()));
        }
        let n = body.len();
        let m = director.dim(d);
        for s in &levels {
            if s.phi.len() != n * d || s.phi_dot.len() != n * d || s.micro.len() != n * m || s.micro_dot.len() != n * m {
                return Err(Error::DimensionMismatch("snapshot arrays do not match node count".into()));
            }
        }
        Ok(MotionState { body, ambient, director, dt, levels, current })
    }

    pub fn dim(&self) -> usize {
        self.body.dim()
    }

    pub fn director_dim(&self) -> usize {
        self.director.dim(self.dim())
    }

    pub fn time(&self) -> f64 {
        self.levels[self.current].time
    }

    pub fn snapshot(&self) -> &Snapshot {
        &self.levels[self.current]
    }

    pub fn position(&self, node: usize) -> &[f64] {
        let d = self.dim();
        &self.snapshot().phi[node * d..(node + 1) * d]
    }

    pub fn director_value(&self, node: usize) -> &[f64] {
        let m = self.director_dim();
        &self.snapshot().micro[node * m..(node + 1) * m]
    }
}

pub type TimeField = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;

/// Closed-form motion φ(t, X) with an optional director map φ̃(t, X).
#[derive(Clone)]
pub struct AnalyticMotion {
    pub phi: TimeField,
    pub micro: Option<TimeField>,
}

impl fmt::Debug for AnalyticMotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AnalyticMotion(micro: {})", self.micro.is_some())
    }
}

fn time_derivative(f: &TimeField, t: f64, x: &[f64]) -> Vec<f64> {
    let h = crate::fd::first_step(t);
    let p2 = f(t + 2.0 * h, x);
    let p1 = f(t + h, x);
    let m1 = f(t - h, x);
    let m2 = f(t - 2.0 * h, x);
    (0..p1.len()).map(|i| (8.0 * (p1[i] - m1[i]) - (p2[i] - m2[i])) / (12.0 * h)).collect()
}

impl AnalyticMotion {
    pub fn new(phi: TimeField) -> Self {
        AnalyticMotion { phi, micro: None }
    }

    pub fn with_micro(mut self, micro: TimeField) -> Self {
        self.micro = Some(micro);
        self
    }

    pub fn identity() -> Self {
        AnalyticMotion::new(Arc::new(|_, x| x.to_vec()))
    }

    /// φ(X) = diag(factors) X.
    pub fn stretch(factors: Vec<f64>) -> Self {
        AnalyticMotion::new(Arc::new(move |_, x| x.iter().zip(&factors).map(|(a, b)| a * b).collect()))
    }

    /// φ(X) = X + γ X^j e_i.
    pub fn shear(gamma: f64, i: usize, j: usize) -> Self {
        AnalyticMotion::new(Arc::new(move |_, x| {
            let mut y = x.to_vec();
            y[i] += gamma * x[j];
            y
        }))
    }

    /// φ(t, X) = X + t c.
    pub fn translation(c: Vec<f64>) -> Self {
        AnalyticMotion::new(Arc::new(move |t, x| x.iter().zip(&c).map(|(a, b)| a + t * b).collect()))
    }

    /// φ(t, X) = e^{Ω t} X with Ω skew.
    pub fn rigid_rotation(omega: Mat) -> Self {
        AnalyticMotion::new(Arc::new(move |t, x| {
            let r = (&omega * t).exp();
            crate::tensor::mat_vec(&r, x)
        }))
    }

    /// φ(t, X) = X + Σ_k t^k P_k(X).
    pub fn polynomial(terms: Vec<PolyVectorField>) -> Self {
        AnalyticMotion::new(Arc::new(move |t, x| {
            let mut y = x.to_vec();
            let mut tk = 1.0;
            for p in &terms {
                for (yi, v) in y.iter_mut().zip(p.eval(x)) {
                    *yi += tk * v;
                }
                tk *= t;
            }
            y
        }))
    }

    /// Samples the motion at `levels` instants around `t0` (3: t0−dt, t0, t0+dt;
    /// 2: t0, t0+dt; 1: t0). Rates come from fourth-order differences in time.
    pub fn sample(
        &self,
        body: Arc<ReferenceBody>,
        ambient: Arc<MetricChart>,
        director: DirectorKind,
        t0: f64,
        dt: f64,
        levels: usize,
    ) -> Result<MotionState> {
        let (times, current): (Vec<f64>, usize) = match levels {
            1 => (vec![t0], 0),
            2 => (vec![t0, t0 + dt], 0),
            3 => (vec![t0 - dt, t0, t0 + dt], 1),
            _ => return Err(Error::MissingTimeLevel("levels must be 1, 2 or 3".into())),
        };
        let d = body.dim();
        let m = director.dim(d);
        if m > 0 && self.micro.is_none() {
            return Err(Error::DimensionMismatch("director kind needs a micro map".into()));
        }
        let mut snaps = Vec::new();
        for &t in &times {
            let mut s = Snapshot { time: t, phi: vec![], phi_dot: vec![], micro: vec![], micro_dot: vec![] };
            for n in 0..body.len() {
                let x = body.grid.coords(n);
                let y = (self.phi)(t, &x);
                if y.len() != d {
                    return Err(Error::DimensionMismatch("motion returned wrong dimension".into()));
                }
                s.phi.extend(y);
                s.phi_dot.extend(time_derivative(&self.phi, t, &x));
                if m > 0 {
                    let mf = self.micro.as_ref().unwrap();
                    let p = mf(t, &x);
                    if p.len() != m {
                        return Err(Error::DimensionMismatch("director map returned wrong dimension".into()));
                    }
                    s.micro.extend(p);
                    s.micro_dot.extend(time_derivative(mf, t, &x));
                }
            }
            snaps.push(s);
        }
        MotionState::new(body, ambient, director, dt, snaps, current)
    }
}
