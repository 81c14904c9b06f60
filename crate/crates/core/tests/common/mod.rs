//! Flow-pullback oracle shared by the geometry and acceptance tests.
//!
//! Everything here is closed form or plain RK4; nothing calls into the
//! library's derivative code.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_3;
use std::sync::Arc;

pub type V = Vec<f64>;
pub type M = Vec<Vec<f64>>;
pub type T3 = Vec<Vec<Vec<f64>>>;

/// Vector field with hand-derived jet: `dw[a][b] = ∂_b w^a`, `ddw[a][b][c] = ∂_b∂_c w^a`.
#[derive(Clone)]
pub struct Generator {
    pub name: &'static str,
    pub w: Arc<dyn Fn(&[f64]) -> V + Send + Sync>,
    pub dw: Arc<dyn Fn(&[f64]) -> M + Send + Sync>,
    pub ddw: Arc<dyn Fn(&[f64]) -> T3 + Send + Sync>,
}

impl Generator {
    pub fn new(
        name: &'static str,
        w: impl Fn(&[f64]) -> V + Send + Sync + 'static,
        dw: impl Fn(&[f64]) -> M + Send + Sync + 'static,
        ddw: impl Fn(&[f64]) -> T3 + Send + Sync + 'static,
    ) -> Self {
        Generator { name, w: Arc::new(w), dw: Arc::new(dw), ddw: Arc::new(ddw) }
    }

    /// w^a = c[a][0] + c[a][1] x + c[a][2] y + c[a][3] x² + c[a][4] xy + c[a][5] y².
    pub fn quadratic(c: [[f64; 6]; 2]) -> Self {
        Generator::new(
            "quadratic",
            move |x| c.iter().map(|k| k[0] + k[1] * x[0] + k[2] * x[1] + k[3] * x[0] * x[0] + k[4] * x[0] * x[1] + k[5] * x[1] * x[1]).collect(),
            move |x| c.iter().map(|k| vec![k[1] + 2.0 * k[3] * x[0] + k[4] * x[1], k[2] + k[4] * x[0] + 2.0 * k[5] * x[1]]).collect(),
            move |_| c.iter().map(|k| vec![vec![2.0 * k[3], k[4]], vec![k[4], 2.0 * k[5]]]).collect(),
        )
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Chart {
    Flat,
    Polar,
    Sphere,
}

impl Chart {
    pub fn metric(self, x: &[f64]) -> M {
        match self {
            Chart::Flat => vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            Chart::Polar => vec![vec![1.0, 0.0], vec![0.0, x[0] * x[0]]],
            Chart::Sphere => vec![vec![1.0, 0.0], vec![0.0, x[0].sin().powi(2)]],
        }
    }

    /// Γ^a_{bc} as [a][b][c].
    pub fn gamma(self, x: &[f64]) -> T3 {
        let mut g = vec![vec![vec![0.0; 2]; 2]; 2];
        match self {
            Chart::Flat => {}
            Chart::Polar => {
                g[0][1][1] = -x[0];
                g[1][0][1] = 1.0 / x[0];
                g[1][1][0] = 1.0 / x[0];
            }
            Chart::Sphere => {
                let (s, c) = x[0].sin_cos();
                g[0][1][1] = -s * c;
                g[1][0][1] = c / s;
                g[1][1][0] = c / s;
            }
        }
        g
    }

    pub fn point(self) -> V {
        match self {
            Chart::Flat => vec![0.4, -0.3],
            Chart::Polar => vec![1.5, 0.7],
            Chart::Sphere => vec![FRAC_PI_3, 0.4],
        }
    }

    pub fn library(self) -> microcontinuum::geometry::MetricChart {
        use microcontinuum::geometry::MetricChart;
        match self {
            Chart::Flat => MetricChart::euclidean(2),
            Chart::Polar => MetricChart::polar(),
            Chart::Sphere => MetricChart::sphere(1.0),
        }
    }
}

fn zeros3(n: usize) -> T3 {
    vec![vec![vec![0.0; n]; n]; n]
}

pub fn rotation() -> Generator {
    Generator::new("rotation", |x| vec![-0.7 * x[1] + 0.2, 0.7 * x[0] - 0.1], |_| vec![vec![0.0, -0.7], vec![0.7, 0.0]], |_| zeros3(2))
}

/// ∂ along the second coordinate: the angular Killing field of the polar and sphere charts.
pub fn angular() -> Generator {
    Generator::new("angular", |_| vec![0.0, 1.0], |_| vec![vec![0.0; 2]; 2], |_| zeros3(2))
}

pub fn trig() -> Generator {
    Generator::new(
        "trig",
        |x| vec![x[0] * x[0] * x[1] + 0.3 * x[1].sin(), x[0].cos() - 0.4 * x[0] * x[1] * x[1]],
        |x| {
            vec![
                vec![2.0 * x[0] * x[1], x[0] * x[0] + 0.3 * x[1].cos()],
                vec![-x[0].sin() - 0.4 * x[1] * x[1], -0.8 * x[0] * x[1]],
            ]
        },
        |x| {
            vec![
                vec![vec![2.0 * x[1], 2.0 * x[0]], vec![2.0 * x[0], -0.3 * x[1].sin()]],
                vec![vec![-x[0].cos(), -0.8 * x[1]], vec![-0.8 * x[1], -0.8 * x[0]]],
            ]
        },
    )
}

pub fn cubic() -> Generator {
    Generator::new(
        "cubic",
        |x| vec![0.5 * x[0] * x[1], x[1] * x[1] - 0.2 * x[0].powi(3)],
        |x| vec![vec![0.5 * x[1], 0.5 * x[0]], vec![-0.6 * x[0] * x[0], 2.0 * x[1]]],
        |x| vec![vec![vec![0.0, 0.5], vec![0.5, 0.0]], vec![vec![-1.2 * x[0], 0.0], vec![0.0, 2.0]]],
    )
}

/// The six chart/generator cases of the geometry suite.
pub fn cases() -> Vec<(Chart, Generator)> {
    vec![
        (Chart::Flat, rotation()),
        (Chart::Flat, trig()),
        (Chart::Polar, angular()),
        (Chart::Polar, cubic()),
        (Chart::Sphere, angular()),
        (Chart::Sphere, trig()),
    ]
}

struct Jet {
    x: V,
    j: M,
    h: T3,
}

fn rate(g: &Generator, s: &Jet) -> Jet {
    let n = s.x.len();
    let dw = (g.dw)(&s.x);
    let ddw = (g.ddw)(&s.x);
    let mut j = vec![vec![0.0; n]; n];
    let mut h = zeros3(n);
    for a in 0..n {
        for b in 0..n {
            j[a][b] = (0..n).map(|f| dw[a][f] * s.j[f][b]).sum();
            for c in 0..n {
                let mut v: f64 = (0..n).map(|f| dw[a][f] * s.h[f][b][c]).sum();
                for f in 0..n {
                    for k in 0..n {
                        v += ddw[a][f][k] * s.j[f][b] * s.j[k][c];
                    }
                }
                h[a][b][c] = v;
            }
        }
    }
    Jet { x: (g.w)(&s.x), j, h }
}

fn axpy(s: &Jet, k: &Jet, t: f64) -> Jet {
    Jet {
        x: s.x.iter().zip(&k.x).map(|(a, b)| a + t * b).collect(),
        j: s.j.iter().zip(&k.j).map(|(r, q)| r.iter().zip(q).map(|(a, b)| a + t * b).collect()).collect(),
        h: s.h
            .iter()
            .zip(&k.h)
            .map(|(p, q)| p.iter().zip(q).map(|(r, u)| r.iter().zip(u).map(|(a, b)| a + t * b).collect()).collect())
            .collect(),
    }
}

/// Flow of `g` for time `s` from `x`, with its first and second derivatives in `x` (RK4).
fn flow(g: &Generator, x: &[f64], s: f64, substeps: usize) -> Jet {
    let n = x.len();
    let mut st = Jet {
        x: x.to_vec(),
        j: (0..n).map(|a| (0..n).map(|b| if a == b { 1.0 } else { 0.0 }).collect()).collect(),
        h: zeros3(n),
    };
    let dt = s / substeps as f64;
    for _ in 0..substeps {
        let k1 = rate(g, &st);
        let k2 = rate(g, &axpy(&st, &k1, 0.5 * dt));
        let k3 = rate(g, &axpy(&st, &k2, 0.5 * dt));
        let k4 = rate(g, &axpy(&st, &k3, dt));
        let mut next = axpy(&st, &k1, dt / 6.0);
        next = axpy(&next, &k2, dt / 3.0);
        next = axpy(&next, &k3, dt / 3.0);
        st = axpy(&next, &k4, dt / 6.0);
    }
    st
}

fn inv2(m: &M) -> M {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    vec![vec![m[1][1] / det, -m[0][1] / det], vec![-m[1][0] / det, m[0][0] / det]]
}

fn pulled_metric(chart: Chart, g: &Generator, x: &[f64], s: f64) -> M {
    let f = flow(g, x, s, 8);
    let m = chart.metric(&f.x);
    let n = x.len();
    let mut out = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    out[a][b] += f.j[c][a] * m[c][d] * f.j[d][b];
                }
            }
        }
    }
    out
}

fn pulled_connection(chart: Chart, g: &Generator, x: &[f64], s: f64) -> T3 {
    let f = flow(g, x, s, 8);
    let gamma = chart.gamma(&f.x);
    let jinv = inv2(&f.j);
    let n = x.len();
    let mut out = zeros3(n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut v = 0.0;
                for e in 0..n {
                    let mut inner = f.h[e][b][c];
                    for p in 0..n {
                        for q in 0..n {
                            inner += gamma[e][p][q] * f.j[p][b] * f.j[q][c];
                        }
                    }
                    v += jinv[a][e] * inner;
                }
                out[a][b][c] = v;
            }
        }
    }
    out
}

pub const FLOW_STEP: f64 = 1e-4;

/// Central difference in s at steps h and h/2, Richardson-combined to O(h⁴).
fn rate_at_zero<T>(f: impl Fn(f64) -> Vec<f64>, shape: impl Fn(Vec<f64>) -> T) -> T {
    let d = |h: f64| -> Vec<f64> { f(h).iter().zip(f(-h)).map(|(a, b)| (a - b) / (2.0 * h)).collect() };
    let (coarse, fine) = (d(FLOW_STEP), d(FLOW_STEP / 2.0));
    shape(fine.iter().zip(coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect())
}

/// d/ds of the pulled-back metric at s = 0.
pub fn lie_metric_oracle(chart: Chart, g: &Generator, x: &[f64]) -> M {
    let n = x.len();
    rate_at_zero(|s| pulled_metric(chart, g, x, s).concat(), |v| v.chunks(n).map(|r| r.to_vec()).collect())
}

/// d/ds of the pulled-back connection coefficients at s = 0.
pub fn lie_connection_oracle(chart: Chart, g: &Generator, x: &[f64]) -> T3 {
    let n = x.len();
    rate_at_zero(
        |s| pulled_connection(chart, g, x, s).concat().concat(),
        |v| v.chunks(n * n).map(|b| b.chunks(n).map(|r| r.to_vec()).collect()).collect(),
    )
}

/// max |got − want| / max(1, max |want|); Killing cases have a zero oracle.
pub fn relative(got: impl IntoIterator<Item = f64>, want: impl IntoIterator<Item = f64>) -> f64 {
    let (mut diff, mut scale) = (0.0f64, 1.0f64);
    for (g, w) in got.into_iter().zip(want) {
        diff = diff.max((g - w).abs());
        scale = scale.max(w.abs());
    }
    diff / scale
}

/// Library-vs-oracle errors (metric, connection) for one case.
pub fn lie_errors(chart: Chart, g: &Generator) -> (f64, f64) {
    lie_errors_at(chart, g, &chart.point())
}

pub fn lie_errors_at(chart: Chart, g: &Generator, x: &[f64]) -> (f64, f64) {
    use microcontinuum::geometry::{lie_derivative_connection, lie_derivative_metric, Connection, TensorField};
    let lib_chart = Arc::new(chart.library());
    let wf = g.w.clone();
    let field = TensorField::vector(2, move |p: &[f64]| wf(p));
    let lm = lie_derivative_metric(&field, &lib_chart, x).unwrap();
    let om = lie_metric_oracle(chart, g, x);
    let em = relative((0..4).map(|k| lm[(k / 2, k % 2)]), om.iter().flatten().copied());
    let conn = Connection::levi_civita(lib_chart.clone());
    let lc = lie_derivative_connection(&field, &conn, &lib_chart, x).unwrap();
    let oc = lie_connection_oracle(chart, g, x);
    let ec = relative((0..8).map(|k| lc.get(&[k / 4, (k / 2) % 2, k % 2])), oc.iter().flatten().flatten().copied());
    (em, ec)
}
