//! Finite-difference stencils for analytic (callable) fields.
//!
//! First derivatives use the five-point fourth-order central stencil with
//! `h = 1e-5 (1 + |x|)`. Second derivatives use a wider step,
//! `h = 1e-3 (1 + |x|)`, because the 1/h² round-off amplification would
//! otherwise swamp the 1e-8 curvature tolerances.

pub const FIRST_STEP: f64 = 1e-5;
pub const SECOND_STEP: f64 = 1e-3;

pub fn first_step(x: f64) -> f64 {
    FIRST_STEP * (1.0 + x.abs())
}

pub fn second_step(x: f64) -> f64 {
    SECOND_STEP * (1.0 + x.abs())
}

fn shifted(point: &[f64], axis: usize, delta: f64) -> Vec<f64> {
    let mut p = point.to_vec();
    p[axis] += delta;
    p
}

fn combine(terms: &[(f64, &[f64])], scale: f64) -> Vec<f64> {
    let n = terms[0].1.len();
    let mut out = vec![0.0; n];
    for (w, v) in terms {
        for i in 0..n {
            out[i] += w * v[i];
        }
    }
    out.iter_mut().for_each(|v| *v *= scale);
    out
}

/// ∂f/∂x^axis, fourth order.
pub fn partial<F, E>(f: &F, point: &[f64], axis: usize) -> Result<Vec<f64>, E>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, E>,
{
    let h = first_step(point[axis]);
    partial_with_step(f, point, axis, h)
}

pub fn partial_with_step<F, E>(f: &F, point: &[f64], axis: usize, h: f64) -> Result<Vec<f64>, E>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, E>,
{
    let p2 = f(&shifted(point, axis, 2.0 * h))?;
    let p1 = f(&shifted(point, axis, h))?;
    let m1 = f(&shifted(point, axis, -h))?;
    let m2 = f(&shifted(point, axis, -2.0 * h))?;
    let s = 1.0 / (12.0 * h);
    Ok((0..p1.len()).map(|i| (8.0 * (p1[i] - m1[i]) - (p2[i] - m2[i])) * s).collect())
}

/// All first partials; `out[k]` is ∂f/∂x^k.
pub fn gradient<F, E>(f: &F, point: &[f64]) -> Result<Vec<Vec<f64>>, E>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, E>,
{
    (0..point.len()).map(|k| partial(f, point, k)).collect()
}

/// All second partials; `out[i][j]` is ∂²f/∂x^i∂x^j (symmetric).
pub fn hessian<F, E>(f: &F, point: &[f64]) -> Result<Vec<Vec<Vec<f64>>>, E>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, E>,
{
    let n = point.len();
    let centre = f(point)?;
    let mut out = vec![vec![Vec::new(); n]; n];
    for i in 0..n {
        let h = second_step(point[i]);
        let p2 = f(&shifted(point, i, 2.0 * h))?;
        let p1 = f(&shifted(point, i, h))?;
        let m1 = f(&shifted(point, i, -h))?;
        let m2 = f(&shifted(point, i, -2.0 * h))?;
        out[i][i] = combine(
            &[(-1.0, &p2), (16.0, &p1), (-30.0, &centre), (16.0, &m1), (-1.0, &m2)],
            1.0 / (12.0 * h * h),
        );
        for j in 0..i {
            let hj = second_step(point[j]);
            let inner = |q: &[f64]| partial_with_step(f, q, j, hj);
            let mixed = partial_with_step(&inner, point, i, h)?;
            out[i][j] = mixed.clone();
            out[j][i] = mixed;
        }
    }
    Ok(out)
}

/// Fourth-order derivative of a scalar function of one variable.
pub fn derivative_scalar(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (8.0 * (f(x + h) - f(x - h)) - (f(x + 2.0 * h) - f(x - 2.0 * h))) / (12.0 * h)
}
