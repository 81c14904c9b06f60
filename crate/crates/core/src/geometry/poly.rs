use rand::Rng;
use serde::{Deserialize, Serialize};

use super::field::TensorField;

/// x^exponents times a coefficient vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub exponents: Vec<u32>,
    pub coefficients: Vec<f64>,
}

/// Vector field whose components are polynomials in the chart coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyVectorField {
    pub dim: usize,
    pub terms: Vec<Monomial>,
}

fn pow_derivative(x: f64, e: u32, order: u32) -> f64 {
    if order > e {
        return 0.0;
    }
    let mut c = 1.0;
    for k in 0..order {
        c *= (e - k) as f64;
    }
    c * x.powi((e - order) as i32)
}

/// All exponent multi-indices of total degree ≤ `degree` in `dim` variables.
pub fn exponents_up_to(dim: usize, degree: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; dim];
    fn rec(k: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur[k] = e;
            rec(k + 1, left - e, cur, out);
        }
        cur[k] = 0;
    }
    rec(0, degree, &mut cur, &mut out);
    out.sort_by_key(|e| (e.iter().sum::<u32>(), std::cmp::Reverse(e.clone())));
    out
}

impl PolyVectorField {
    pub fn zero(dim: usize) -> Self {
        PolyVectorField { dim, terms: Vec::new() }
    }

    /// w = A x + c.
    pub fn affine(a: &[Vec<f64>], c: &[f64]) -> Self {
        let dim = c.len();
        let mut terms = vec![Monomial { exponents: vec![0; dim], coefficients: c.to_vec() }];
        for j in 0..dim {
            let mut e = vec![0; dim];
            e[j] = 1;
            terms.push(Monomial { exponents: e, coefficients: (0..dim).map(|i| a[i][j]).collect() });
        }
        PolyVectorField { dim, terms }
    }

    /// Random coefficients in [-scale, scale] for every monomial of degree ≤ `degree`.
    pub fn random<R: Rng>(dim: usize, degree: u32, scale: f64, rng: &mut R) -> Self {
        let terms = exponents_up_to(dim, degree)
            .into_iter()
            .map(|exponents| Monomial {
                exponents,
                coefficients: (0..dim).map(|_| rng.random_range(-scale..scale)).collect(),
            })
            .collect();
        PolyVectorField { dim, terms }
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.exponents.iter().sum()).max().unwrap_or(0)
    }

    fn monomial_value(exps: &[u32], x: &[f64], orders: &[u32]) -> f64 {
        exps.iter().zip(x).zip(orders).map(|((&e, &xi), &o)| pow_derivative(xi, e, o)).product()
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let zero = vec![0u32; self.dim];
        let mut out = vec![0.0; self.dim];
        for t in &self.terms {
            let m = Self::monomial_value(&t.exponents, x, &zero);
            for (o, c) in out.iter_mut().zip(&t.coefficients) {
                *o += c * m;
            }
        }
        out
    }

    /// out[a][b] = ∂_b w^a.
    pub fn jacobian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let d = self.dim;
        let mut out = vec![vec![0.0; d]; d];
        for b in 0..d {
            let mut ord = vec![0u32; d];
            ord[b] = 1;
            for t in &self.terms {
                let m = Self::monomial_value(&t.exponents, x, &ord);
                for a in 0..d {
                    out[a][b] += t.coefficients[a] * m;
                }
            }
        }
        out
    }

    /// out[a][b][c] = ∂_b ∂_c w^a.
    pub fn hessian(&self, x: &[f64]) -> Vec<Vec<Vec<f64>>> {
        let d = self.dim;
        let mut out = vec![vec![vec![0.0; d]; d]; d];
        for b in 0..d {
            for c in 0..d {
                let mut ord = vec![0u32; d];
                ord[b] += 1;
                ord[c] += 1;
                for t in &self.terms {
                    let m = Self::monomial_value(&t.exponents, x, &ord);
                    for a in 0..d {
                        out[a][b][c] += t.coefficients[a] * m;
                    }
                }
            }
        }
        out
    }

    pub fn to_field(&self) -> TensorField {
        let p = self.clone();
        TensorField::vector(self.dim, move |x| p.eval(x))
    }
}
