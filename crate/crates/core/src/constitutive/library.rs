//! Built-in energy densities, each with a hand-derived metric derivative used
//! as a test oracle.

use std::sync::Arc;

use crate::geometry::MetricChart;
use crate::tensor::{contract2, inverse, Mat, Tensor};

use super::model::{EnergyArgs, EnergyModel, MetricSlot, Signature};

/// b = F G⁻¹ Fᵀ, so that tr_G C = g : b.
fn left_cauchy_green(f: &Mat, big_g: &Mat) -> Mat {
    let ginv = inverse(big_g).unwrap_or_else(|| Mat::from_element(big_g.nrows(), big_g.ncols(), f64::NAN));
    f * ginv * f.transpose()
}

fn macro_terms(mu: f64, lambda: f64, f: &Mat, big_g: &Mat, g: &Mat) -> (f64, f64, Mat) {
    let b = left_cauchy_green(f, big_g);
    let tr = contract2(g, &b) - f.ncols() as f64;
    (0.5 * mu * tr + 0.25 * lambda * tr * tr, tr, b)
}

/// e = μ/2 (tr C − n) + λ/4 (tr C − n)² + κ/2 (tr C̃ − n) + c (tr C − n)(tr C̃ − n)
///
/// with C = Fᵀ g F, C̃ = F̃ᵀ g̃ F̃ and traces taken with G.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticFree {
    pub mu: f64,
    pub lambda: f64,
    pub kappa_m: f64,
    pub coupling: f64,
}

impl QuadraticFree {
    fn micro_terms(&self, args: &EnergyArgs) -> Option<(f64, Mat)> {
        let (ft, gm) = (args.f_micro.as_ref()?, args.g_micro.as_ref()?);
        let bt = left_cauchy_green(ft, &args.big_g);
        Some((contract2(gm, &bt) - ft.ncols() as f64, bt))
    }
}

impl EnergyModel for QuadraticFree {
    fn name(&self) -> &str {
        "quadratic_free"
    }

    fn signature(&self) -> Signature {
        Signature::Free
    }

    fn evaluate(&self, args: &EnergyArgs) -> f64 {
        let (e, tr, _) = macro_terms(self.mu, self.lambda, &args.f, &args.big_g, &args.g);
        match self.micro_terms(args) {
            Some((trm, _)) => e + 0.5 * self.kappa_m * trm + self.coupling * tr * trm,
            None => e,
        }
    }

    fn analytic_metric_derivative(&self, args: &EnergyArgs, slot: MetricSlot) -> Option<Mat> {
        let (_, tr, b) = macro_terms(self.mu, self.lambda, &args.f, &args.big_g, &args.g);
        let micro = self.micro_terms(args);
        match slot {
            MetricSlot::Spatial => {
                let trm = micro.map(|m| m.0).unwrap_or(0.0);
                Some(b * (0.5 * self.mu + 0.5 * self.lambda * tr + self.coupling * trm))
            }
            MetricSlot::Micro => {
                let (_, bt) = micro?;
                Some(bt * (0.5 * self.kappa_m + self.coupling * tr))
            }
            _ => None,
        }
    }
}

pub type ConnectionCoefficientFn = Arc<dyn Fn(&[f64]) -> Tensor + Send + Sync>;

/// e = μ/2 (tr C − n) + λ/4 (tr C − n)² + K_a^{bc}(x) Γ^a_{bc}
///
/// K is stored in the same [a, b, c] layout as Γ.
#[derive(Clone)]
pub struct ScsLinear {
    pub mu: f64,
    pub lambda: f64,
    pub k: ConnectionCoefficientFn,
}

impl ScsLinear {
    /// Chooses K = (σ̃ ⊗ p)/ρ so that ρ ∂e/∂∇ = σ̃ ⊗ p, where
    /// (σ̃ ⊗ p)_a^{bc} = g_{ae} σ̃^{ec} p^b.
    pub fn from_micro_stress(
        mu: f64,
        lambda: f64,
        ambient: Arc<MetricChart>,
        sigma_tilde: Arc<dyn Fn(&[f64]) -> Mat + Send + Sync>,
        director: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
        rho: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    ) -> Self {
        let k = move |x: &[f64]| -> Tensor {
            let d = x.len();
            let g = ambient.metric_raw(x).unwrap_or_else(|_| Mat::from_element(d, d, f64::NAN));
            let s = sigma_tilde(x);
            let p = director(x);
            let r = rho(x);
            let mut t = Tensor::zeros(d, 1, 2);
            for a in 0..d {
                for b in 0..d {
                    for c in 0..d {
                        let v: f64 = (0..d).map(|e| g[(a, e)] * s[(e, c)]).sum::<f64>() * p[b] / r;
                        t.set(&[a, b, c], v);
                    }
                }
            }
            t
        };
        ScsLinear { mu, lambda, k: Arc::new(k) }
    }
}

impl EnergyModel for ScsLinear {
    fn name(&self) -> &str {
        "scs_linear"
    }

    fn signature(&self) -> Signature {
        Signature::Scs
    }

    fn evaluate(&self, args: &EnergyArgs) -> f64 {
        let (e, _, _) = macro_terms(self.mu, self.lambda, &args.f, &args.big_g, &args.g);
        match &args.gamma {
            Some(gamma) => {
                let k = (self.k)(&args.x);
                e + k.data().iter().zip(gamma.data()).map(|(a, b)| a * b).sum::<f64>()
            }
            None => e,
        }
    }

    fn analytic_metric_derivative(&self, args: &EnergyArgs, slot: MetricSlot) -> Option<Mat> {
        if slot != MetricSlot::Spatial {
            return None;
        }
        let (_, tr, b) = macro_terms(self.mu, self.lambda, &args.f, &args.big_g, &args.g);
        Some(b * (0.5 * self.mu + 0.5 * self.lambda * tr))
    }

    fn analytic_connection_derivative(&self, args: &EnergyArgs) -> Option<Tensor> {
        Some((self.k)(&args.x))
    }
}

/// Solid with voids. Energy per reference volume
///
/// W = c_ν (ν − ν_ref)² + α/2 g^{ab}(Tν)_a(Tν)_b + μ/2 (tr C − n) + λ/4 (tr C − n)²
///
/// and e = W / ρ₀_ref per unit mass.
#[derive(Debug, Clone, PartialEq)]
pub struct VoidsQuadratic {
    pub c_nu: f64,
    pub nu_ref: f64,
    pub alpha: f64,
    pub mu: f64,
    pub lambda: f64,
    pub rho0_ref: f64,
}

impl VoidsQuadratic {
    pub fn reference_energy(&self, args: &EnergyArgs) -> f64 {
        let (e, _, _) = macro_terms(self.mu, self.lambda, &args.f, &args.big_g, &args.g);
        let nu = args.p.first().copied().unwrap_or(self.nu_ref);
        let grad = match &args.grad_nu {
            Some(t) => match inverse(&args.g) {
                Some(ginv) => crate::tensor::inner(&ginv, t, t),
                None => f64::NAN,
            },
            None => 0.0,
        };
        self.c_nu * (nu - self.nu_ref).powi(2) + 0.5 * self.alpha * grad + e
    }
}

impl EnergyModel for VoidsQuadratic {
    fn name(&self) -> &str {
        "voids_quadratic"
    }

    fn signature(&self) -> Signature {
        Signature::Voids
    }

    fn evaluate(&self, args: &EnergyArgs) -> f64 {
        self.reference_energy(args) / self.rho0_ref
    }

    fn analytic_metric_derivative(&self, args: &EnergyArgs, slot: MetricSlot) -> Option<Mat> {
        if slot != MetricSlot::Spatial {
            return None;
        }
        let (_, tr, b) = macro_terms(self.mu, self.lambda, &args.f, &args.big_g, &args.g);
        let mut out = b * (0.5 * self.mu + 0.5 * self.lambda * tr);
        if let Some(t) = &args.grad_nu {
            let ginv = inverse(&args.g)?;
            let up = crate::tensor::mat_vec(&ginv, t);
            let n = up.len();
            for a in 0..n {
                for c in 0..n {
                    out[(a, c)] -= 0.5 * self.alpha * up[a] * up[c];
                }
            }
        }
        Some(out / self.rho0_ref)
    }
}

/// One constituent of a two-constituent mixture:
///
/// e_i = μ/2 (tr ⁱC − n) + λ/4 (tr ⁱC − n)² + c tr(ˢg⁻¹ ᵗg)
///
/// where ⁱC uses the constituent's own F, G and g. Slot 0 is ¹g, slot 1 is ²g.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureConstituent {
    pub mu: f64,
    pub lambda: f64,
    pub coupling: f64,
    pub own: usize,
    pub coupling_slots: (usize, usize),
}

impl MixtureConstituent {
    fn metric<'a>(args: &'a EnergyArgs, slot: usize) -> Option<&'a Mat> {
        if slot == 0 {
            Some(&args.g)
        } else {
            args.g2.as_ref()
        }
    }

    fn kinematics<'a>(&self, args: &'a EnergyArgs) -> Option<(&'a Mat, &'a Mat, &'a Mat)> {
        if self.own == 0 {
            Some((&args.f, &args.big_g, &args.g))
        } else {
            Some((args.f2.as_ref()?, args.big_g2.as_ref()?, args.g2.as_ref()?))
        }
    }

    /// The same constituent with constituent labels 1 ↔ 2 exchanged.
    pub fn relabeled(&self) -> Self {
        MixtureConstituent {
            own: 1 - self.own,
            coupling_slots: (1 - self.coupling_slots.0, 1 - self.coupling_slots.1),
            ..self.clone()
        }
    }
}

impl EnergyModel for MixtureConstituent {
    fn name(&self) -> &str {
        "mixture_quadratic"
    }

    fn signature(&self) -> Signature {
        Signature::Mixture
    }

    fn evaluate(&self, args: &EnergyArgs) -> f64 {
        let Some((f, big_g, g)) = self.kinematics(args) else { return f64::NAN };
        let (e, _, _) = macro_terms(self.mu, self.lambda, f, big_g, g);
        if self.coupling == 0.0 {
            return e;
        }
        match (Self::metric(args, self.coupling_slots.0), Self::metric(args, self.coupling_slots.1)) {
            (Some(a), Some(b)) => match inverse(a) {
                Some(ainv) => e + self.coupling * (ainv * b).trace(),
                None => f64::NAN,
            },
            _ => f64::NAN,
        }
    }

    fn analytic_metric_derivative(&self, args: &EnergyArgs, slot: MetricSlot) -> Option<Mat> {
        let idx = match slot {
            MetricSlot::First => 0,
            MetricSlot::Second => 1,
            _ => return None,
        };
        let (f, big_g, g) = self.kinematics(args)?;
        let n = g.nrows();
        let mut out = Mat::zeros(n, n);
        if idx == self.own {
            let (_, tr, b) = macro_terms(self.mu, self.lambda, f, big_g, g);
            out += b * (0.5 * self.mu + 0.5 * self.lambda * tr);
        }
        if self.coupling != 0.0 {
            let a = Self::metric(args, self.coupling_slots.0)?;
            let bm = Self::metric(args, self.coupling_slots.1)?;
            let ainv = inverse(a)?;
            if idx == self.coupling_slots.0 {
                out -= &ainv * bm * &ainv * self.coupling;
            }
            if idx == self.coupling_slots.1 {
                out += ainv * self.coupling;
            }
        }
        Some(out)
    }
}

/// Sum of two energy densities sharing one signature (e₁ + e₂ for mixtures).
#[derive(Clone)]
pub struct SumModel {
    pub first: Arc<dyn EnergyModel>,
    pub second: Arc<dyn EnergyModel>,
}

impl EnergyModel for SumModel {
    fn name(&self) -> &str {
        "sum"
    }

    fn signature(&self) -> Signature {
        self.first.signature()
    }

    fn evaluate(&self, args: &EnergyArgs) -> f64 {
        self.first.evaluate(args) + self.second.evaluate(args)
    }

    fn analytic_metric_derivative(&self, args: &EnergyArgs, slot: MetricSlot) -> Option<Mat> {
        Some(self.first.analytic_metric_derivative(args, slot)? + self.second.analytic_metric_derivative(args, slot)?)
    }
}
