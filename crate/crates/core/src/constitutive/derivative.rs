use crate::error::{Error, Result};
use crate::tensor::{Mat, Tensor};

use super::model::{check_slot, EnergyArgs, EnergyModel, MetricSlot, Signature};

/// Relative perturbation size for metric and connection slots.
pub const PERTURBATION: f64 = 1e-6;

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteEnergy)
    }
}

fn central<F>(eval: F, eps: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    Ok((eval(eps)? - eval(-eps)?) / (2.0 * eps))
}

/// Central difference with one Richardson step when the ε and 2ε estimates
/// disagree beyond round-off.
pub(crate) fn central_richardson<F>(eval: F, eps: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let d1 = central(&eval, eps)?;
    let d2 = central(&eval, 2.0 * eps)?;
    if (d1 - d2).abs() > 1e-9 * (1.0 + d1.abs()) {
        Ok((4.0 * d1 - d2) / 3.0)
    } else {
        Ok(d1)
    }
}

/// ∂e/∂g_{ab} for the requested metric slot.
///
/// Entry (a, b) and (b, a) are perturbed together by ε = 1e-6(1 + |g_ab|); the
/// off-diagonal quotient is halved so the result is the symmetric gradient.
pub fn metric_derivative(model: &dyn EnergyModel, args: &EnergyArgs, slot: MetricSlot) -> Result<Mat> {
    check_slot(model, slot)?;
    let base = args
        .metric(slot)
        .ok_or_else(|| Error::SlotNotInSignature { slot: slot.name().into(), signature: "arguments".into() })?
        .clone();
    finite(model.evaluate(args))?;
    let n = base.nrows();
    let mut out = Mat::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let eps = PERTURBATION * (1.0 + base[(a, b)].abs());
            let eval = |delta: f64| -> Result<f64> {
                let mut perturbed = args.clone();
                let m = perturbed.metric_mut(slot).expect("slot checked above");
                m[(a, b)] += delta;
                if a != b {
                    m[(b, a)] += delta;
                }
                finite(model.evaluate(&perturbed))
            };
            let mut d = central_richardson(eval, eps)?;
            if a != b {
                d *= 0.5;
            }
            out[(a, b)] = d;
            out[(b, a)] = d;
        }
    }
    Ok(out)
}

/// ∂e/∂Γ^a_{bc}, each coefficient perturbed independently by ε = 1e-6.
pub fn connection_derivative(model: &dyn EnergyModel, args: &EnergyArgs) -> Result<Tensor> {
    if model.signature() != Signature::Scs {
        return Err(Error::SlotNotInSignature { slot: "connection".into(), signature: model.signature().name().into() });
    }
    let gamma = args
        .gamma
        .as_ref()
        .ok_or_else(|| Error::SlotNotInSignature { slot: "connection".into(), signature: "arguments".into() })?;
    finite(model.evaluate(args))?;
    let mut out = Tensor::zeros(gamma.dim(), 1, 2);
    for k in 0..gamma.data().len() {
        let eval = |delta: f64| -> Result<f64> {
            let mut perturbed = args.clone();
            perturbed.gamma.as_mut().expect("present").data_mut()[k] += delta;
            finite(model.evaluate(&perturbed))
        };
        out.data_mut()[k] = central_richardson(eval, PERTURBATION)?;
    }
    Ok(out)
}

/// ∂e/∂p^α at fixed metrics and gradients.
pub fn director_derivative(model: &dyn EnergyModel, args: &EnergyArgs) -> Result<Vec<f64>> {
    (0..args.p.len())
        .map(|i| {
            let eps = PERTURBATION * (1.0 + args.p[i].abs());
            central_richardson(
                |delta| {
                    let mut perturbed = args.clone();
                    perturbed.p[i] += delta;
                    finite(model.evaluate(&perturbed))
                },
                eps,
            )
        })
        .collect()
}

/// ∂e/∂(Tν)_a for a voids-signature model.
pub fn void_gradient_derivative(model: &dyn EnergyModel, args: &EnergyArgs) -> Result<Vec<f64>> {
    if model.signature() != Signature::Voids {
        return Err(Error::SlotNotInSignature { slot: "Tnu".into(), signature: model.signature().name().into() });
    }
    let tn = args
        .grad_nu
        .as_ref()
        .ok_or_else(|| Error::SlotNotInSignature { slot: "Tnu".into(), signature: "arguments".into() })?;
    (0..tn.len())
        .map(|i| {
            let eps = PERTURBATION * (1.0 + tn[i].abs());
            central_richardson(
                |delta| {
                    let mut perturbed = args.clone();
                    perturbed.grad_nu.as_mut().expect("present")[i] += delta;
                    finite(model.evaluate(&perturbed))
                },
                eps,
            )
        })
        .collect()
}
