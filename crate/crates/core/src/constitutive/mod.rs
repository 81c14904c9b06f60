//! Internal-energy models and stress extraction.
//!
//! Energies are densities per unit mass; stresses carry the factor ρ. Metric
//! derivatives are symmetric gradients: for a symmetric perturbation δg,
//! δe = (∂e/∂g) : δg.

pub(crate) mod derivative;
mod library;
mod model;
mod stress;

pub use derivative::{connection_derivative, director_derivative, metric_derivative, void_gradient_derivative, PERTURBATION};
pub use library::{ConnectionCoefficientFn, MixtureConstituent, QuadraticFree, ScsLinear, SumModel, VoidsQuadratic};
pub use model::{EnergyArgs, EnergyFn, EnergyModel, FnModel, MetricSlot, Signature};
pub use stress::{
    doyle_ericksen_stress, inverse_piola_transform, micro_doyle_ericksen_stress, micro_stress_from_f0, piola_transform,
    traction, void_stress, MicroStress, StressState,
};
