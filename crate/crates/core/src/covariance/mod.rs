//! Balance-law residuals and covariance experiments.
//!
//! Residual evaluators return one value (vector, matrix) per node; boundary
//! nodes use one-sided stencils and reports take norms over interior nodes
//! or over a [`Subbody`].

mod experiments;
mod loads;
mod manufacture;
mod material;
mod ops;
mod quadrature;
mod report;
mod residuals;
mod scs;

pub use experiments::{gnr_experiment, micro_covariance_experiment, spatial_covariance_experiment, GnrOutcome};
pub use loads::{BodyLoads, FlowKind, FlowSpec};
pub use manufacture::{balancing_loads, free_regime_stresses};
pub use material::{material_covariance_conditions, material_transform_tensors, MaterialConditions, MaterialTensors};
pub use ops::{curvature_force, divergence, micro_stress_connection, vector_gradient, LeadingIndex};
pub use quadrature::Subbody;
pub use report::{BalanceReport, LawResidual, NodalField, Norms};
pub use residuals::{
    f0_sigma, micro_stress_divergence, residual_angular_free, residual_linear_momentum, residual_mass,
    residual_micro_inertia, residual_micro_linear_momentum, stress_divergence, AngularDefects,
};
pub use scs::{
    ambient_curvature, micro_momentum_tensor, micro_stress_tensor, residual_generalized_covariance,
    residual_scs_angular, residual_scs_doyle_ericksen, residual_scs_linear_momentum, scs_bracket, scs_curvature_force,
    skew_field, GeneralizedResiduals, ScsDoyleEricksen,
};
