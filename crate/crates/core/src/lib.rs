//! Numerical kernel for geometric continuum mechanics with microstructure.
//!
//! The crate evaluates kinematics of structured continua (a deformation map
//! plus a director map), energy models and their metric derivatives, and every
//! balance law obtained from covariance of the energy balance as a computable
//! residual. A harness drives scenarios, manufactured states and reports.

pub mod constitutive;
pub mod covariance;
pub mod error;
pub mod fd;
pub mod geometry;
pub mod grid;
pub mod harness;
pub mod kinematics;
pub mod mixtures;
pub mod tensor;
pub mod variational;
pub mod voids;

pub use error::{Error, Result};
