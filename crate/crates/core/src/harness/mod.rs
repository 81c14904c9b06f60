//! Scenario files, manufactured states and run reports.

mod build;
mod emit;
mod run;
mod scenario;

pub use build::{build, manufacture, st_venant, Bundle, ContinuumBundle, MixtureBundle, VariationalBundle, VoidsBundle, LEVEL_DT, T0};
pub use emit::{emit, fmt_g17, residuals_csv, timeseries_csv};
pub use run::{exit_code, run, RunReport, TimeSeries};
pub use scenario::*;
