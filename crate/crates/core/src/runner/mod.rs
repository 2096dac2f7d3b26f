//! Configuration, time loop, presets and batch studies behind the CLI.

pub mod config;
pub mod converge;
pub mod output;
pub mod presets;
pub mod sim;
pub mod sweep;

pub use config::{InitialCondition, Model, PhiRule, Profile, RunConfig};
pub use converge::{converge, ConvergenceRow};
pub use presets::{preset, PRESETS};
pub use sim::{run_config, RunSummary, Simulation, Termination};
pub use sweep::{sweep, SweepCell, SweepSpec};
