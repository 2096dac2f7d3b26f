//! Semilinear hyperbolic-parabolic chemotaxis on networks.

pub mod chemo;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod network;
pub mod runner;
pub mod scheme;
pub mod state;
pub mod steady;

pub use error::{Error, Result};
pub use state::State;
