//! Simulation and analysis of zero-range and K-exclusion processes in a
//! random environment.

pub mod cli;
pub mod dynamics;
pub mod environment;
pub mod equilibria;
pub mod error;
pub mod hydro;
pub mod oracle;
pub mod pde;
pub mod quadrature;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
