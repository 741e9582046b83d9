//! Reservoir computing with linear cellular automata over `Z_m`.
//!
//! * [`modring`]: factorization, units and subgroup helpers for `Z_m`.
//! * [`lattice`]: linear rules, periodic configurations and their dynamics.
//! * [`caprops`]: closed-form Lyapunov exponents, entropy and chaos class.
//! * [`selector`]: rule pre-selection for reservoir use.
//! * [`pipeline`]: the reservoir model and its ridge readout.
//! * [`datasets`]: benchmark series generators.
//! * [`complexity`]: bit-level inference cost.
//! * [`harness`]: sweeps, CSV output and summaries.

pub mod caprops;
pub mod complexity;
pub mod datasets;
pub mod error;
pub mod harness;
pub mod lattice;
pub mod modring;
pub mod pipeline;
pub mod rng;
pub mod selector;

pub use error::{Error, Result};
pub use lattice::{Configuration, LinearRule};
pub use modring::Modulus;
