//! Population-level simulation of an autonomous Maxwell's demon: a qubit
//! and a demon memory encoded on three levels of one atom, exchanging heat
//! with a truncated cavity mode.
//!
//! The crate is organized along the protocol:
//!
//! - [`statespace`]: diagonal joint states, thermal preparation, marginals
//!   and the physical-to-logical relabeling;
//! - [`dynamics`]: read-out, adiabatic exchange, relaxation and detection;
//! - [`thermo`]: entropies, mutual informations, relative entropies, heats
//!   and the balance laws;
//! - [`experiment`]: sweeps, shot emulation and bootstrap error bars;
//! - [`cli`]: configuration, figure-data emission and the invariant suite
//!   behind the `demon` binary.

// `!(x >= 0.0)` is how NaN gets rejected alongside out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod statespace;
pub mod thermo;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
