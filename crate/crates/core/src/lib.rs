//! Light propagation, storage and transfer in atom-loaded waveguides and
//! coupled resonators.
//!
//! - [`scatter`]: transmission and reflection of a lattice of atomic sites.
//! - [`storage`]: feasibility of dark-state polariton storage.
//! - [`transfer`]: adiabatic dark-state transfer between two cells.

// `!(x > 0.0)` is how NaN inputs are rejected alongside out-of-range ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod exec;
pub mod linalg;
pub mod scatter;
pub mod storage;
pub mod transfer;
pub mod units;

pub use exec::Execution;
pub use linalg::C64;

/// Library version, recorded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
