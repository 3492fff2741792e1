//! Dynamical quantum Fisher information of pure states under unitary encoding.
//!
//! Three independent routes are provided and cross-checked:
//!
//! * [`exact`]: the generator-variance and overlap finite-difference forms,
//!   plus the multi-parameter QFIM;
//! * [`correlator`]: the time-integrated symmetrized correlator of the
//!   deformation operator and the closed-time-path generating functional;
//! * [`semiclassical`]: the Wigner-ensemble variance of the parametric
//!   derivative of the classical action.
//!
//! [`models`] supplies paired quantum and classical catalog models.

pub mod classical;
pub mod config;
pub mod correlator;
pub mod error;
pub mod estimate;
pub mod exact;
pub mod linalg;
pub mod models;
pub mod record;
pub mod runner;
pub mod semiclassical;
pub mod verify;
pub mod wigner;

pub use error::{QfiError, Result};
pub use estimate::{Method, QfiEstimate};
