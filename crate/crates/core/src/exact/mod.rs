//! Exact finite-dimensional evolution and the operator-level QFI routes.

mod family;
mod generator;
mod propagate;
mod qfi;
mod state;

pub use family::{HamiltonianFamily, DIM_CAP, HERMITIAN_TOL};
pub use generator::{duhamel_generator, DeformationGenerator, QuadratureConfig, GENERATOR_HERMITIAN_TOL};
pub use propagate::{evolution_operator, propagate, propagate_with_rule, SliceRule, SLICE_TOL};
pub use qfi::{
    default_dlambda, insertion_amplitude_check, qfi_generator_variance, qfi_overlap_fd, qfim, Qfim, DLAMBDA_FLOOR,
};
pub use state::QuantumState;

pub(crate) use propagate::Evolver;
pub(crate) use qfi::elapsed_ms;
