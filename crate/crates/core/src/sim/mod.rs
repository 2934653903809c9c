//! Truncated Fock-space simulation of finite-k models and their adiabatic
//! limits at the master-equation level.
//!
//! Scattering does not enter: with vacuum inputs the expectation dynamics
//! depend on `L` and `H` only.

mod convergence;
mod finite_k;
mod fock;
mod lindblad;

pub use convergence::{
    convergence_study, ConvergenceConfig, ConvergenceReport, KResult, DEFAULT_CUTOFF, DEFAULT_KS,
    DEFAULT_THRESHOLD, TOP_LEVEL_WARNING,
};
pub use finite_k::FiniteKModel;
pub use fock::{fock_dim, ladder, occupations, sector_indices, y_kernel_check, y_operator, YKernelReport};
pub use lindblad::{
    evolve, lindblad, min_eigenvalue, parse_time_grid, time_grid, validate_state, LindbladGenerator,
};
