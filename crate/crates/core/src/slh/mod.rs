//! Quantum network calculus: triples, Itô matrices, series product,
//! concatenation, instantaneous feedback and adiabatic elimination.
//!
//! All operators act on a common auxiliary space `ĥ` of dimension `d`. A
//! quantity with `n` channels is an `n d × n d` (scattering) or `n d × d`
//! (coupling) block matrix whose `d × d` blocks are operators on `ĥ`.

mod commute;
mod feedback;
mod oscillator;
mod triple;

pub use commute::{
    check_commutativity, check_preconditions, BlockDiff, CommutativityReport, Preconditions, Verdict,
};
pub use feedback::{feedback_reduce, feedback_reduce_explicit, feedback_reduce_triple, Wiring};
pub use oscillator::{Elimination, OscillatorModel, ELIMINATION_KERNEL_CUTOFF};
pub use triple::{concatenate, series_product, ItoMatrix, SlhTriple, TripleResiduals};

/// Default absolute tolerance for the structural checks (unitarity, damping
/// relation, model identities).
pub const TOL: f64 = 1e-9;

/// `residual ≤ tol · (1 + scale)`, so large operators are not held to an
/// absolute bound their rounding error cannot meet.
pub(crate) fn within(residual: f64, scale: f64, tol: f64) -> bool {
    residual <= tol * (1.0 + scale)
}
