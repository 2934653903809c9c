//! Markovian quantum feedback networks as (S, L, K) models.
//!
//! The crate reduces networks with two limit operations, instantaneous
//! feedback and adiabatic elimination of fast oscillators, and checks
//! numerically that the two commute on concrete examples.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blocks;
pub mod error;
pub mod json;
pub mod netdsl;
pub mod operator;
pub mod random;
pub mod schur;
pub mod sim;
pub mod slh;

pub use error::{Error, Result};
pub use operator::{CMat, HilbertSpace, Operator, SpaceFactor, SubspaceBasis};
