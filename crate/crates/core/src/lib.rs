//! Helstrom-matrix analysis of time-local quantum master equations.
//!
//! The crate integrates master equations with possibly negative, time
//! dependent rates into tables of dynamical maps, and then asks three
//! questions of the resulting process:
//!
//! - Is it divisible in terms of positive or completely positive maps?
//!   ([`divisibility`])
//! - How much distinguishability of biased state pairs flows back into the
//!   system? ([`measure`])
//! - What classical jump process do the instantaneous eigenvalues of the
//!   state follow? ([`classical`])
//!
//! Operator algebra (trace norm, Jordan-Hahn split, Helstrom ensembles and
//! one-shot discrimination) lives in [`operator`]. Worked scenarios with
//! closed-form answers are in [`scenarios`], and the `helstrom-flow` binary
//! wraps all of it behind a JSON/CSV command line ([`cli`]).
//!
//! Operators are dense `nalgebra` matrices of `Complex64`. Superoperators act
//! on column-stacked operators: `vec(X)[i + j*d] = X[(i, j)]`.

#![forbid(unsafe_code)]

pub mod classical;
pub mod cli;
pub mod divisibility;
pub mod error;
pub mod generator;
pub mod measure;
pub mod operator;
pub mod propagator;
pub mod random;
pub mod scenarios;
pub mod tolerances;

pub use error::{Error, Result};
pub use generator::{BuiltinGenerator, Channel, GeneratorSpec, RateFunction};
pub use operator::{DensityMatrix, HelstromEnsemble, HermitianOperator, JordanHahnPair};
pub use propagator::{PropagatorTable, Superoperator};
pub use tolerances::Tolerances;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
