//! State-vector simulation: matrices, built-in operations, observables,
//! qubit-front permutations, and the registry user definitions load into.

pub mod defs;
pub mod gates;
pub mod matrix;
pub mod observable;
pub mod state;

pub use defs::Registry;
pub use matrix::{validate_unitary, CMatrix, UnitaryMatrix};
pub use observable::{validate_observable, MeasurementBranch, Observable};
pub use state::{front_permutation, StateVector};

/// Tolerance for matrix validation and numeric sanity checks.
pub const TOL: f64 = 1e-9;

/// Measurement branches below this probability are dropped and the rest
/// renormalized.
pub const EPS_DROP: f64 = 1e-12;
