//! Test oracles for the process interpreter: a dense-matrix route for
//! register operations, a naive reference interpreter, and a lockstep
//! comparator for the two transition systems.

pub mod compare;
pub mod dense;
pub mod naive;
