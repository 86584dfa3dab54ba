//! Interpreter and simulator for a quantum process calculus.
//!
//! Process terms communicate over gates, declare classical and quantum
//! variables, apply unitaries, and perform projective measurements; execution
//! follows a small-step labelled transition relation in which measurement
//! produces probability-weighted contexts that are always resolved before any
//! further action. The [`explorer`] module builds execution trees, computes
//! exact outcome distributions, and samples seeded runs.

pub mod context;
pub mod error;
pub mod explorer;
pub mod quantum;
pub mod semantics;
pub mod syntax;

pub use error::{Error, Result};
