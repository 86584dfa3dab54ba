//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Lexical or grammatical error, positioned in the source text.
    #[error("{line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    /// Name resolution, classification, or arity error. `name` is the
    /// offending identifier when one exists, for diagnostics.
    #[error("{message}")]
    Elaborate {
        message: String,
        name: Option<String>,
    },
    /// Error in a gate/observable definitions file.
    #[error("definitions line {line}: {message}")]
    Defs { line: usize, message: String },
    /// A matrix failed its unitarity or projector checks.
    #[error("{0}")]
    Validate(String),
    /// The transition relation was applied to an ill-formed state.
    #[error("{0}")]
    Step(String),
    /// An unrestricted emit or receive surfaced during a closed run.
    #[error("open action {label} in closed run")]
    OpenAction { label: String },
    /// An execution tree hit its depth or node limit where completeness was
    /// required.
    #[error("execution tree truncated by limits")]
    Truncated,
    /// A qubit requested as a separate state is entangled with the rest of
    /// the register.
    #[error("qubit {0} is entangled with the rest of the register")]
    NotSeparable(String),
    /// No process definition with the requested entry name.
    #[error("no process named {0}")]
    UnknownEntry(String),
}

impl Error {
    pub fn elaborate(message: impl Into<String>) -> Self {
        Error::Elaborate {
            message: message.into(),
            name: None,
        }
    }

    pub fn elaborate_at(name: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Elaborate {
            message: message.into(),
            name: Some(name.into()),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
