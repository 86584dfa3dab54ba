//! Abstract syntax of the process calculus.

use std::collections::{BTreeMap, BTreeSet};

use crate::quantum::Registry;

/// The two declarable variable types.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarType {
    Nat,
    Qubit,
}

/// A process term. `Scope` with empty declaration lists is the run-time
/// marker left behind once a scope's declarations have been pushed; the
/// parser never produces it.
#[derive(Debug, Clone, PartialEq)]
pub enum ProcessTerm {
    Nil,
    End,
    Invoke(String, Vec<String>),
    Prefix(Action, Box<ProcessTerm>),
    Seq(Box<ProcessTerm>, Box<ProcessTerm>),
    Par(Box<ProcessTerm>, Box<ProcessTerm>),
    Choice(Vec<(Cond, ProcessTerm)>),
    Restrict(Box<ProcessTerm>, BTreeSet<String>),
    Scope {
        classical: Vec<String>,
        quantum: Vec<String>,
        body: Box<ProcessTerm>,
    },
}

impl ProcessTerm {
    /// True for the run-time scope-exit marker `[ : P ]`.
    pub fn is_scope_marker(&self) -> bool {
        matches!(self, ProcessTerm::Scope { classical, quantum, .. }
            if classical.is_empty() && quantum.is_empty())
    }

    pub fn scope_marker(body: ProcessTerm) -> ProcessTerm {
        ProcessTerm::Scope {
            classical: Vec::new(),
            quantum: Vec::new(),
            body: Box::new(body),
        }
    }
}

/// An action prefix. The parser emits `ApplyUnitary` for every `name[args]`
/// prefix; elaboration reclassifies it as `MeasureOnly` when the name
/// resolves to an observable.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    EmitValue(String, i64),
    EmitVar(String, String),
    EmitMeasure(String, String, Vec<String>),
    Receive(String, String),
    ApplyUnitary(String, Vec<String>),
    MeasureOnly(String, Vec<String>),
}

impl Action {
    /// The communication gate, for actions that have one.
    pub fn gate(&self) -> Option<&str> {
        match self {
            Action::EmitValue(g, _)
            | Action::EmitVar(g, _)
            | Action::EmitMeasure(g, _, _)
            | Action::Receive(g, _) => Some(g),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompOp {
    Eq,
    Ne,
    Le,
    Ge,
    Lt,
    Gt,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CondArg {
    Var(String),
    Num(i64),
}

/// A comparison between two variables or naturals.
#[derive(Debug, Clone, PartialEq)]
pub struct Cond {
    pub lhs: CondArg,
    pub op: CompOp,
    pub rhs: CondArg,
}

/// One process definition. The formal parameter lists mirror the leading
/// scope of `body` (classical first, then quantum); invocation consumes
/// formals from the front of that combined list.
#[derive(Debug, Clone, PartialEq)]
pub struct Def {
    pub classical: Vec<String>,
    pub quantum: Vec<String>,
    pub body: ProcessTerm,
}

impl Def {
    pub fn from_body(body: ProcessTerm) -> Def {
        let (classical, quantum) = match &body {
            ProcessTerm::Scope {
                classical, quantum, ..
            } => (classical.clone(), quantum.clone()),
            _ => (Vec::new(), Vec::new()),
        };
        Def {
            classical,
            quantum,
            body,
        }
    }

    pub fn arity(&self) -> usize {
        self.classical.len() + self.quantum.len()
    }
}

/// A parsed (and possibly elaborated) collection of definitions together
/// with the unitary/observable registry it was resolved against.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub defs: BTreeMap<String, Def>,
    pub registry: Registry,
    /// First suffix number available to run-time renaming; every `#n`
    /// suffix assigned or retained by elaboration is below it.
    pub fresh_base: u64,
}
