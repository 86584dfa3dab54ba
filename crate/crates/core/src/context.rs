//! Execution contexts: the environment stack, the qubit-name sequence with
//! its joint state vector, and the classical store — plus the probabilistic
//! composition of contexts produced by measurement.
//!
//! Contexts are immutable values; every operation returns a new context.
//! Operations that act "at" a parallel branch take a path of fork sides
//! addressing that branch's segment of the cactus stack.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::quantum::StateVector;
use crate::syntax::VarType;

/// Which operand of a parallel composition a stack branch belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    L,
    R,
}

/// The cactus environment stack. `Root` is both the absolute bottom and the
/// end of a fork branch's segment; lookups walk a branch's segment and then
/// continue below the fork.
#[derive(Debug, Clone, PartialEq)]
pub enum EnvStack {
    Root,
    Frame {
        vars: Vec<(String, VarType)>,
        rest: Box<EnvStack>,
    },
    Fork {
        left: Box<EnvStack>,
        right: Box<EnvStack>,
        rest: Box<EnvStack>,
    },
}

impl EnvStack {
    pub(crate) fn rebuild(
        &self,
        path: &[Side],
        f: &mut dyn FnMut(&EnvStack) -> Result<EnvStack>,
    ) -> Result<EnvStack> {
        match path.split_first() {
            None => f(self),
            Some((side, deeper)) => match self {
                EnvStack::Fork { left, right, rest } => Ok(match side {
                    Side::L => EnvStack::Fork {
                        left: Box::new(left.rebuild(deeper, f)?),
                        right: right.clone(),
                        rest: rest.clone(),
                    },
                    Side::R => EnvStack::Fork {
                        left: left.clone(),
                        right: Box::new(right.rebuild(deeper, f)?),
                        rest: rest.clone(),
                    },
                }),
                _ => Err(Error::Step("stack path descends through a non-fork".into())),
            },
        }
    }

    /// The sub-stack a path addresses.
    pub fn subtree(&self, path: &[Side]) -> Result<&EnvStack> {
        match path.split_first() {
            None => Ok(self),
            Some((side, deeper)) => match self {
                EnvStack::Fork { left, right, .. } => match side {
                    Side::L => left.subtree(deeper),
                    Side::R => right.subtree(deeper),
                },
                _ => Err(Error::Step("stack path descends through a non-fork".into())),
            },
        }
    }

    pub fn top_is_fork(&self, path: &[Side]) -> bool {
        matches!(self.subtree(path), Ok(EnvStack::Fork { .. }))
    }

    /// Every binding in the tree, segments above forks included.
    pub fn all_vars<'a>(&'a self, out: &mut Vec<&'a (String, VarType)>) {
        match self {
            EnvStack::Root => {}
            EnvStack::Frame { vars, rest } => {
                out.extend(vars.iter());
                rest.all_vars(out);
            }
            EnvStack::Fork { left, right, rest } => {
                left.all_vars(out);
                right.all_vars(out);
                rest.all_vars(out);
            }
        }
    }

    /// The bindings visible from the branch `path` addresses: its segment,
    /// then each enclosing fork's shared remainder.
    pub fn visible<'a>(&'a self, path: &[Side], out: &mut Vec<&'a (String, VarType)>) {
        match (path.split_first(), self) {
            (Some((side, deeper)), EnvStack::Fork { left, right, rest }) => {
                match side {
                    Side::L => left.visible(deeper, out),
                    Side::R => right.visible(deeper, out),
                }
                rest.visible(&[], out);
            }
            (Some(_), _) => {}
            (None, EnvStack::Root) => {}
            (None, EnvStack::Frame { vars, rest }) => {
                out.extend(vars.iter());
                rest.visible(&[], out);
            }
            (None, EnvStack::Fork { rest, .. }) => rest.visible(&[], out),
        }
    }
}

/// One position of the qubit sequence: a live name or a `*` left by a
/// released scope. Freed slots never return to `Named`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Slot {
    Named(String),
    Freed,
}

/// The qubit-name sequence; position 0 is the head of the register.
pub type QubitSeq = Vec<Slot>;

/// Values of classical variables.
pub type ClassicalStore = BTreeMap<String, i64>;

/// A probabilistically stable execution context.
#[derive(Debug, Clone, PartialEq)]
pub struct Context {
    pub stack: EnvStack,
    pub qseq: QubitSeq,
    pub state: StateVector,
    pub store: ClassicalStore,
    /// Next suffix for run-time freshening; starts at the program's
    /// `fresh_base`.
    pub fresh: u64,
    /// Chronological (observable, eigenvalue) record, for classifying runs.
    pub measured: Vec<(String, i64)>,
}

impl Context {
    pub fn empty(fresh_base: u64) -> Context {
        Context {
            stack: EnvStack::Root,
            qseq: Vec::new(),
            state: StateVector::scalar(),
            store: BTreeMap::new(),
            fresh: fresh_base,
            measured: Vec::new(),
        }
    }

    /// Push one declaration frame at `path`; qseq, state and store are
    /// untouched — declared qubits enter the register only on
    /// initialization.
    pub fn declare(&self, path: &[Side], classical: &[String], quantum: &[String]) -> Context {
        let vars: Vec<(String, VarType)> = classical
            .iter()
            .map(|n| (n.clone(), VarType::Nat))
            .chain(quantum.iter().map(|n| (n.clone(), VarType::Qubit)))
            .collect();
        let stack = self
            .stack
            .rebuild(path, &mut |s| {
                Ok(EnvStack::Frame { vars: vars.clone(), rest: Box::new(s.clone()) })
            })
            .expect("declare along a forked path");
        Context { stack, ..self.clone() }
    }

    /// Pop the frame at `path`, star its qubits in the sequence, and
    /// restrict the store to the variables still on the stack.
    pub fn release_scope(&self, path: &[Side]) -> Result<Context> {
        let mut released: Vec<(String, VarType)> = Vec::new();
        let stack = self.stack.rebuild(path, &mut |s| match s {
            EnvStack::Frame { vars, rest } => {
                released = vars.clone();
                Ok((**rest).clone())
            }
            _ => Err(Error::Step("scope exit without a frame to release".into())),
        })?;
        Ok(self.without(stack, &released))
    }

    /// Push an empty fork at `path` for a parallel composition.
    pub fn fork(&self, path: &[Side]) -> Context {
        let stack = self
            .stack
            .rebuild(path, &mut |s| {
                Ok(EnvStack::Fork {
                    left: Box::new(EnvStack::Root),
                    right: Box::new(EnvStack::Root),
                    rest: Box::new(s.clone()),
                })
            })
            .expect("fork along a forked path");
        Context { stack, ..self.clone() }
    }

    /// Pop the fork at `path`, starring every qubit either branch still
    /// holds and restricting the store to the remaining variables.
    pub fn join(&self, path: &[Side]) -> Result<Context> {
        let mut released: Vec<(String, VarType)> = Vec::new();
        let stack = self.stack.rebuild(path, &mut |s| match s {
            EnvStack::Fork { left, right, rest } => {
                let mut vars = Vec::new();
                left.all_vars(&mut vars);
                right.all_vars(&mut vars);
                released = vars.into_iter().cloned().collect();
                Ok((**rest).clone())
            }
            _ => Err(Error::Step("join without a fork".into())),
        })?;
        Ok(self.without(stack, &released))
    }

    /// Rebuild with `stack`, starring `released` names in qseq and keeping
    /// only still-declared variables in the store.
    fn without(&self, stack: EnvStack, released: &[(String, VarType)]) -> Context {
        let gone: BTreeSet<&str> = released.iter().map(|(n, _)| n.as_str()).collect();
        let qseq = self
            .qseq
            .iter()
            .map(|slot| match slot {
                Slot::Named(n) if gone.contains(n.as_str()) => Slot::Freed,
                other => other.clone(),
            })
            .collect();
        let mut remaining = Vec::new();
        stack.all_vars(&mut remaining);
        let keep: BTreeSet<&str> = remaining.iter().map(|(n, _)| n.as_str()).collect();
        let mut store = self.store.clone();
        store.retain(|k, _| keep.contains(k.as_str()));
        Context { stack, qseq, store, ..self.clone() }
    }

    /// The type of `name` if visible from the branch at `path`.
    pub fn visible_type(&self, path: &[Side], name: &str) -> Option<VarType> {
        let mut vars = Vec::new();
        self.stack.visible(path, &mut vars);
        vars.iter().find(|(n, _)| n == name).map(|(_, t)| *t)
    }

    pub fn set_classical(&self, name: &str, v: i64) -> Context {
        let mut store = self.store.clone();
        store.insert(name.to_string(), v);
        Context { store, ..self.clone() }
    }

    pub fn get_value(&self, name: &str) -> Option<i64> {
        self.store.get(name).copied()
    }

    /// Initialize a declared qubit: its name joins the head of the sequence
    /// and the register becomes |bit> ⊗ |ψ>.
    pub fn init_qubit(&self, name: &str, bit: u8) -> Context {
        let mut qseq = Vec::with_capacity(self.qseq.len() + 1);
        qseq.push(Slot::Named(name.to_string()));
        qseq.extend(self.qseq.iter().cloned());
        let mut state = self.state.clone();
        state.push_front(bit);
        Context { qseq, state, ..self.clone() }
    }

    pub fn qubit_position(&self, name: &str) -> Option<usize> {
        self.qseq.iter().position(|s| *s == Slot::Named(name.to_string()))
    }

    /// Register positions for each of `names`, if all are initialized.
    pub fn qubit_positions(&self, names: &[String]) -> Option<Vec<usize>> {
        names.iter().map(|n| self.qubit_position(n)).collect()
    }

    pub fn with_state(&self, state: StateVector) -> Context {
        Context { state, ..self.clone() }
    }

    pub fn record_measurement(&self, observable: &str, eigenvalue: i64) -> Context {
        let mut measured = self.measured.clone();
        measured.push((observable.to_string(), eigenvalue));
        Context { measured, ..self.clone() }
    }
}

/// A probabilistic composition of contexts; probabilities sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbContext {
    branches: Vec<(f64, Context)>,
}

impl ProbContext {
    pub fn branches(&self) -> &[(f64, Context)] {
        &self.branches
    }
}

/// Either a stable context or a probabilistic mixture awaiting resolution.
#[derive(Debug, Clone, PartialEq)]
pub enum ExecCtx {
    Stable(Context),
    Mixed(ProbContext),
}

impl ExecCtx {
    /// Normalize a weighted branch set; a single branch collapses to stable.
    pub fn mixed(mut branches: Vec<(f64, Context)>) -> ExecCtx {
        assert!(!branches.is_empty(), "probabilistic context with no branches");
        if branches.len() == 1 {
            return ExecCtx::Stable(branches.pop().unwrap().1);
        }
        let total: f64 = branches.iter().map(|(p, _)| p).sum();
        for (p, _) in branches.iter_mut() {
            *p /= total;
        }
        ExecCtx::Mixed(ProbContext { branches })
    }

    pub fn is_stable(&self) -> bool {
        matches!(self, ExecCtx::Stable(_))
    }

    pub fn stable(&self) -> Option<&Context> {
        match self {
            ExecCtx::Stable(c) => Some(c),
            ExecCtx::Mixed(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Context {
        Context::empty(1)
    }

    fn strs(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn declaration_touches_only_the_stack() {
        let c = ctx().declare(&[], &strs(&["k"]), &[]);
        assert!(matches!(&c.stack, EnvStack::Frame { vars, .. }
            if vars == &[("k".to_string(), VarType::Nat)]));
        assert!(c.store.is_empty());

        let c = ctx().declare(&[], &[], &strs(&["x", "y"]));
        assert_eq!(c.visible_type(&[], "x"), Some(VarType::Qubit));
        assert!(c.qseq.is_empty());
        assert_eq!(c.state.width(), 0);
    }

    #[test]
    fn nested_declarations_accumulate() {
        let c = ctx()
            .declare(&[], &strs(&["k"]), &[])
            .declare(&[], &[], &strs(&["x"]));
        assert_eq!(c.visible_type(&[], "k"), Some(VarType::Nat));
        assert_eq!(c.visible_type(&[], "x"), Some(VarType::Qubit));
    }

    #[test]
    fn release_stars_qubits_and_drops_store_entries() {
        let c = ctx()
            .declare(&[], &strs(&["k"]), &strs(&["x", "a"]))
            .init_qubit("x", 0)
            .set_classical("k", 3);
        let state = c.state.clone();
        let r = c.release_scope(&[]).unwrap();
        // `x` was initialized: its slot is starred but stays in place.
        assert_eq!(r.qseq, vec![Slot::Freed]);
        // `a` was never initialized: nothing to star.
        assert_eq!(r.qseq.len(), 1);
        assert!(r.store.is_empty());
        assert_eq!(r.state, state);
        assert!(matches!(r.stack, EnvStack::Root));
    }

    #[test]
    fn release_without_frame_is_an_error() {
        assert!(ctx().release_scope(&[]).is_err());
        assert!(ctx().fork(&[]).release_scope(&[]).is_err());
    }

    #[test]
    fn fork_branches_are_isolated() {
        let c = ctx().declare(&[], &strs(&["shared"]), &[]).fork(&[]);
        let c = c.declare(&[Side::L], &strs(&["mine"]), &[]);
        assert_eq!(c.visible_type(&[Side::L], "mine"), Some(VarType::Nat));
        assert_eq!(c.visible_type(&[Side::R], "mine"), None);
        assert_eq!(c.visible_type(&[Side::L], "shared"), Some(VarType::Nat));
        assert_eq!(c.visible_type(&[Side::R], "shared"), Some(VarType::Nat));
    }

    #[test]
    fn join_collects_both_branches() {
        let c = ctx()
            .declare(&[], &strs(&["keep"]), &strs(&["q"]))
            .init_qubit("q", 1)
            .set_classical("keep", 7)
            .fork(&[])
            .declare(&[Side::L], &strs(&["lk"]), &strs(&["lx"]))
            .declare(&[Side::R], &[], &strs(&["rx"]))
            .init_qubit("lx", 0)
            .init_qubit("rx", 0)
            .set_classical("lk", 1);
        let j = c.join(&[]).unwrap();
        assert_eq!(
            j.qseq,
            vec![Slot::Freed, Slot::Freed, Slot::Named("q".to_string())]
        );
        assert_eq!(j.store, BTreeMap::from([("keep".to_string(), 7)]));
        assert_eq!(j.state.width(), 3);
        assert!(matches!(j.stack, EnvStack::Frame { .. }));
    }

    #[test]
    fn join_of_empty_fork_is_identity_on_data() {
        let c = ctx().declare(&[], &strs(&["k"]), &[]).set_classical("k", 2);
        let j = c.fork(&[]).join(&[]).unwrap();
        assert_eq!(j.qseq, c.qseq);
        assert_eq!(j.store, c.store);
        assert_eq!(j.stack, c.stack);
        assert!(ctx().join(&[]).is_err());
    }

    #[test]
    fn store_updates_are_functional() {
        let a = ctx().declare(&[], &strs(&["k"]), &[]);
        let b = a.set_classical("k", 1);
        let c = b.set_classical("k", 5);
        assert_eq!(a.get_value("k"), None);
        assert_eq!(b.get_value("k"), Some(1));
        assert_eq!(c.get_value("k"), Some(5));
    }

    #[test]
    fn probabilistic_branches_normalize_and_collapse() {
        let base = ctx();
        let two = ExecCtx::mixed(vec![(0.25, base.clone()), (0.25, base.clone())]);
        let ExecCtx::Mixed(pc) = &two else { panic!("mixed") };
        let probs: Vec<f64> = pc.branches().iter().map(|(p, _)| *p).collect();
        assert_eq!(probs, vec![0.5, 0.5]);
        assert!(!two.is_stable());

        let one = ExecCtx::mixed(vec![(0.3, base.clone())]);
        assert!(one.is_stable());
    }
}
