//! Static checks and binder renaming.
//!
//! After elaboration every use of a variable is bound and well-typed,
//! operation names resolve against the registry (`name[..]` prefixes whose
//! name is an observable become [`Action::MeasureOnly`]), invocations match
//! their definitions, and any base name declared more than once program-wide
//! is made unique with a `#n` suffix. Elaborating an already-elaborated
//! program changes nothing.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::quantum::Registry;
use crate::syntax::ast::*;

struct Elab<'a> {
    counts: BTreeMap<String, usize>,
    taken: BTreeSet<String>,
    counters: BTreeMap<String, u64>,
    /// Per definition: (classical formal count, total formal count).
    sigs: BTreeMap<String, (usize, usize)>,
    registry: &'a Registry,
    env: Vec<BTreeMap<String, (String, VarType)>>,
}

impl Elab<'_> {
    fn fresh_name(&mut self, base: &str) -> String {
        loop {
            let c = self.counters.entry(base.to_string()).or_insert(0);
            *c += 1;
            let cand = format!("{base}#{c}");
            if self.taken.insert(cand.clone()) {
                return cand;
            }
        }
    }

    fn declare(&mut self, base: &str, ty: VarType) -> String {
        let renamed = if self.counts.get(base).copied().unwrap_or(0) >= 2 {
            self.fresh_name(base)
        } else {
            base.to_string()
        };
        self.env
            .last_mut()
            .expect("declaration outside any scope")
            .insert(base.to_string(), (renamed.clone(), ty));
        renamed
    }

    fn var(&self, base: &str) -> Result<(String, VarType)> {
        self.env
            .iter()
            .rev()
            .find_map(|frame| frame.get(base))
            .cloned()
            .ok_or_else(|| Error::elaborate_at(base, format!("undeclared variable `{base}`")))
    }

    fn term(&mut self, t: ProcessTerm) -> Result<ProcessTerm> {
        match t {
            ProcessTerm::Nil => Ok(ProcessTerm::Nil),
            ProcessTerm::End => Ok(ProcessTerm::End),
            ProcessTerm::Prefix(act, cont) => Ok(ProcessTerm::Prefix(
                self.action(act)?,
                Box::new(self.term(*cont)?),
            )),
            ProcessTerm::Seq(a, b) => Ok(ProcessTerm::Seq(
                Box::new(self.term(*a)?),
                Box::new(self.term(*b)?),
            )),
            ProcessTerm::Par(a, b) => Ok(ProcessTerm::Par(
                Box::new(self.term(*a)?),
                Box::new(self.term(*b)?),
            )),
            ProcessTerm::Restrict(p, gates) => {
                Ok(ProcessTerm::Restrict(Box::new(self.term(*p)?), gates))
            }
            ProcessTerm::Choice(branches) => {
                let branches = branches
                    .into_iter()
                    .map(|(c, body)| Ok((self.cond(c)?, self.term(body)?)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(ProcessTerm::Choice(branches))
            }
            ProcessTerm::Scope { classical, quantum, body } => {
                let mut seen = BTreeSet::new();
                for n in classical.iter().chain(&quantum) {
                    if !seen.insert(n.clone()) {
                        return Err(Error::elaborate_at(
                            n,
                            format!("variable `{n}` declared twice in one scope"),
                        ));
                    }
                }
                self.env.push(BTreeMap::new());
                let classical = classical
                    .iter()
                    .map(|n| self.declare(n, VarType::Nat))
                    .collect();
                let quantum = quantum
                    .iter()
                    .map(|n| self.declare(n, VarType::Qubit))
                    .collect();
                let body = self.term(*body)?;
                self.env.pop();
                Ok(ProcessTerm::Scope {
                    classical,
                    quantum,
                    body: Box::new(body),
                })
            }
            ProcessTerm::Invoke(name, args) => self.invoke(name, args),
        }
    }

    fn action(&mut self, a: Action) -> Result<Action> {
        match a {
            Action::EmitValue(g, v) => Ok(Action::EmitValue(g, v)),
            Action::EmitVar(g, x) => {
                let (renamed, ty) = self.var(&x)?;
                if ty == VarType::Qubit {
                    return Err(Error::elaborate_at(
                        &x,
                        format!("cannot emit qubit variable `{x}`; qubits move only via receive"),
                    ));
                }
                Ok(Action::EmitVar(g, renamed))
            }
            Action::Receive(g, x) => {
                let (renamed, _) = self.var(&x)?;
                Ok(Action::Receive(g, renamed))
            }
            Action::EmitMeasure(g, obs, targets) => {
                let Some(ob) = self.registry.observable(&obs) else {
                    return Err(Error::elaborate_at(
                        &obs,
                        format!("unknown observable `{obs}`"),
                    ));
                };
                let arity = ob.arity();
                let targets = self.targets(targets, arity, &obs)?;
                Ok(Action::EmitMeasure(g, obs, targets))
            }
            Action::ApplyUnitary(name, targets) | Action::MeasureOnly(name, targets) => {
                if let Some(u) = self.registry.unitary(&name) {
                    let arity = u.arity();
                    Ok(Action::ApplyUnitary(
                        name.clone(),
                        self.targets(targets, arity, &name)?,
                    ))
                } else if let Some(ob) = self.registry.observable(&name) {
                    let arity = ob.arity();
                    Ok(Action::MeasureOnly(
                        name.clone(),
                        self.targets(targets, arity, &name)?,
                    ))
                } else {
                    Err(Error::elaborate_at(
                        &name,
                        format!("unknown operation `{name}`"),
                    ))
                }
            }
        }
    }

    fn targets(&mut self, targets: Vec<String>, arity: usize, op: &str) -> Result<Vec<String>> {
        if targets.len() != arity {
            return Err(Error::elaborate_at(
                op,
                format!("`{op}` expects {arity} target(s), got {}", targets.len()),
            ));
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for t in targets {
            let (renamed, ty) = self.var(&t)?;
            if ty != VarType::Qubit {
                return Err(Error::elaborate_at(
                    &t,
                    format!("`{t}` is not a qubit variable"),
                ));
            }
            if !seen.insert(renamed.clone()) {
                return Err(Error::elaborate_at(&t, format!("duplicate target `{t}`")));
            }
            out.push(renamed);
        }
        Ok(out)
    }

    fn cond(&mut self, c: Cond) -> Result<Cond> {
        let arg = |a: CondArg| -> Result<CondArg> {
            match a {
                CondArg::Num(n) => Ok(CondArg::Num(n)),
                CondArg::Var(x) => {
                    let (renamed, ty) = self.var(&x)?;
                    if ty != VarType::Nat {
                        return Err(Error::elaborate_at(
                            &x,
                            format!("`{x}` is not a numeric variable"),
                        ));
                    }
                    Ok(CondArg::Var(renamed))
                }
            }
        };
        Ok(Cond {
            lhs: arg(c.lhs)?,
            op: c.op,
            rhs: arg(c.rhs)?,
        })
    }

    fn invoke(&mut self, name: String, args: Vec<String>) -> Result<ProcessTerm> {
        let Some(&(classical_len, arity)) = self.sigs.get(&name) else {
            return Err(Error::elaborate_at(
                &name,
                format!("undefined process `{name}`"),
            ));
        };
        if args.len() > arity {
            return Err(Error::elaborate_at(
                &name,
                format!(
                    "`{name}` takes at most {arity} argument(s), got {}",
                    args.len()
                ),
            ));
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (i, a) in args.into_iter().enumerate() {
            let (renamed, ty) = self.var(&a)?;
            let want = if i < classical_len {
                VarType::Nat
            } else {
                VarType::Qubit
            };
            if ty != want {
                let wanted = match want {
                    VarType::Nat => "numeric",
                    VarType::Qubit => "qubit",
                };
                return Err(Error::elaborate_at(
                    &a,
                    format!("argument `{a}` to `{name}` must be a {wanted} variable"),
                ));
            }
            if !seen.insert(renamed.clone()) {
                return Err(Error::elaborate_at(&a, format!("duplicate argument `{a}`")));
            }
            out.push(renamed);
        }
        Ok(ProcessTerm::Invoke(name, out))
    }
}

fn count_scope_decls(
    t: &ProcessTerm,
    counts: &mut BTreeMap<String, usize>,
    taken: &mut BTreeSet<String>,
) {
    match t {
        ProcessTerm::Nil | ProcessTerm::End | ProcessTerm::Invoke(_, _) => {}
        ProcessTerm::Prefix(_, c) => count_scope_decls(c, counts, taken),
        ProcessTerm::Seq(a, b) | ProcessTerm::Par(a, b) => {
            count_scope_decls(a, counts, taken);
            count_scope_decls(b, counts, taken);
        }
        ProcessTerm::Choice(branches) => {
            for (_, body) in branches {
                count_scope_decls(body, counts, taken);
            }
        }
        ProcessTerm::Restrict(p, _) => count_scope_decls(p, counts, taken),
        ProcessTerm::Scope { classical, quantum, body } => {
            for n in classical.iter().chain(quantum) {
                *counts.entry(n.clone()).or_insert(0) += 1;
                taken.insert(n.clone());
            }
            count_scope_decls(body, counts, taken);
        }
    }
}

fn trailing_suffix(name: &str) -> u64 {
    match name.rsplit_once('#') {
        Some((_, digits))
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) =>
        {
            digits.parse().unwrap_or(u64::MAX)
        }
        _ => 0,
    }
}

fn max_suffix(t: &ProcessTerm) -> u64 {
    match t {
        ProcessTerm::Nil | ProcessTerm::End | ProcessTerm::Invoke(_, _) => 0,
        ProcessTerm::Prefix(_, c) => max_suffix(c),
        ProcessTerm::Seq(a, b) | ProcessTerm::Par(a, b) => max_suffix(a).max(max_suffix(b)),
        ProcessTerm::Choice(branches) => {
            branches.iter().map(|(_, b)| max_suffix(b)).max().unwrap_or(0)
        }
        ProcessTerm::Restrict(p, _) => max_suffix(p),
        ProcessTerm::Scope { classical, quantum, body } => classical
            .iter()
            .chain(quantum)
            .map(|n| trailing_suffix(n))
            .fold(max_suffix(body), u64::max),
    }
}

/// Check and rename `program` in place, setting its `fresh_base`.
pub fn elaborate(program: &mut Program) -> Result<()> {
    let mut counts = BTreeMap::new();
    let mut taken = BTreeSet::new();
    for def in program.defs.values() {
        count_scope_decls(&def.body, &mut counts, &mut taken);
    }
    let sigs = program
        .defs
        .iter()
        .map(|(n, d)| (n.clone(), (d.classical.len(), d.arity())))
        .collect();
    let mut el = Elab {
        counts,
        taken,
        counters: BTreeMap::new(),
        sigs,
        registry: &program.registry,
        env: Vec::new(),
    };
    let defs = std::mem::take(&mut program.defs);
    let mut out = BTreeMap::new();
    for (name, def) in defs {
        el.env.clear();
        el.env.push(BTreeMap::new());
        let body = el.term(def.body)?;
        out.insert(name, Def::from_body(body));
    }
    program.defs = out;
    program.fresh_base = 1 + program
        .defs
        .values()
        .map(|d| max_suffix(&d.body))
        .max()
        .unwrap_or(0);
    Ok(())
}
