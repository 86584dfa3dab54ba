//! A second, deliberately simple interpreter for the process calculus:
//! vector-of-frames cactus stack, dense-matrix quantum route, rules
//! transcribed independently of the optimized engine. Used to check the
//! reachable labeled transition system of small programs.

use std::collections::BTreeMap;

use num_complex::Complex64;
use qproc_core::context::Side;
use qproc_core::error::{Error, Result};
use qproc_core::quantum::{Observable, EPS_DROP};
use qproc_core::semantics::{unfold, Label};
use qproc_core::syntax::{Action, CompOp, Cond, CondArg, ProcessTerm, Program, VarType};

use crate::dense::{apply_unitary_dense, mat_of, measure_dense, Mat};

/// One branch point of the naive cactus stack: frames bottom-to-top, with a
/// live fork (if any) sitting above them all.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NStack {
    pub frames: Vec<Vec<(String, VarType)>>,
    pub fork: Option<Box<(NStack, NStack)>>,
}

impl NStack {
    fn at(&self, path: &[Side]) -> Result<&NStack> {
        match path.split_first() {
            None => Ok(self),
            Some((side, rest)) => {
                let fork = self
                    .fork
                    .as_ref()
                    .ok_or_else(|| Error::Step("naive: path without a fork".into()))?;
                match side {
                    Side::L => fork.0.at(rest),
                    Side::R => fork.1.at(rest),
                }
            }
        }
    }

    fn at_mut(&mut self, path: &[Side]) -> Result<&mut NStack> {
        match path.split_first() {
            None => Ok(self),
            Some((side, rest)) => {
                let fork = self
                    .fork
                    .as_mut()
                    .ok_or_else(|| Error::Step("naive: path without a fork".into()))?;
                match side {
                    Side::L => fork.0.at_mut(rest),
                    Side::R => fork.1.at_mut(rest),
                }
            }
        }
    }

    fn collect(&self, out: &mut Vec<(String, VarType)>) {
        for f in &self.frames {
            out.extend(f.iter().cloned());
        }
        if let Some(fork) = &self.fork {
            fork.0.collect(out);
            fork.1.collect(out);
        }
    }

    fn visible(&self, path: &[Side], out: &mut Vec<(String, VarType)>) {
        for f in &self.frames {
            out.extend(f.iter().cloned());
        }
        if let Some((side, rest)) = path.split_first() {
            if let Some(fork) = &self.fork {
                match side {
                    Side::L => fork.0.visible(rest, out),
                    Side::R => fork.1.visible(rest, out),
                }
            }
        }
    }

    /// Canonical rendering; formats identically to [`canon_core`] so the
    /// two stack representations can be compared as strings.
    pub fn canon(&self) -> String {
        let mut s = String::new();
        for f in &self.frames {
            s.push('{');
            for (i, (n, t)) in f.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                s.push_str(n);
                s.push(':');
                s.push(match t {
                    VarType::Nat => 'N',
                    VarType::Qubit => 'Q',
                });
            }
            s.push('}');
        }
        if let Some(fork) = &self.fork {
            s.push('<');
            s.push_str(&fork.0.canon());
            s.push('|');
            s.push_str(&fork.1.canon());
            s.push('>');
        }
        s
    }
}

/// Canonical rendering of the optimized engine's stack in the same format
/// as [`NStack::canon`].
pub fn canon_core(stack: &qproc_core::context::EnvStack) -> String {
    use qproc_core::context::EnvStack;
    match stack {
        EnvStack::Root => String::new(),
        EnvStack::Frame { vars, rest } => {
            let mut s = canon_core(rest);
            s.push('{');
            for (i, (n, t)) in vars.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                s.push_str(n);
                s.push(':');
                s.push(match t {
                    VarType::Nat => 'N',
                    VarType::Qubit => 'Q',
                });
            }
            s.push('}');
            s
        }
        EnvStack::Fork { left, right, rest } => {
            let mut s = canon_core(rest);
            s.push('<');
            s.push_str(&canon_core(left));
            s.push('|');
            s.push_str(&canon_core(right));
            s.push('>');
            s
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NCtx {
    pub stack: NStack,
    pub names: Vec<Option<String>>,
    pub amps: Vec<Complex64>,
    pub store: BTreeMap<String, i64>,
    pub fresh: u64,
    pub measured: Vec<(String, i64)>,
}

impl NCtx {
    pub fn empty(fresh: u64) -> NCtx {
        NCtx {
            stack: NStack::default(),
            names: Vec::new(),
            amps: vec![Complex64::new(1.0, 0.0)],
            store: BTreeMap::new(),
            fresh,
            measured: Vec::new(),
        }
    }

    fn width(&self) -> usize {
        self.names.len()
    }

    fn declare(&self, path: &[Side], classical: &[String], quantum: &[String]) -> Result<NCtx> {
        let mut next = self.clone();
        let seg = next.stack.at_mut(path)?;
        if seg.fork.is_some() {
            return Err(Error::Step("naive: frame pushed onto a live fork".into()));
        }
        seg.frames.push(
            classical
                .iter()
                .map(|n| (n.clone(), VarType::Nat))
                .chain(quantum.iter().map(|n| (n.clone(), VarType::Qubit)))
                .collect(),
        );
        Ok(next)
    }

    fn cleanup(&mut self, dropped: &[(String, VarType)]) {
        for slot in self.names.iter_mut() {
            if let Some(n) = slot {
                if dropped.iter().any(|(d, _)| d == n) {
                    *slot = None;
                }
            }
        }
        let mut live = Vec::new();
        self.stack.collect(&mut live);
        self.store.retain(|k, _| live.iter().any(|(n, _)| n == k));
    }

    fn release(&self, path: &[Side]) -> Result<NCtx> {
        let mut next = self.clone();
        let seg = next.stack.at_mut(path)?;
        if seg.fork.is_some() {
            return Err(Error::Step("naive: release under a live fork".into()));
        }
        let frame = seg
            .frames
            .pop()
            .ok_or_else(|| Error::Step("naive: release without a frame".into()))?;
        next.cleanup(&frame);
        Ok(next)
    }

    fn fork(&self, path: &[Side]) -> Result<NCtx> {
        let mut next = self.clone();
        let seg = next.stack.at_mut(path)?;
        if seg.fork.is_some() {
            return Err(Error::Step("naive: double fork".into()));
        }
        seg.fork = Some(Box::new((NStack::default(), NStack::default())));
        Ok(next)
    }

    fn join(&self, path: &[Side]) -> Result<NCtx> {
        let mut next = self.clone();
        let seg = next.stack.at_mut(path)?;
        let fork = seg
            .fork
            .take()
            .ok_or_else(|| Error::Step("naive: join without a fork".into()))?;
        let mut dropped = Vec::new();
        fork.0.collect(&mut dropped);
        fork.1.collect(&mut dropped);
        next.cleanup(&dropped);
        Ok(next)
    }

    fn visible_type(&self, path: &[Side], name: &str) -> Option<VarType> {
        let mut vars = Vec::new();
        self.stack.visible(path, &mut vars);
        vars.into_iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    fn init_qubit(&self, name: &str, bit: u8) -> NCtx {
        let mut next = self.clone();
        next.names.insert(0, Some(name.to_string()));
        let len = next.amps.len();
        let mut amps = vec![Complex64::new(0.0, 0.0); 2 * len];
        let offset = bit as usize * len;
        amps[offset..offset + len].copy_from_slice(&next.amps);
        next.amps = amps;
        next
    }

    fn positions(&self, targets: &[String]) -> Option<Vec<usize>> {
        targets
            .iter()
            .map(|t| self.names.iter().position(|n| n.as_deref() == Some(t)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NCtxS {
    Stable(NCtx),
    Mixed(Vec<(f64, NCtx)>),
}

impl NCtxS {
    pub fn stable(&self) -> Option<&NCtx> {
        match self {
            NCtxS::Stable(c) => Some(c),
            NCtxS::Mixed(_) => None,
        }
    }
}

fn mixed(mut branches: Vec<(f64, NCtx)>) -> NCtxS {
    assert!(!branches.is_empty());
    if branches.len() == 1 {
        return NCtxS::Stable(branches.pop().unwrap().1);
    }
    let total: f64 = branches.iter().map(|(p, _)| p).sum();
    for (p, _) in branches.iter_mut() {
        *p /= total;
    }
    NCtxS::Mixed(branches)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NState {
    pub term: ProcessTerm,
    pub ctx: NCtxS,
}

pub fn naive_initial(program: &Program, entry: &str) -> NState {
    NState {
        term: ProcessTerm::Invoke(entry.to_string(), Vec::new()),
        ctx: NCtxS::Stable(NCtx::empty(program.fresh_base)),
    }
}

fn nfresh(base: &str, fresh: &mut u64) -> String {
    let stem = match base.rsplit_once('#') {
        Some((stem, digits))
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) =>
        {
            stem
        }
        _ => base,
    };
    let n = *fresh;
    *fresh += 1;
    format!("{stem}#{n}")
}

fn ncond(cond: &Cond, store: &BTreeMap<String, i64>) -> Result<bool> {
    let value = |arg: &CondArg| -> Result<i64> {
        match arg {
            CondArg::Num(n) => Ok(*n),
            CondArg::Var(x) => store
                .get(x)
                .copied()
                .ok_or_else(|| Error::Step(format!("condition reads unset variable `{x}`"))),
        }
    };
    let (l, r) = (value(&cond.lhs)?, value(&cond.rhs)?);
    Ok(match cond.op {
        CompOp::Eq => l == r,
        CompOp::Ne => l != r,
        CompOp::Le => l <= r,
        CompOp::Ge => l >= r,
        CompOp::Lt => l < r,
        CompOp::Gt => l > r,
    })
}

fn measure_branches(
    ctx: &NCtx,
    obs: &Observable,
    obs_name: &str,
    positions: &[usize],
) -> Vec<(i64, NCtx, f64)> {
    let projectors: Vec<Mat> = obs.branches().iter().map(|b| mat_of(&b.projector)).collect();
    let results = measure_dense(&ctx.amps, &projectors, positions, ctx.width());
    let mut kept: Vec<(i64, NCtx, f64)> = obs
        .branches()
        .iter()
        .zip(results)
        .filter(|(_, (_, p))| *p > EPS_DROP)
        .map(|(b, (post, p))| {
            let mut c = ctx.clone();
            c.amps = post;
            c.measured.push((obs_name.to_string(), b.eigenvalue));
            (b.eigenvalue, c, p)
        })
        .collect();
    let total: f64 = kept.iter().map(|(_, _, p)| p).sum();
    for (_, _, p) in kept.iter_mut() {
        *p /= total;
    }
    kept
}

type NSucc = (Label, ProcessTerm, NCtxS);

pub fn naive_transitions(state: &NState, program: &Program) -> Result<Vec<(Label, NState)>> {
    match &state.ctx {
        NCtxS::Mixed(branches) => Ok(branches
            .iter()
            .map(|(p, c)| {
                (
                    Label::Prob(*p),
                    NState { term: state.term.clone(), ctx: NCtxS::Stable(c.clone()) },
                )
            })
            .collect()),
        NCtxS::Stable(ctx) => Ok(nstep(&state.term, ctx, &mut Vec::new(), program, 0)?
            .into_iter()
            .map(|(l, term, ctx)| (l, NState { term, ctx }))
            .collect()),
    }
}

fn nstep(
    term: &ProcessTerm,
    ctx: &NCtx,
    path: &mut Vec<Side>,
    program: &Program,
    depth: usize,
) -> Result<Vec<NSucc>> {
    match term {
        ProcessTerm::Nil => Ok(Vec::new()),
        ProcessTerm::End => Ok(vec![(
            Label::Delta,
            ProcessTerm::Nil,
            NCtxS::Stable(ctx.clone()),
        )]),
        ProcessTerm::Invoke(name, args) => {
            if depth >= 64 {
                return Err(Error::Step(format!("naive: `{name}` unfolds forever")));
            }
            let mut next = ctx.clone();
            let body = unfold(name, args, program, &mut next.fresh)?;
            nstep(&body, &next, path, program, depth + 1)
        }
        ProcessTerm::Scope { classical, quantum, body } if !term.is_scope_marker() => {
            Ok(vec![(
                Label::Decl,
                ProcessTerm::scope_marker((**body).clone()),
                NCtxS::Stable(ctx.declare(path, classical, quantum)?),
            )])
        }
        ProcessTerm::Scope { body, .. } => {
            let mut out = Vec::new();
            for (label, succ, succ_ctx) in nstep(body, ctx, path, program, depth)? {
                if label == Label::Delta {
                    let c = succ_ctx
                        .stable()
                        .ok_or_else(|| Error::Step("naive: mixed termination".into()))?;
                    out.push((Label::Delta, ProcessTerm::Nil, NCtxS::Stable(c.release(path)?)));
                } else {
                    out.push((label, ProcessTerm::scope_marker(succ), succ_ctx));
                }
            }
            Ok(out)
        }
        ProcessTerm::Prefix(action, cont) => nprefix(action, cont, ctx, path, program),
        ProcessTerm::Seq(a, b) => Ok(nstep(a, ctx, path, program, depth)?
            .into_iter()
            .map(|(label, succ, succ_ctx)| {
                if label == Label::Delta {
                    (Label::Tau, (**b).clone(), succ_ctx)
                } else {
                    (label, ProcessTerm::Seq(Box::new(succ), b.clone()), succ_ctx)
                }
            })
            .collect()),
        ProcessTerm::Par(a, b) => npar(a, b, ctx, path, program, depth),
        ProcessTerm::Choice(branches) => {
            let mut out = Vec::new();
            for (cond, body) in branches {
                if ncond(cond, &ctx.store)? {
                    out.extend(nstep(body, ctx, path, program, depth)?);
                }
            }
            Ok(out)
        }
        ProcessTerm::Restrict(inner, gates) => {
            let mut out = Vec::new();
            for (label, succ, succ_ctx) in nstep(inner, ctx, path, program, depth)? {
                match &label {
                    Label::Emit(g, _) | Label::Receive(g, _) if gates.contains(g) => {}
                    Label::Delta => out.push((Label::Delta, ProcessTerm::Nil, succ_ctx)),
                    _ => out.push((
                        label,
                        ProcessTerm::Restrict(Box::new(succ), gates.clone()),
                        succ_ctx,
                    )),
                }
            }
            Ok(out)
        }
    }
}

fn nprefix(
    action: &Action,
    cont: &ProcessTerm,
    ctx: &NCtx,
    path: &[Side],
    program: &Program,
) -> Result<Vec<NSucc>> {
    let keep = |ctx: &NCtx| NCtxS::Stable(ctx.clone());
    Ok(match action {
        Action::EmitValue(g, v) => vec![(Label::Emit(g.clone(), *v), cont.clone(), keep(ctx))],
        Action::EmitVar(g, x) => match ctx.store.get(x) {
            Some(v) => vec![(Label::Emit(g.clone(), *v), cont.clone(), keep(ctx))],
            None => Vec::new(),
        },
        Action::Receive(g, x) => {
            let ty = ctx
                .visible_type(path, x)
                .ok_or_else(|| Error::Step(format!("naive: receive into unknown `{x}`")))?;
            let initialized = ctx.names.iter().any(|n| n.as_deref() == Some(x.as_str()));
            if ty == VarType::Qubit && initialized {
                Vec::new()
            } else {
                vec![(Label::Receive(g.clone(), x.clone()), cont.clone(), keep(ctx))]
            }
        }
        Action::ApplyUnitary(name, targets) => match ctx.positions(targets) {
            None => Vec::new(),
            Some(positions) => {
                let u = program
                    .registry
                    .unitary(name)
                    .ok_or_else(|| Error::Step(format!("naive: unknown unitary `{name}`")))?;
                let mut next = ctx.clone();
                next.amps =
                    apply_unitary_dense(&ctx.amps, &mat_of(u.matrix()), &positions, ctx.width());
                vec![(Label::Tau, cont.clone(), NCtxS::Stable(next))]
            }
        },
        Action::MeasureOnly(name, targets) => match ctx.positions(targets) {
            None => Vec::new(),
            Some(positions) => {
                let obs = program
                    .registry
                    .observable(name)
                    .ok_or_else(|| Error::Step(format!("naive: unknown observable `{name}`")))?;
                let branches = measure_branches(ctx, obs, name, &positions)
                    .into_iter()
                    .map(|(_, c, p)| (p, c))
                    .collect();
                vec![(Label::Tau, cont.clone(), mixed(branches))]
            }
        },
        Action::EmitMeasure(g, name, targets) => match ctx.positions(targets) {
            None => Vec::new(),
            Some(positions) => {
                let obs = program
                    .registry
                    .observable(name)
                    .ok_or_else(|| Error::Step(format!("naive: unknown observable `{name}`")))?;
                let mut base = ctx.clone();
                let result = nfresh("m", &mut base.fresh);
                let branches = measure_branches(&base, obs, name, &positions)
                    .into_iter()
                    .map(|(eigen, c, p)| {
                        let mut c = c
                            .declare(path, std::slice::from_ref(&result), &[])
                            .expect("naive: result frame");
                        c.store.insert(result.clone(), eigen);
                        (p, c)
                    })
                    .collect();
                let send = ProcessTerm::scope_marker(ProcessTerm::Prefix(
                    Action::EmitVar(g.clone(), result),
                    Box::new(ProcessTerm::End),
                ));
                let term = ProcessTerm::Seq(Box::new(send), Box::new(cont.clone()));
                vec![(Label::Tau, term, mixed(branches))]
            }
        },
    })
}

fn npar(
    a: &ProcessTerm,
    b: &ProcessTerm,
    ctx: &NCtx,
    path: &mut Vec<Side>,
    program: &Program,
    depth: usize,
) -> Result<Vec<NSucc>> {
    let forked = if ctx.stack.at(path)?.fork.is_some() { ctx.clone() } else { ctx.fork(path)? };
    path.push(Side::L);
    let ls = nstep(a, &forked, path, program, depth)?;
    path.pop();
    path.push(Side::R);
    let rs = nstep(b, &forked, path, program, depth)?;
    path.pop();

    let mut out = Vec::new();
    for (label, succ, succ_ctx) in &ls {
        if *label != Label::Delta {
            out.push((
                label.clone(),
                ProcessTerm::Par(Box::new(succ.clone()), Box::new(b.clone())),
                succ_ctx.clone(),
            ));
        }
    }
    for (label, succ, succ_ctx) in &rs {
        if *label != Label::Delta {
            out.push((
                label.clone(),
                ProcessTerm::Par(Box::new(a.clone()), Box::new(succ.clone())),
                succ_ctx.clone(),
            ));
        }
    }
    let mut handshake = |emit: &NSucc, recv: &NSucc, emitter_left: bool| -> Result<()> {
        let (Label::Emit(eg, v), et, ec) = emit else { return Ok(()) };
        let (Label::Receive(rg, x), rt, rc) = recv else { return Ok(()) };
        if eg != rg {
            return Ok(());
        }
        let ce = ec.stable().expect("naive: emit is stable");
        let cr = rc.stable().expect("naive: receive is stable");
        let (lc, rc2, lt, rt2) = if emitter_left { (ce, cr, et, rt) } else { (cr, ce, rt, et) };
        let mut merged = forked.clone();
        merged.fresh = ce.fresh.max(cr.fresh);
        merged.stack = lc.stack.clone();
        let mut right_path = path.clone();
        right_path.push(Side::R);
        *merged.stack.at_mut(&right_path)? = rc2.stack.at(&right_path)?.clone();
        let mut declared = Vec::new();
        merged.stack.collect(&mut declared);
        let ty = declared
            .iter()
            .find(|(n, _)| n == x)
            .map(|(_, t)| *t)
            .ok_or_else(|| Error::Step(format!("naive: `{x}` undeclared at handshake")))?;
        let bound = match ty {
            VarType::Nat => {
                let mut c = merged;
                c.store.insert(x.clone(), *v);
                c
            }
            VarType::Qubit => {
                if !(0..=1).contains(v) {
                    return Ok(());
                }
                merged.init_qubit(x, *v as u8)
            }
        };
        out.push((
            Label::Tau,
            ProcessTerm::Par(Box::new(lt.clone()), Box::new(rt2.clone())),
            NCtxS::Stable(bound),
        ));
        Ok(())
    };
    for e in &ls {
        for r in &rs {
            handshake(e, r, true)?;
        }
    }
    for e in &rs {
        for r in &ls {
            handshake(e, r, false)?;
        }
    }
    let l_delta = ls.iter().any(|(l, _, _)| *l == Label::Delta);
    let r_delta = rs.iter().any(|(l, _, _)| *l == Label::Delta);
    if l_delta && r_delta {
        out.push((Label::Delta, ProcessTerm::Nil, NCtxS::Stable(forked.join(path)?)));
    }
    Ok(out)
}
