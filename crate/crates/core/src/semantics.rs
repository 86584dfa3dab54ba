//! Small-step execution of process terms against contexts.
//!
//! `transitions` enumerates every successor of an execution state. An
//! unresolved probabilistic context offers only its resolution steps; a
//! stable state offers the applicable structural rules in a fixed
//! left-to-right order. A state with no successors is terminated when its
//! term is `nil`, otherwise stuck.

use std::collections::BTreeMap;
use std::fmt;

use crate::context::{ClassicalStore, Context, ExecCtx, Side};
use crate::error::{Error, Result};
use crate::syntax::{Action, CompOp, Cond, CondArg, ProcessTerm, Program, VarType};

/// Transition labels.
#[derive(Debug, Clone, PartialEq)]
pub enum Label {
    Emit(String, i64),
    Receive(String, String),
    Tau,
    Delta,
    Decl,
    Prob(f64),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Emit(g, v) => write!(f, "{g}!{v}"),
            Label::Receive(g, x) => write!(f, "{g}?{x}"),
            Label::Tau => write!(f, "tau"),
            Label::Delta => write!(f, "delta"),
            Label::Decl => write!(f, "decl"),
            Label::Prob(_) => write!(f, "prob"),
        }
    }
}

/// A term paired with its execution context.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecState {
    pub term: ProcessTerm,
    pub ctx: ExecCtx,
}

/// Consecutive unfoldings allowed while searching for one transition.
const MAX_UNFOLD: usize = 64;

/// Evaluate a comparison against the classical store.
pub fn eval_cond(cond: &Cond, store: &ClassicalStore) -> Result<bool> {
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

/// Next run-time name for `base`, stripping any previous numeric suffix.
pub(crate) fn fresh_name(base: &str, fresh: &mut u64) -> String {
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

fn subst(name: &str, map: &BTreeMap<String, String>) -> String {
    map.get(name).cloned().unwrap_or_else(|| name.to_string())
}

fn rename_action(a: &Action, map: &BTreeMap<String, String>) -> Action {
    match a {
        Action::EmitValue(g, v) => Action::EmitValue(g.clone(), *v),
        Action::EmitVar(g, x) => Action::EmitVar(g.clone(), subst(x, map)),
        Action::EmitMeasure(g, o, xs) => Action::EmitMeasure(
            g.clone(),
            o.clone(),
            xs.iter().map(|x| subst(x, map)).collect(),
        ),
        Action::Receive(g, x) => Action::Receive(g.clone(), subst(x, map)),
        Action::ApplyUnitary(u, xs) => {
            Action::ApplyUnitary(u.clone(), xs.iter().map(|x| subst(x, map)).collect())
        }
        Action::MeasureOnly(o, xs) => {
            Action::MeasureOnly(o.clone(), xs.iter().map(|x| subst(x, map)).collect())
        }
    }
}

fn rename_cond(c: &Cond, map: &BTreeMap<String, String>) -> Cond {
    let arg = |a: &CondArg| match a {
        CondArg::Num(n) => CondArg::Num(*n),
        CondArg::Var(x) => CondArg::Var(subst(x, map)),
    };
    Cond { lhs: arg(&c.lhs), op: c.op, rhs: arg(&c.rhs) }
}

/// Apply `map` to free variables while giving every binder a fresh run-time
/// name.
fn rename(term: &ProcessTerm, map: &BTreeMap<String, String>, fresh: &mut u64) -> ProcessTerm {
    match term {
        ProcessTerm::Nil => ProcessTerm::Nil,
        ProcessTerm::End => ProcessTerm::End,
        ProcessTerm::Invoke(name, args) => ProcessTerm::Invoke(
            name.clone(),
            args.iter().map(|a| subst(a, map)).collect(),
        ),
        ProcessTerm::Prefix(a, cont) => ProcessTerm::Prefix(
            rename_action(a, map),
            Box::new(rename(cont, map, fresh)),
        ),
        ProcessTerm::Seq(a, b) => ProcessTerm::Seq(
            Box::new(rename(a, map, fresh)),
            Box::new(rename(b, map, fresh)),
        ),
        ProcessTerm::Par(a, b) => ProcessTerm::Par(
            Box::new(rename(a, map, fresh)),
            Box::new(rename(b, map, fresh)),
        ),
        ProcessTerm::Choice(branches) => ProcessTerm::Choice(
            branches
                .iter()
                .map(|(c, p)| (rename_cond(c, map), rename(p, map, fresh)))
                .collect(),
        ),
        ProcessTerm::Restrict(p, gates) => {
            ProcessTerm::Restrict(Box::new(rename(p, map, fresh)), gates.clone())
        }
        ProcessTerm::Scope { classical, quantum, body } => {
            let mut inner = map.clone();
            let fresh_list = |names: &[String], inner: &mut BTreeMap<String, String>,
                              fresh: &mut u64| {
                names
                    .iter()
                    .map(|n| {
                        let f = fresh_name(n, fresh);
                        inner.insert(n.clone(), f.clone());
                        f
                    })
                    .collect::<Vec<_>>()
            };
            let classical = fresh_list(classical, &mut inner, fresh);
            let quantum = fresh_list(quantum, &mut inner, fresh);
            ProcessTerm::Scope {
                classical,
                quantum,
                body: Box::new(rename(body, &inner, fresh)),
            }
        }
    }
}

/// Instantiate a definition: consumed formals are substituted by the actual
/// names, unconsumed ones stay declared, and every binder is freshened.
pub fn unfold(
    name: &str,
    args: &[String],
    program: &Program,
    fresh: &mut u64,
) -> Result<ProcessTerm> {
    let def = program
        .defs
        .get(name)
        .ok_or_else(|| Error::Step(format!("undefined process `{name}`")))?;
    if args.len() > def.arity() {
        return Err(Error::Step(format!(
            "`{name}` takes at most {} arguments, got {}",
            def.arity(),
            args.len()
        )));
    }
    let mut map = BTreeMap::new();
    for (formal, actual) in def.classical.iter().chain(def.quantum.iter()).zip(args) {
        map.insert(formal.clone(), actual.clone());
    }
    let body = if args.is_empty() {
        def.body.clone()
    } else {
        match &def.body {
            ProcessTerm::Scope { classical, quantum, body } => {
                let cut_c = args.len().min(classical.len());
                let cut_q = args.len() - cut_c;
                let rest_c = classical[cut_c..].to_vec();
                let rest_q = quantum[cut_q..].to_vec();
                if rest_c.is_empty() && rest_q.is_empty() {
                    (**body).clone()
                } else {
                    ProcessTerm::Scope { classical: rest_c, quantum: rest_q, body: body.clone() }
                }
            }
            other => other.clone(),
        }
    };
    Ok(rename(&body, &map, fresh))
}

type Succ = (Label, ProcessTerm, ExecCtx);

/// All transitions of `state`. An unresolved probabilistic context yields
/// exactly its resolution branches.
pub fn transitions(state: &ExecState, program: &Program) -> Result<Vec<(Label, ExecState)>> {
    match &state.ctx {
        ExecCtx::Mixed(pc) => Ok(pc
            .branches()
            .iter()
            .map(|(p, c)| {
                (
                    Label::Prob(*p),
                    ExecState { term: state.term.clone(), ctx: ExecCtx::Stable(c.clone()) },
                )
            })
            .collect()),
        ExecCtx::Stable(ctx) => {
            let mut path = Vec::new();
            Ok(step(&state.term, ctx, &mut path, program, 0)?
                .into_iter()
                .map(|(l, term, ctx)| (l, ExecState { term, ctx }))
                .collect())
        }
    }
}

fn step(
    term: &ProcessTerm,
    ctx: &Context,
    path: &mut Vec<Side>,
    program: &Program,
    depth: usize,
) -> Result<Vec<Succ>> {
    Ok(match term {
        ProcessTerm::Nil => Vec::new(),
        ProcessTerm::End => {
            vec![(Label::Delta, ProcessTerm::Nil, ExecCtx::Stable(ctx.clone()))]
        }
        ProcessTerm::Invoke(name, args) => {
            if depth >= MAX_UNFOLD {
                return Err(Error::Step(format!(
                    "`{name}` exceeds {MAX_UNFOLD} consecutive unfoldings without a transition"
                )));
            }
            let mut unfolded_ctx = ctx.clone();
            let body = unfold(name, args, program, &mut unfolded_ctx.fresh)?;
            step(&body, &unfolded_ctx, path, program, depth + 1)?
        }
        ProcessTerm::Scope { classical, quantum, body } if !term.is_scope_marker() => {
            vec![(
                Label::Decl,
                ProcessTerm::scope_marker((**body).clone()),
                ExecCtx::Stable(ctx.declare(path, classical, quantum)),
            )]
        }
        ProcessTerm::Scope { body, .. } => {
            let mut out = Vec::new();
            for (label, succ, succ_ctx) in step(body, ctx, path, program, depth)? {
                if label == Label::Delta {
                    let stable = succ_ctx
                        .stable()
                        .ok_or_else(|| Error::Step("termination in a mixed context".into()))?;
                    out.push((
                        Label::Delta,
                        ProcessTerm::Nil,
                        ExecCtx::Stable(stable.release_scope(path)?),
                    ));
                } else {
                    out.push((label, ProcessTerm::scope_marker(succ), succ_ctx));
                }
            }
            out
        }
        ProcessTerm::Prefix(action, cont) => step_prefix(action, cont, ctx, path, program)?,
        ProcessTerm::Seq(a, b) => step(a, ctx, path, program, depth)?
            .into_iter()
            .map(|(label, succ, succ_ctx)| {
                if label == Label::Delta {
                    (Label::Tau, (**b).clone(), succ_ctx)
                } else {
                    (label, ProcessTerm::Seq(Box::new(succ), b.clone()), succ_ctx)
                }
            })
            .collect(),
        ProcessTerm::Par(a, b) => step_par(a, b, ctx, path, program, depth)?,
        ProcessTerm::Choice(branches) => {
            let mut out = Vec::new();
            for (cond, body) in branches {
                if eval_cond(cond, &ctx.store)? {
                    out.extend(step(body, ctx, path, program, depth)?);
                }
            }
            out
        }
        ProcessTerm::Restrict(inner, gates) => {
            let mut out = Vec::new();
            for (label, succ, succ_ctx) in step(inner, ctx, path, program, depth)? {
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
            out
        }
    })
}

fn step_prefix(
    action: &Action,
    cont: &ProcessTerm,
    ctx: &Context,
    path: &[Side],
    program: &Program,
) -> Result<Vec<Succ>> {
    Ok(match action {
        Action::EmitValue(g, v) => vec![(
            Label::Emit(g.clone(), *v),
            cont.clone(),
            ExecCtx::Stable(ctx.clone()),
        )],
        Action::EmitVar(g, x) => match ctx.get_value(x) {
            Some(v) => vec![(
                Label::Emit(g.clone(), v),
                cont.clone(),
                ExecCtx::Stable(ctx.clone()),
            )],
            None => Vec::new(),
        },
        Action::Receive(g, x) => {
            let ty = ctx.visible_type(path, x).ok_or_else(|| {
                Error::Step(format!("receive into undeclared variable `{x}`"))
            })?;
            if ty == VarType::Qubit && ctx.qubit_position(x).is_some() {
                Vec::new()
            } else {
                vec![(
                    Label::Receive(g.clone(), x.clone()),
                    cont.clone(),
                    ExecCtx::Stable(ctx.clone()),
                )]
            }
        }
        Action::ApplyUnitary(name, targets) => match ctx.qubit_positions(targets) {
            None => Vec::new(),
            Some(positions) => {
                let u = program
                    .registry
                    .unitary(name)
                    .ok_or_else(|| Error::Step(format!("unknown unitary `{name}`")))?;
                let mut state = ctx.state.clone();
                state.apply_unitary(u.matrix(), &positions);
                vec![(Label::Tau, cont.clone(), ExecCtx::Stable(ctx.with_state(state)))]
            }
        },
        Action::MeasureOnly(name, targets) => match ctx.qubit_positions(targets) {
            None => Vec::new(),
            Some(positions) => {
                let obs = program
                    .registry
                    .observable(name)
                    .ok_or_else(|| Error::Step(format!("unknown observable `{name}`")))?;
                let branches = ctx
                    .state
                    .measure(obs, &positions)
                    .into_iter()
                    .map(|(eigen, post, p)| {
                        (p, ctx.with_state(post).record_measurement(name, eigen))
                    })
                    .collect();
                vec![(Label::Tau, cont.clone(), ExecCtx::mixed(branches))]
            }
        },
        Action::EmitMeasure(g, name, targets) => match ctx.qubit_positions(targets) {
            None => Vec::new(),
            Some(positions) => {
                let obs = program
                    .registry
                    .observable(name)
                    .ok_or_else(|| Error::Step(format!("unknown observable `{name}`")))?;
                let mut base = ctx.clone();
                let result = fresh_name("m", &mut base.fresh);
                let branches = base
                    .state
                    .measure(obs, &positions)
                    .into_iter()
                    .map(|(eigen, post, p)| {
                        let c = base
                            .with_state(post)
                            .record_measurement(name, eigen)
                            .declare(path, std::slice::from_ref(&result), &[])
                            .set_classical(&result, eigen);
                        (p, c)
                    })
                    .collect();
                let send = ProcessTerm::scope_marker(ProcessTerm::Prefix(
                    Action::EmitVar(g.clone(), result),
                    Box::new(ProcessTerm::End),
                ));
                let term = ProcessTerm::Seq(Box::new(send), Box::new(cont.clone()));
                vec![(Label::Tau, term, ExecCtx::mixed(branches))]
            }
        },
    })
}

fn step_par(
    a: &ProcessTerm,
    b: &ProcessTerm,
    ctx: &Context,
    path: &mut Vec<Side>,
    program: &Program,
    depth: usize,
) -> Result<Vec<Succ>> {
    let forked = if ctx.stack.top_is_fork(path) { ctx.clone() } else { ctx.fork(path) };
    path.push(Side::L);
    let ls = step(a, &forked, path, program, depth)?;
    path.pop();
    path.push(Side::R);
    let rs = step(b, &forked, path, program, depth)?;
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
    for (el, et, ec) in &ls {
        let Label::Emit(eg, v) = el else { continue };
        for (rl, rt, rc) in &rs {
            let Label::Receive(rg, x) = rl else { continue };
            if rg != eg {
                continue;
            }
            out.extend(comm(&forked, path, (et, ec), (rt, rc), x, *v, true)?);
        }
    }
    for (el, et, ec) in &rs {
        let Label::Emit(eg, v) = el else { continue };
        for (rl, rt, rc) in &ls {
            let Label::Receive(rg, x) = rl else { continue };
            if rg != eg {
                continue;
            }
            out.extend(comm(&forked, path, (et, ec), (rt, rc), x, *v, false)?);
        }
    }
    let l_delta = ls.iter().any(|(l, _, _)| *l == Label::Delta);
    let r_delta = rs.iter().any(|(l, _, _)| *l == Label::Delta);
    if l_delta && r_delta {
        out.push((Label::Delta, ProcessTerm::Nil, ExecCtx::Stable(forked.join(path)?)));
    }
    Ok(out)
}

/// Join one emit successor with one receive successor: merge their branch
/// stacks over the shared base and bind the transmitted value.
fn comm(
    forked: &Context,
    path: &[Side],
    (emit_term, emit_ctx): (&ProcessTerm, &ExecCtx),
    (recv_term, recv_ctx): (&ProcessTerm, &ExecCtx),
    x: &str,
    v: i64,
    emitter_left: bool,
) -> Result<Option<Succ>> {
    let ce = emit_ctx
        .stable()
        .ok_or_else(|| Error::Step("emit in a mixed context".into()))?;
    let cr = recv_ctx
        .stable()
        .ok_or_else(|| Error::Step("receive in a mixed context".into()))?;
    let (left, right, lt, rt) = if emitter_left {
        (ce, cr, emit_term, recv_term)
    } else {
        (cr, ce, recv_term, emit_term)
    };
    let mut right_path = path.to_vec();
    right_path.push(Side::R);
    let right_sub = right.stack.subtree(&right_path)?.clone();
    let stack = left.stack.rebuild(&right_path, &mut |_| Ok(right_sub.clone()))?;
    let merged = Context { stack, fresh: ce.fresh.max(cr.fresh), ..forked.clone() };

    let mut vars = Vec::new();
    merged.stack.all_vars(&mut vars);
    let ty = vars
        .iter()
        .find(|(n, _)| n == x)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::Step(format!("receive into undeclared variable `{x}`")))?;
    let bound = match ty {
        VarType::Nat => merged.set_classical(x, v),
        VarType::Qubit => {
            if !(0..=1).contains(&v) {
                return Ok(None);
            }
            merged.init_qubit(x, v as u8)
        }
    };
    Ok(Some((
        Label::Tau,
        ProcessTerm::Par(Box::new(lt.clone()), Box::new(rt.clone())),
        ExecCtx::Stable(bound),
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::Slot;
    use crate::syntax::{elaborate, parse_program};

    fn prog(src: &str) -> Program {
        let mut p = parse_program(src).unwrap();
        elaborate(&mut p).unwrap();
        p
    }

    fn start(p: &Program) -> ExecState {
        ExecState {
            term: ProcessTerm::Invoke("Main".into(), Vec::new()),
            ctx: ExecCtx::Stable(Context::empty(p.fresh_base)),
        }
    }

    /// Follow the first successor until none remain, recording labels.
    fn drive_first(state: &mut ExecState, p: &Program, limit: usize) -> Vec<Label> {
        let mut labels = Vec::new();
        for _ in 0..limit {
            let succ = transitions(state, p).unwrap();
            let Some((label, next)) = succ.into_iter().next() else { return labels };
            labels.push(label);
            *state = next;
        }
        panic!("run did not settle within {limit} steps");
    }

    #[test]
    fn values_flow_through_a_channel() {
        let p = prog("Main = [ nat[k] : ( ( c?k . end || c!5 . end ) |{c} ) ]");
        let mut s = start(&p);

        let succ = transitions(&s, &p).unwrap();
        assert_eq!(succ.len(), 1);
        assert_eq!(succ[0].0, Label::Decl);
        s = succ[0].1.clone();

        let succ = transitions(&s, &p).unwrap();
        assert_eq!(succ.len(), 1, "restricted actions leave only the handshake");
        assert_eq!(succ[0].0, Label::Tau);
        s = succ[0].1.clone();
        let store = &s.ctx.stable().unwrap().store;
        assert_eq!(store.values().copied().collect::<Vec<_>>(), vec![5]);

        let labels = drive_first(&mut s, &p, 8);
        assert_eq!(labels, vec![Label::Delta]);
        assert_eq!(s.term, ProcessTerm::Nil);
        assert!(s.ctx.stable().unwrap().store.is_empty());
    }

    #[test]
    fn qubit_receive_initializes_and_blocks_reuse() {
        let p = prog("Main = [ qubit[x] : ( ( c?x . c?x . end || c!0 . c!1 . end ) |{c} ) ]");
        let mut s = start(&p);
        let labels = drive_first(&mut s, &p, 8);
        assert_eq!(labels, vec![Label::Decl, Label::Tau]);
        let ctx = s.ctx.stable().unwrap();
        assert_eq!(ctx.qseq.len(), 1);
        assert!(matches!(&ctx.qseq[0], Slot::Named(_)));
        assert_eq!(ctx.state.amps()[0].re, 1.0);
        assert_ne!(s.term, ProcessTerm::Nil, "second receive deadlocks");
    }

    #[test]
    fn measurement_must_be_resolved_before_anything_else() {
        let p = prog(
            "Main = [ qubit[x] : ( ( c?x . H[x] . M_std[x] . end || c!0 . end ) |{c} ) ]",
        );
        let mut s = start(&p);
        // decl, handshake, H, then the measurement tau.
        for _ in 0..4 {
            let succ = transitions(&s, &p).unwrap();
            s = succ.into_iter().next().unwrap().1;
        }
        assert!(!s.ctx.is_stable());
        let succ = transitions(&s, &p).unwrap();
        assert_eq!(succ.len(), 2);
        for (label, next) in &succ {
            let Label::Prob(pr) = label else { panic!("expected prob, got {label}") };
            assert!((pr - 0.5).abs() < 1e-12);
            assert!(next.ctx.is_stable());
        }
        let mut s = succ[0].1.clone();
        drive_first(&mut s, &p, 8);
        assert_eq!(s.term, ProcessTerm::Nil);
        let ctx = s.ctx.stable().unwrap();
        assert_eq!(ctx.measured, vec![("M_std".to_string(), 0)]);
    }

    #[test]
    fn measurement_sent_on_a_channel_reaches_the_receiver() {
        let p = prog(
            "Main = [ qubit[x] : ( ( c?x . H[x] . m!M_std[x] . end \
             || c!0 . [ nat[r] : m?r . end ] ) |{c,m} ) ]",
        );
        let mut s = start(&p);
        let mut saw_split = false;
        for _ in 0..24 {
            let succ = transitions(&s, &p).unwrap();
            if succ.is_empty() {
                break;
            }
            if matches!(succ[0].0, Label::Prob(_)) {
                assert_eq!(succ.len(), 2);
                saw_split = true;
            }
            s = succ.into_iter().next().unwrap().1;
        }
        assert!(saw_split);
        assert_eq!(s.term, ProcessTerm::Nil);
        let ctx = s.ctx.stable().unwrap();
        assert_eq!(ctx.measured.len(), 1);
        assert!(ctx.store.is_empty(), "the result variable dies with its scope");
    }

    #[test]
    fn conditions_gate_choice_branches() {
        let p = prog(
            "Main = [ nat[k] : ( ( c?k . ( [] k = 0 -> a!0 . end \
             [] k = 1 -> b!1 . end [] k < 9 -> d!2 . end ) || c!1 . end ) |{c} ) ]",
        );
        let mut s = start(&p);
        for _ in 0..2 {
            let succ = transitions(&s, &p).unwrap();
            s = succ.into_iter().next().unwrap().1;
        }
        let labels: Vec<Label> = transitions(&s, &p)
            .unwrap()
            .into_iter()
            .map(|(l, _)| l)
            .collect();
        assert_eq!(
            labels,
            vec![Label::Emit("b".into(), 1), Label::Emit("d".into(), 2)]
        );
    }

    #[test]
    fn unset_condition_variable_is_an_error() {
        let p = prog("Main = [ nat[k] : ( [] k = 0 -> end ) ]");
        let s = start(&p);
        let succ = transitions(&s, &p).unwrap();
        let s = succ.into_iter().next().unwrap().1;
        assert!(transitions(&s, &p).is_err());
    }

    #[test]
    fn unfolding_freshens_binders_each_time() {
        let p = prog("A = [ qubit[x] : H[x] . end ]\nMain = A ; A");
        let mut fresh = p.fresh_base;
        let first = unfold("A", &[], &p, &mut fresh).unwrap();
        let second = unfold("A", &[], &p, &mut fresh).unwrap();
        let binder = |t: &ProcessTerm| match t {
            ProcessTerm::Scope { quantum, .. } => quantum[0].clone(),
            _ => panic!("expected scope"),
        };
        assert_ne!(binder(&first), binder(&second));
    }

    #[test]
    fn partial_application_keeps_remaining_formals_declared() {
        let p = prog("B = [ nat[k] qubit[x,y] : c!k . Swap[x,y] . end ]\nMain = end");
        let mut fresh = p.fresh_base;
        let t = unfold("B", &["seven".into()], &p, &mut fresh).unwrap();
        let ProcessTerm::Scope { classical, quantum, body } = &t else {
            panic!("expected remaining scope")
        };
        assert!(classical.is_empty());
        assert_eq!(quantum.len(), 2);
        let ProcessTerm::Prefix(Action::EmitVar(_, k), rest) = &**body else {
            panic!("expected emit prefix")
        };
        assert_eq!(k, "seven");
        let ProcessTerm::Prefix(Action::ApplyUnitary(_, targets), _) = &**rest else {
            panic!("expected unitary prefix")
        };
        assert_eq!(targets, quantum, "uses follow the freshened binders");
    }

    #[test]
    fn infinite_unfolding_is_reported() {
        let p = prog("Loop = Loop\nMain = Loop");
        let s = start(&p);
        let err = transitions(&s, &p).unwrap_err();
        assert!(matches!(err, Error::Step(_)));
    }

    #[test]
    fn interleaving_order_is_deterministic() {
        let p = prog("Main = a!1 . end || b!2 . end");
        let s = start(&p);
        let labels: Vec<Label> = transitions(&s, &p)
            .unwrap()
            .into_iter()
            .map(|(l, _)| l)
            .collect();
        assert_eq!(
            labels,
            vec![Label::Emit("a".into(), 1), Label::Emit("b".into(), 2)]
        );
    }
}
