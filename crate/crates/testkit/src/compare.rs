//! Lockstep comparison of the optimized engine against the naive
//! interpreter: both labeled transition systems are explored from the same
//! entry point and must match state for state and edge for edge.

use std::collections::{BTreeSet, VecDeque};

use qproc_core::context::{ExecCtx, Slot};
use qproc_core::explorer::initial_state;
use qproc_core::semantics::{transitions, ExecState, Label};
use qproc_core::syntax::{elaborate, parse_program, pretty, Program};

use crate::dense::max_abs_diff;
use crate::naive::{canon_core, naive_initial, naive_transitions, NCtx, NCtxS, NState};

const AMP_TOL: f64 = 1e-9;

fn label_key(l: &Label) -> String {
    match l {
        Label::Prob(_) => "prob".to_string(),
        other => other.to_string(),
    }
}

fn core_ctx_key(c: &qproc_core::context::Context) -> String {
    let qseq: Vec<&str> = c
        .qseq
        .iter()
        .map(|s| match s {
            Slot::Named(n) => n.as_str(),
            Slot::Freed => "*",
        })
        .collect();
    format!(
        "{} / {:?} / {:?} / {:?} / {}",
        canon_core(&c.stack),
        qseq,
        c.store,
        c.measured,
        c.fresh
    )
}

fn naive_ctx_key(c: &NCtx) -> String {
    let qseq: Vec<&str> = c
        .names
        .iter()
        .map(|s| s.as_deref().unwrap_or("*"))
        .collect();
    format!(
        "{} / {:?} / {:?} / {:?} / {}",
        c.stack.canon(),
        qseq,
        c.store,
        c.measured,
        c.fresh
    )
}

fn core_key(s: &ExecState) -> String {
    match &s.ctx {
        ExecCtx::Stable(c) => format!("{} @ {}", pretty(&s.term), core_ctx_key(c)),
        ExecCtx::Mixed(pc) => {
            let mut parts: Vec<String> =
                pc.branches().iter().map(|(_, c)| core_ctx_key(c)).collect();
            parts.sort();
            format!("{} @ mixed[{}]", pretty(&s.term), parts.join(" ; "))
        }
    }
}

fn naive_key(s: &NState) -> String {
    match &s.ctx {
        NCtxS::Stable(c) => format!("{} @ {}", pretty(&s.term), naive_ctx_key(c)),
        NCtxS::Mixed(branches) => {
            let mut parts: Vec<String> =
                branches.iter().map(|(_, c)| naive_ctx_key(c)).collect();
            parts.sort();
            format!("{} @ mixed[{}]", pretty(&s.term), parts.join(" ; "))
        }
    }
}

fn check_amplitudes(cs: &ExecState, ns: &NState) {
    match (&cs.ctx, &ns.ctx) {
        (ExecCtx::Stable(c), NCtxS::Stable(n)) => {
            let diff = max_abs_diff(c.state.amps(), &n.amps);
            assert!(diff < AMP_TOL, "amplitudes diverge by {diff:.3e} at {}", core_key(cs));
        }
        (ExecCtx::Mixed(pc), NCtxS::Mixed(nb)) => {
            let mut cb: Vec<(String, f64, &[num_complex::Complex64])> = pc
                .branches()
                .iter()
                .map(|(p, c)| (core_ctx_key(c), *p, c.state.amps()))
                .collect();
            let mut nbv: Vec<(String, f64, &[num_complex::Complex64])> = nb
                .iter()
                .map(|(p, c)| (naive_ctx_key(c), *p, c.amps.as_slice()))
                .collect();
            cb.sort_by(|a, b| a.0.cmp(&b.0));
            nbv.sort_by(|a, b| a.0.cmp(&b.0));
            assert_eq!(cb.len(), nbv.len(), "branch counts diverge");
            for ((ck, cp, ca), (nk, np, na)) in cb.iter().zip(&nbv) {
                assert_eq!(ck, nk, "branch keys diverge");
                assert!((cp - np).abs() < AMP_TOL, "branch weights diverge: {cp} vs {np}");
                let diff = max_abs_diff(ca, na);
                assert!(diff < AMP_TOL, "branch amplitudes diverge by {diff:.3e}");
            }
        }
        _ => panic!("stability diverges at {}", core_key(cs)),
    }
}

/// Explore both transition systems from `entry` and assert they are the
/// same machine, up to `AMP_TOL` on amplitudes and branch weights.
pub fn assert_equivalent(src: &str, entry: &str, max_states: usize) {
    let mut program = parse_program(src).expect("parse");
    elaborate(&mut program).expect("elaborate");
    let start = (
        initial_state(&program, entry).expect("entry"),
        naive_initial(&program, entry),
    );
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut queue = VecDeque::from([start]);
    while let Some((cs, ns)) = queue.pop_front() {
        let ckey = core_key(&cs);
        let nkey = naive_key(&ns);
        assert_eq!(ckey, nkey, "states diverge");
        check_amplitudes(&cs, &ns);
        if !seen.insert(ckey.clone()) {
            continue;
        }
        assert!(seen.len() <= max_states, "more than {max_states} reachable states");

        let cres = transitions(&cs, &program);
        let nres = naive_transitions(&ns, &program);
        let (csucc, nsucc) = match (cres, nres) {
            (Err(_), Err(_)) => continue,
            (Ok(c), Ok(n)) => (c, n),
            (c, n) => panic!("error behavior diverges at {ckey}: {c:?} vs {n:?}"),
        };
        assert_eq!(csucc.len(), nsucc.len(), "successor counts diverge at {ckey}");

        let mut cs_sorted: Vec<(String, Label, ExecState)> = csucc
            .into_iter()
            .map(|(l, s)| (format!("{} -> {}", label_key(&l), core_key(&s)), l, s))
            .collect();
        let mut ns_sorted: Vec<(String, Label, NState)> = nsucc
            .into_iter()
            .map(|(l, s)| (format!("{} -> {}", label_key(&l), naive_key(&s)), l, s))
            .collect();
        cs_sorted.sort_by(|a, b| a.0.cmp(&b.0));
        ns_sorted.sort_by(|a, b| a.0.cmp(&b.0));
        for window in cs_sorted.windows(2) {
            assert_ne!(window[0].0, window[1].0, "ambiguous successors at {ckey}");
        }
        for ((ck, cl, cstate), (nk, nl, nstate)) in cs_sorted.into_iter().zip(ns_sorted) {
            assert_eq!(ck, nk, "edges diverge at {ckey}");
            if let (Label::Prob(cp), Label::Prob(np)) = (&cl, &nl) {
                assert!((cp - np).abs() < AMP_TOL, "edge weights diverge: {cp} vs {np}");
            }
            queue.push_back((cstate, nstate));
        }
    }
}

/// Every state reachable from `entry` under the optimized engine, capped at
/// `max_states`; errors (e.g. unbounded recursion) just stop that path.
pub fn collect_reachable(program: &Program, entry: &str, max_states: usize) -> Vec<ExecState> {
    let mut out = Vec::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut queue = VecDeque::from([initial_state(program, entry).expect("entry")]);
    while let Some(state) = queue.pop_front() {
        if !seen.insert(core_key(&state)) {
            continue;
        }
        out.push(state.clone());
        if out.len() >= max_states {
            break;
        }
        if let Ok(succ) = transitions(&state, program) {
            for (_, next) in succ {
                queue.push_back(next);
            }
        }
    }
    out
}
