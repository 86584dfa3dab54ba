//! Render terms back to concrete syntax; `parse(pretty(t)) == t` for any
//! parseable term.

use crate::syntax::ast::*;

const PAR: u8 = 0;
const SEQ: u8 = 1;
const PFX: u8 = 2;
const ATOM: u8 = 3;

fn level(t: &ProcessTerm) -> u8 {
    match t {
        ProcessTerm::Par(_, _) => PAR,
        ProcessTerm::Seq(_, _) => SEQ,
        ProcessTerm::Prefix(_, _) | ProcessTerm::Restrict(_, _) => PFX,
        ProcessTerm::Nil
        | ProcessTerm::End
        | ProcessTerm::Invoke(_, _)
        | ProcessTerm::Choice(_)
        | ProcessTerm::Scope { .. } => ATOM,
    }
}

fn go(t: &ProcessTerm, min: u8, out: &mut String) {
    let parens = level(t) < min;
    if parens {
        out.push_str("( ");
    }
    match t {
        ProcessTerm::Nil => out.push_str("nil"),
        ProcessTerm::End => out.push_str("end"),
        ProcessTerm::Invoke(name, args) => {
            out.push_str(name);
            if !args.is_empty() {
                push_args(args, out);
            }
        }
        ProcessTerm::Prefix(act, cont) => {
            out.push_str(&pretty_action(act));
            out.push_str(" . ");
            go(cont, PFX, out);
        }
        ProcessTerm::Seq(a, b) => {
            go(a, SEQ, out);
            out.push_str(" ; ");
            go(b, PFX, out);
        }
        ProcessTerm::Par(a, b) => {
            go(a, PAR, out);
            out.push_str(" || ");
            go(b, SEQ, out);
        }
        ProcessTerm::Choice(branches) => {
            out.push_str("( ");
            for (i, (cond, body)) in branches.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                out.push_str("[] ");
                out.push_str(&pretty_cond(cond));
                out.push_str(" -> ");
                go(body, PAR, out);
            }
            out.push_str(" )");
        }
        ProcessTerm::Restrict(p, gates) => {
            go(p, ATOM, out);
            out.push_str(" |{");
            for (i, g) in gates.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(g);
            }
            out.push('}');
        }
        ProcessTerm::Scope { classical, quantum, body } => {
            out.push_str("[ ");
            if !classical.is_empty() {
                out.push_str("nat");
                push_args(classical, out);
                out.push(' ');
            }
            if !quantum.is_empty() {
                out.push_str("qubit");
                push_args(quantum, out);
                out.push(' ');
            }
            out.push_str(": ");
            go(body, PAR, out);
            out.push_str(" ]");
        }
    }
    if parens {
        out.push_str(" )");
    }
}

fn push_args(args: &[String], out: &mut String) {
    out.push('[');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(a);
    }
    out.push(']');
}

/// Render a process term.
pub fn pretty(t: &ProcessTerm) -> String {
    let mut out = String::new();
    go(t, PAR, &mut out);
    out
}

/// Render an action as it appears in prefix position.
pub fn pretty_action(a: &Action) -> String {
    match a {
        Action::EmitValue(g, v) => format!("{g}!{v}"),
        Action::EmitVar(g, x) => format!("{g}!{x}"),
        Action::EmitMeasure(g, obs, targets) => {
            let mut s = format!("{g}!{obs}");
            push_args(targets, &mut s);
            s
        }
        Action::Receive(g, x) => format!("{g}?{x}"),
        Action::ApplyUnitary(name, targets) | Action::MeasureOnly(name, targets) => {
            let mut s = name.clone();
            push_args(targets, &mut s);
            s
        }
    }
}

/// Render a branch condition.
pub fn pretty_cond(c: &Cond) -> String {
    let arg = |a: &CondArg| match a {
        CondArg::Var(x) => x.clone(),
        CondArg::Num(n) => n.to_string(),
    };
    let op = match c.op {
        CompOp::Eq => "=",
        CompOp::Ne => "/=",
        CompOp::Le => "<=",
        CompOp::Ge => ">=",
        CompOp::Lt => "<",
        CompOp::Gt => ">",
    };
    format!("{} {op} {}", arg(&c.lhs), arg(&c.rhs))
}
