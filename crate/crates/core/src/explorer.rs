//! Exploration of the execution tree: exhaustive expansion, scheduled
//! sampling, exact outcome distributions, and extraction of single-qubit
//! final states.

use std::collections::{BTreeMap, VecDeque};

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::context::{Context, ExecCtx, Slot};
use crate::error::{Error, Result};
use crate::quantum::StateVector;
use crate::semantics::{transitions, ExecState, Label};
use crate::syntax::{pretty, ProcessTerm, Program};

/// How a scheduler resolves nondeterminism between stable successors. It
/// never chooses among probabilistic branches — those are drawn by weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchedulerPolicy {
    First,
    Uniform,
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Terminated,
    Stuck,
    Truncated,
}

#[derive(Debug, Clone)]
pub struct TraceStep {
    pub label: Label,
    pub state: ExecState,
}

/// One scheduled run.
#[derive(Debug, Clone)]
pub struct Trace {
    pub initial: ExecState,
    pub steps: Vec<TraceStep>,
    pub status: RunStatus,
}

impl Trace {
    pub fn final_state(&self) -> &ExecState {
        self.steps.last().map(|s| &s.state).unwrap_or(&self.initial)
    }
}

#[derive(Debug, Clone)]
pub struct TreeNode {
    pub state: ExecState,
    pub edges: Vec<(Label, usize)>,
    pub depth: usize,
    /// Successors existed but fell outside the depth or node budget.
    pub truncated: bool,
    /// Reached by a receive from the environment; kept as a stub.
    pub open: bool,
}

/// Breadth-first expansion of every reachable state. Node 0 is the root.
#[derive(Debug, Clone)]
pub struct ExecutionTree {
    pub nodes: Vec<TreeNode>,
}

impl ExecutionTree {
    pub fn is_truncated(&self) -> bool {
        self.nodes.iter().any(|n| n.truncated)
    }

    pub fn has_open_edges(&self) -> Option<&Label> {
        self.nodes
            .iter()
            .flat_map(|n| n.edges.iter())
            .map(|(l, _)| l)
            .find(|l| matches!(l, Label::Emit(..) | Label::Receive(..)))
    }
}

/// The entry state: an argumentless invocation of `entry` in the empty
/// context.
pub fn initial_state(program: &Program, entry: &str) -> Result<ExecState> {
    if !program.defs.contains_key(entry) {
        return Err(Error::UnknownEntry(entry.to_string()));
    }
    Ok(ExecState {
        term: ProcessTerm::Invoke(entry.to_string(), Vec::new()),
        ctx: ExecCtx::Stable(Context::empty(program.fresh_base)),
    })
}

/// Expand breadth-first up to `max_depth` and `max_nodes`. A node whose
/// successors would overrun a budget is marked truncated and kept as a
/// leaf; all children of a node are added together or not at all. Nodes
/// reached by a receive are stubs and never expanded.
pub fn build_tree(
    init: &ExecState,
    program: &Program,
    max_depth: usize,
    max_nodes: usize,
) -> Result<ExecutionTree> {
    let mut nodes = vec![TreeNode {
        state: init.clone(),
        edges: Vec::new(),
        depth: 0,
        truncated: false,
        open: false,
    }];
    let mut queue = VecDeque::from([0usize]);
    while let Some(at) = queue.pop_front() {
        if nodes[at].open {
            continue;
        }
        let succ = transitions(&nodes[at].state, program)?;
        if succ.is_empty() {
            continue;
        }
        if nodes[at].depth >= max_depth || nodes.len() + succ.len() > max_nodes {
            nodes[at].truncated = true;
            continue;
        }
        for (label, state) in succ {
            let open = matches!(label, Label::Receive(..));
            let child = nodes.len();
            nodes[at].edges.push((label, child));
            nodes.push(TreeNode {
                state,
                edges: Vec::new(),
                depth: nodes[at].depth + 1,
                truncated: false,
                open,
            });
            queue.push_back(child);
        }
    }
    Ok(ExecutionTree { nodes })
}

/// A classified terminal: the chronological measurement record, and whether
/// the run deadlocked before reaching `nil`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Outcome {
    pub measured: Vec<(String, i64)>,
    pub stuck: bool,
}

/// The exact outcome distribution of a fully expanded closed tree under
/// `policy`. Probabilistic branches contribute by weight; nondeterminism
/// is resolved by the policy.
pub fn outcome_distribution(
    tree: &ExecutionTree,
    policy: SchedulerPolicy,
) -> Result<Vec<(Outcome, f64)>> {
    if tree.is_truncated() {
        return Err(Error::Truncated);
    }
    if let Some(label) = tree.has_open_edges() {
        return Err(Error::OpenAction { label: label.to_string() });
    }
    let mut acc: BTreeMap<Outcome, f64> = BTreeMap::new();
    let mut stackless = vec![(0usize, 1.0f64)];
    while let Some((at, weight)) = stackless.pop() {
        let node = &tree.nodes[at];
        if node.edges.is_empty() {
            let ctx = node
                .state
                .ctx
                .stable()
                .ok_or_else(|| Error::Step("unresolved probabilistic leaf".into()))?;
            let outcome = Outcome {
                measured: ctx.measured.clone(),
                stuck: node.state.term != ProcessTerm::Nil,
            };
            *acc.entry(outcome).or_insert(0.0) += weight;
            continue;
        }
        if node.edges.iter().all(|(l, _)| matches!(l, Label::Prob(_))) {
            for (label, child) in &node.edges {
                let Label::Prob(p) = label else { unreachable!() };
                stackless.push((*child, weight * p));
            }
        } else {
            match policy {
                SchedulerPolicy::First => stackless.push((node.edges[0].1, weight)),
                SchedulerPolicy::Uniform => {
                    let share = weight / node.edges.len() as f64;
                    for (_, child) in &node.edges {
                        stackless.push((*child, share));
                    }
                }
            }
        }
    }
    Ok(acc.into_iter().collect())
}

/// One scheduled run from `init`, drawing probabilistic branches by weight
/// and breaking stable ties by `policy`. In closed mode any surfaced
/// communication is an error; in open mode emits execute and receives are
/// unschedulable.
pub fn sample_trace(
    init: &ExecState,
    program: &Program,
    policy: SchedulerPolicy,
    seed: u64,
    max_steps: usize,
    allow_open: bool,
) -> Result<Trace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with(init, program, policy, &mut rng, max_steps, allow_open)
}

/// Independent samples; sample `i` draws from stream `i + 1` of the seed so
/// results are reproducible regardless of scheduling.
pub fn sample_many(
    init: &ExecState,
    program: &Program,
    policy: SchedulerPolicy,
    seed: u64,
    max_steps: usize,
    allow_open: bool,
    count: usize,
) -> Result<Vec<Trace>> {
    let one = |i: usize| -> Result<Trace> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64 + 1);
        sample_with(init, program, policy, &mut rng, max_steps, allow_open)
    };
    #[cfg(feature = "parallel")]
    {
        (0..count).into_par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(one).collect()
    }
}

fn sample_with(
    init: &ExecState,
    program: &Program,
    policy: SchedulerPolicy,
    rng: &mut ChaCha8Rng,
    max_steps: usize,
    allow_open: bool,
) -> Result<Trace> {
    let mut steps = Vec::new();
    let mut state = init.clone();
    for _ in 0..max_steps {
        let succ = transitions(&state, program)?;
        if succ.is_empty() {
            let status = if state.term == ProcessTerm::Nil {
                RunStatus::Terminated
            } else {
                RunStatus::Stuck
            };
            return Ok(Trace { initial: init.clone(), steps, status });
        }
        let chosen = if !state.ctx.is_stable() {
            let draw: f64 = rng.gen();
            let mut acc = 0.0;
            let mut chosen = succ.len() - 1;
            for (i, (label, _)) in succ.iter().enumerate() {
                let Label::Prob(p) = label else {
                    return Err(Error::Step("mixed state with a non-probabilistic successor".into()));
                };
                acc += p;
                if draw < acc {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            if !allow_open {
                if let Some((label, _)) = succ
                    .iter()
                    .find(|(l, _)| matches!(l, Label::Emit(..) | Label::Receive(..)))
                {
                    return Err(Error::OpenAction { label: label.to_string() });
                }
            }
            let schedulable: Vec<usize> = succ
                .iter()
                .enumerate()
                .filter(|(_, (l, _))| !matches!(l, Label::Receive(..)))
                .map(|(i, _)| i)
                .collect();
            if schedulable.is_empty() {
                return Ok(Trace { initial: init.clone(), steps, status: RunStatus::Stuck });
            }
            match policy {
                SchedulerPolicy::First => schedulable[0],
                SchedulerPolicy::Uniform => schedulable[rng.gen_range(0..schedulable.len())],
            }
        };
        let (label, next) = succ.into_iter().nth(chosen).expect("chosen successor");
        steps.push(TraceStep { label, state: next.clone() });
        state = next;
    }
    Ok(Trace { initial: init.clone(), steps, status: RunStatus::Truncated })
}

fn strip_fresh_suffix(name: &str) -> &str {
    match name.rsplit_once('#') {
        Some((stem, digits))
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) =>
        {
            stem
        }
        _ => name,
    }
}

/// The final single-qubit state of `var` after a run, up to global phase.
/// The qubit is located by its last named slot (freed slots keep their
/// position; later initializations only prepend) and must be separable
/// from the rest of the register.
pub fn final_quantum_state(trace: &Trace, var: &str) -> Result<StateVector> {
    let final_ctx = match &trace.final_state().ctx {
        ExecCtx::Stable(c) => c,
        ExecCtx::Mixed(_) => {
            return Err(Error::Step("final context is an unresolved mixture".into()))
        }
    };
    let snapshots = trace
        .steps
        .iter()
        .rev()
        .map(|s| &s.state)
        .chain(std::iter::once(&trace.initial));
    let mut located = None;
    for snap in snapshots {
        let Some(ctx) = snap.ctx.stable() else { continue };
        let hits: Vec<usize> = ctx
            .qseq
            .iter()
            .enumerate()
            .filter(|(_, slot)| match slot {
                Slot::Named(n) => n == var || strip_fresh_suffix(n) == var,
                Slot::Freed => false,
            })
            .map(|(i, _)| i)
            .collect();
        match hits.len() {
            0 => continue,
            1 => {
                located = Some((hits[0], ctx.qseq.len()));
                break;
            }
            _ => return Err(Error::Step(format!("qubit `{var}` is ambiguous in this run"))),
        }
    }
    let Some((pos_then, width_then)) = located else {
        return Err(Error::Step(format!("qubit `{var}` was never initialized")));
    };
    let width = final_ctx.qseq.len();
    let pos = pos_then + (width - width_then);
    factor_out(final_ctx.state.amps(), width, pos, var)
}

/// Split the register at bit `pos` and keep the 2-dimensional factor if the
/// state is a product across that cut.
fn factor_out(amps: &[Complex64], width: usize, pos: usize, var: &str) -> Result<StateVector> {
    let shift = width - 1 - pos;
    let rest = 1usize << (width - 1);
    // Rows of m are the two slices of the state at bit `pos`.
    let mut m = [vec![Complex64::new(0.0, 0.0); rest], vec![Complex64::new(0.0, 0.0); rest]];
    for (index, amp) in amps.iter().enumerate() {
        let bit = (index >> shift) & 1;
        let low = index & ((1 << shift) - 1);
        let col = (index >> (shift + 1)) << shift | low;
        m[bit][col] = *amp;
    }
    let inner = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
    };
    let g00 = inner(&m[0], &m[0]).re;
    let g11 = inner(&m[1], &m[1]).re;
    let g01 = inner(&m[0], &m[1]);
    let mean = (g00 + g11) / 2.0;
    let hi = mean + ((g00 - g11) / 2.0).hypot(g01.norm());
    let mut u = if g01.norm() > 1e-15 {
        [g01, Complex64::new(hi - g00, 0.0)]
    } else if g00 >= g11 {
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
    } else {
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
    };
    let len = (u[0].norm_sqr() + u[1].norm_sqr()).sqrt();
    u[0] /= len;
    u[1] /= len;
    // Reconstruction error of the best product state u ⊗ v; measured
    // directly so an exactly separable register scores at float noise.
    let mut residual = 0.0;
    for (a, b) in m[0].iter().zip(&m[1]) {
        let v = u[0].conj() * a + u[1].conj() * b;
        residual += (a - u[0] * v).norm_sqr() + (b - u[1] * v).norm_sqr();
    }
    if residual.sqrt() >= 1e-8 {
        return Err(Error::NotSeparable(format!(
            "qubit `{var}` is entangled with the rest of the register (residual {:.3e})",
            residual.sqrt()
        )));
    }
    StateVector::from_amps(u.to_vec())
}

fn slot_json(slot: &Slot) -> serde_json::Value {
    match slot {
        Slot::Named(n) => serde_json::Value::String(n.clone()),
        Slot::Freed => serde_json::Value::String("*".to_string()),
    }
}

fn ctx_fields(ctx: &ExecCtx, verbose: bool, out: &mut serde_json::Map<String, serde_json::Value>) {
    match ctx {
        ExecCtx::Stable(c) => {
            out.insert(
                "qseq".into(),
                serde_json::Value::Array(c.qseq.iter().map(slot_json).collect()),
            );
            out.insert(
                "store".into(),
                serde_json::Value::Object(
                    c.store
                        .iter()
                        .map(|(k, v)| (k.clone(), serde_json::json!(*v)))
                        .collect(),
                ),
            );
            if verbose {
                out.insert(
                    "amplitudes".into(),
                    serde_json::json!(c
                        .state
                        .amps()
                        .iter()
                        .map(|a| [a.re, a.im])
                        .collect::<Vec<_>>()),
                );
            }
        }
        ExecCtx::Mixed(_) => {
            out.insert("qseq".into(), serde_json::Value::Null);
            out.insert("store".into(), serde_json::Value::Null);
            if verbose {
                out.insert("amplitudes".into(), serde_json::Value::Null);
            }
        }
    }
}

fn step_json(label: &Label, state: &ExecState, verbose: bool) -> serde_json::Value {
    let mut fields = serde_json::Map::new();
    fields.insert("label".into(), serde_json::json!(label.to_string()));
    if let Label::Prob(p) = label {
        fields.insert("prob".into(), serde_json::json!(*p));
    }
    fields.insert("term".into(), serde_json::json!(pretty(&state.term)));
    ctx_fields(&state.ctx, verbose, &mut fields);
    serde_json::Value::Object(fields)
}

/// One JSON object per executed step; the initial state is not emitted.
pub fn trace_to_json_lines(trace: &Trace, verbose: bool) -> String {
    trace
        .steps
        .iter()
        .map(|s| step_json(&s.label, &s.state, verbose).to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn tree_to_json(tree: &ExecutionTree, verbose: bool) -> String {
    let nodes: Vec<serde_json::Value> = tree
        .nodes
        .iter()
        .map(|n| {
            let mut fields = serde_json::Map::new();
            fields.insert("term".into(), serde_json::json!(pretty(&n.state.term)));
            ctx_fields(&n.state.ctx, verbose, &mut fields);
            let edges: Vec<serde_json::Value> = n
                .edges
                .iter()
                .map(|(label, to)| {
                    let mut e = serde_json::Map::new();
                    e.insert("label".into(), serde_json::json!(label.to_string()));
                    if let Label::Prob(p) = label {
                        e.insert("prob".into(), serde_json::json!(*p));
                    }
                    e.insert("to".into(), serde_json::json!(*to));
                    serde_json::Value::Object(e)
                })
                .collect();
            fields.insert("edges".into(), serde_json::Value::Array(edges));
            fields.insert("truncated".into(), serde_json::json!(n.truncated));
            fields.insert("open".into(), serde_json::json!(n.open));
            serde_json::Value::Object(fields)
        })
        .collect();
    serde_json::json!({ "nodes": nodes }).to_string()
}

pub fn tree_to_dot(tree: &ExecutionTree) -> String {
    let mut out = String::from("digraph execution {\n  rankdir=TB;\n");
    for (i, n) in tree.nodes.iter().enumerate() {
        let mut term = pretty(&n.state.term);
        if term.len() > 40 {
            term.truncate(37);
            term.push_str("...");
        }
        let label = term.replace('\\', "\\\\").replace('"', "\\\"");
        let shape = if !n.edges.is_empty() {
            "ellipse"
        } else if n.state.term == ProcessTerm::Nil {
            "doublecircle"
        } else {
            "box"
        };
        let style = if n.truncated {
            ", style=dashed"
        } else if n.open {
            ", style=dotted"
        } else {
            ""
        };
        out.push_str(&format!("  n{i} [label=\"{label}\", shape={shape}{style}];\n"));
    }
    for (i, n) in tree.nodes.iter().enumerate() {
        for (label, to) in &n.edges {
            let text = match label {
                Label::Prob(p) => format!("p={p:.4}"),
                other => other.to_string(),
            };
            out.push_str(&format!("  n{i} -> n{to} [label=\"{text}\"];\n"));
        }
    }
    out.push_str("}\n");
    out
}
