//! Command-line front end: validate programs, sample runs, expand execution
//! trees, and compute outcome distributions.
//!
//! Exit codes: 0 success; 1 program fault (syntax, elaboration, definitions,
//! unknown entry); 2 I/O or usage; 3 run stuck; 4 tree or run truncated;
//! 5 open action in a closed run.

use std::path::{Path, PathBuf};
use std::process::exit;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qproc_core::explorer::{
    build_tree, initial_state, outcome_distribution, sample_trace, trace_to_json_lines,
    tree_to_dot, tree_to_json, ExecutionTree, RunStatus, SchedulerPolicy,
};
use qproc_core::semantics::Label;
use qproc_core::syntax::{elaborate, parse_program, pretty, Program};
use qproc_core::Error;

#[derive(Parser)]
#[command(name = "qproc", version, about = "Process-calculus interpreter and simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and elaborate a program, reporting diagnostics.
    Check(Common),
    /// Sample one seeded run and print it as JSON lines.
    Run(Common),
    /// Expand the execution tree.
    Tree(Common),
    /// Compute the exact outcome distribution.
    Dist(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    First,
    Uniform,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Args)]
struct Common {
    /// Program source file.
    source: PathBuf,
    /// Entry process name.
    #[arg(long, default_value = "Main")]
    entry: String,
    /// Master random seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Scheduling policy for nondeterministic choice.
    #[arg(long, value_enum, default_value_t = Policy::First)]
    policy: Policy,
    /// Execution tree depth limit.
    #[arg(long, default_value_t = 64)]
    max_depth: usize,
    /// Execution tree node limit.
    #[arg(long, default_value_t = 100_000)]
    max_nodes: usize,
    /// Sampled run step limit.
    #[arg(long, default_value_t = 4096)]
    max_steps: usize,
    /// Let emissions to the environment execute instead of failing.
    #[arg(long)]
    open: bool,
    /// Extra gate/observable definitions file.
    #[arg(long, env = "QPROC_DEFS")]
    defs: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Include amplitude vectors in serialized contexts.
    #[arg(long)]
    verbose: bool,
}

fn main() {
    let cli = Cli::parse();
    let common = match &cli.cmd {
        Cmd::Check(c) | Cmd::Run(c) | Cmd::Tree(c) | Cmd::Dist(c) => c,
    };
    if common.max_depth == 0 || common.max_nodes == 0 || common.max_steps == 0 {
        eprintln!("qproc: limits must be positive");
        exit(2);
    }
    let code = match &cli.cmd {
        Cmd::Check(c) => cmd_check(c),
        Cmd::Run(c) => cmd_run(c),
        Cmd::Tree(c) => cmd_tree(c),
        Cmd::Dist(c) => cmd_dist(c),
    };
    exit(code);
}

/// A failure already rendered for stderr, paired with its exit code.
struct Failure(i32, String);

fn fail(f: Failure) -> i32 {
    eprintln!("{}", f.1);
    f.0
}

fn cmd_check(c: &Common) -> i32 {
    match load_program(c) {
        Ok(_) => 0,
        Err(f) => fail(f),
    }
}

fn cmd_run(c: &Common) -> i32 {
    let (program, init) = match prepared(c) {
        Ok(p) => p,
        Err(f) => return fail(f),
    };
    let trace = match sample_trace(&init, &program, c.policy(), c.seed, c.max_steps, c.open) {
        Ok(t) => t,
        Err(e) => return fail(run_failure(c, e)),
    };
    let lines = trace_to_json_lines(&trace, c.verbose);
    if !lines.is_empty() {
        println!("{lines}");
    }
    match trace.status {
        RunStatus::Terminated => 0,
        RunStatus::Stuck => 3,
        RunStatus::Truncated => 4,
    }
}

fn cmd_tree(c: &Common) -> i32 {
    let (program, init) = match prepared(c) {
        Ok(p) => p,
        Err(f) => return fail(f),
    };
    let tree = match build_tree(&init, &program, c.max_depth, c.max_nodes) {
        Ok(t) => t,
        Err(e) => return fail(program_failure_err(c, e)),
    };
    let out = match c.format {
        Format::Dot => tree_to_dot(&tree),
        Format::Json => tree_to_json(&tree, c.verbose),
        Format::Text => tree_text(&tree),
    };
    print!("{out}");
    if !out.ends_with('\n') {
        println!();
    }
    0
}

fn cmd_dist(c: &Common) -> i32 {
    if c.format == Format::Dot {
        eprintln!("qproc: dot output applies to `tree` only");
        return 2;
    }
    let (program, init) = match prepared(c) {
        Ok(p) => p,
        Err(f) => return fail(f),
    };
    let rows = build_tree(&init, &program, c.max_depth, c.max_nodes)
        .and_then(|tree| outcome_distribution(&tree, c.policy()));
    let rows = match rows {
        Ok(r) => r,
        Err(e) => return fail(run_failure(c, e)),
    };
    match c.format {
        Format::Text => {
            for (outcome, p) in &rows {
                let values: Vec<String> =
                    outcome.measured.iter().map(|(_, v)| v.to_string()).collect();
                let suffix = if outcome.stuck { " stuck" } else { "" };
                println!("({}) {:.11e}{suffix}", values.join(", "), p);
            }
        }
        Format::Json => {
            let items: Vec<serde_json::Value> = rows
                .iter()
                .map(|(outcome, p)| {
                    let values: Vec<i64> = outcome.measured.iter().map(|(_, v)| *v).collect();
                    serde_json::json!({
                        "outcome": values,
                        "stuck": outcome.stuck,
                        "prob": p,
                    })
                })
                .collect();
            println!("{}", serde_json::Value::Array(items));
        }
        Format::Dot => unreachable!(),
    }
    0
}

impl Common {
    fn policy(&self) -> SchedulerPolicy {
        match self.policy {
            Policy::First => SchedulerPolicy::First,
            Policy::Uniform => SchedulerPolicy::Uniform,
        }
    }
}

fn prepared(c: &Common) -> Result<(Program, qproc_core::semantics::ExecState), Failure> {
    let program = load_program(c)?;
    let init = initial_state(&program, &c.entry).map_err(|e| program_failure_err(c, e))?;
    Ok((program, init))
}

fn load_program(c: &Common) -> Result<Program, Failure> {
    let src = std::fs::read_to_string(&c.source)
        .map_err(|e| Failure(2, format!("{}: {e}", c.source.display())))?;
    let mut program =
        parse_program(&src).map_err(|e| positioned(&c.source, &src, e))?;
    if let Some(defs_path) = &c.defs {
        let text = std::fs::read_to_string(defs_path)
            .map_err(|e| Failure(2, format!("{}: {e}", defs_path.display())))?;
        program
            .registry
            .load_defs(&text)
            .map_err(|e| defs_failure(defs_path, e))?;
    }
    elaborate(&mut program).map_err(|e| positioned(&c.source, &src, e))?;
    Ok(program)
}

/// Render a core error against the source file with its best-known position.
fn positioned(path: &Path, src: &str, e: Error) -> Failure {
    let (line, col, message) = match e {
        Error::Syntax { line, col, message } => (line, col, message),
        Error::Elaborate { message, name } => {
            let (line, col) = name
                .and_then(|n| find_ident(src, &n))
                .unwrap_or((1, 1));
            (line, col, message)
        }
        other => (1, 1, other.to_string()),
    };
    Failure(1, format!("{}:{line}:{col}: {message}", path.display()))
}

fn defs_failure(path: &Path, e: Error) -> Failure {
    let (line, message) = match e {
        Error::Defs { line, message } => (line, message),
        other => (1, other.to_string()),
    };
    Failure(1, format!("{}:{line}:1: {message}", path.display()))
}

fn program_failure_err(c: &Common, e: Error) -> Failure {
    Failure(1, format!("{}: {e}", c.source.display()))
}

/// Map run-time failures onto the documented exit codes.
fn run_failure(c: &Common, e: Error) -> Failure {
    let code = match &e {
        Error::OpenAction { .. } => 5,
        Error::Truncated => 4,
        _ => 1,
    };
    Failure(code, format!("{}: {e}", c.source.display()))
}

/// First occurrence of `name` in `src` at identifier boundaries, as 1-based
/// line and column.
fn find_ident(src: &str, name: &str) -> Option<(usize, usize)> {
    let is_ident = |b: u8| b.is_ascii_alphanumeric() || b == b'_' || b == b'#';
    let bytes = src.as_bytes();
    let mut from = 0;
    while let Some(at) = src[from..].find(name).map(|i| i + from) {
        let before_ok = at == 0 || !is_ident(bytes[at - 1]);
        let end = at + name.len();
        let after_ok = end == bytes.len() || !is_ident(bytes[end]);
        if before_ok && after_ok {
            let line = src[..at].bytes().filter(|b| *b == b'\n').count() + 1;
            let col = at - src[..at].rfind('\n').map_or(0, |i| i + 1) + 1;
            return Some((line, col));
        }
        from = at + 1;
    }
    None
}

/// Indented one-node-per-line rendering of an execution tree.
fn tree_text(tree: &ExecutionTree) -> String {
    fn rec(tree: &ExecutionTree, at: usize, depth: usize, via: Option<&Label>, out: &mut String) {
        let node = &tree.nodes[at];
        out.push_str(&"  ".repeat(depth));
        if let Some(label) = via {
            let text = match label {
                Label::Prob(p) => format!("p={p:.4}"),
                other => other.to_string(),
            };
            out.push_str(&text);
            out.push_str(" -> ");
        }
        out.push_str(&pretty(&node.state.term));
        if node.truncated {
            out.push_str("  [truncated]");
        }
        if node.open {
            out.push_str("  [open]");
        }
        out.push('\n');
        for (label, child) in &node.edges {
            rec(tree, *child, depth + 1, Some(label), out);
        }
    }
    let mut out = String::new();
    rec(tree, 0, 0, None, &mut out);
    out
}
