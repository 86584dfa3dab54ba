//! The acceptance gate: ten end-to-end criteria with pinned tolerances.
//! Each test prints one PASS line; a failure fails the whole criterion.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use qproc_core::context::{Context, EnvStack, ExecCtx, Slot};
use qproc_core::explorer::{
    build_tree, final_quantum_state, initial_state, outcome_distribution, sample_trace,
    RunStatus, SchedulerPolicy, Trace, TraceStep,
};
use qproc_core::quantum::{
    validate_observable, validate_unitary, CMatrix, MeasurementBranch, Registry, StateVector,
    EPS_DROP,
};
use qproc_core::semantics::{transitions, ExecState, Label};
use qproc_core::syntax::{elaborate, parse_process, parse_program, pretty, Program, ProcessTerm, VarType};
use qproc_testkit::compare::collect_reachable;
use qproc_testkit::dense::{
    apply_unitary_dense, mat_of, max_abs_diff, measure_dense, random_qubit, random_state,
};

fn corpus_path(name: &str) -> String {
    format!("{}/../../programs/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn corpus_src(name: &str) -> String {
    std::fs::read_to_string(corpus_path(name)).unwrap()
}

fn load(name: &str) -> Program {
    let mut program = parse_program(&corpus_src(name)).unwrap();
    elaborate(&mut program).unwrap();
    program
}

const ALL_PROGRAMS: [&str; 11] = [
    "build_epr.qp",
    "check_epr1.qp",
    "check_epr2.qp",
    "teleport.qp",
    "coin.qp",
    "no_cloning.qp",
    "scope_cleanup.qp",
    "choice_demo.qp",
    "open_emit.qp",
    "ghz.qp",
    "two_pairs.qp",
];

#[test]
fn criterion_01_epr_construction() {
    let started = Instant::now();
    let program = load("build_epr.qp");
    let init = initial_state(&program, "Main").unwrap();
    let trace = sample_trace(&init, &program, SchedulerPolicy::First, 0, 4096, false).unwrap();
    let ExecCtx::Stable(ctx) = &trace.final_state().ctx else { panic!("unstable end") };
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let expect = [h, 0.0, 0.0, h];
    for (a, e) in ctx.state.amps().iter().zip(expect) {
        let err = (a - Complex64::new(e, 0.0)).norm();
        assert!(err <= 1e-10, "amplitude error {err:.3e} exceeds 1e-10");
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}, limit 1 s");
    println!("criterion 01 PASS: BuildEPR yields (|00>+|11>)/sqrt(2) within 1e-10 in {elapsed:?}");
}

#[test]
fn criterion_02_correlated_measurement() {
    let mut tables = Vec::new();
    for name in ["check_epr1.qp", "check_epr2.qp"] {
        let program = load(name);
        let init = initial_state(&program, "Main").unwrap();
        let tree = build_tree(&init, &program, 64, 100_000).unwrap();
        for policy in [SchedulerPolicy::First, SchedulerPolicy::Uniform] {
            let dist = outcome_distribution(&tree, policy).unwrap();
            let table: Vec<(Vec<i64>, f64)> = dist
                .iter()
                .map(|(o, p)| {
                    assert!(!o.stuck, "{name}: stuck outcome");
                    (o.measured.iter().map(|(_, v)| *v).collect(), *p)
                })
                .collect();
            assert_eq!(table.len(), 2, "{name}: mass outside the two diagonal outcomes");
            for (values, p) in &table {
                assert!(values == &[0, 0] || values == &[1, 1], "{name}: {values:?}");
                assert!((p - 0.5).abs() <= 1e-12, "{name}: {p} vs 0.5");
            }
            tables.push(table);
        }
    }
    let values_of = |t: &[(Vec<i64>, f64)]| t.iter().map(|(v, _)| v.clone()).collect::<Vec<_>>();
    for t in &tables[1..] {
        assert_eq!(values_of(t), values_of(&tables[0]), "tables differ across order/policy");
        for ((_, p), (_, q)) in t.iter().zip(&tables[0]) {
            assert!((p - q).abs() <= 1e-12);
        }
    }
    println!("criterion 02 PASS: CheckEPR1/CheckEPR2 = {{(0,0):0.5,(1,1):0.5}} under both policies, tol 1e-12");
}

#[test]
fn criterion_03_teleportation() {
    let started = Instant::now();
    let mut src = corpus_src("teleport.qp");
    src.push_str(
        "\nTeleportOn = [ qubit[p] : [ qubit[a,b] : BuildEPR[a,b] ; \
         ( ( Alice[p,a] || Bob[b] ) |{meas} ) ] ]\n",
    );
    let mut program = parse_program(&src).unwrap();
    elaborate(&mut program).unwrap();

    for round in 0..100u64 {
        let (alpha, beta) = random_qubit(9000 + round);
        let init = ExecState {
            term: ProcessTerm::Invoke("TeleportOn".into(), vec!["$psi".into()]),
            ctx: ExecCtx::Stable(Context {
                stack: EnvStack::Frame {
                    vars: vec![("$psi".into(), VarType::Qubit)],
                    rest: Box::new(EnvStack::Root),
                },
                qseq: vec![Slot::Named("$psi".into())],
                state: StateVector::from_amps(vec![alpha, beta]).unwrap(),
                store: BTreeMap::new(),
                fresh: program.fresh_base,
                measured: Vec::new(),
            }),
        };
        let tree = build_tree(&init, &program, 64, 50_000).unwrap();
        let dist = outcome_distribution(&tree, SchedulerPolicy::First).unwrap();
        assert_eq!(dist.len(), 4, "round {round}: {} outcomes", dist.len());
        for (outcome, p) in &dist {
            assert!(!outcome.stuck, "round {round}: stuck branch");
            assert!((p - 0.25).abs() <= 1e-12, "round {round}: branch mass {p}");
        }

        let mut parent: Vec<Option<(usize, Label)>> = vec![None; tree.nodes.len()];
        for (i, n) in tree.nodes.iter().enumerate() {
            for (label, child) in &n.edges {
                parent[*child] = Some((i, label.clone()));
            }
        }
        let expect = StateVector::from_amps(vec![alpha, beta]).unwrap();
        let mut leaves = 0;
        for (i, n) in tree.nodes.iter().enumerate() {
            if !n.edges.is_empty() {
                continue;
            }
            leaves += 1;
            assert_eq!(n.state.term, ProcessTerm::Nil, "round {round}: non-terminated leaf");
            let mut chain = Vec::new();
            let mut at = i;
            while let Some((up, label)) = &parent[at] {
                chain.push(TraceStep { label: label.clone(), state: tree.nodes[at].state.clone() });
                at = *up;
            }
            chain.reverse();
            let trace = Trace {
                initial: tree.nodes[0].state.clone(),
                steps: chain,
                status: RunStatus::Terminated,
            };
            let bob = final_quantum_state(&trace, "b").unwrap();
            let fidelity = bob.fidelity(&expect);
            assert!(
                fidelity >= 1.0 - 1e-9,
                "round {round}: fidelity {fidelity} below 1-1e-9"
            );
        }
        assert!(leaves >= 4, "round {round}: only {leaves} leaves");
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}, limit 10 s");
    println!("criterion 03 PASS: 100 random states teleported, 4x p=0.25 (1e-12), fidelity >= 1-1e-9, in {elapsed:?}");
}

#[test]
fn criterion_04_probabilistic_priority() {
    let mut checked = 0;
    for name in ALL_PROGRAMS {
        let program = load(name);
        for state in collect_reachable(&program, "Main", 3000) {
            let Ok(succ) = transitions(&state, &program) else { continue };
            if state.ctx.is_stable() {
                assert!(
                    succ.iter().all(|(l, _)| !matches!(l, Label::Prob(_))),
                    "{name}: stable state offered a probabilistic transition"
                );
            } else {
                let mut total = 0.0;
                assert!(!succ.is_empty(), "{name}: unresolvable mixture");
                for (label, _) in &succ {
                    let Label::Prob(p) = label else {
                        panic!("{name}: unstable state offered {label}")
                    };
                    total += p;
                }
                assert!((total - 1.0).abs() <= 1e-9, "{name}: probability mass {total}");
            }
            checked += 1;
        }
    }
    assert!(checked >= 500, "only {checked} reachable states examined");
    println!("criterion 04 PASS: {checked} reachable states; unstable ones offer only Prob transitions summing to 1 (1e-9)");
}

#[test]
fn criterion_05_quantum_backend_oracle() {
    let reg = Registry::builtin();
    let ones = ["I", "X", "Y", "Z", "H", "S", "T"];
    let twos = ["CNot", "CZ", "Swap"];
    let mut seed = 50_000;
    let mut combos = 0;
    for width in 1..=4usize {
        let mut positions: Vec<Vec<usize>> = (0..width).map(|p| vec![p]).collect();
        let mut gates: Vec<&str> = ones.to_vec();
        if width >= 2 {
            gates.extend(twos);
            positions.extend(
                (0..width).flat_map(|p| {
                    (0..width).filter(move |q| *q != p).map(move |q| vec![p, q])
                }),
            );
        }
        for name in &gates {
            let u = reg.unitary(name).unwrap();
            for pos in positions.iter().filter(|p| p.len() == u.arity()) {
                seed += 1;
                let amps = random_state(seed, width);
                let mut sv = StateVector::from_amps(amps.clone()).unwrap();
                sv.apply_unitary(u.matrix(), pos);
                let dense = apply_unitary_dense(&amps, &mat_of(u.matrix()), pos, width);
                let diff = max_abs_diff(sv.amps(), &dense);
                assert!(diff <= 1e-10, "{name} at {pos:?} width {width}: {diff:.3e}");
                combos += 1;
            }
        }
        for obs_name in ["M_std", "M_std2"] {
            let obs = reg.observable(obs_name).unwrap();
            if obs.arity() > width {
                continue;
            }
            for pos in positions.iter().filter(|p| p.len() == obs.arity()) {
                seed += 1;
                let amps = random_state(seed, width);
                let got = StateVector::from_amps(amps.clone()).unwrap().measure(obs, pos);
                let projectors: Vec<_> =
                    obs.branches().iter().map(|b| mat_of(&b.projector)).collect();
                let dense = measure_dense(&amps, &projectors, pos, width);
                let kept: Vec<_> = obs
                    .branches()
                    .iter()
                    .zip(&dense)
                    .filter(|(_, (_, p))| *p > EPS_DROP)
                    .collect();
                let total: f64 = kept.iter().map(|(_, (_, p))| p).sum();
                assert_eq!(got.len(), kept.len());
                for ((ge, gs, gp), (branch, (post, p))) in got.iter().zip(&kept) {
                    assert_eq!(*ge, branch.eigenvalue);
                    assert!((gp - p / total).abs() <= 1e-10, "{obs_name} probability");
                    let diff = max_abs_diff(gs.amps(), post);
                    assert!(diff <= 1e-10, "{obs_name} at {pos:?} width {width}: {diff:.3e}");
                }
                combos += 1;
            }
        }
    }
    println!("criterion 05 PASS: {combos} gate/observable placements agree with the dense oracle within 1e-10");
}

#[test]
fn criterion_06_gate_observable_validity() {
    let reg = Registry::builtin();
    for name in ["I", "X", "Y", "Z", "H", "S", "T", "CNot", "CZ", "Swap"] {
        validate_unitary(reg.unitary(name).unwrap().matrix())
            .unwrap_or_else(|e| panic!("builtin {name}: {e}"));
    }
    for name in ["M_std", "M_std2"] {
        validate_observable(reg.observable(name).unwrap().branches())
            .unwrap_or_else(|e| panic!("builtin {name}: {e}"));
    }

    let c = |re: f64| Complex64::new(re, 0.0);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let skewed =
        CMatrix::from_rows(vec![vec![c(h + 1e-3), c(h)], vec![c(h), c(-h)]]).unwrap();
    assert!(validate_unitary(&skewed).is_err(), "corrupted unitary accepted");

    let leaky = vec![
        MeasurementBranch {
            eigenvalue: 0,
            projector: CMatrix::from_rows(vec![vec![c(0.9), c(0.0)], vec![c(0.0), c(0.0)]])
                .unwrap(),
        },
        MeasurementBranch {
            eigenvalue: 1,
            projector: CMatrix::from_rows(vec![vec![c(0.0), c(0.0)], vec![c(0.0), c(1.0)]])
                .unwrap(),
        },
    ];
    assert!(validate_observable(&leaky).is_err(), "corrupted observable accepted");
    println!("criterion 06 PASS: built-ins valid at 1e-9; corrupted matrices rejected");
}

#[test]
fn criterion_07_no_cloning() {
    let src = "Send = g!0 . g!1 . end\n\
               Recv = [ qubit[x] : g?x . g?x . end ]\n\
               Main = ( Recv || Send ) |{g}\n";
    assert_eq!(src.lines().count(), 3);
    let mut program = parse_program(src).unwrap();
    elaborate(&mut program).unwrap();
    let init = initial_state(&program, "Main").unwrap();
    let tree = build_tree(&init, &program, 64, 1000).unwrap();

    for node in &tree.nodes {
        let ExecCtx::Stable(ctx) = &node.state.ctx else { continue };
        if ctx.qseq.iter().any(|s| matches!(s, Slot::Named(_))) {
            assert!(
                node.edges.iter().all(|(l, _)| !matches!(l, Label::Receive(..) | Label::Tau)),
                "initialized qubit accepted another receive"
            );
        }
    }
    let leaves: Vec<_> = tree.nodes.iter().filter(|n| n.edges.is_empty()).collect();
    assert_eq!(leaves.len(), 1);
    assert_ne!(leaves[0].state.term, ProcessTerm::Nil, "cloning attempt must deadlock");
    assert!(pretty(&leaves[0].state.term).contains("g?"), "stuck on the second receive");
    println!("criterion 07 PASS: second receive into an initialized qubit has no successor (3-line regression)");
}

#[test]
fn criterion_08_scope_semantics() {
    let program = load("scope_cleanup.qp");
    let init = initial_state(&program, "Main").unwrap();
    let trace = sample_trace(&init, &program, SchedulerPolicy::First, 0, 4096, false).unwrap();
    let mut crossings = 0;
    for pair in trace.steps.windows(2) {
        let (ExecCtx::Stable(before), ExecCtx::Stable(after)) =
            (&pair[0].state.ctx, &pair[1].state.ctx)
        else {
            continue;
        };
        let freed_now = before
            .qseq
            .iter()
            .zip(&after.qseq)
            .any(|(b, a)| matches!(b, Slot::Named(_)) && matches!(a, Slot::Freed));
        if !freed_now {
            continue;
        }
        crossings += 1;
        assert!(
            before.store.len() > after.store.len() || before.store.is_empty(),
            "classicals of the closing scope must leave the store"
        );
        assert_eq!(before.qseq.len(), after.qseq.len(), "freed slots keep their position");
        assert_eq!(
            before.state.amps(),
            after.state.amps(),
            "state vector must be bit-identical across the scope exit"
        );
    }
    assert!(crossings >= 2, "expected inner and outer scope exits, saw {crossings}");
    println!("criterion 08 PASS: scope exits star qubits, drop classicals, and keep the state bit-identical");
}

#[test]
fn criterion_09_parser_round_trip() {
    let mut defs = 0;
    for name in ALL_PROGRAMS {
        let program = parse_program(&corpus_src(name)).unwrap();
        for (pname, def) in &program.defs {
            let printed = pretty(&def.body);
            let back = parse_process(&printed)
                .unwrap_or_else(|e| panic!("{name}/{pname}: reparse failed: {e}"));
            assert_eq!(back, def.body, "{name}/{pname}: round trip changed the tree");
            defs += 1;
        }
    }
    assert!(ALL_PROGRAMS.len() >= 6);
    println!(
        "criterion 09 PASS: parse-print-parse identity over {} files / {defs} definitions",
        ALL_PROGRAMS.len()
    );
}

#[test]
fn criterion_10_run_determinism() {
    let args = [
        "run",
        &corpus_path("teleport.qp"),
        "--seed",
        "11",
        "--policy",
        "uniform",
        "--verbose",
    ];
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_qproc"))
            .args(args)
            .env_remove("QPROC_DEFS")
            .output()
            .unwrap()
    };
    let a = run();
    let b = run();
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.status.code(), b.status.code());
    assert_eq!(a.stdout, b.stdout, "traces differ between identical invocations");
    assert!(!a.stdout.is_empty());
    println!("criterion 10 PASS: fixed seed/policy runs are byte-identical");
}
