//! Batched trace sampling: `sample_many` (fanned out across rayon when the
//! `parallel` feature is on) against a plain sequential loop.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use qproc_core::explorer::{initial_state, sample_many, sample_trace, SchedulerPolicy};
use qproc_core::syntax::{elaborate, parse_program, Program};

fn corpus(name: &str) -> Program {
    let path = format!("{}/../../programs/{name}", env!("CARGO_MANIFEST_DIR"));
    let src = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    let mut program = parse_program(&src).unwrap();
    elaborate(&mut program).unwrap();
    program
}

fn trace_sampling(c: &mut Criterion) {
    let program = corpus("teleport.qp");
    let init = initial_state(&program, "Main").unwrap();
    let mut group = c.benchmark_group("sample");
    for count in [64usize, 256] {
        group.throughput(Throughput::Elements(count as u64));
        group.bench_with_input(BenchmarkId::new("many", count), &count, |b, &n| {
            b.iter(|| {
                sample_many(&init, &program, SchedulerPolicy::Uniform, 7, 4096, false, n).unwrap()
            })
        });
        group.bench_with_input(BenchmarkId::new("loop", count), &count, |b, &n| {
            b.iter(|| {
                (0..n)
                    .map(|i| {
                        sample_trace(&init, &program, SchedulerPolicy::Uniform, i as u64, 4096, false)
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, trace_sampling);
criterion_main!(benches);
