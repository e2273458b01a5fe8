use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qwgan::circuit::{random_target, Layout};
use qwgan::parallel::Execution;
use qwgan::pauli::{trace_projections, PauliString};
use qwgan::qcore::random::random_hermitian;
use qwgan::trainer::{train_seeds, TrainingConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn projections(c: &mut Criterion) {
    let mut group = c.benchmark_group("trace_projections");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for qubits in [4, 6] {
        let m = random_hermitian(1 << qubits, 1.0, &mut rng);
        let basis = PauliString::all(qubits);
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, qubits), &qubits, |b, _| {
                b.iter(|| trace_projections(black_box(&m), &basis, exec))
            });
        }
    }
    group.finish();
}

fn seeds(c: &mut Criterion) {
    let mut group = c.benchmark_group("train_seeds");
    group.sample_size(10);
    let layout = Layout::generic(2, 2).unwrap();
    let (target, _) = random_target(&layout, 1, 1000).unwrap();
    let cfg = TrainingConfig::new(layout, 1, 2.0, 0.1, 40);
    let seeds: Vec<u64> = (0..4).collect();
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| train_seeds(&cfg, black_box(&target), &seeds, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, projections, seeds);
criterion_main!(benches);
