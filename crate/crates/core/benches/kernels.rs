//! Sequential vs rayon-parallel kernels and batch solves.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tensor_npa::bench::{run_bench, StartSpec};
use tensor_npa::generate::{gen_planted_instance, gen_random_mtensor};
use tensor_npa::{Execution, SolverConfig};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn contractions(c: &mut Criterion) {
    let mut group = c.benchmark_group("contract");
    for (m, n) in [(3usize, 100usize), (4, 30)] {
        let a = gen_random_mtensor(m, n, 0.8, 0.1, 1).unwrap();
        let x: Vec<f64> = (0..n).map(|i| 1.0 + (i % 7) as f64 / 7.0).collect();
        let label = format!("m{m}n{n}");
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(format!("m1/{name}"), &label), &exec, |bch, &e| {
                bch.iter(|| a.contract_m1_with(&x, e).unwrap())
            });
            group.bench_with_input(BenchmarkId::new(format!("m2/{name}"), &label), &exec, |bch, &e| {
                bch.iter(|| a.contract_m2_with(&x, e).unwrap())
            });
        }
    }
    group.finish();
}

fn batch_solves(c: &mut Criterion) {
    let mut group = c.benchmark_group("batch-solve");
    group.sample_size(10);
    let seeds: Vec<u64> = (0..8).collect();
    let cfg = SolverConfig::default();
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, "8x(3,40)"), |bch| {
            bch.iter(|| {
                run_bench(
                    &seeds,
                    |&s| gen_planted_instance(3, 40, 0.8, 0.4, 0.1, s).map_err(|e| e.to_string()),
                    &StartSpec::Auto,
                    &cfg,
                    exec,
                )
            })
        });
    }
    group.finish();
}

criterion_group!(benches, contractions, batch_solves);
criterion_main!(benches);
