//! Sequential versus parallel execution on the data-parallel workloads.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qentropy::entropy::inequality_chain;
use qentropy::majorization::{random_simplex, schur_concavity_probe, trial_rng};
use qentropy::multifractal::{box_count, cascade_points, CascadeSpec};
use qentropy::par::map_indexed;
use qentropy::{EntropyKind, EntropyOrder, Execution};
use rand::Rng;

const MODES: [Execution; 2] = [Execution::Sequential, Execution::Parallel];

fn label(exec: Execution) -> &'static str {
    match exec {
        Execution::Sequential => "sequential",
        Execution::Parallel => "parallel",
    }
}

fn schur_probe(c: &mut Criterion) {
    let mut g = c.benchmark_group("schur_probe");
    let q = EntropyOrder::new(0.75).unwrap();
    for exec in MODES {
        g.bench_with_input(BenchmarkId::new(label(exec), 5000), &exec, |b, &exec| {
            b.iter(|| schur_concavity_probe(EntropyKind::Hybrid, q, 16, 5000, 7, exec).unwrap())
        });
    }
    g.finish();
}

fn chain_sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("chain_sweep");
    let qs: Vec<EntropyOrder> = [0.5, 0.9, 1.0, 1.5, 3.0].iter().map(|&q| EntropyOrder::new(q).unwrap()).collect();
    for exec in MODES {
        g.bench_with_input(BenchmarkId::new(label(exec), 2000), &exec, |b, &exec| {
            b.iter(|| {
                map_indexed(exec, 2000, |t| {
                    let mut r = trial_rng(11, t);
                    let n = r.gen_range(2..=64);
                    let p = random_simplex(&mut r, n);
                    qs.iter().filter(|&&q| inequality_chain(&p, q, 1e-10).unwrap().passed()).count()
                })
            })
        });
    }
    g.finish();
}

fn box_counting(c: &mut Criterion) {
    let mut g = c.benchmark_group("box_count");
    g.sample_size(20);
    let points = cascade_points(&CascadeSpec::new(vec![0.3, 0.7], 16).unwrap());
    let eps: Vec<f64> = (1..=12).map(|k| 2f64.powi(-k)).collect();
    for exec in MODES {
        g.bench_with_input(BenchmarkId::new(label(exec), eps.len()), &exec, |b, &exec| {
            b.iter(|| box_count(black_box(&points), &eps, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, schur_probe, chain_sweep, box_counting);
criterion_main!(benches);
