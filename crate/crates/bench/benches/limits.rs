use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pragrate::limits::length_distribution;
use pragrate::{converse_constants, decode, encode, solve_alpha_star, CodeOrdering, SourcePmf};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn exact_limits(c: &mut Criterion) {
    let mut g = c.benchmark_group("length_distribution");
    let bern = SourcePmf::bernoulli(0.2).unwrap();
    for n in [50u32, 500, 2000] {
        g.bench_with_input(BenchmarkId::new("bern0.2", n), &n, |b, &n| {
            b.iter(|| length_distribution(black_box(&bern), n).unwrap())
        });
    }
    let ternary = SourcePmf::new(vec![0.5, 0.3, 0.2]).unwrap();
    for n in [50u32, 200] {
        g.bench_with_input(BenchmarkId::new("ternary", n), &n, |b, &n| {
            b.iter(|| length_distribution(black_box(&ternary), n).unwrap())
        });
    }
    g.finish();
}

fn exponents(c: &mut Criterion) {
    let p = SourcePmf::new(vec![0.6, 0.3, 0.1]).unwrap();
    c.bench_function("solve_alpha_star", |b| {
        b.iter(|| solve_alpha_star(black_box(&p), 0.1).unwrap())
    });
    c.bench_function("converse_constants", |b| {
        b.iter(|| converse_constants(black_box(&p), 0.1).unwrap())
    });
}

fn codec(c: &mut Criterion) {
    let n = 200;
    let ordering = CodeOrdering::universal(n, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let strings: Vec<Vec<u8>> = (0..64)
        .map(|_| (0..n).map(|_| rng.gen_range(0..2u8)).collect())
        .collect();
    c.bench_function("universal_round_trip_n200", |b| {
        b.iter(|| {
            for x in &strings {
                let cw = encode(&ordering, x).unwrap();
                black_box(decode(&ordering, &cw).unwrap());
            }
        })
    });
}

criterion_group!(benches, exact_limits, exponents, codec);
criterion_main!(benches);
