use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use privcount_core::privwrite::{fss_eval_naive_full, fss_evaluate_share, fss_gen, FssParams, PointFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn gen(c: &mut Criterion) {
    let mut g = c.benchmark_group("fss_gen");
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    for n in [10u32, 14, 18] {
        let params = FssParams::new(n, 3, 1).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &params, |b, params| {
            b.iter(|| {
                let pf = PointFunction::new(rng.gen_range(0..params.domain()), 1);
                fss_gen(&pf, params, &mut rng).unwrap()
            })
        });
    }
    g.finish();
}

fn full_eval(c: &mut Criterion) {
    let mut g = c.benchmark_group("fss_full_eval");
    g.sample_size(20);
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    for n in [10u32, 12, 14] {
        let params = FssParams::new(n, 3, 1).unwrap();
        let keys = fss_gen(&PointFunction::new(3, 1), &params, &mut rng).unwrap();
        g.bench_with_input(BenchmarkId::new("naive", n), &keys[0], |b, k| b.iter(|| fss_eval_naive_full(black_box(k))));
        g.bench_with_input(BenchmarkId::new("optimized", n), &keys[0], |b, k| {
            b.iter(|| fss_evaluate_share(black_box(k)))
        });
    }
    g.finish();
}

criterion_group!(benches, gen, full_eval);
criterion_main!(benches);
