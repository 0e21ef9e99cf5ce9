use criterion::{criterion_group, criterion_main, Criterion};
use deltaset_bench::random_set;
use deltaset_core::sequence::sieve::primes_up_to;
use deltaset_core::{khintchine_scan, lemma_witness, FiniteSet};
use std::hint::black_box;

fn witnesses(c: &mut Criterion) {
    let mut group = c.benchmark_group("witness");
    group.sample_size(10);
    let a = random_set(2_000, 200_000, 1);
    let b = random_set(200, 100_000, 2);
    group.bench_function("lemma_witness 2000x200", |bench| {
        bench.iter(|| lemma_witness(black_box(&a), black_box(&b), 1).unwrap())
    });
    let primes = FiniteSet::from_elements(primes_up_to(100_000)).unwrap();
    let pow2 = FiniteSet::from_elements((1..17).map(|k| 1i64 << k).collect::<Vec<_>>()).unwrap();
    group.bench_function("khintchine primes/pow2", |bench| {
        bench.iter(|| khintchine_scan(black_box(&primes), black_box(&pow2), &[10_000, 100_000]).unwrap())
    });
    group.finish();
}

criterion_group!(benches, witnesses);
criterion_main!(benches);
