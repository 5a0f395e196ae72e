//! Compares the rayon-backed batch path against the always-sequential
//! reference on representative workloads: spectral decompositions,
//! hypothesis-testing divergences, and Wasserstein lower bounds.

use criterion::{Criterion, criterion_group, criterion_main};

use steinlab::hypothesis::dh;
use steinlab::par::{map_batch, map_batch_seq};
use steinlab::tensor::{SiteStructure, eigh, random_density};
use steinlab::wasserstein::w1_lower_bound_marginals;

fn bench_eigh_batch(c: &mut Criterion) {
    let states: Vec<_> = (0..32).map(|k| random_density(16, 16, k).unwrap()).collect();
    let mut g = c.benchmark_group("eigh_batch_32x16");
    g.bench_function("parallel", |b| {
        b.iter(|| map_batch(states.len(), |i| eigh(states[i].herm()).0[0]))
    });
    g.bench_function("sequential", |b| {
        b.iter(|| map_batch_seq(states.len(), |i| eigh(states[i].herm()).0[0]))
    });
    g.finish();
}

fn bench_dh_batch(c: &mut Criterion) {
    let pairs: Vec<_> = (0..8)
        .map(|k| (random_density(8, 8, 100 + k).unwrap(), random_density(8, 8, 200 + k).unwrap()))
        .collect();
    let mut g = c.benchmark_group("dh_batch_8x8");
    g.bench_function("parallel", |b| {
        b.iter(|| map_batch(pairs.len(), |i| dh(&pairs[i].0, &pairs[i].1, 0.3).unwrap().value()))
    });
    g.bench_function("sequential", |b| {
        b.iter(|| {
            map_batch_seq(pairs.len(), |i| dh(&pairs[i].0, &pairs[i].1, 0.3).unwrap().value())
        })
    });
    g.finish();
}

fn bench_w1_lower_batch(c: &mut Criterion) {
    let s = SiteStructure::uniform(3, 2).unwrap();
    let pairs: Vec<_> = (0..8)
        .map(|k| (random_density(8, 8, 300 + k).unwrap(), random_density(8, 8, 400 + k).unwrap()))
        .collect();
    let mut g = c.benchmark_group("w1_lower_batch_8x3sites");
    g.bench_function("parallel", |b| {
        b.iter(|| {
            map_batch(pairs.len(), |i| {
                w1_lower_bound_marginals(&pairs[i].0, &pairs[i].1, &s).unwrap()
            })
        })
    });
    g.bench_function("sequential", |b| {
        b.iter(|| {
            map_batch_seq(pairs.len(), |i| {
                w1_lower_bound_marginals(&pairs[i].0, &pairs[i].1, &s).unwrap()
            })
        })
    });
    g.finish();
}

criterion_group!(benches, bench_eigh_batch, bench_dh_batch, bench_w1_lower_batch);
criterion_main!(benches);
