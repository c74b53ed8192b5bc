use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use pucoh::intlinalg::smith_normal_form;
use pucoh::koszul::{e3_page, Koszul};
use pucoh::presentation::{groups_for, present};
use pucoh::theta::theta;
use pucoh::{Ambient, MultiIndex, OracleLimits};

fn bench_theta(c: &mut Criterion) {
    let idx = MultiIndex::try_from(vec![1, 3, 8, 16]).unwrap();
    c.bench_function("theta n=24 I={1,3,8,16}", |b| {
        b.iter(|| theta(black_box(24), &idx).unwrap())
    });
}

fn bench_groups(c: &mut Criterion) {
    let pres = present(8).unwrap();
    c.bench_function("groups n=8", |b| {
        b.iter(|| groups_for(black_box(&pres), 65))
    });
}

fn bench_smith(c: &mut Criterion) {
    let k = Koszul::get(6).unwrap();
    let m = k.d2_matrix(Ambient::U, 6, 3);
    c.bench_function("smith d2 n=6 (12,3)", |b| {
        b.iter(|| smith_normal_form(black_box(&m)))
    });
}

fn bench_page(c: &mut Criterion) {
    let limits = OracleLimits::default();
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    g.bench_function("E3(PU(5))", |b| {
        b.iter(|| e3_page(5, Ambient::PU, None, &limits).unwrap())
    });
    g.finish();
}

criterion_group!(benches, bench_theta, bench_groups, bench_smith, bench_page);
criterion_main!(benches);
