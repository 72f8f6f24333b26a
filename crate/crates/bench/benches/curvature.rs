use std::hint::black_box;

use bundlecurv::curvature::{bracket_lemma_a, k_m};
use bundlecurv::metric::MetricSpec;
use bundlecurv::search::{self, AscentOptions};
use bundlecurv::{catalog, GroupElement};
use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn curvature(c: &mut Criterion) {
    let triple = catalog::t1s3();
    let alg = triple.algebra();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let metric = MetricSpec::random_spd(alg.dim(), 0.5, 2.0, &mut rng).unwrap();
    let g0 = alg.random_group_element(&mut rng);
    let (x, y) = search::random_plane(&triple.plane_space(), &mut rng);

    c.bench_function("bracket_t1s3", |b| {
        b.iter(|| bracket_lemma_a(&triple, &metric, black_box(&g0), black_box(&x), black_box(&y)).unwrap())
    });
    c.bench_function("k_m_t1s3", |b| b.iter(|| k_m(&triple, &metric, black_box(&g0), black_box(&x), black_box(&y)).unwrap()));

    let big = catalog::t1sn(5).unwrap();
    let big_alg = big.algebra();
    let big_metric = MetricSpec::random_spd(big_alg.dim(), 0.5, 2.0, &mut rng).unwrap();
    let (bx, by) = search::random_plane(&big.plane_space(), &mut rng);
    let e = GroupElement::identity(big_alg.n());
    c.bench_function("k_m_t1s5", |b| b.iter(|| k_m(&big, &big_metric, &e, black_box(&bx), black_box(&by)).unwrap()));
}

fn search_routines(c: &mut Criterion) {
    let triple = catalog::t1s3();
    let alg = triple.algebra();
    let metric = MetricSpec::random_spd(alg.dim(), 0.5, 2.0, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
    let x0 = alg.e(2, 3) + alg.e(1, 4) * 0.3;

    c.bench_function("fatness_t1s3", |b| b.iter(|| triple.fatness_deficit(black_box(0)).unwrap()));
    let single = AscentOptions { restarts: 1, ..AscentOptions::default() };
    c.bench_function("maximize_f_single_restart", |b| {
        b.iter(|| search::maximize_f_with(&metric, alg, black_box(&x0), 0, &single).unwrap())
    });
    let mut group = c.benchmark_group("scans");
    group.sample_size(10);
    group.bench_function("min_curvature_scan_1000", |b| {
        b.iter(|| search::min_curvature_scan(&triple, &metric, 1000, black_box(3)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, curvature, search_routines);
criterion_main!(benches);
