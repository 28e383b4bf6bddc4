use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use tensor_geom::cyclic::{bel_rank, is_nonsingular_tensor, CyclicTensor};
use tensor_geom::geom::Geometry;
use tensor_geom::qh::{qh_join, two_intersection_check, SurfaceSpec};
use tensor_geom::FieldTower;

fn census(c: &mut Criterion) {
    let g3 = Geometry::new(3).unwrap();
    let g5 = Geometry::new(5).unwrap();
    c.bench_function("orbit_census q=3", |b| {
        b.iter(|| black_box(g3.orbit_census().unwrap()))
    });
    c.bench_function("orbit_census q=5", |b| {
        b.iter(|| black_box(g5.orbit_census().unwrap()))
    });
    c.bench_function("plane_tables q=3", |b| {
        b.iter(|| black_box(g3.plane_tables().unwrap()))
    });
}

fn joins(c: &mut Criterion) {
    let g = Geometry::new(5).unwrap();
    let (_, z2) = g.zsets();
    let k = qh_join(&g, SurfaceSpec::HminusH2, SurfaceSpec::Xi(z2[0])).unwrap();
    let mut group = c.benchmark_group("qh");
    group.sample_size(10);
    group.bench_function("qh_join q=5", |b| {
        b.iter(|| black_box(qh_join(&g, SurfaceSpec::HminusH2, SurfaceSpec::Xi(z2[0])).unwrap()))
    });
    group.bench_function("two_intersection_check q=5", |b| {
        b.iter(|| black_box(two_intersection_check(&g, &k)))
    });
    group.finish();
}

fn tensors(c: &mut Criterion) {
    let t = FieldTower::with_params(3, 1, 3).unwrap();
    let field = CyclicTensor::field(3);
    c.bench_function("is_nonsingular n=3 q=3", |b| {
        b.iter(|| black_box(is_nonsingular_tensor(&t, &field)))
    });
    c.bench_function("bel_rank field n=3 q=3", |b| {
        b.iter(|| black_box(bel_rank(&t, &field)))
    });
}

criterion_group!(benches, census, joins, tensors);
criterion_main!(benches);
