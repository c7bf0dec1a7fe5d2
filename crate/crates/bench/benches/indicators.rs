use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sbda_bench::{convex_front, random_points};
use sbda_core::metrics::MAX_EAF_GRID;
use sbda_core::{
    attainment_surface, eaf, eaf_grid, hypervolume_2d, non_dominated_filter, ObjectivePoint,
    ReferencePoint,
};

fn filter(c: &mut Criterion) {
    let mut group = c.benchmark_group("non_dominated_filter");
    for n in [1_000usize, 10_000, 100_000] {
        let pts = random_points(n, 1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &pts, |b, pts| {
            b.iter(|| non_dominated_filter(pts))
        });
    }
    group.finish();
}

fn hypervolume(c: &mut Criterion) {
    let r = ReferencePoint::new(1.1, 1.1);
    let mut group = c.benchmark_group("hypervolume_2d");
    for n in [50usize, 1_000] {
        let front = convex_front(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &front, |b, f| {
            b.iter(|| hypervolume_2d(f, &r))
        });
    }
    group.finish();
}

fn attainment(c: &mut Criterion) {
    let runs: Vec<Vec<ObjectivePoint>> = (0..20)
        .map(|s| {
            let pts = random_points(200, s);
            non_dominated_filter(&pts)
                .into_iter()
                .map(|i| pts[i])
                .collect()
        })
        .collect();
    let views: Vec<&[ObjectivePoint]> = runs.iter().map(Vec::as_slice).collect();
    let grid = eaf_grid(&views, MAX_EAF_GRID);
    c.bench_function("eaf_20_runs", |b| b.iter(|| eaf(&runs, &grid)));
    c.bench_function("attainment_surface_median", |b| {
        b.iter(|| attainment_surface(&runs, 10).unwrap())
    });
}

criterion_group!(benches, filter, hypervolume, attainment);
criterion_main!(benches);
