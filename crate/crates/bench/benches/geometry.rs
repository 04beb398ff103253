use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hypaff_bench::{standard_map, tilted_map};
use hypaff_core::{
    arrangement_multiplicity, check_a2, compute_delta, intersect_polygons, refine_to_depth, Point,
    Polygon,
};
use std::hint::black_box;

fn regular(n: usize, r: f64, phase: f64) -> Polygon {
    let vertices = (0..n)
        .map(|k| {
            let a = phase + k as f64 * std::f64::consts::TAU / n as f64;
            Point::new(r * a.cos(), r * a.sin())
        })
        .collect();
    Polygon::new(vertices, 1).unwrap()
}

fn clipping(c: &mut Criterion) {
    let mut group = c.benchmark_group("intersect_polygons");
    for n in [4usize, 16, 64] {
        let (p, q) = (regular(n, 1.0, 0.0), regular(n, 1.0, 0.3));
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| intersect_polygons(black_box(&p), black_box(&q)))
        });
    }
    group.finish();
}

fn refinement(c: &mut Criterion) {
    let mut group = c.benchmark_group("refine_to_depth");
    group.sample_size(10);
    for (name, m) in [("straight", standard_map()), ("tilted", tilted_map())] {
        for depth in [4usize, 8] {
            group.bench_with_input(BenchmarkId::new(name, depth), &depth, |b, &depth| {
                b.iter(|| refine_to_depth(&m, depth).unwrap())
            });
        }
    }
    group.finish();
}

fn multiplicity(c: &mut Criterion) {
    let z = refine_to_depth(&tilted_map(), 6).unwrap();
    c.bench_function("arrangement_multiplicity/tilted_depth6", |b| {
        b.iter(|| arrangement_multiplicity(black_box(z.boundary())))
    });
    let m = standard_map();
    c.bench_function("check_a2/tau_max5", |b| b.iter(|| check_a2(&m, 5).unwrap()));
}

fn certificates(c: &mut Criterion) {
    let mut group = c.benchmark_group("compute_delta");
    for n in [2usize, 3, 4] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| compute_delta(n, 1.0, 1e-4).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, clipping, refinement, multiplicity, certificates);
criterion_main!(benches);
