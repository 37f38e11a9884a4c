use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use evobench_core::metrics::hypervolume;
use evobench_core::moea::{crowding_distance, non_dominated_sort, nsga2_select};
use evobench_core::RngStream;
use ndarray::Array2;

fn objectives(n: usize, m: usize, seed: u64) -> Array2<f64> {
    let mut rng = RngStream::new(seed, 0);
    Array2::from_shape_fn((n, m), |_| rng.uniform())
}

fn sorting(c: &mut Criterion) {
    let mut group = c.benchmark_group("non_dominated_sort");
    for &(n, m) in &[(256usize, 2usize), (1024, 2), (1024, 3), (4096, 3)] {
        let f = objectives(n, m, 1);
        group.bench_with_input(BenchmarkId::from_parameter(format!("{n}x{m}")), &f, |b, f| {
            b.iter(|| non_dominated_sort(f.view()))
        });
    }
    group.finish();
}

fn environmental(c: &mut Criterion) {
    let f = objectives(2048, 2, 2);
    c.bench_function("crowding_distance_2048x2", |b| b.iter(|| crowding_distance(f.view())));
    c.bench_function("nsga2_select_2048_to_1024", |b| b.iter(|| nsga2_select(&f, 1024)));
}

fn indicators(c: &mut Criterion) {
    let mut group = c.benchmark_group("hypervolume");
    for m in [2usize, 3] {
        let f = objectives(512, m, 3);
        let r = vec![1.1; m];
        group.bench_with_input(BenchmarkId::from_parameter(m), &f, |b, f| {
            b.iter(|| hypervolume(f.view(), &r).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sorting, environmental, indicators);
criterion_main!(benches);
