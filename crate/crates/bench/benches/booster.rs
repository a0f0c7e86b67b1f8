use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gbspam_bench::spam_like;
use gbspam_core::booster::{build_tree, compute_gradients, find_best_split, train, Hyperparams};

fn split_search(c: &mut Criterion) {
    let mut group = c.benchmark_group("find_best_split");
    for n in [500, 4000] {
        let ds = spam_like(n, 57, 1);
        let grads = compute_gradients(ds.labels(), &vec![0.0; n]).unwrap();
        let rows: Vec<usize> = (0..n).collect();
        let features: Vec<usize> = (0..57).collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| find_best_split(ds.view(), black_box(&rows), &features, &grads, 1.0, 0.2, 1.0))
        });
    }
    group.finish();
}

fn tree_building(c: &mut Criterion) {
    let ds = spam_like(3000, 57, 2);
    let grads = compute_gradients(ds.labels(), &vec![0.0; ds.n_rows()]).unwrap();
    let rows: Vec<usize> = (0..ds.n_rows()).collect();
    let features: Vec<usize> = (0..43).collect();
    let mut group = c.benchmark_group("build_tree");
    for depth in [6, 24] {
        let params = Hyperparams {
            max_depth: depth,
            ..Hyperparams::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(depth), &depth, |b, _| {
            b.iter(|| build_tree(ds.view(), black_box(&rows), &grads, &params, &features).unwrap())
        });
    }
    group.finish();
}

fn training(c: &mut Criterion) {
    let ds = spam_like(3000, 57, 3);
    let params = Hyperparams {
        num_rounds: 20,
        early_stopping_rounds: None,
        ..Hyperparams::default()
    };
    let mut group = c.benchmark_group("train");
    group.sample_size(10);
    group.bench_function("3000x57_20_rounds", |b| b.iter(|| train(black_box(&ds), &params, 7).unwrap()));
    group.finish();
}

fn prediction(c: &mut Criterion) {
    let ds = spam_like(3000, 57, 4);
    let model = train(&ds, &Hyperparams { num_rounds: 50, early_stopping_rounds: None, ..Hyperparams::default() }, 1).unwrap();
    let eval = spam_like(5000, 57, 5);
    c.bench_function("predict_proba/5000_rows_50_trees", |b| {
        b.iter(|| model.predict_proba(black_box(eval.view())).unwrap())
    });
}

criterion_group!(benches, split_search, tree_building, training, prediction);
criterion_main!(benches);
