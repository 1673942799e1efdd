// SPDX-License-Identifier: Apache-2.0

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use reckit::crossfold::partition_users;
use reckit::metrics::{reclist_analysis, AnalysisOptions, ListMetric};
use reckit::{batch_recommend, build_algorithm, FitArgs, RowSelector, TruthTable};
use reckit_bench::{configs, fitted, ratings};

fn fit(c: &mut Criterion) {
    let data = ratings(200);
    let mut group = c.benchmark_group("fit");
    group.sample_size(10);
    for (name, params) in configs() {
        group.bench_function(name, |b| {
            b.iter_batched(
                || build_algorithm(params.clone()).unwrap(),
                |mut algo| algo.fit(&data, &FitArgs::default()).unwrap(),
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

fn recommend(c: &mut Criterion) {
    let data = ratings(200);
    let users: Vec<String> = data.distinct_users().into_iter().map(str::to_owned).collect();
    let mut group = c.benchmark_group("recommend");
    group.sample_size(10);
    for (name, params) in configs() {
        let algo = fitted(params, &data);
        for workers in [1, 4] {
            group.bench_function(format!("{name}/workers-{workers}"), |b| {
                b.iter(|| batch_recommend(algo.as_ref(), &users, Some(20), None, workers).unwrap())
            });
        }
    }
    group.finish();
}

fn split_and_score(c: &mut Criterion) {
    let data = ratings(943);
    c.bench_function("partition_users/943", |b| {
        b.iter(|| partition_users(&data, 5, RowSelector::SampleN(5), 42).unwrap())
    });

    let folds = partition_users(&data, 5, RowSelector::SampleN(5), 42).unwrap();
    let fold = &folds[0];
    let algo = fitted(configs().remove(1).1, &fold.train);
    let users: Vec<String> = fold.test.distinct_users().into_iter().map(str::to_owned).collect();
    let (recs, _) = batch_recommend(algo.as_ref(), &users, Some(20), None, 1).unwrap();
    let truth = TruthTable::from_ratings(&fold.test, None);
    c.bench_function("reclist_analysis/all-metrics", |b| {
        b.iter(|| reclist_analysis(&recs, &truth, &ListMetric::ALL, AnalysisOptions::default()).unwrap())
    });
}

criterion_group!(benches, fit, recommend, split_and_score);
criterion_main!(benches);
