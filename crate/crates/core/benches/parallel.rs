//! Sequential against rayon execution on the data-parallel stages.

use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use regretstream::cleanup::{run_cleanup_with, CleanupConfig};
use regretstream::features::{featurize_corpus, TextResources};
use regretstream::ingest::build_corpus;
use regretstream::synth::{generate, SynthConfig};
use regretstream::{Corpus, Exec};

fn corpus() -> Corpus {
    let cfg = SynthConfig { n_tweets: 5000, n_users: 150, ..SynthConfig::default() };
    let out = generate(&cfg).expect("synthetic stream");
    build_corpus(&out.events, out.ledger.window).expect("corpus")
}

fn strategies() -> [(&'static str, Exec); 2] {
    [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)]
}

fn bench(c: &mut Criterion) {
    let raw = corpus();
    let cleanup = CleanupConfig::default();
    let (clean, _) = run_cleanup_with(&raw, &cleanup, Exec::Sequential).expect("cleanup");
    let res = TextResources::builtin();

    let mut group = c.benchmark_group("cleanup");
    group.sample_size(10).measurement_time(Duration::from_secs(5));
    for (name, exec) in strategies() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| run_cleanup_with(&raw, &cleanup, exec).expect("cleanup"))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("featurize");
    group.sample_size(10).measurement_time(Duration::from_secs(5));
    for (name, exec) in strategies() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| featurize_corpus(&clean, &res, true, exec).expect("features"))
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
