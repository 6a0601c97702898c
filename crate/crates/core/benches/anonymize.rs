use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use txanon::clump::{self, ClumpConfig};
use txanon::metrics::{build_report, RunInfo};
use txanon::partition::partition_anonymize;
use txanon::synth::{generate_transactions, SyntheticWorkload};
use txanon::taxonomy::{generate_synthetic, SyntheticTaxonomy};
use txanon::{Parallelism, TaxonomyTree, TransactionDb};

const MODES: [(&str, Parallelism); 2] = [("sequential", Parallelism::Sequential), ("parallel", Parallelism::Parallel)];

fn workload(n: usize) -> (TaxonomyTree, TransactionDb) {
    let t = generate_synthetic(&SyntheticTaxonomy {
        leaf_target: 5_000,
        branching: (2, 6),
        depth_target: 12,
        seed: 1,
    })
    .unwrap();
    let db = generate_transactions(&t, &SyntheticWorkload {
        transactions: n,
        seed: 1,
        ..SyntheticWorkload::default()
    });
    (t, db)
}

fn bench_clump(c: &mut Criterion) {
    let (t, db) = workload(5_000);
    let mut group = c.benchmark_group("clump");
    group.sample_size(10);
    // r = 10 stays under the fan-out threshold; r = 200 scores candidates in parallel
    for r in [10, 200] {
        for (name, parallelism) in MODES {
            let cfg = ClumpConfig {
                parallelism,
                ..ClumpConfig::new(5, r)
            };
            group.bench_with_input(BenchmarkId::new(name, format!("r={r}")), &cfg, |b, cfg| {
                b.iter(|| clump::run(black_box(&db), &t, cfg).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_partition(c: &mut Criterion) {
    let (t, db) = workload(5_000);
    let mut group = c.benchmark_group("partition");
    group.sample_size(10);
    for (name, parallelism) in MODES {
        group.bench_function(name, |b| b.iter(|| partition_anonymize(black_box(&db), &t, 5, parallelism).unwrap()));
    }
    group.finish();
}

fn bench_report(c: &mut Criterion) {
    let (t, db) = workload(20_000);
    let out = clump::run(&db, &t, &ClumpConfig::new(5, 10)).unwrap();
    let run = RunInfo {
        algorithm: "clump1".into(),
        k: 5,
        r: Some(10),
        runtime: Duration::ZERO,
    };
    let mut group = c.benchmark_group("report");
    for (name, parallelism) in MODES {
        group.bench_function(name, |b| b.iter(|| build_report(black_box(&out), &db, &t, &run, parallelism)));
    }
    group.finish();
}

criterion_group!(benches, bench_clump, bench_partition, bench_report);
criterion_main!(benches);
