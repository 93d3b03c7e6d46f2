use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use outcomes_bench::demo_store;
use outcomes_core::analytics::{class_attainment_rate, distribution, program_rollup, term_trend};
use outcomes_core::numeric::weighted_mean;
use outcomes_core::report::{analytics_report, render, ReportFormat};
use outcomes_core::{BandScheme, ChangeSet, Op, Scope, Store};

fn analytics(c: &mut Criterion) {
    let (_dir, store, demo) = demo_store();
    let snap = store.snapshot();
    let scheme = BandScheme::attainment_default();
    let class = &demo.classes[0];
    let outcome = &demo.outcomes[2];

    c.bench_function("weighted_mean/6", |b| {
        let v = [4.49, 4.53, 4.34, 4.49, 4.52, 4.20];
        let w = [1.0; 6];
        b.iter(|| weighted_mean(black_box(&v), black_box(&w)))
    });
    c.bench_function("class_attainment_rate", |b| {
        b.iter(|| class_attainment_rate(&snap, black_box(class), outcome, 0.7))
    });
    c.bench_function("distribution/all", |b| {
        b.iter(|| distribution(&snap, &Scope::All, black_box(outcome), &scheme, 0.7))
    });
    c.bench_function("program_rollup", |b| {
        b.iter(|| program_rollup(&snap, "2023", "2024-1", "2024-2", 0.7, &scheme))
    });
    let terms = vec!["2024-1".to_string(), "2024-2".to_string()];
    c.bench_function("term_trend", |b| {
        b.iter(|| term_trend(&snap, black_box(outcome), "2023", &terms, 0.7))
    });
    c.bench_function("report/json", |b| {
        b.iter(|| {
            let r = analytics_report(&snap, snap.commit_id(), &Scope::All, 0.7, &scheme).unwrap();
            render(&r, ReportFormat::Json).unwrap()
        })
    });
}

fn store(c: &mut Criterion) {
    c.bench_function("store/commit", |b| {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let mut n = 0u64;
        b.iter(|| {
            n += 1;
            let op = Op::CreateCourse(outcomes_core::Course {
                course_code: format!("B{n}").into(),
                title: "bench".into(),
                units: 3.0,
            });
            store
                .commit(ChangeSet::new(store.commit_count(), vec![op]))
                .unwrap()
        })
    });
    c.bench_function("store/reopen_demo", |b| {
        let (dir, store, _) = demo_store();
        drop(store);
        b.iter_batched(
            || (),
            |_| Store::open(dir.path()).unwrap(),
            BatchSize::PerIteration,
        )
    });
}

criterion_group!(benches, analytics, store);
criterion_main!(benches);
