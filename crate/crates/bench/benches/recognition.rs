use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use glyphfuzz_bench::{test_corpus, trained_model};
use glyphfuzz_core::preprocess::{run_pipeline, skeletonize};
use glyphfuzz_core::radial::extract;
use glyphfuzz_core::recognizer::evaluate;
use std::hint::black_box;

fn stages(c: &mut Criterion) {
    let model = trained_model();
    let corpus = test_corpus();
    let (_, glyph) = &corpus[0];
    let binary = glyph.to_binary(model.pipeline().threshold);
    let canvas = run_pipeline(glyph, model.pipeline()).unwrap();
    let features = extract(&canvas);

    c.bench_function("skeletonize", |b| {
        b.iter(|| skeletonize(black_box(&binary)))
    });
    c.bench_function("run_pipeline", |b| {
        b.iter(|| run_pipeline(black_box(glyph), model.pipeline()).unwrap())
    });
    c.bench_function("extract", |b| b.iter(|| extract(black_box(&canvas))));
    c.bench_function("infer_fis1", |b| {
        b.iter(|| model.fis1().infer(black_box(&features.d_total)))
    });
    let counts = features.clamped_intersections();
    c.bench_function("infer_fis2", |b| {
        b.iter(|| model.fis2().infer(black_box(&counts)))
    });
    c.bench_function("recognize", |b| {
        b.iter(|| model.recognize(black_box(glyph)).unwrap())
    });
}

fn evaluation(c: &mut Criterion) {
    let model = trained_model();
    let corpus = test_corpus();
    let mut group = c.benchmark_group("evaluate_140");
    group.sample_size(20);
    for jobs in [1, 4] {
        group.bench_with_input(BenchmarkId::from_parameter(jobs), &jobs, |b, &jobs| {
            b.iter(|| evaluate(&model, black_box(&corpus), jobs).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, stages, evaluation);
criterion_main!(benches);
