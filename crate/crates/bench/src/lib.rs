//! Fixtures shared by the criterion benches: the 7-class synthetic benchmark
//! corpus and a model trained on it.

use glyphfuzz_cli::synth::{generate_corpus, BENCHMARK_TEST_SEED, BENCHMARK_TRAIN_SEED};
use glyphfuzz_core::preprocess::run_pipeline;
use glyphfuzz_core::radial::extract;
use glyphfuzz_core::{Image, PipelineConfig, RecognitionModel};

/// `(label, image)` pairs, `per_class` per family.
pub fn labeled_corpus(per_class: usize, seed: u64) -> Vec<(String, Image)> {
    generate_corpus(7, per_class, seed)
        .into_iter()
        .flat_map(|(family, images)| {
            images
                .into_iter()
                .map(move |img| (family.label().to_string(), Image::from(img)))
        })
        .collect()
}

/// Model trained on the benchmark's 5 variants per class.
pub fn trained_model() -> RecognitionModel {
    let cfg = PipelineConfig::default();
    let samples: Vec<_> = generate_corpus(7, 5, BENCHMARK_TRAIN_SEED)
        .into_iter()
        .map(|(family, images)| {
            let vectors = images
                .into_iter()
                .map(|img| {
                    extract(
                        &run_pipeline(&Image::from(img), &cfg).expect("synthetic glyphs have ink"),
                    )
                })
                .collect();
            (family.label().to_string(), vectors)
        })
        .collect();
    RecognitionModel::train(&samples, cfg)
        .expect("benchmark corpus trains")
        .model
}

/// The benchmark's 20 test variants per class.
pub fn test_corpus() -> Vec<(String, Image)> {
    labeled_corpus(20, BENCHMARK_TEST_SEED)
}
