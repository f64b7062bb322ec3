use glyphfuzz_cli::model_file::{parse, serialize};
use glyphfuzz_core::preprocess::{FeatureSource, PipelineConfig};
use glyphfuzz_core::radial::RadialFeatureVector;
use glyphfuzz_core::RecognitionModel;
use proptest::prelude::*;

fn vector() -> impl Strategy<Value = RadialFeatureVector> {
    (
        prop::array::uniform8(0.0..10.0f64),
        prop::array::uniform8(0.0..10.0f64),
        prop::array::uniform8(0u32..9),
    )
        .prop_map(|(a, b, n)| {
            let d_min = [0, 1, 2, 3, 4, 5, 6, 7].map(|i| a[i].min(b[i]));
            let d_max = [0, 1, 2, 3, 4, 5, 6, 7].map(|i| a[i].max(b[i]));
            let d_total = [0, 1, 2, 3, 4, 5, 6, 7].map(|i| d_min[i] + d_max[i]);
            RadialFeatureVector {
                d_min,
                d_max,
                d_total,
                intersections: n,
            }
        })
}

fn pipeline() -> impl Strategy<Value = PipelineConfig> {
    (
        1usize..4,
        any::<u8>(),
        0usize..5,
        1usize..3,
        1usize..3,
        1usize..3,
        any::<bool>(),
    )
        .prop_map(
            |(scale, threshold, spur, open, close, dilate, skeleton)| PipelineConfig {
                canvas_height: 35 * scale,
                canvas_width: 25 * scale,
                threshold,
                spur_iterations: spur,
                open_iterations: open,
                close_iterations: close,
                final_dilate_iterations: dilate,
                feature_source: if skeleton {
                    FeatureSource::Skeleton
                } else {
                    FeatureSource::Dilated
                },
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parse_inverts_serialize(
        per_class in prop::collection::vec(prop::collection::vec(vector(), 1..5), 1..8),
        cfg in pipeline(),
        epsilon in 0.0..1.0f64,
    ) {
        let samples: Vec<(String, Vec<RadialFeatureVector>)> =
            per_class.into_iter().enumerate().map(|(i, v)| (format!("class-{i}"), v)).collect();
        let model = RecognitionModel::train(&samples, cfg).unwrap().model.with_ambiguity_epsilon(epsilon);
        let text = serialize(&model);
        let back = parse(&text).unwrap();
        prop_assert_eq!(&back, &model);
        prop_assert_eq!(serialize(&back), text);
    }
}
