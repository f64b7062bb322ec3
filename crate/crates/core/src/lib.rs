//! Recognition of isolated, round-shaped glyphs from radial distance and
//! intersection features using two cascaded Mamdani fuzzy systems.
//!
//! The flow is [`preprocess::run_pipeline`] → [`radial::extract`] →
//! [`recognizer::RecognitionModel::recognize_features`].

pub mod fuzzy;
pub mod preprocess;
pub mod radial;
pub mod raster;
pub mod recognizer;

pub use fuzzy::{
    FisDefinition, FuzzyError, InferenceOutcome, LinguisticVariable, MembershipFunction, Rule,
};
pub use preprocess::{FeatureSource, PipelineConfig, PreprocessError, Stage};
pub use radial::{Direction, RadialFeatureVector};
pub use raster::{parse_netpbm, serialize_pbm, BinaryImage, GrayImage, Image, RasterError};
pub use recognizer::{
    DecidedBy, EvaluationReport, RecognitionModel, RecognitionResult, RecognizerError, TrainedModel,
};
