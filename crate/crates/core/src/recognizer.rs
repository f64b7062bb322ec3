//! Two cascaded fuzzy systems over the radial features.
//!
//! The distance system sees the eight `d_total` values (three levels each),
//! the intersection system the eight clamped crossing counts (four levels).
//! Both share one output layout: class `k` owns the triangle
//! `(10k, 10k + 5, 10k + 10)`. Rules are induced by mapping every training
//! vector to its per-direction argmax levels and keeping the distinct ones.

use std::collections::HashSet;
use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::fuzzy::{FisDefinition, FuzzyError, LinguisticVariable, MembershipFunction, Rule};
use crate::preprocess::{run_stages, PipelineConfig, PreprocessError};
use crate::radial::{extract, Direction, RadialFeatureVector, MAX_INTERSECTIONS};
use crate::raster::Image;

pub const DISTANCE_RANGE: (f64, f64) = (0.0, 20.0);
pub const INTERSECTION_RANGE: (f64, f64) = (0.0, MAX_INTERSECTIONS as f64);
pub const OUTPUT_VARIABLE: &str = "class";
pub const CLASS_WIDTH: f64 = 10.0;
pub const DEFAULT_AMBIGUITY_EPSILON: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecognizerError {
    #[error("at least one class is required")]
    NoClasses,
    #[error("invalid class label {0:?}")]
    InvalidLabel(String),
    #[error("duplicate class label {0}")]
    DuplicateClass(String),
    #[error("unknown class label {0}")]
    UnknownLabel(String),
    #[error("class {0} has no training samples")]
    MissingSamples(String),
    #[error("class {0} has no rule in {1}")]
    MissingRules(String, &'static str),
    #[error("distance and intersection systems disagree on the output layout")]
    LayoutMismatch,
    #[error("evaluation corpus is empty")]
    EmptyCorpus,
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
}

fn mf(a: f64, b: f64, c: f64, d: f64) -> MembershipFunction {
    MembershipFunction::trapezoid(a, b, c, d).expect("static breakpoints are ordered")
}

fn direction_inputs(
    lo: f64,
    hi: f64,
    levels: &[(&str, MembershipFunction)],
) -> Vec<LinguisticVariable> {
    Direction::ALL
        .iter()
        .map(|d| {
            LinguisticVariable::new(
                d.name(),
                lo,
                hi,
                levels.iter().map(|(l, m)| (l.to_string(), *m)),
            )
            .expect("static levels are valid")
        })
        .collect()
}

/// The shared class output variable over `[0, 10 K]`.
pub fn class_output(classes: &[String]) -> Result<LinguisticVariable, RecognizerError> {
    if classes.is_empty() {
        return Err(RecognizerError::NoClasses);
    }
    let mut seen = HashSet::new();
    for c in classes {
        if c.is_empty() || c == "?" || c.contains(|ch: char| ch.is_whitespace() || ch == ',') {
            return Err(RecognizerError::InvalidLabel(c.clone()));
        }
        if !seen.insert(c.as_str()) {
            return Err(RecognizerError::DuplicateClass(c.clone()));
        }
    }
    let terms = classes.iter().enumerate().map(|(k, c)| {
        let lo = CLASS_WIDTH * k as f64;
        (
            c.clone(),
            mf(
                lo,
                lo + CLASS_WIDTH / 2.0,
                lo + CLASS_WIDTH / 2.0,
                lo + CLASS_WIDTH,
            ),
        )
    });
    Ok(LinguisticVariable::new(
        OUTPUT_VARIABLE,
        0.0,
        CLASS_WIDTH * classes.len() as f64,
        terms,
    )?)
}

/// Distance system: `low`, `medium`, `high` over `[0, 20]` per direction.
pub fn build_fis1(classes: &[String]) -> Result<FisDefinition, RecognizerError> {
    let (lo, hi) = DISTANCE_RANGE;
    let levels = [
        ("low", mf(0.0, 0.0, 4.0, 8.0)),
        ("medium", mf(4.0, 10.0, 10.0, 16.0)),
        ("high", mf(12.0, 16.0, 20.0, 20.0)),
    ];
    Ok(FisDefinition::new(
        direction_inputs(lo, hi, &levels),
        class_output(classes)?,
        Vec::new(),
    )?)
}

/// Intersection system: `low`, `low-medium`, `medium`, `high` over `[0, 5]`.
/// Counts 0 and 1 are `low`, 2 is `low-medium`.
pub fn build_fis2(classes: &[String]) -> Result<FisDefinition, RecognizerError> {
    let (lo, hi) = INTERSECTION_RANGE;
    let levels = [
        ("low", mf(0.0, 0.0, 1.0, 2.0)),
        ("low-medium", mf(1.0, 2.0, 2.0, 3.0)),
        ("medium", mf(2.0, 3.0, 3.0, 4.0)),
        ("high", mf(3.0, 4.0, 5.0, 5.0)),
    ];
    Ok(FisDefinition::new(
        direction_inputs(lo, hi, &levels),
        class_output(classes)?,
        Vec::new(),
    )?)
}

/// Training vectors for one class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassSamples {
    pub class: String,
    pub vectors: Vec<Vec<f64>>,
}

/// A level pattern induced for more than one class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DuplicatePattern {
    pub levels: Vec<String>,
    pub classes: Vec<String>,
}

impl fmt::Display for DuplicatePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pattern [{}] induced for classes {}",
            self.levels.join(" "),
            self.classes.join(", ")
        )
    }
}

#[derive(Debug, Clone)]
pub struct Induction {
    pub fis: FisDefinition,
    pub duplicates: Vec<DuplicatePattern>,
}

/// Per-input argmax level labels of one crisp vector.
pub fn level_vector(fis: &FisDefinition, values: &[f64]) -> Vec<String> {
    fis.inputs()
        .iter()
        .zip(values)
        .map(|(v, &x)| v.argmax_term(x).to_string())
        .collect()
}

/// Appends one full-antecedent rule per distinct level vector per class.
///
/// Rules are added in the output's class order, and within a class in first
/// appearance order. Patterns shared between classes are kept for every
/// class and reported in [`Induction::duplicates`].
pub fn induce_rules(
    fis: &FisDefinition,
    samples: &[ClassSamples],
) -> Result<Induction, RecognizerError> {
    let output = fis.output();
    for s in samples {
        if output.term_index(&s.class).is_none() {
            return Err(RecognizerError::UnknownLabel(s.class.clone()));
        }
    }
    let mut out = fis.clone();
    let names: Vec<String> = fis.inputs().iter().map(|v| v.name().to_string()).collect();
    let mut owners: Vec<(Vec<String>, Vec<String>)> = Vec::new();

    for term in output.terms() {
        let class = &term.label;
        let vectors: Vec<&Vec<f64>> = samples
            .iter()
            .filter(|s| &s.class == class)
            .flat_map(|s| s.vectors.iter())
            .collect();
        if vectors.is_empty() {
            return Err(RecognizerError::MissingSamples(class.clone()));
        }
        let mut existing: HashSet<Vec<String>> = fis
            .rules()
            .iter()
            .filter(|r| &r.consequent == class)
            .map(|r| r.antecedent.iter().map(|(_, t)| t.clone()).collect())
            .collect();
        for v in vectors {
            if v.len() != names.len() {
                return Err(FuzzyError::InputArity {
                    expected: names.len(),
                    got: v.len(),
                }
                .into());
            }
            let levels = level_vector(fis, v);
            match owners.iter_mut().find(|(l, _)| *l == levels) {
                Some((_, cs)) if !cs.contains(class) => cs.push(class.clone()),
                Some(_) => {}
                None => owners.push((levels.clone(), vec![class.clone()])),
            }
            if existing.insert(levels.clone()) {
                out.add_rule(Rule::new(names.iter().cloned().zip(levels), class.clone()))?;
            }
        }
    }

    let duplicates = owners
        .into_iter()
        .filter(|(_, cs)| cs.len() > 1)
        .map(|(levels, classes)| DuplicatePattern { levels, classes })
        .collect();
    Ok(Induction {
        fis: out,
        duplicates,
    })
}

/// Index of the output term whose centre is nearest `crisp`; ties go to the
/// lower index.
pub fn classify_crisp(fis: &FisDefinition, crisp: f64) -> usize {
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for (k, t) in fis.output().terms().iter().enumerate() {
        let d = (t.mf.center() - crisp).abs();
        if d < best_dist {
            best = k;
            best_dist = d;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecidedBy {
    Fis1,
    Fis2,
    Agreement,
    None,
}

impl DecidedBy {
    pub fn as_str(self) -> &'static str {
        match self {
            DecidedBy::Fis1 => "fis1",
            DecidedBy::Fis2 => "fis2",
            DecidedBy::Agreement => "agreement",
            DecidedBy::None => "none",
        }
    }
}

impl fmt::Display for DecidedBy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecognitionResult {
    /// `None` means unrecognized: neither system fired.
    pub label: Option<String>,
    pub fis1_crisp: Option<f64>,
    pub fis2_crisp: Option<f64>,
    pub fis1_class: Option<String>,
    pub fis2_class: Option<String>,
    pub fis1_strength: f64,
    pub fis2_strength: f64,
    pub decided_by: DecidedBy,
    /// Both fired, disagreed, and their strengths are within the model's
    /// ambiguity epsilon. Informational only.
    pub near_tie: bool,
}

impl RecognitionResult {
    pub fn unrecognized() -> Self {
        Self {
            label: None,
            fis1_crisp: None,
            fis2_crisp: None,
            fis1_class: None,
            fis2_class: None,
            fis1_strength: 0.0,
            fis2_strength: 0.0,
            decided_by: DecidedBy::None,
            near_tie: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecognitionModel {
    classes: Vec<String>,
    fis1: FisDefinition,
    fis2: FisDefinition,
    pipeline: PipelineConfig,
    ambiguity_epsilon: f64,
}

/// Model plus the cross-class collisions seen while inducing it.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub model: RecognitionModel,
    pub fis1_duplicates: Vec<DuplicatePattern>,
    pub fis2_duplicates: Vec<DuplicatePattern>,
}

impl RecognitionModel {
    pub fn new(
        fis1: FisDefinition,
        fis2: FisDefinition,
        pipeline: PipelineConfig,
        ambiguity_epsilon: f64,
    ) -> Result<Self, RecognizerError> {
        pipeline.validate()?;
        if fis1.output() != fis2.output() || fis1.inputs().len() != 8 || fis2.inputs().len() != 8 {
            return Err(RecognizerError::LayoutMismatch);
        }
        let classes: Vec<String> = fis1
            .output()
            .terms()
            .iter()
            .map(|t| t.label.clone())
            .collect();
        for (fis, name) in [(&fis1, "fis1"), (&fis2, "fis2")] {
            for c in &classes {
                if !fis.rules().iter().any(|r| &r.consequent == c) {
                    return Err(RecognizerError::MissingRules(c.clone(), name));
                }
            }
        }
        Ok(Self {
            classes,
            fis1,
            fis2,
            pipeline,
            ambiguity_epsilon,
        })
    }

    /// Induces both rule bases from per-class feature vectors. Classes keep
    /// the order given.
    pub fn train(
        samples: &[(String, Vec<RadialFeatureVector>)],
        pipeline: PipelineConfig,
    ) -> Result<TrainedModel, RecognizerError> {
        let classes: Vec<String> = samples.iter().map(|(c, _)| c.clone()).collect();
        let fis1 = build_fis1(&classes)?;
        let fis2 = build_fis2(&classes)?;
        let dist: Vec<ClassSamples> = samples
            .iter()
            .map(|(c, fs)| ClassSamples {
                class: c.clone(),
                vectors: fs.iter().map(|f| f.d_total.to_vec()).collect(),
            })
            .collect();
        let cross: Vec<ClassSamples> = samples
            .iter()
            .map(|(c, fs)| ClassSamples {
                class: c.clone(),
                vectors: fs
                    .iter()
                    .map(|f| f.clamped_intersections().to_vec())
                    .collect(),
            })
            .collect();
        let i1 = induce_rules(&fis1, &dist)?;
        let i2 = induce_rules(&fis2, &cross)?;
        Ok(TrainedModel {
            model: Self::new(i1.fis, i2.fis, pipeline, DEFAULT_AMBIGUITY_EPSILON)?,
            fis1_duplicates: i1.duplicates,
            fis2_duplicates: i2.duplicates,
        })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn fis1(&self) -> &FisDefinition {
        &self.fis1
    }

    pub fn fis2(&self) -> &FisDefinition {
        &self.fis2
    }

    pub fn pipeline(&self) -> &PipelineConfig {
        &self.pipeline
    }

    pub fn ambiguity_epsilon(&self) -> f64 {
        self.ambiguity_epsilon
    }

    pub fn with_ambiguity_epsilon(mut self, epsilon: f64) -> Self {
        self.ambiguity_epsilon = epsilon;
        self
    }

    /// Rules per class in `(fis1, fis2)`, in class order.
    pub fn rule_counts(&self) -> Vec<(usize, usize)> {
        let count =
            |fis: &FisDefinition, c: &str| fis.rules().iter().filter(|r| r.consequent == c).count();
        self.classes
            .iter()
            .map(|c| (count(&self.fis1, c), count(&self.fis2, c)))
            .collect()
    }

    pub fn features(&self, img: &Image) -> Result<RadialFeatureVector, PreprocessError> {
        let stages = run_stages(img, &self.pipeline)?;
        Ok(extract(stages.features_image(self.pipeline.feature_source)))
    }

    pub fn recognize(&self, img: &Image) -> Result<RecognitionResult, PreprocessError> {
        Ok(self.recognize_features(&self.features(img)?))
    }

    /// Runs both systems on an already extracted vector and arbitrates.
    ///
    /// Agreement wins outright. On disagreement the stronger system wins,
    /// with ties going to the intersection system. A system that fires
    /// alone decides by itself.
    pub fn recognize_features(&self, features: &RadialFeatureVector) -> RecognitionResult {
        let verdict = |fis: &FisDefinition, inputs: &[f64]| match fis.infer(inputs) {
            Ok(out) => Some((out.crisp, classify_crisp(fis, out.crisp), out.max_strength)),
            Err(FuzzyError::NoRuleFired) => None,
            Err(e) => unreachable!("model inputs always have arity 8: {e}"),
        };
        let v1 = verdict(&self.fis1, &features.d_total);
        let v2 = verdict(&self.fis2, &features.clamped_intersections());

        let mut res = RecognitionResult::unrecognized();
        if let Some((crisp, k, s)) = v1 {
            res.fis1_crisp = Some(crisp);
            res.fis1_class = Some(self.classes[k].clone());
            res.fis1_strength = s;
        }
        if let Some((crisp, k, s)) = v2 {
            res.fis2_crisp = Some(crisp);
            res.fis2_class = Some(self.classes[k].clone());
            res.fis2_strength = s;
        }
        let (label, by, near_tie) = arbitrate(
            v1.map(|(_, k, s)| (k, s)),
            v2.map(|(_, k, s)| (k, s)),
            self.ambiguity_epsilon,
        );
        res.near_tie = near_tie;
        res.label = label.map(|k| self.classes[k].clone());
        res.decided_by = by;
        res
    }
}

/// Final decision from each system's `(class index, max strength)`, if it
/// fired. Returns the winning class, who decided, and whether a disagreement
/// was within `epsilon`.
pub fn arbitrate(
    fis1: Option<(usize, f64)>,
    fis2: Option<(usize, f64)>,
    epsilon: f64,
) -> (Option<usize>, DecidedBy, bool) {
    match (fis1, fis2) {
        (Some((k1, _)), Some((k2, _))) if k1 == k2 => (Some(k1), DecidedBy::Agreement, false),
        (Some((k1, s1)), Some((k2, s2))) => {
            let near = (s1 - s2).abs() < epsilon;
            if s1 > s2 {
                (Some(k1), DecidedBy::Fis1, near)
            } else {
                (Some(k2), DecidedBy::Fis2, near)
            }
        }
        (Some((k1, _)), None) => (Some(k1), DecidedBy::Fis1, false),
        (None, Some((k2, _))) => (Some(k2), DecidedBy::Fis2, false),
        (None, None) => (None, DecidedBy::None, false),
    }
}

/// One evaluated glyph.
#[derive(Debug, Clone, PartialEq)]
pub struct GlyphOutcome {
    pub expected: String,
    /// `None` for unrecognized or empty glyphs.
    pub predicted: Option<String>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport {
    pub class: String,
    pub tested: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub fis1_rules: usize,
    pub fis2_rules: usize,
    pub mean_seconds: f64,
    pub variance_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub classes: Vec<ClassReport>,
    pub tested: usize,
    pub correct: usize,
    pub overall_accuracy: f64,
    pub mean_seconds: f64,
    pub outcomes: Vec<GlyphOutcome>,
}

pub fn accuracy_percent(correct: usize, tested: usize) -> f64 {
    if tested == 0 {
        0.0
    } else {
        100.0 * correct as f64 / tested as f64
    }
}

/// Mean and sample variance (`n - 1`; zero for fewer than two values).
pub fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Aggregates outcomes into per-class and overall figures. Classes with no
/// tested glyphs are still listed.
pub fn summarize(
    model: &RecognitionModel,
    outcomes: Vec<GlyphOutcome>,
) -> Result<EvaluationReport, RecognizerError> {
    if outcomes.is_empty() {
        return Err(RecognizerError::EmptyCorpus);
    }
    for o in &outcomes {
        if !model.classes.contains(&o.expected) {
            return Err(RecognizerError::UnknownLabel(o.expected.clone()));
        }
    }
    let counts = model.rule_counts();
    let classes = model
        .classes
        .iter()
        .zip(counts)
        .map(|(class, (r1, r2))| {
            let mine: Vec<&GlyphOutcome> =
                outcomes.iter().filter(|o| &o.expected == class).collect();
            let correct = mine
                .iter()
                .filter(|o| o.predicted.as_ref() == Some(class))
                .count();
            let times: Vec<f64> = mine.iter().map(|o| o.seconds).collect();
            let (mean_seconds, variance_seconds) = mean_and_variance(&times);
            ClassReport {
                class: class.clone(),
                tested: mine.len(),
                correct,
                accuracy: accuracy_percent(correct, mine.len()),
                fis1_rules: r1,
                fis2_rules: r2,
                mean_seconds,
                variance_seconds,
            }
        })
        .collect::<Vec<_>>();
    let tested = outcomes.len();
    let correct = classes.iter().map(|c| c.correct).sum();
    let all_times: Vec<f64> = outcomes.iter().map(|o| o.seconds).collect();
    Ok(EvaluationReport {
        classes,
        tested,
        correct,
        overall_accuracy: accuracy_percent(correct, tested),
        mean_seconds: mean_and_variance(&all_times).0,
        outcomes,
    })
}

/// Recognizes every `(label, image)` pair, timing each glyph end to end.
///
/// `jobs` threads share the work; results are gathered in corpus order so
/// the counts never depend on `jobs`. Empty glyphs count as misses.
pub fn evaluate(
    model: &RecognitionModel,
    corpus: &[(String, Image)],
    jobs: usize,
) -> Result<EvaluationReport, RecognizerError> {
    if corpus.is_empty() {
        return Err(RecognizerError::EmptyCorpus);
    }
    if let Some((label, _)) = corpus.iter().find(|(l, _)| !model.classes.contains(l)) {
        return Err(RecognizerError::UnknownLabel(label.clone()));
    }
    let run_one = |(label, img): &(String, Image)| {
        let start = Instant::now();
        let predicted = model.recognize(img).ok().and_then(|r| r.label);
        GlyphOutcome {
            expected: label.clone(),
            predicted,
            seconds: start.elapsed().as_secs_f64(),
        }
    };
    let outcomes: Vec<GlyphOutcome> = if jobs <= 1 {
        corpus.iter().map(run_one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .expect("thread pool construction");
        pool.install(|| corpus.par_iter().map(run_one).collect())
    };
    summarize(model, outcomes)
}
