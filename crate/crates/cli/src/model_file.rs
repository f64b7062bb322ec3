//! Line-oriented text serialization of a trained [`RecognitionModel`].
//!
//! ```text
//! glyphfuzz-model v1
//! classes: ring,cup
//! canvas: 70x50
//! pipeline: threshold 128 open 1 close 1 spur 3 dilate 1 measure dilated
//! epsilon: 0.05
//! samples fis1 1001
//! var fis1 W 0 20
//! term low 0 0 4 8
//! ...
//! output fis1 class 0 20
//! term ring 0 5 5 10
//! rule fis1 ring high high high high high high high high
//! ```
//!
//! Rule lines list one term per input in input order, `-` where the input is
//! not mentioned. Numbers are written in Rust's shortest round-trip form so
//! parsing a serialized model gives back an equal model.

use std::fmt::Write as _;

use glyphfuzz_core::fuzzy::{FisDefinition, LinguisticVariable, MembershipFunction, Rule};
use glyphfuzz_core::preprocess::{FeatureSource, PipelineConfig};
use glyphfuzz_core::RecognitionModel;
use thiserror::Error;

pub const HEADER: &str = "glyphfuzz-model v1";
const FIS_NAMES: [&str; 2] = ["fis1", "fis2"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelFileError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing {0}")]
    Missing(&'static str),
    #[error("invalid model: {0}")]
    Invalid(String),
}

fn write_fis(out: &mut String, tag: &str, fis: &FisDefinition) {
    let write_var = |out: &mut String, kind: &str, v: &LinguisticVariable| {
        let (lo, hi) = v.range();
        writeln!(out, "{kind} {tag} {} {lo} {hi}", v.name()).unwrap();
        for t in v.terms() {
            let [a, b, c, d] = t.mf.breakpoints();
            writeln!(out, "term {} {a} {b} {c} {d}", t.label).unwrap();
        }
    };
    writeln!(out, "samples {tag} {}", fis.defuzz_samples()).unwrap();
    for v in fis.inputs() {
        write_var(out, "var", v);
    }
    write_var(out, "output", fis.output());
    for rule in fis.rules() {
        write!(out, "rule {tag} {}", rule.consequent).unwrap();
        for v in fis.inputs() {
            let term = rule
                .antecedent
                .iter()
                .find(|(name, _)| name == v.name())
                .map_or("-", |(_, t)| t.as_str());
            write!(out, " {term}").unwrap();
        }
        out.push('\n');
    }
}

pub fn serialize(model: &RecognitionModel) -> String {
    let p = model.pipeline();
    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    writeln!(out, "classes: {}", model.classes().join(",")).unwrap();
    writeln!(out, "canvas: {}x{}", p.canvas_height, p.canvas_width).unwrap();
    writeln!(
        out,
        "pipeline: threshold {} open {} close {} spur {} dilate {} measure {}",
        p.threshold,
        p.open_iterations,
        p.close_iterations,
        p.spur_iterations,
        p.final_dilate_iterations,
        p.feature_source.as_str()
    )
    .unwrap();
    writeln!(out, "epsilon: {}", model.ambiguity_epsilon()).unwrap();
    write_fis(&mut out, FIS_NAMES[0], model.fis1());
    write_fis(&mut out, FIS_NAMES[1], model.fis2());
    out
}

#[derive(Default)]
struct VarDraft {
    name: String,
    lo: f64,
    hi: f64,
    terms: Vec<(String, MembershipFunction)>,
}

#[derive(Default)]
struct FisDraft {
    samples: Option<usize>,
    inputs: Vec<VarDraft>,
    output: Option<VarDraft>,
    // (line, consequent, terms)
    rules: Vec<(usize, String, Vec<String>)>,
}

/// Parses the canvas spelling `HxW`.
pub fn parse_canvas(s: &str) -> Option<(usize, usize)> {
    let (h, w) = s.split_once('x')?;
    Some((h.parse().ok()?, w.parse().ok()?))
}

pub fn parse(text: &str) -> Result<RecognitionModel, ModelFileError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, HEADER)) => {}
        Some((line, other)) => {
            return Err(ModelFileError::Syntax {
                line,
                message: format!("expected {HEADER:?}, got {other:?}"),
            })
        }
        None => return Err(ModelFileError::Missing("header")),
    }

    let mut classes: Option<Vec<String>> = None;
    let mut canvas: Option<(usize, usize)> = None;
    let mut pipeline: Option<PipelineConfig> = None;
    let mut epsilon: Option<f64> = None;
    let mut fis = [FisDraft::default(), FisDraft::default()];
    // where the next `term` line goes: (fis index, is output)
    let mut open_var: Option<(usize, bool)> = None;

    for (line, text) in lines {
        let err = |message: String| ModelFileError::Syntax { line, message };
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| err(format!("bad number {s:?}")))
        };
        let fis_index = |s: &str| {
            FIS_NAMES
                .iter()
                .position(|n| *n == s)
                .ok_or_else(|| err(format!("unknown system {s:?}")))
        };

        if let Some(rest) = text.strip_prefix("classes:") {
            classes = Some(rest.trim().split(',').map(str::to_string).collect());
            continue;
        }
        if let Some(rest) = text.strip_prefix("canvas:") {
            canvas = Some(
                parse_canvas(rest.trim())
                    .ok_or_else(|| err(format!("bad canvas {:?}", rest.trim())))?,
            );
            continue;
        }
        if let Some(rest) = text.strip_prefix("epsilon:") {
            epsilon = Some(num(rest.trim())?);
            continue;
        }
        if let Some(rest) = text.strip_prefix("pipeline:") {
            let words: Vec<&str> = rest.split_whitespace().collect();
            if !words.len().is_multiple_of(2) {
                return Err(err("pipeline settings come in key/value pairs".into()));
            }
            let mut cfg = PipelineConfig::default();
            for kv in words.chunks(2) {
                let count = || {
                    kv[1]
                        .parse::<usize>()
                        .map_err(|_| err(format!("bad value {:?} for {}", kv[1], kv[0])))
                };
                match kv[0] {
                    "threshold" => {
                        cfg.threshold = kv[1]
                            .parse()
                            .map_err(|_| err(format!("bad threshold {:?}", kv[1])))?
                    }
                    "open" => cfg.open_iterations = count()?,
                    "close" => cfg.close_iterations = count()?,
                    "spur" => cfg.spur_iterations = count()?,
                    "dilate" => cfg.final_dilate_iterations = count()?,
                    "measure" => {
                        cfg.feature_source = kv[1]
                            .parse::<FeatureSource>()
                            .map_err(|e| err(e.to_string()))?
                    }
                    other => return Err(err(format!("unknown pipeline setting {other:?}"))),
                }
            }
            pipeline = Some(cfg);
            continue;
        }

        let words: Vec<&str> = text.split_whitespace().collect();
        match words[0] {
            "samples" if words.len() == 3 => {
                let i = fis_index(words[1])?;
                fis[i].samples = Some(
                    words[2]
                        .parse()
                        .map_err(|_| err(format!("bad sample count {:?}", words[2])))?,
                );
                open_var = None;
            }
            "var" | "output" if words.len() == 5 => {
                let i = fis_index(words[1])?;
                let draft = VarDraft {
                    name: words[2].to_string(),
                    lo: num(words[3])?,
                    hi: num(words[4])?,
                    terms: Vec::new(),
                };
                if words[0] == "var" {
                    fis[i].inputs.push(draft);
                    open_var = Some((i, false));
                } else {
                    if fis[i].output.is_some() {
                        return Err(err(format!("second output variable for {}", words[1])));
                    }
                    fis[i].output = Some(draft);
                    open_var = Some((i, true));
                }
            }
            "term" if words.len() == 6 => {
                let (i, is_output) =
                    open_var.ok_or_else(|| err("term outside a variable block".into()))?;
                let mf = MembershipFunction::trapezoid(
                    num(words[2])?,
                    num(words[3])?,
                    num(words[4])?,
                    num(words[5])?,
                )
                .map_err(|e| err(e.to_string()))?;
                let var = if is_output {
                    fis[i].output.as_mut()
                } else {
                    fis[i].inputs.last_mut()
                };
                var.expect("open block exists")
                    .terms
                    .push((words[1].to_string(), mf));
            }
            "rule" if words.len() >= 3 => {
                let i = fis_index(words[1])?;
                fis[i].rules.push((
                    line,
                    words[2].to_string(),
                    words[3..].iter().map(|s| s.to_string()).collect(),
                ));
                open_var = None;
            }
            _ => return Err(err(format!("unrecognized line {text:?}"))),
        }
    }

    let classes = classes.ok_or(ModelFileError::Missing("classes line"))?;
    let (height, width) = canvas.ok_or(ModelFileError::Missing("canvas line"))?;
    let mut pipeline = pipeline.ok_or(ModelFileError::Missing("pipeline line"))?;
    pipeline.canvas_height = height;
    pipeline.canvas_width = width;
    let epsilon = epsilon.ok_or(ModelFileError::Missing("epsilon line"))?;

    let invalid = |e: &dyn std::fmt::Display| ModelFileError::Invalid(e.to_string());
    let build = |draft: FisDraft, tag: &str| -> Result<FisDefinition, ModelFileError> {
        let var = |v: VarDraft| {
            LinguisticVariable::new(v.name, v.lo, v.hi, v.terms).map_err(|e| invalid(&e))
        };
        let output = var(draft
            .output
            .ok_or(ModelFileError::Missing("output variable"))?)?;
        let inputs = draft
            .inputs
            .into_iter()
            .map(var)
            .collect::<Result<Vec<_>, _>>()?;
        let mut rules = Vec::with_capacity(draft.rules.len());
        for (line, consequent, terms) in draft.rules {
            if terms.len() != inputs.len() {
                return Err(ModelFileError::Syntax {
                    line,
                    message: format!(
                        "{tag} rule lists {} terms for {} inputs",
                        terms.len(),
                        inputs.len()
                    ),
                });
            }
            let antecedent = inputs
                .iter()
                .zip(&terms)
                .filter(|(_, t)| t.as_str() != "-")
                .map(|(v, t)| (v.name(), t.as_str()));
            rules.push(Rule::new(antecedent, consequent));
        }
        let fis = FisDefinition::new(inputs, output, rules).map_err(|e| invalid(&e))?;
        match draft.samples {
            Some(n) => fis.with_defuzz_samples(n).map_err(|e| invalid(&e)),
            None => Ok(fis),
        }
    };
    let [d1, d2] = fis;
    let model = RecognitionModel::new(
        build(d1, FIS_NAMES[0])?,
        build(d2, FIS_NAMES[1])?,
        pipeline,
        epsilon,
    )
    .map_err(|e| invalid(&e))?;
    if model.classes() != classes.as_slice() {
        return Err(ModelFileError::Invalid(
            "classes line disagrees with the output terms".into(),
        ));
    }
    Ok(model)
}
