//! Subcommands. Each writes its normal output to `out`, diagnostics to `err`,
//! and returns the process exit code.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use glyphfuzz_core::preprocess::{run_stages, run_until, PipelineConfig, PreprocessError, Stage};
use glyphfuzz_core::radial::{extract, RadialFeatureVector};
use glyphfuzz_core::recognizer::evaluate;
use glyphfuzz_core::{
    serialize_pbm, EvaluationReport, FisDefinition, Image, RecognitionModel, RecognitionResult,
};
use thiserror::Error;

use crate::corpus::{self, CorpusError};
use crate::model_file::{self, parse_canvas};
use crate::synth::{self, ShapeFamily};

pub const EXIT_OK: u8 = 0;
pub const EXIT_MISS: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_EMPTY_GLYPH: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "glyphfuzz",
    version,
    about = "Fuzzy-rule glyph recognizer over radial ray features"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Induce both rule bases from a labeled corpus and write a model file.
    Train(TrainArgs),
    /// Recognize each image and print one tab-separated line per image.
    Recognize(RecognizeArgs),
    /// Recognize a labeled corpus and print per-class accuracy and timing.
    Eval(EvalArgs),
    /// Print an image's radial features and every rule's firing strength.
    Inspect(InspectArgs),
    /// Write a seeded synthetic corpus of built-in shape families.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Working canvas as HEIGHTxWIDTH, 7:5.
    #[arg(long, default_value = "70x50")]
    pub canvas: String,
    /// Gray pixels darker than this are foreground.
    #[arg(long, default_value_t = 128)]
    pub threshold: u8,
    /// Spur-pruning iterations.
    #[arg(long, default_value_t = 3)]
    pub spur: usize,
}

#[derive(Debug, Args)]
pub struct RecognizeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(required = true)]
    pub images: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Per-class CSV report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: u16,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub model: PathBuf,
    pub image: PathBuf,
    /// Print this intermediate image as P1 instead of the feature tables.
    #[arg(long)]
    pub stage: Option<Stage>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 7)]
    pub classes: usize,
    #[arg(long = "per-class", default_value_t = 5)]
    pub per_class: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: glyph has no foreground pixels", .0.display())]
    EmptyGlyph(PathBuf),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::EmptyGlyph(_) => EXIT_EMPTY_GLYPH,
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let result = match cli.command {
        Command::Train(a) => train(&a, out, err),
        Command::Recognize(a) => recognize(&a, out),
        Command::Eval(a) => eval(&a, out),
        Command::Inspect(a) => inspect(&a, out),
        Command::Synth(a) => synth_cmd(&a, out),
    };
    match result {
        Ok(code) => code,
        // downstream reader went away, e.g. `| head`
        Err(CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "glyphfuzz: {e}");
            e.code()
        }
    }
}

fn load_model(path: &Path) -> Result<RecognitionModel, CliError> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    model_file::parse(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn features_for(
    path: &Path,
    img: &Image,
    cfg: &PipelineConfig,
) -> Result<RadialFeatureVector, CliError> {
    match run_stages(img, cfg) {
        Ok(stages) => Ok(extract(stages.features_image(cfg.feature_source))),
        Err(PreprocessError::EmptyGlyph) => Err(CliError::EmptyGlyph(path.to_path_buf())),
        Err(e) => Err(usage(e)),
    }
}

fn train(a: &TrainArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8, CliError> {
    let (canvas_height, canvas_width) = parse_canvas(&a.canvas)
        .ok_or_else(|| usage(format!("bad canvas {:?}, expected HxW", a.canvas)))?;
    let cfg = PipelineConfig {
        canvas_height,
        canvas_width,
        threshold: a.threshold,
        spur_iterations: a.spur,
        ..PipelineConfig::default()
    };
    cfg.validate().map_err(usage)?;
    let corpus = corpus::load(&a.corpus)?;
    let mut samples = Vec::with_capacity(corpus.len());
    for class in &corpus {
        let vectors = class
            .samples
            .iter()
            .map(|s| features_for(&s.path, &s.image, &cfg))
            .collect::<Result<Vec<_>, _>>()?;
        samples.push((class.label.clone(), vectors));
    }
    let trained = RecognitionModel::train(&samples, cfg).map_err(usage)?;
    for (tag, dups) in [
        ("fis1", &trained.fis1_duplicates),
        ("fis2", &trained.fis2_duplicates),
    ] {
        for d in dups.iter() {
            writeln!(err, "warning: {tag}: {d}")?;
        }
    }
    fs::write(&a.out, model_file::serialize(&trained.model))
        .map_err(|e| usage(format!("{}: {e}", a.out.display())))?;

    let model = &trained.model;
    let width = label_width(model.classes());
    writeln!(
        out,
        "{:<width$}  {:>7}  {:>10}  {:>10}",
        "class", "samples", "fis1_rules", "fis2_rules"
    )?;
    let (mut t1, mut t2) = (0, 0);
    for ((class, (r1, r2)), dir) in model.classes().iter().zip(model.rule_counts()).zip(&corpus) {
        writeln!(
            out,
            "{class:<width$}  {:>7}  {r1:>10}  {r2:>10}",
            dir.samples.len()
        )?;
        t1 += r1;
        t2 += r2;
    }
    let total: usize = corpus.iter().map(|c| c.samples.len()).sum();
    writeln!(out, "{:<width$}  {total:>7}  {t1:>10}  {t2:>10}", "total")?;
    Ok(EXIT_OK)
}

fn label_width(classes: &[String]) -> usize {
    classes
        .iter()
        .map(String::len)
        .max()
        .unwrap_or(0)
        .max("overall".len())
}

fn crisp_field(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |c| format!("{c:.4}"))
}

/// `<path>\t<label>\t<decided_by>\t<fis1_crisp>\t<fis2_crisp>`.
pub fn recognition_line(path: &Path, r: &RecognitionResult) -> String {
    format!(
        "{}\t{}\t{}\t{}\t{}",
        path.display(),
        r.label.as_deref().unwrap_or("?"),
        r.decided_by,
        crisp_field(r.fis1_crisp),
        crisp_field(r.fis2_crisp)
    )
}

fn recognize(a: &RecognizeArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let model = load_model(&a.model)?;
    let images = a
        .images
        .iter()
        .map(|p| corpus::read_image(p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut code = EXIT_OK;
    for (path, img) in a.images.iter().zip(&images) {
        let result = match model.recognize(img) {
            Ok(r) => r,
            Err(PreprocessError::EmptyGlyph) => RecognitionResult::unrecognized(),
            Err(e) => return Err(usage(e)),
        };
        if result.label.is_none() {
            code = EXIT_MISS;
        }
        writeln!(out, "{}", recognition_line(path, &result))?;
    }
    Ok(code)
}

/// Fixed-width accuracy table; contains no timing data.
pub fn accuracy_table(report: &EvaluationReport) -> String {
    let names: Vec<String> = report.classes.iter().map(|c| c.class.clone()).collect();
    let width = label_width(&names);
    let mut s = format!(
        "{:<width$}  {:>6}  {:>7}  {:>8}  {:>10}  {:>10}\n",
        "class", "tested", "correct", "accuracy", "fis1_rules", "fis2_rules"
    );
    for c in &report.classes {
        s.push_str(&format!(
            "{:<width$}  {:>6}  {:>7}  {:>8.1}  {:>10}  {:>10}\n",
            c.class, c.tested, c.correct, c.accuracy, c.fis1_rules, c.fis2_rules
        ));
    }
    let (r1, r2) = report
        .classes
        .iter()
        .fold((0, 0), |(a, b), c| (a + c.fis1_rules, b + c.fis2_rules));
    s.push_str(&format!(
        "{:<width$}  {:>6}  {:>7}  {:>8.1}  {:>10}  {:>10}\n",
        "overall", report.tested, report.correct, report.overall_accuracy, r1, r2
    ));
    s
}

/// Per-class mean and sample variance of recognition time.
pub fn timing_table(report: &EvaluationReport) -> String {
    let names: Vec<String> = report.classes.iter().map(|c| c.class.clone()).collect();
    let width = label_width(&names);
    let mut s = format!(
        "{:<width$}  {:>12}  {:>12}\n",
        "class", "mean_seconds", "variance"
    );
    for c in &report.classes {
        s.push_str(&format!(
            "{:<width$}  {:>12.6}  {:>12.3e}\n",
            c.class, c.mean_seconds, c.variance_seconds
        ));
    }
    s.push_str(&format!(
        "{:<width$}  {:>12.6}\n",
        "overall", report.mean_seconds
    ));
    s
}

pub fn report_csv(report: &EvaluationReport) -> String {
    let mut s = String::from("class,tested,correct,accuracy,mean_seconds,variance\n");
    for c in &report.classes {
        s.push_str(&format!(
            "{},{},{},{:.2},{:.9},{:.6e}\n",
            c.class, c.tested, c.correct, c.accuracy, c.mean_seconds, c.variance_seconds
        ));
    }
    s
}

fn eval(a: &EvalArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let model = load_model(&a.model)?;
    let corpus = corpus::load(&a.corpus)?;
    let labeled: Vec<(String, Image)> = corpus
        .into_iter()
        .flat_map(|c| {
            let label = c.label;
            c.samples.into_iter().map(move |s| (label.clone(), s.image))
        })
        .collect();
    let report = evaluate(&model, &labeled, usize::from(a.jobs)).map_err(usage)?;
    write!(out, "{}", accuracy_table(&report))?;
    writeln!(out)?;
    writeln!(out, "timing")?;
    write!(out, "{}", timing_table(&report))?;
    if let Some(path) = &a.report {
        fs::write(path, report_csv(&report))
            .map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    Ok(EXIT_OK)
}

fn strength_rows(
    out: &mut dyn Write,
    tag: &str,
    fis: &FisDefinition,
    inputs: &[f64],
) -> io::Result<()> {
    let strengths = fis
        .rule_strengths(inputs)
        .expect("model systems take 8 inputs");
    for (i, (rule, s)) in fis.rules().iter().zip(strengths).enumerate() {
        writeln!(out, "{tag},{i},{},{s:.4}", rule.consequent)?;
    }
    Ok(())
}

fn inspect(a: &InspectArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let model = load_model(&a.model)?;
    let img = corpus::read_image(&a.image)?;
    let empty = |e: PreprocessError| match e {
        PreprocessError::EmptyGlyph => CliError::EmptyGlyph(a.image.clone()),
        other => usage(other),
    };
    if let Some(stage) = a.stage {
        let staged = run_until(&img, model.pipeline(), stage).map_err(empty)?;
        out.write_all(&serialize_pbm(&staged))?;
        return Ok(EXIT_OK);
    }
    let features = model.features(&img).map_err(empty)?;
    write!(out, "{}", features.to_csv())?;
    writeln!(out)?;
    writeln!(out, "fis,rule,class,strength")?;
    strength_rows(out, "fis1", model.fis1(), &features.d_total)?;
    strength_rows(out, "fis2", model.fis2(), &features.clamped_intersections())?;
    Ok(EXIT_OK)
}

fn synth_cmd(a: &SynthArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let families = ShapeFamily::ALL.len();
    if !(1..=families).contains(&a.classes) {
        return Err(usage(format!(
            "--classes must be between 1 and {families}, got {}",
            a.classes
        )));
    }
    if a.per_class == 0 {
        return Err(usage("--per-class must be at least 1"));
    }
    let corpus = synth::generate_corpus(a.classes, a.per_class, a.seed);
    let written = synth::write_corpus(&a.out, &corpus)
        .map_err(|e| usage(format!("{}: {e}", a.out.display())))?;
    writeln!(
        out,
        "wrote {written} images in {} classes to {}",
        a.classes,
        a.out.display()
    )?;
    Ok(EXIT_OK)
}
