//! Glyph normalization: open, close, crop, thin, prune, resize, dilate.
//!
//! All morphology uses a 3×3 square structuring element and treats every
//! out-of-bounds pixel as background, so erosion eats into glyphs touching the
//! image border.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::raster::{BinaryImage, Image};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PreprocessError {
    #[error("glyph has no foreground pixels")]
    EmptyGlyph,
    #[error("invalid pipeline configuration: {0}")]
    InvalidConfig(String),
}

/// Which pipeline image the radial features are measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeatureSource {
    /// The final, dilated canvas.
    #[default]
    Dilated,
    /// The resized skeleton, before the final dilation.
    Skeleton,
}

impl FeatureSource {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSource::Dilated => "dilated",
            FeatureSource::Skeleton => "skeleton",
        }
    }
}

impl FromStr for FeatureSource {
    type Err = PreprocessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dilated" => Ok(FeatureSource::Dilated),
            "skeleton" => Ok(FeatureSource::Skeleton),
            other => Err(PreprocessError::InvalidConfig(format!(
                "unknown feature source {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineConfig {
    pub canvas_height: usize,
    pub canvas_width: usize,
    /// Gray inputs are foreground where `intensity < threshold`.
    pub threshold: u8,
    pub spur_iterations: usize,
    pub open_iterations: usize,
    pub close_iterations: usize,
    pub final_dilate_iterations: usize,
    pub feature_source: FeatureSource,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            canvas_height: 70,
            canvas_width: 50,
            threshold: 128,
            spur_iterations: 3,
            open_iterations: 1,
            close_iterations: 1,
            final_dilate_iterations: 1,
            feature_source: FeatureSource::Dilated,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PreprocessError> {
        let (h, w) = (self.canvas_height, self.canvas_width);
        if h == 0 || w == 0 {
            return Err(PreprocessError::InvalidConfig(format!(
                "canvas {h}x{w} must be nonempty"
            )));
        }
        if h * 5 != w * 7 {
            return Err(PreprocessError::InvalidConfig(format!(
                "canvas {h}x{w} is not 7:5"
            )));
        }
        if self.open_iterations == 0
            || self.close_iterations == 0
            || self.final_dilate_iterations == 0
        {
            return Err(PreprocessError::InvalidConfig(
                "open, close and final dilate iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

fn map_neighbourhood(img: &BinaryImage, keep: impl Fn(usize) -> bool) -> BinaryImage {
    BinaryImage::from_fn(img.width(), img.height(), |row, col| {
        let (r, c) = (row as isize, col as isize);
        let mut n = 0;
        for dr in -1..=1 {
            for dc in -1..=1 {
                n += usize::from(img.get(r + dr, c + dc));
            }
        }
        keep(n)
    })
}

/// 3×3 dilation: foreground iff any pixel of the clipped neighbourhood is.
pub fn dilate(img: &BinaryImage) -> BinaryImage {
    map_neighbourhood(img, |n| n > 0)
}

/// 3×3 erosion: foreground iff all nine neighbourhood pixels are.
pub fn erode(img: &BinaryImage) -> BinaryImage {
    map_neighbourhood(img, |n| n == 9)
}

fn repeat(img: &BinaryImage, times: usize, op: fn(&BinaryImage) -> BinaryImage) -> BinaryImage {
    let mut out = img.clone();
    for _ in 0..times {
        out = op(&out);
    }
    out
}

/// `iterations` erosions followed by as many dilations.
pub fn open(img: &BinaryImage, iterations: usize) -> BinaryImage {
    repeat(&repeat(img, iterations, erode), iterations, dilate)
}

/// `iterations` dilations followed by as many erosions.
pub fn close(img: &BinaryImage, iterations: usize) -> BinaryImage {
    repeat(&repeat(img, iterations, dilate), iterations, erode)
}

/// Tight bounding box of all foreground pixels.
pub fn crop_to_content(img: &BinaryImage) -> Result<BinaryImage, PreprocessError> {
    let mut bounds: Option<(usize, usize, usize, usize)> = None;
    for (r, c) in img.foreground() {
        bounds = Some(match bounds {
            None => (r, r, c, c),
            Some((r0, r1, c0, c1)) => (r0.min(r), r1.max(r), c0.min(c), c1.max(c)),
        });
    }
    let (r0, r1, c0, c1) = bounds.ok_or(PreprocessError::EmptyGlyph)?;
    Ok(img.sub_image(r0..=r1, c0..=c1))
}

// Clockwise from north: P2..P9 in the usual Zhang-Suen numbering.
const RING: [(isize, isize); 8] = [
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
];

fn zhang_suen_pass(img: &mut BinaryImage, first: bool) -> bool {
    let mut doomed = Vec::new();
    for (row, col) in img.foreground() {
        let (r, c) = (row as isize, col as isize);
        let p: [bool; 8] = RING.map(|(dr, dc)| img.get(r + dr, c + dc));
        let b = p.iter().filter(|&&x| x).count();
        if !(2..=6).contains(&b) {
            continue;
        }
        let a = (0..8).filter(|&i| !p[i] && p[(i + 1) % 8]).count();
        if a != 1 {
            continue;
        }
        // p[0]=N p[2]=E p[4]=S p[6]=W
        let (n, e, s, w) = (p[0], p[2], p[4], p[6]);
        let removable = if first {
            !(n && e && s) && !(e && s && w)
        } else {
            !(n && e && w) && !(n && s && w)
        };
        if removable {
            doomed.push((row, col));
        }
    }
    if doomed.is_empty() {
        return false;
    }
    spare_vanishing_components(img, &mut doomed);
    for &(r, c) in &doomed {
        img.set(r, c, false);
    }
    !doomed.is_empty()
}

/// Plain Zhang-Suen erases any blob that thins down to a 2x2 square. Where a
/// subpass would delete every pixel of an 8-connected component, the
/// component's first pixel in raster order is kept instead.
fn spare_vanishing_components(img: &BinaryImage, doomed: &mut Vec<(usize, usize)>) {
    let (h, w) = (img.height(), img.width());
    let mut marked = vec![false; h * w];
    for &(r, c) in doomed.iter() {
        marked[r * w + c] = true;
    }
    let mut seen = vec![false; h * w];
    let mut spared = Vec::new();
    let mut stack = Vec::new();
    for (row, col) in img.foreground() {
        let start = row * w + col;
        if seen[start] || !marked[start] {
            continue;
        }
        seen[start] = true;
        stack.push((row, col));
        let mut all_marked = true;
        while let Some((r, c)) = stack.pop() {
            all_marked &= marked[r * w + c];
            for (dr, dc) in RING {
                let (y, x) = (r as isize + dr, c as isize + dc);
                if img.get(y, x) && !seen[y as usize * w + x as usize] {
                    seen[y as usize * w + x as usize] = true;
                    stack.push((y as usize, x as usize));
                }
            }
        }
        if all_marked {
            spared.push((row, col));
        }
    }
    doomed.retain(|p| !spared.contains(p));
}

/// Zhang-Suen thinning, iterated until neither subpass deletes a pixel.
pub fn skeletonize(img: &BinaryImage) -> BinaryImage {
    let mut out = img.clone();
    loop {
        let a = zhang_suen_pass(&mut out, true);
        let b = zhang_suen_pass(&mut out, false);
        if !a && !b {
            return out;
        }
    }
}

/// Each iteration removes, simultaneously, every pixel with exactly one
/// foreground 8-neighbour.
pub fn prune_spurs(img: &BinaryImage, iterations: usize) -> BinaryImage {
    let mut out = img.clone();
    for _ in 0..iterations {
        let ends: Vec<_> = out
            .foreground()
            .filter(|&(r, c)| out.neighbour_count(r, c) == 1)
            .collect();
        if ends.is_empty() {
            break;
        }
        for (r, c) in ends {
            out.set(r, c, false);
        }
    }
    out
}

/// Resamples to `height × width`.
///
/// Along an axis that grows (or keeps its size) this is plain nearest
/// neighbour, `src = floor(dst · src_len / dst_len)`. Along an axis that
/// shrinks, each destination pixel ORs its whole source footprint
/// `[floor(dst · s / d), floor((dst + 1) · s / d))`, so no stroke pixel is
/// dropped and 8-connected strokes stay 8-connected.
pub fn resize(img: &BinaryImage, height: usize, width: usize) -> BinaryImage {
    let rows = footprints(img.height(), height);
    let cols = footprints(img.width(), width);
    BinaryImage::from_fn(width, height, |r, c| {
        rows[r]
            .clone()
            .any(|sr| cols[c].clone().any(|sc| img.at(sr, sc)))
    })
}

fn footprints(src: usize, dst: usize) -> Vec<std::ops::Range<usize>> {
    (0..dst)
        .map(|i| {
            let start = i * src / dst;
            let end = ((i + 1) * src / dst).max(start + 1);
            start..end
        })
        .collect()
}

pub fn resize_to_canvas(img: &BinaryImage, cfg: &PipelineConfig) -> BinaryImage {
    resize(img, cfg.canvas_height, cfg.canvas_width)
}

/// Named pipeline stages, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Binary,
    Open,
    Close,
    Crop,
    Skeleton,
    Spur,
    Resize,
    Dilate,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Binary,
        Stage::Open,
        Stage::Close,
        Stage::Crop,
        Stage::Skeleton,
        Stage::Spur,
        Stage::Resize,
        Stage::Dilate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Binary => "binary",
            Stage::Open => "open",
            Stage::Close => "close",
            Stage::Crop => "crop",
            Stage::Skeleton => "skeleton",
            Stage::Spur => "spur",
            Stage::Resize => "resize",
            Stage::Dilate => "dilate",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = PreprocessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| PreprocessError::InvalidConfig(format!("unknown stage {s:?}")))
    }
}

/// Every intermediate image of one pipeline run.
#[derive(Debug, Clone)]
pub struct PipelineStages {
    pub binary: BinaryImage,
    pub opened: BinaryImage,
    pub closed: BinaryImage,
    pub cropped: BinaryImage,
    pub skeleton: BinaryImage,
    pub pruned: BinaryImage,
    pub resized: BinaryImage,
    pub dilated: BinaryImage,
}

impl PipelineStages {
    pub fn stage(&self, stage: Stage) -> &BinaryImage {
        match stage {
            Stage::Binary => &self.binary,
            Stage::Open => &self.opened,
            Stage::Close => &self.closed,
            Stage::Crop => &self.cropped,
            Stage::Skeleton => &self.skeleton,
            Stage::Spur => &self.pruned,
            Stage::Resize => &self.resized,
            Stage::Dilate => &self.dilated,
        }
    }

    pub fn features_image(&self, source: FeatureSource) -> &BinaryImage {
        match source {
            FeatureSource::Dilated => &self.dilated,
            FeatureSource::Skeleton => &self.resized,
        }
    }
}

/// Runs the pipeline up to and including `stage`. Stages before the crop
/// succeed on blank input; later ones report [`PreprocessError::EmptyGlyph`].
pub fn run_until(
    img: &Image,
    cfg: &PipelineConfig,
    stage: Stage,
) -> Result<BinaryImage, PreprocessError> {
    cfg.validate()?;
    let mut current = img.to_binary(cfg.threshold);
    for st in Stage::ALL {
        current = match st {
            Stage::Binary => current,
            Stage::Open => open(&current, cfg.open_iterations),
            Stage::Close => close(&current, cfg.close_iterations),
            Stage::Crop => crop_to_content(&current)?,
            Stage::Skeleton => skeletonize(&current),
            Stage::Spur => prune_spurs(&current, cfg.spur_iterations),
            Stage::Resize => resize_to_canvas(&current, cfg),
            Stage::Dilate => repeat(&current, cfg.final_dilate_iterations, dilate),
        };
        if st == stage {
            break;
        }
    }
    Ok(current)
}

pub fn run_stages(img: &Image, cfg: &PipelineConfig) -> Result<PipelineStages, PreprocessError> {
    cfg.validate()?;
    let binary = img.to_binary(cfg.threshold);
    let opened = open(&binary, cfg.open_iterations);
    let closed = close(&opened, cfg.close_iterations);
    let cropped = crop_to_content(&closed)?;
    let skeleton = skeletonize(&cropped);
    let pruned = prune_spurs(&skeleton, cfg.spur_iterations);
    let resized = resize_to_canvas(&pruned, cfg);
    let dilated = repeat(&resized, cfg.final_dilate_iterations, dilate);
    Ok(PipelineStages {
        binary,
        opened,
        closed,
        cropped,
        skeleton,
        pruned,
        resized,
        dilated,
    })
}

/// Full pipeline; returns the final `canvas_height × canvas_width` image.
pub fn run_pipeline(img: &Image, cfg: &PipelineConfig) -> Result<BinaryImage, PreprocessError> {
    run_stages(img, cfg).map(|s| s.dilated)
}
