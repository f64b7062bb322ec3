//! Ray features measured from the canvas centre in the eight compass
//! directions: normalized minimum/maximum foreground distance, their sum, and
//! the number of foreground runs crossed.

use std::fmt;
use std::str::FromStr;

use crate::raster::BinaryImage;

/// Intersection counts above this are clamped before fuzzification.
pub const MAX_INTERSECTIONS: u32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    W,
    E,
    N,
    S,
    NW,
    SE,
    SW,
    NE,
}

impl Direction {
    /// Canonical order used by every feature vector, rule and file format.
    pub const ALL: [Direction; 8] = [
        Direction::W,
        Direction::E,
        Direction::N,
        Direction::S,
        Direction::NW,
        Direction::SE,
        Direction::SW,
        Direction::NE,
    ];

    /// Unit step `(drow, dcol)`; rows grow downwards.
    pub fn step(self) -> (isize, isize) {
        match self {
            Direction::W => (0, -1),
            Direction::E => (0, 1),
            Direction::N => (-1, 0),
            Direction::S => (1, 0),
            Direction::NW => (-1, -1),
            Direction::SE => (1, 1),
            Direction::SW => (1, -1),
            Direction::NE => (-1, 1),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::W => "W",
            Direction::E => "E",
            Direction::N => "N",
            Direction::S => "S",
            Direction::NW => "NW",
            Direction::SE => "SE",
            Direction::SW => "SW",
            Direction::NE => "NE",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Direction::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| format!("unknown direction {s:?}"))
    }
}

/// Inclusive step range `[start, end]` of consecutive foreground pixels on a ray.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Run {
    pub start: usize,
    pub end: usize,
}

impl Run {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }
}

/// `(floor(height / 2), floor(width / 2))`.
pub fn center(height: usize, width: usize) -> (usize, usize) {
    (height / 2, width / 2)
}

/// Steps from the centre to the last in-bounds pixel along `dir`.
pub fn max_steps(dir: Direction, height: usize, width: usize) -> usize {
    let (cr, cc) = center(height, width);
    let (dr, dc) = dir.step();
    let along = |d: isize, c: usize, len: usize| match d {
        -1 => Some(c),
        1 => Some(len - 1 - c),
        _ => None,
    };
    match (along(dr, cr, height), along(dc, cc, width)) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => unreachable!("directions are nonzero steps"),
    }
}

/// Maximal foreground runs met walking from the centre (step 0) outwards.
pub fn ray_runs(img: &BinaryImage, dir: Direction) -> Vec<Run> {
    let (cr, cc) = center(img.height(), img.width());
    let (dr, dc) = dir.step();
    let mut runs = Vec::new();
    let mut open: Option<usize> = None;
    for step in 0..=max_steps(dir, img.height(), img.width()) {
        let s = step as isize;
        let hit = img.get(cr as isize + dr * s, cc as isize + dc * s);
        match (hit, open) {
            (true, None) => open = Some(step),
            (false, Some(start)) => {
                runs.push(Run::new(start, step - 1));
                open = None;
            }
            _ => {}
        }
    }
    if let Some(start) = open {
        runs.push(Run::new(start, max_steps(dir, img.height(), img.width())));
    }
    runs
}

/// Raw and normalized minimum/maximum distances per direction.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceFeatures {
    pub raw_min: [usize; 8],
    pub raw_max: [usize; 8],
    pub d_min: [f64; 8],
    pub d_max: [f64; 8],
}

/// Maps a raw step count onto `[0, 10]` using the direction's ray length.
pub fn normalize_distance(raw: usize, dir: Direction, height: usize, width: usize) -> f64 {
    let max = max_steps(dir, height, width);
    if max == 0 {
        return 0.0;
    }
    10.0 * raw.min(max) as f64 / max as f64
}

fn distances_from_runs(runs: &[Vec<Run>; 8], height: usize, width: usize) -> DistanceFeatures {
    let mut out = DistanceFeatures {
        raw_min: [0; 8],
        raw_max: [0; 8],
        d_min: [0.0; 8],
        d_max: [0.0; 8],
    };
    for dir in Direction::ALL {
        let i = dir.index();
        if let (Some(first), Some(last)) = (runs[i].first(), runs[i].last()) {
            out.raw_min[i] = first.start;
            out.raw_max[i] = last.end;
        }
        out.d_min[i] = normalize_distance(out.raw_min[i], dir, height, width);
        out.d_max[i] = normalize_distance(out.raw_max[i], dir, height, width);
    }
    out
}

fn all_runs(img: &BinaryImage) -> [Vec<Run>; 8] {
    Direction::ALL.map(|d| ray_runs(img, d))
}

/// First run start and last run end per direction; `(0, 0)` for an empty ray.
pub fn distance_features(img: &BinaryImage) -> DistanceFeatures {
    distances_from_runs(&all_runs(img), img.height(), img.width())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialFeatureVector {
    pub d_min: [f64; 8],
    pub d_max: [f64; 8],
    /// `d_min + d_max`, in `[0, 20]`.
    pub d_total: [f64; 8],
    /// Runs crossed per direction, unclamped.
    pub intersections: [u32; 8],
}

impl RadialFeatureVector {
    /// Intersection counts clamped to [`MAX_INTERSECTIONS`], as FIS inputs.
    pub fn clamped_intersections(&self) -> [f64; 8] {
        self.intersections
            .map(|n| f64::from(n.min(MAX_INTERSECTIONS)))
    }

    /// Per-direction CSV: `direction,d_min,d_max,d_total,intersections`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("direction,d_min,d_max,d_total,intersections\n");
        for dir in Direction::ALL {
            let i = dir.index();
            out.push_str(&format!(
                "{},{:.4},{:.4},{:.4},{}\n",
                dir, self.d_min[i], self.d_max[i], self.d_total[i], self.intersections[i]
            ));
        }
        out
    }
}

pub fn extract(img: &BinaryImage) -> RadialFeatureVector {
    let runs = all_runs(img);
    let dist = distances_from_runs(&runs, img.height(), img.width());
    let d_total = std::array::from_fn(|i| dist.d_min[i] + dist.d_max[i]);
    RadialFeatureVector {
        d_min: dist.d_min,
        d_max: dist.d_max,
        d_total,
        intersections: runs.map(|r| r.len() as u32),
    }
}
