//! Seeded synthetic glyph families standing in for printed round letters.
//!
//! Each family is a set of strokes in a normalized frame where `u` runs
//! left to right and `v` top to bottom, both over `[-1, 1]`. A variant
//! picks a glyph size, aspect ratio, stroke radius and placement, nudges every
//! stroke element by up to one pixel, and rasterizes the strokes with a round
//! pen.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;
use std::str::FromStr;

use glyphfuzz_core::raster::{serialize_pbm, BinaryImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeds of the 7-class benchmark: 5 training and 20 test variants per class.
pub const BENCHMARK_TRAIN_SEED: u64 = 1;
pub const BENCHMARK_TEST_SEED: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShapeFamily {
    Ring,
    BarredRing,
    DoubleRing,
    SpiralArc,
    Cup,
    Lobed,
    CrossBar,
}

impl ShapeFamily {
    pub const ALL: [ShapeFamily; 7] = [
        ShapeFamily::Ring,
        ShapeFamily::BarredRing,
        ShapeFamily::DoubleRing,
        ShapeFamily::SpiralArc,
        ShapeFamily::Cup,
        ShapeFamily::Lobed,
        ShapeFamily::CrossBar,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ShapeFamily::Ring => "ring",
            ShapeFamily::BarredRing => "barred-ring",
            ShapeFamily::DoubleRing => "double-ring",
            ShapeFamily::SpiralArc => "spiral-arc",
            ShapeFamily::Cup => "cup",
            ShapeFamily::Lobed => "lobed",
            ShapeFamily::CrossBar => "cross-bar",
        }
    }

    /// Strokes as polylines in the normalized frame; `jitter` returns a
    /// per-element offset in normalized units.
    fn strokes(self, jitter: &mut dyn FnMut() -> (f64, f64)) -> Vec<Vec<(f64, f64)>> {
        let ellipse = |cu: f64, cv: f64, ru: f64, rv: f64, from: f64, to: f64| -> Vec<(f64, f64)> {
            let n = 240;
            (0..=n)
                .map(|i| {
                    let t = from + (to - from) * i as f64 / n as f64;
                    (cu + ru * t.cos(), cv + rv * t.sin())
                })
                .collect()
        };
        let shift = |pts: Vec<(f64, f64)>, (du, dv): (f64, f64)| -> Vec<(f64, f64)> {
            pts.into_iter().map(|(u, v)| (u + du, v + dv)).collect()
        };
        let mut wobble = |pts: Vec<(f64, f64)>| -> Vec<(f64, f64)> {
            pts.into_iter()
                .map(|(u, v)| {
                    let (du, dv) = jitter();
                    (u + du, v + dv)
                })
                .collect()
        };
        let ring = ellipse(0.0, 0.0, 1.0, 1.0, 0.0, TAU);
        match self {
            ShapeFamily::Ring => vec![ring],
            // Bars stay on the centre row and column. Moving the ring would
            // shift the crop box, and the bars with it, off the canvas centre,
            // so its outline wobbles in place instead.
            ShapeFamily::BarredRing => vec![wobble(ring), vec![(-1.0, 0.0), (1.0, 0.0)]],
            ShapeFamily::DoubleRing => {
                let inner = ellipse(0.0, 0.0, 0.38, 0.38, 0.0, TAU);
                vec![ring, shift(inner, jitter())]
            }
            ShapeFamily::SpiralArc => {
                // One and a half turns, radius growing from 0.3 to 1. Both ends
                // sit between ray directions so the crossing count per ray
                // is stable under jitter.
                let start = 62f64.to_radians();
                let sweep = 3.0 * PI;
                let n = 480;
                let spiral = (0..=n)
                    .map(|i| {
                        let f = i as f64 / n as f64;
                        let theta = start + sweep * f;
                        let r = 0.3 + 0.7 * f;
                        (r * theta.cos(), -r * theta.sin())
                    })
                    .collect();
                vec![shift(spiral, jitter())]
            }
            ShapeFamily::Cup => {
                let outer = {
                    let mut pts = vec![(-1.0, -1.0)];
                    pts.extend(ellipse(0.0, 0.0, 1.0, 1.0, PI, 0.0));
                    pts.push((1.0, -1.0));
                    pts.reverse();
                    pts
                };
                let inner = {
                    let mut pts = vec![(-0.45, -0.75)];
                    pts.extend(ellipse(0.0, 0.1, 0.45, 0.45, PI, 0.0));
                    pts.push((0.45, -0.75));
                    pts
                };
                vec![outer, shift(inner, jitter())]
            }
            ShapeFamily::Lobed => {
                let left = ellipse(-0.5, 0.0, 0.5, 1.0, 0.0, TAU);
                let right = ellipse(0.5, 0.0, 0.5, 1.0, 0.0, TAU);
                let (du, _) = jitter();
                vec![shift(left, (du, 0.0)), shift(right, (du, 0.0))]
            }
            ShapeFamily::CrossBar => {
                vec![
                    wobble(ring),
                    vec![(-1.0, 0.0), (1.0, 0.0)],
                    vec![(0.0, -1.0), (0.0, 1.0)],
                ]
            }
        }
    }
}

impl fmt::Display for ShapeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ShapeFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ShapeFamily::ALL
            .into_iter()
            .find(|f| f.label() == s)
            .ok_or_else(|| format!("unknown shape family {s:?}"))
    }
}

/// Geometry of one rendered variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariantParams {
    /// Half the glyph height in pixels, measured to the stroke centreline.
    pub half_height: f64,
    /// Width over height of the glyph's centreline box.
    pub aspect: f64,
    /// Pen radius in pixels.
    pub stroke_radius: f64,
    /// Background margin on each side, in pixels.
    pub margin: [usize; 4],
}

impl VariantParams {
    pub fn sample(rng: &mut impl Rng) -> Self {
        Self {
            half_height: rng.gen_range(24.0..40.0),
            aspect: rng.gen_range(0.7..0.95),
            stroke_radius: rng.gen_range(2.0..3.25),
            margin: [(); 4].map(|_| rng.gen_range(4..=12)),
        }
    }
}

/// Rasterizes one variant; `rng` drives the per-element jitter.
pub fn render(family: ShapeFamily, params: &VariantParams, rng: &mut impl Rng) -> BinaryImage {
    let hv = params.half_height;
    let hu = hv * params.aspect;
    let pen = params.stroke_radius;
    let ext = pen.ceil() as usize + 1;
    let [top, right, bottom, left] = params.margin;
    let height = top + bottom + 2 * ext + (2.0 * hv).ceil() as usize;
    let width = left + right + 2 * ext + (2.0 * hu).ceil() as usize;
    let cv = (top + ext) as f64 + hv;
    let cu = (left + ext) as f64 + hu;

    // one pixel of jitter either way, expressed in normalized units
    let mut jitter = || {
        (
            rng.gen_range(-1.0..=1.0) / hu,
            rng.gen_range(-1.0..=1.0) / hv,
        )
    };
    let strokes = family.strokes(&mut jitter);

    let mut img = BinaryImage::new(width, height);
    let r2 = pen * pen;
    let reach = pen.ceil() as isize;
    let mut stamp = |y: f64, x: f64| {
        let (yi, xi) = (y.round() as isize, x.round() as isize);
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                let (py, px) = (yi + dy, xi + dx);
                let (ey, ex) = (py as f64 - y, px as f64 - x);
                if ey * ey + ex * ex <= r2 {
                    img.set_clipped(py, px, true);
                }
            }
        }
    };
    for stroke in strokes {
        for seg in stroke.windows(2) {
            let (u0, v0) = (cu + seg[0].0 * hu, cv + seg[0].1 * hv);
            let (u1, v1) = (cu + seg[1].0 * hu, cv + seg[1].1 * hv);
            let len = ((u1 - u0).powi(2) + (v1 - v0).powi(2)).sqrt();
            let n = (len / 0.5).ceil().max(1.0) as usize;
            for i in 0..=n {
                let t = i as f64 / n as f64;
                stamp(v0 + (v1 - v0) * t, u0 + (u1 - u0) * t);
            }
        }
    }
    img
}

/// Deterministic stream for `(seed, family, sample)`, independent of how many
/// other samples are generated.
fn variant_rng(seed: u64, family: usize, sample: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((family as u64) << 32) | sample as u64);
    rng
}

pub fn generate_variant(family: ShapeFamily, seed: u64, sample: usize) -> BinaryImage {
    let index = ShapeFamily::ALL
        .iter()
        .position(|f| *f == family)
        .expect("family is listed");
    let mut rng = variant_rng(seed, index, sample);
    let params = VariantParams::sample(&mut rng);
    render(family, &params, &mut rng)
}

/// Generates `per_class` variants of the first `classes` families.
pub fn generate_corpus(
    classes: usize,
    per_class: usize,
    seed: u64,
) -> Vec<(ShapeFamily, Vec<BinaryImage>)> {
    ShapeFamily::ALL
        .iter()
        .take(classes)
        .map(|&family| {
            (
                family,
                (0..per_class)
                    .map(|i| generate_variant(family, seed, i))
                    .collect(),
            )
        })
        .collect()
}

/// Writes `<out>/<family>/<family>-NNN.pbm` files.
pub fn write_corpus(out: &Path, corpus: &[(ShapeFamily, Vec<BinaryImage>)]) -> io::Result<usize> {
    let mut written = 0;
    for (family, images) in corpus {
        let dir = out.join(family.label());
        fs::create_dir_all(&dir)?;
        for (i, img) in images.iter().enumerate() {
            fs::write(
                dir.join(format!("{}-{:03}.pbm", family.label(), i)),
                serialize_pbm(img),
            )?;
            written += 1;
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        for f in ShapeFamily::ALL {
            assert_eq!(f.label().parse::<ShapeFamily>().unwrap(), f);
        }
        assert!("blob".parse::<ShapeFamily>().is_err());
    }

    #[test]
    fn deterministic_per_sample() {
        let a = generate_variant(ShapeFamily::Cup, 9, 3);
        let b = generate_variant(ShapeFamily::Cup, 9, 3);
        assert_eq!(a, b);
        assert_ne!(a, generate_variant(ShapeFamily::Cup, 10, 3));
        // sample streams do not depend on corpus size
        let small = generate_corpus(2, 2, 5);
        let big = generate_corpus(3, 6, 5);
        assert_eq!(small[1].1[1], big[1].1[1]);
    }

    #[test]
    fn every_family_renders_ink_inside_margins() {
        for f in ShapeFamily::ALL {
            for i in 0..4 {
                let img = generate_variant(f, 1, i);
                assert!(img.count_foreground() > 100, "{f}");
                for c in 0..img.width() {
                    assert!(
                        !img.at(0, c) && !img.at(img.height() - 1, c),
                        "{f} touches border"
                    );
                }
            }
        }
    }
}
