//! Brute-force reference implementations shared by the integration and
//! acceptance suites. Nothing here calls into the algorithms under test
//! beyond the raster container.
#![allow(dead_code)]

use std::collections::VecDeque;

use glyphfuzz_core::BinaryImage;
use rand::Rng;

/// Dilation straight from the set definition: foreground iff some in-bounds
/// pixel within Chebyshev distance 1 is foreground.
pub fn naive_dilate(img: &BinaryImage) -> BinaryImage {
    let (h, w) = (img.height() as isize, img.width() as isize);
    BinaryImage::from_fn(img.width(), img.height(), |r, c| {
        let mut any = false;
        for y in r as isize - 1..=r as isize + 1 {
            for x in c as isize - 1..=c as isize + 1 {
                if (0..h).contains(&y) && (0..w).contains(&x) && img.at(y as usize, x as usize) {
                    any = true;
                }
            }
        }
        any
    })
}

/// Erosion with background outside the image: foreground iff all nine
/// window positions are in bounds and foreground.
pub fn naive_erode(img: &BinaryImage) -> BinaryImage {
    let (h, w) = (img.height() as isize, img.width() as isize);
    BinaryImage::from_fn(img.width(), img.height(), |r, c| {
        let mut all = true;
        for y in r as isize - 1..=r as isize + 1 {
            for x in c as isize - 1..=c as isize + 1 {
                let inside = (0..h).contains(&y) && (0..w).contains(&x);
                if !inside || !img.at(y as usize, x as usize) {
                    all = false;
                }
            }
        }
        all
    })
}

pub fn naive_open(img: &BinaryImage, n: usize) -> BinaryImage {
    let mut out = img.clone();
    for _ in 0..n {
        out = naive_erode(&out);
    }
    for _ in 0..n {
        out = naive_dilate(&out);
    }
    out
}

pub fn naive_close(img: &BinaryImage, n: usize) -> BinaryImage {
    let mut out = img.clone();
    for _ in 0..n {
        out = naive_dilate(&out);
    }
    for _ in 0..n {
        out = naive_erode(&out);
    }
    out
}

fn flood_count(h: usize, w: usize, member: impl Fn(usize, usize) -> bool, eight: bool) -> usize {
    let mut seen = vec![false; h * w];
    let mut count = 0;
    let steps: &[(isize, isize)] = if eight {
        &[
            (-1, -1),
            (-1, 0),
            (-1, 1),
            (0, -1),
            (0, 1),
            (1, -1),
            (1, 0),
            (1, 1),
        ]
    } else {
        &[(-1, 0), (0, -1), (0, 1), (1, 0)]
    };
    for start in 0..h * w {
        if seen[start] || !member(start / w, start % w) {
            continue;
        }
        count += 1;
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            let (r, c) = ((p / w) as isize, (p % w) as isize);
            for (dr, dc) in steps {
                let (y, x) = (r + dr, c + dc);
                if y < 0 || x < 0 || y >= h as isize || x >= w as isize {
                    continue;
                }
                let q = y as usize * w + x as usize;
                if !seen[q] && member(y as usize, x as usize) {
                    seen[q] = true;
                    queue.push_back(q);
                }
            }
        }
    }
    count
}

/// Number of 8-connected foreground components.
pub fn components8(img: &BinaryImage) -> usize {
    flood_count(img.height(), img.width(), |r, c| img.at(r, c), true)
}

/// Number of 4-connected background regions not touching the outside, i.e.
/// holes under the usual 8/4 connectivity pairing.
pub fn holes(img: &BinaryImage) -> usize {
    let (h, w) = (img.height() + 2, img.width() + 2);
    let bg =
        |r: usize, c: usize| r == 0 || c == 0 || r == h - 1 || c == w - 1 || !img.at(r - 1, c - 1);
    flood_count(h, w, bg, false) - 1
}

/// One-pixel circle outline by the midpoint algorithm.
pub fn midpoint_circle(height: usize, width: usize, cy: isize, cx: isize, r: isize) -> BinaryImage {
    let mut img = BinaryImage::new(width, height);
    let (mut x, mut y, mut d) = (0isize, r, 1 - r);
    while x <= y {
        for (dy, dx) in [
            (y, x),
            (x, y),
            (-x, y),
            (-y, x),
            (-y, -x),
            (-x, -y),
            (x, -y),
            (y, -x),
        ] {
            img.set_clipped(cy + dy, cx + dx, true);
        }
        x += 1;
        if d < 0 {
            d += 2 * x + 1;
        } else {
            y -= 1;
            d += 2 * (x - y) + 1;
        }
    }
    img
}

pub fn random_image(rng: &mut impl Rng, width: usize, height: usize, density: f64) -> BinaryImage {
    BinaryImage::from_fn(width, height, |_, _| rng.gen_bool(density))
}

/// Union of 1 to 4 disks of radius 3 to 7 on a 40×40 canvas.
pub fn random_blobs(rng: &mut impl Rng) -> BinaryImage {
    let disks: Vec<(f64, f64, f64)> = (0..rng.gen_range(1..=4))
        .map(|_| {
            (
                rng.gen_range(6.0..34.0),
                rng.gen_range(6.0..34.0),
                rng.gen_range(3.0..7.0),
            )
        })
        .collect();
    BinaryImage::from_fn(40, 40, |r, c| {
        disks
            .iter()
            .any(|&(y, x, rad)| (r as f64 - y).powi(2) + (c as f64 - x).powi(2) <= rad * rad)
    })
}

/// Trapezoid degree written out from the piecewise definition.
pub fn trapezoid(x: f64, [a, b, c, d]: [f64; 4]) -> f64 {
    if x < a || x > d {
        return 0.0;
    }
    if x >= b && x <= c {
        return 1.0;
    }
    if x < b {
        (x - a) / (b - a)
    } else {
        (d - x) / (d - c)
    }
}

/// A Mamdani system as plain data: per input its terms' breakpoints, the
/// output range and terms, and rules as `(antecedent (input, term), output term)`.
#[derive(Debug, Clone)]
pub struct PlainFis {
    pub inputs: Vec<(f64, f64, Vec<[f64; 4]>)>,
    pub output: (f64, f64, Vec<[f64; 4]>),
    pub rules: Vec<(Vec<(usize, usize)>, usize)>,
}

impl PlainFis {
    /// min-AND, clip, max-aggregate, centroid over `samples` uniform points.
    /// `None` when no rule fires.
    pub fn dense_centroid(&self, x: &[f64], samples: usize) -> Option<f64> {
        let clipped: Vec<f64> = x
            .iter()
            .zip(&self.inputs)
            .map(|(&v, (lo, hi, _))| v.max(*lo).min(*hi))
            .collect();
        let strengths: Vec<f64> = self
            .rules
            .iter()
            .map(|(ante, _)| {
                ante.iter()
                    .map(|&(i, t)| trapezoid(clipped[i], self.inputs[i].2[t]))
                    .fold(1.0, f64::min)
            })
            .collect();
        if strengths.iter().all(|&s| s <= 0.0) {
            return None;
        }
        let (lo, hi, terms) = &self.output;
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..samples {
            let y = lo + (hi - lo) * k as f64 / (samples - 1) as f64;
            let mut mu: f64 = 0.0;
            for ((_, out), &s) in self.rules.iter().zip(&strengths) {
                mu = mu.max(trapezoid(y, terms[*out]).min(s));
            }
            num += y * mu;
            den += mu;
        }
        Some(num / den)
    }
}

fn sorted4(rng: &mut impl Rng, lo: f64, hi: f64) -> [f64; 4] {
    let mut p = [(); 4].map(|_| rng.gen_range(lo..=hi));
    p.sort_by(f64::total_cmp);
    p
}

/// Random system with 1 to 4 inputs over `[0, 10]` and 1 to 6 rules. Input
/// variables start and end with shoulders and are redrawn until their
/// terms cover the range; output terms are unconstrained trapezoids.
pub fn random_fis(rng: &mut impl Rng) -> PlainFis {
    let inputs = (0..rng.gen_range(1..=4))
        .map(|_| loop {
            let n = rng.gen_range(2..=4);
            let mut terms: Vec<[f64; 4]> = (0..n).map(|_| sorted4(rng, 0.0, 10.0)).collect();
            terms[0][0] = 0.0;
            terms[0][1] = 0.0;
            terms[n - 1][2] = 10.0;
            terms[n - 1][3] = 10.0;
            terms.iter_mut().for_each(|t| t.sort_by(f64::total_cmp));
            let covered =
                (0..=1000).all(|k| terms.iter().any(|&t| trapezoid(k as f64 / 100.0, t) > 0.0));
            if covered {
                break (0.0, 10.0, terms);
            }
        })
        .collect::<Vec<_>>();
    let lo = rng.gen_range(-50.0..50.0);
    let hi = lo + rng.gen_range(1.0..100.0);
    let out_terms: Vec<[f64; 4]> = (0..rng.gen_range(2..=6))
        .map(|_| sorted4(rng, lo, hi))
        .collect();
    let rules = (0..rng.gen_range(1..=6))
        .map(|_| {
            let mut ante = Vec::new();
            for (i, input) in inputs.iter().enumerate() {
                if rng.gen_bool(0.7) {
                    ante.push((i, rng.gen_range(0..input.2.len())));
                }
            }
            if ante.is_empty() {
                let i = rng.gen_range(0..inputs.len());
                ante.push((i, rng.gen_range(0..inputs[i].2.len())));
            }
            (ante, rng.gen_range(0..out_terms.len()))
        })
        .collect();
    PlainFis {
        inputs,
        output: (lo, hi, out_terms),
        rules,
    }
}

pub fn to_definition(p: &PlainFis) -> glyphfuzz_core::FisDefinition {
    use glyphfuzz_core::{FisDefinition, LinguisticVariable, MembershipFunction, Rule};
    let var = |name: String, lo: f64, hi: f64, terms: &[[f64; 4]]| {
        let terms = terms.iter().enumerate().map(|(k, &[a, b, c, d])| {
            (
                format!("t{k}"),
                MembershipFunction::trapezoid(a, b, c, d).unwrap(),
            )
        });
        LinguisticVariable::new(name, lo, hi, terms).unwrap()
    };
    let inputs = p
        .inputs
        .iter()
        .enumerate()
        .map(|(i, (lo, hi, t))| var(format!("x{i}"), *lo, *hi, t))
        .collect();
    let output = var("y".into(), p.output.0, p.output.1, &p.output.2);
    let rules = p
        .rules
        .iter()
        .map(|(ante, out)| {
            Rule::new(
                ante.iter()
                    .map(|&(i, t)| (format!("x{i}"), format!("t{t}"))),
                format!("t{out}"),
            )
        })
        .collect();
    FisDefinition::new(inputs, output, rules).unwrap()
}
