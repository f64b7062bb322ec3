//! Binary and grayscale rasters plus Netpbm (P1/P2/P4/P5) decoding and P1 encoding.
//!
//! Coordinates are `(row, col)` with row 0 at the top. Reads outside the image
//! answer background, which every morphology and ray routine relies on.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RasterError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("truncated pixel data: expected {expected} samples, found {found}")]
    TruncatedPixelData { expected: usize, found: usize },
    #[error("unsupported maxval {0} (must be 1..=65535)")]
    UnsupportedMaxval(u32),
    #[error("sample value {value} exceeds maxval {maxval}")]
    SampleOutOfRange { value: u32, maxval: u32 },
    #[error("pixel buffer of length {len} does not match {width}x{height}")]
    DimensionMismatch {
        width: usize,
        height: usize,
        len: usize,
    },
}

/// 8-bit grayscale image, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(RasterError::DimensionMismatch {
                width,
                height,
                len: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn intensities(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.data[row * self.width + col]
    }
}

impl fmt::Debug for GrayImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GrayImage({}x{})", self.width, self.height)
    }
}

/// Foreground/background raster. `true` is foreground (ink).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    pixels: Vec<bool>,
}

impl BinaryImage {
    /// All-background image. Panics on a zero dimension.
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self {
            width,
            height,
            pixels: vec![false; width * height],
        }
    }

    pub fn from_pixels(
        width: usize,
        height: usize,
        pixels: Vec<bool>,
    ) -> Result<Self, RasterError> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(RasterError::DimensionMismatch {
                width,
                height,
                len: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut pixels = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                pixels.push(f(row, col));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    /// Builds an image from text rows where `#` or `1` is foreground and
    /// anything else is background. Blank lines and surrounding whitespace are
    /// ignored, which keeps test fixtures readable.
    pub fn from_ascii(art: &str) -> Self {
        let rows: Vec<&str> = art
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect();
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        assert!(
            rows.iter().all(|r| r.chars().count() == width),
            "ragged ascii image"
        );
        Self::from_fn(width, height, |r, c| {
            matches!(rows[r].chars().nth(c), Some('#' | '1'))
        })
    }

    pub fn to_ascii(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for row in 0..self.height {
            for col in 0..self.width {
                out.push(if self.pixels[row * self.width + col] {
                    '#'
                } else {
                    '.'
                });
            }
            out.push('\n');
        }
        out
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[bool] {
        &self.pixels
    }

    /// Pixel at `(row, col)`; anything out of bounds is background.
    #[inline]
    pub fn get(&self, row: isize, col: isize) -> bool {
        if row < 0 || col < 0 || row as usize >= self.height || col as usize >= self.width {
            return false;
        }
        self.pixels[row as usize * self.width + col as usize]
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> bool {
        self.pixels[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        assert!(
            row < self.height && col < self.width,
            "pixel ({row}, {col}) out of bounds"
        );
        self.pixels[row * self.width + col] = value;
    }

    /// Like [`set`](Self::set) but silently ignores out-of-bounds coordinates.
    pub fn set_clipped(&mut self, row: isize, col: isize, value: bool) {
        if row >= 0 && col >= 0 && (row as usize) < self.height && (col as usize) < self.width {
            self.pixels[row as usize * self.width + col as usize] = value;
        }
    }

    pub fn count_foreground(&self) -> usize {
        self.pixels.iter().filter(|&&p| p).count()
    }

    pub fn is_blank(&self) -> bool {
        !self.pixels.iter().any(|&p| p)
    }

    /// Iterates `(row, col)` of every foreground pixel in row-major order.
    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let width = self.width;
        self.pixels
            .iter()
            .enumerate()
            .filter(|(_, &p)| p)
            .map(move |(i, _)| (i / width, i % width))
    }

    /// Number of foreground pixels among the 8 neighbours of `(row, col)`.
    #[inline]
    pub fn neighbour_count(&self, row: usize, col: usize) -> usize {
        let (r, c) = (row as isize, col as isize);
        let mut n = 0;
        for dr in -1..=1 {
            for dc in -1..=1 {
                if (dr, dc) != (0, 0) && self.get(r + dr, c + dc) {
                    n += 1;
                }
            }
        }
        n
    }

    pub fn complement(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|p| !p).collect(),
        }
    }

    /// Copies the inclusive rectangle `rows × cols` into a new image.
    pub fn sub_image(
        &self,
        rows: std::ops::RangeInclusive<usize>,
        cols: std::ops::RangeInclusive<usize>,
    ) -> Self {
        let (r0, c0) = (*rows.start(), *cols.start());
        let height = rows.end() - r0 + 1;
        let width = cols.end() - c0 + 1;
        Self::from_fn(width, height, |r, c| self.at(r0 + r, c0 + c))
    }
}

impl fmt::Debug for BinaryImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryImage({}x{})", self.width, self.height)?;
        f.write_str(&self.to_ascii())
    }
}

/// Result of decoding a Netpbm file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Image {
    Gray(GrayImage),
    Binary(BinaryImage),
}

impl Image {
    pub fn width(&self) -> usize {
        match self {
            Image::Gray(g) => g.width(),
            Image::Binary(b) => b.width(),
        }
    }

    pub fn height(&self) -> usize {
        match self {
            Image::Gray(g) => g.height(),
            Image::Binary(b) => b.height(),
        }
    }

    /// Gray images are thresholded; binary images pass through unchanged.
    pub fn to_binary(&self, threshold: u8) -> BinaryImage {
        match self {
            Image::Gray(g) => binarize(g, threshold),
            Image::Binary(b) => b.clone(),
        }
    }
}

impl From<BinaryImage> for Image {
    fn from(img: BinaryImage) -> Self {
        Image::Binary(img)
    }
}

impl From<GrayImage> for Image {
    fn from(img: GrayImage) -> Self {
        Image::Gray(img)
    }
}

/// Foreground iff `intensity < threshold`: ink is dark on a light page.
pub fn binarize(img: &GrayImage, threshold: u8) -> BinaryImage {
    BinaryImage {
        width: img.width,
        height: img.height,
        pixels: img.data.iter().map(|&v| v < threshold).collect(),
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    /// Next unsigned decimal token, or `None` at end of input.
    fn next_uint(&mut self) -> Result<Option<u64>, String> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return match self.bytes.get(self.pos) {
                None => Ok(None),
                Some(&b) => Err(format!("unexpected byte 0x{b:02x} at offset {start}")),
            };
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii digits");
        text.parse::<u64>()
            .map(Some)
            .map_err(|_| format!("number {text} too large"))
    }

    fn header_uint(&mut self, what: &str) -> Result<u64, RasterError> {
        match self.next_uint() {
            Ok(Some(v)) => Ok(v),
            Ok(None) => Err(RasterError::MalformedHeader(format!("missing {what}"))),
            Err(e) => Err(RasterError::MalformedHeader(format!("{what}: {e}"))),
        }
    }
}

/// Decodes a P1, P2, P4 or P5 Netpbm image.
///
/// P1/P4 produce a [`BinaryImage`] with 1 as foreground. P2/P5 produce a
/// [`GrayImage`] rescaled from `maxval` to 0..=255.
pub fn parse_netpbm(bytes: &[u8]) -> Result<Image, RasterError> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(RasterError::MalformedHeader("missing P magic".into()));
    }
    let kind = bytes[1];
    if !matches!(kind, b'1' | b'2' | b'4' | b'5') {
        return Err(RasterError::MalformedHeader(format!(
            "unsupported magic P{}",
            char::from(kind).escape_default()
        )));
    }
    let mut cur = Cursor { bytes, pos: 2 };
    if !bytes
        .get(2)
        .is_some_and(|b| b.is_ascii_whitespace() || *b == b'#')
    {
        return Err(RasterError::MalformedHeader(
            "magic must be followed by whitespace".into(),
        ));
    }
    let width = cur.header_uint("width")?;
    let height = cur.header_uint("height")?;
    if width == 0 || height == 0 {
        return Err(RasterError::MalformedHeader(format!(
            "nonpositive dimensions {width}x{height}"
        )));
    }
    let (width, height) = (width as usize, height as usize);
    let count = width
        .checked_mul(height)
        .ok_or_else(|| RasterError::MalformedHeader("dimensions overflow".into()))?;

    match kind {
        b'1' => {
            let mut pixels = Vec::with_capacity(count);
            while pixels.len() < count {
                cur.skip_whitespace_and_comments();
                match bytes.get(cur.pos) {
                    Some(b'0') => pixels.push(false),
                    Some(b'1') => pixels.push(true),
                    Some(&b) => {
                        return Err(RasterError::MalformedHeader(format!(
                            "invalid P1 sample byte 0x{b:02x}"
                        )))
                    }
                    None => {
                        return Err(RasterError::TruncatedPixelData {
                            expected: count,
                            found: pixels.len(),
                        })
                    }
                }
                cur.pos += 1;
            }
            Ok(Image::Binary(BinaryImage {
                width,
                height,
                pixels,
            }))
        }
        b'4' => {
            single_whitespace(&mut cur)?;
            let stride = width.div_ceil(8);
            let data = &bytes[cur.pos..];
            if data.len() < stride * height {
                return Err(RasterError::TruncatedPixelData {
                    expected: count,
                    found: (data.len() / stride) * width,
                });
            }
            let pixels = (0..count)
                .map(|i| {
                    let (row, col) = (i / width, i % width);
                    data[row * stride + col / 8] & (0x80 >> (col % 8)) != 0
                })
                .collect();
            Ok(Image::Binary(BinaryImage {
                width,
                height,
                pixels,
            }))
        }
        _ => {
            let maxval = cur.header_uint("maxval")?;
            if maxval == 0 {
                return Err(RasterError::MalformedHeader(
                    "maxval must be positive".into(),
                ));
            }
            if maxval > 65535 {
                return Err(RasterError::UnsupportedMaxval(
                    maxval.min(u32::MAX as u64) as u32
                ));
            }
            let maxval = maxval as u32;
            let mut raw = Vec::with_capacity(count);
            if kind == b'2' {
                while raw.len() < count {
                    match cur.next_uint() {
                        Ok(Some(v)) => raw.push(v.min(u32::MAX as u64) as u32),
                        Ok(None) => {
                            return Err(RasterError::TruncatedPixelData {
                                expected: count,
                                found: raw.len(),
                            })
                        }
                        Err(e) => return Err(RasterError::MalformedHeader(e)),
                    }
                }
            } else {
                single_whitespace(&mut cur)?;
                let data = &bytes[cur.pos..];
                let sample_bytes = if maxval < 256 { 1 } else { 2 };
                if data.len() < count * sample_bytes {
                    return Err(RasterError::TruncatedPixelData {
                        expected: count,
                        found: data.len() / sample_bytes,
                    });
                }
                raw.extend(
                    data.chunks_exact(sample_bytes)
                        .take(count)
                        .map(|c| match c {
                            [v] => *v as u32,
                            [hi, lo] => u32::from(*hi) << 8 | u32::from(*lo),
                            _ => unreachable!(),
                        }),
                );
            }
            let mut data = Vec::with_capacity(count);
            for value in raw {
                if value > maxval {
                    return Err(RasterError::SampleOutOfRange { value, maxval });
                }
                data.push(((value * 255 + maxval / 2) / maxval) as u8);
            }
            Ok(Image::Gray(GrayImage {
                width,
                height,
                data,
            }))
        }
    }
}

fn single_whitespace(cur: &mut Cursor<'_>) -> Result<(), RasterError> {
    match cur.bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => {
            cur.pos += 1;
            Ok(())
        }
        _ => Err(RasterError::MalformedHeader(
            "expected whitespace before raster data".into(),
        )),
    }
}

/// Encodes as plain P1. Rows are wrapped at 70 samples.
pub fn serialize_pbm(img: &BinaryImage) -> Vec<u8> {
    let mut out = format!("P1\n{} {}\n", img.width, img.height).into_bytes();
    out.reserve(img.pixels.len() + img.height * 2);
    for row in img.pixels.chunks(img.width) {
        for chunk in row.chunks(70) {
            out.extend(chunk.iter().map(|&p| if p { b'1' } else { b'0' }));
            out.push(b'\n');
        }
    }
    out
}
