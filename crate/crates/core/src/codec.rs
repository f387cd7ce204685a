//! Coordinates as plain text: values normalized by the viewport extent,
//! rounded half-up to a fixed number of decimals and rendered as
//! `(x,y)` or `(x1,y1,x2,y2)`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::geom::{BBox, Point, Viewport};

pub const DEFAULT_PRECISION: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoordMode {
    Point,
    Bbox,
}

impl CoordMode {
    /// Human phrase substituted for `{mode}` in templates.
    pub fn phrase(&self) -> &'static str {
        match self {
            CoordMode::Point => "the center point (x,y)",
            CoordMode::Bbox => "the bounding box (x1,y1,x2,y2)",
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CodecError {
    #[error("coordinates {0} fall outside the {1} viewport")]
    OutOfViewport(String, Viewport),
    #[error("malformed coordinate text {0:?}")]
    Malformed(String),
    #[error("coordinate {0} outside [0,1]")]
    OutOfRange(f64),
    #[error("inverted bounding box {0:?}")]
    Inverted(String),
}

/// A decoded coordinate string, still in normalized units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coords {
    Point(Point),
    Bbox(BBox),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoordCodec {
    pub precision: u32,
}

impl Default for CoordCodec {
    fn default() -> Self {
        CoordCodec {
            precision: DEFAULT_PRECISION,
        }
    }
}

impl CoordCodec {
    pub fn new(precision: u32) -> Self {
        CoordCodec { precision }
    }

    /// Largest absolute difference between a normalized value and its decoding.
    pub fn max_error(&self) -> f64 {
        0.5 * 10f64.powi(-(self.precision as i32))
    }

    fn quantize(&self, v: f64) -> f64 {
        let scale = 10f64.powi(self.precision as i32);
        // Pixel/width ratios that sit exactly on a half step can land an ulp
        // below it after scaling; real values are never that close otherwise.
        (v * scale + 0.5 + 1e-9).floor() / scale
    }

    fn push(&self, out: &mut String, v: f64) {
        let _ = write!(out, "{:.*}", self.precision as usize, self.quantize(v));
    }

    fn render(&self, values: &[f64]) -> String {
        let mut out = String::from("(");
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            self.push(&mut out, *v);
        }
        out.push(')');
        out
    }

    pub fn encode_point(&self, p: Point, viewport: Viewport) -> Result<String, CodecError> {
        if !p.is_finite() || !viewport.contains_point(p) {
            return Err(CodecError::OutOfViewport(format!("({}, {})", p.x, p.y), viewport));
        }
        let (w, h) = (viewport.width as f64, viewport.height as f64);
        Ok(self.render(&[p.x / w, p.y / h]))
    }

    pub fn encode_bbox(&self, b: &BBox, viewport: Viewport) -> Result<String, CodecError> {
        if !b.is_valid() || !viewport.contains_bbox(b) {
            return Err(CodecError::OutOfViewport(
                format!("({}, {}, {}, {})", b.x1, b.y1, b.x2, b.y2),
                viewport,
            ));
        }
        let (w, h) = (viewport.width as f64, viewport.height as f64);
        Ok(self.render(&[b.x1 / w, b.y1 / h, b.x2 / w, b.y2 / h]))
    }

    /// Encodes either the center point or the full box of `b`.
    pub fn encode(&self, b: &BBox, mode: CoordMode, viewport: Viewport) -> Result<String, CodecError> {
        match mode {
            CoordMode::Point => self.encode_point(b.center(), viewport),
            CoordMode::Bbox => self.encode_bbox(b, viewport),
        }
    }
}

/// Parses `"(" num ("," num){1|3} ")"` into normalized coordinates.
pub fn decode_coords(text: &str) -> Result<Coords, CodecError> {
    let malformed = || CodecError::Malformed(text.to_string());
    let inner = text
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(malformed)?;
    let mut values = Vec::with_capacity(4);
    for tok in inner.split(',') {
        if !is_decimal(tok) {
            return Err(malformed());
        }
        let v: f64 = tok.parse().map_err(|_| malformed())?;
        if !(0.0..=1.0).contains(&v) {
            return Err(CodecError::OutOfRange(v));
        }
        values.push(v);
    }
    match values[..] {
        [x, y] => Ok(Coords::Point(Point::new(x, y))),
        [x1, y1, x2, y2] => {
            if x2 < x1 || y2 < y1 {
                return Err(CodecError::Inverted(text.to_string()));
            }
            Ok(Coords::Bbox(BBox { x1, y1, x2, y2 }))
        }
        _ => Err(malformed()),
    }
}

/// `digits ["." digits]`
fn is_decimal(tok: &str) -> bool {
    let (int, frac) = match tok.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (tok, None),
    };
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    digits(int) && frac.is_none_or(digits)
}

/// Scales normalized coordinates back to pixels.
pub fn denormalize(coords: Coords, viewport: Viewport) -> Coords {
    let (w, h) = (viewport.width as f64, viewport.height as f64);
    match coords {
        Coords::Point(p) => Coords::Point(Point::new(p.x * w, p.y * h)),
        Coords::Bbox(b) => Coords::Bbox(BBox {
            x1: b.x1 * w,
            y1: b.y1 * h,
            x2: b.x2 * w,
            y2: b.y2 * h,
        }),
    }
}
