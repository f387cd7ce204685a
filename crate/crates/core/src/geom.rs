//! Pixel-space geometry shared by every stage.

use serde::{Deserialize, Serialize};

/// Visible rendering area. Snapshot rects and screenshot pixels share this space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Viewport {
    pub width: u32,
    pub height: u32,
    /// Always 1.0 in a valid snapshot.
    pub dpr: f64,
}

impl Viewport {
    pub const fn new(width: u32, height: u32) -> Self {
        Viewport {
            width,
            height,
            dpr: 1.0,
        }
    }

    pub fn rect(&self) -> BBox {
        BBox {
            x1: 0.0,
            y1: 0.0,
            x2: self.width as f64,
            y2: self.height as f64,
        }
    }

    pub fn contains_point(&self, p: Point) -> bool {
        p.x >= 0.0 && p.y >= 0.0 && p.x <= self.width as f64 && p.y <= self.height as f64
    }

    pub fn contains_bbox(&self, b: &BBox) -> bool {
        b.x1 >= 0.0 && b.y1 >= 0.0 && b.x2 <= self.width as f64 && b.y2 <= self.height as f64
    }
}

impl std::fmt::Display for Viewport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Axis-aligned box `(x1, y1, x2, y2)` with origin at the top-left.
///
/// Constructed boxes always have strictly positive area; use [`BBox::new`]
/// to enforce it. Deserialized boxes are checked by the snapshot loader.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BBox {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl BBox {
    /// Returns `None` unless the box is finite with `x1 < x2` and `y1 < y2`.
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Option<Self> {
        let b = BBox { x1, y1, x2, y2 };
        b.is_valid().then_some(b)
    }

    pub fn is_valid(&self) -> bool {
        [self.x1, self.y1, self.x2, self.y2].iter().all(|v| v.is_finite()) && self.x1 < self.x2 && self.y1 < self.y2
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        Point {
            x: (self.x1 + self.x2) / 2.0,
            y: (self.y1 + self.y2) / 2.0,
        }
    }

    pub fn max_side(&self) -> f64 {
        self.width().max(self.height())
    }

    /// Intersection with positive area, if any.
    pub fn intersect(&self, other: &BBox) -> Option<BBox> {
        BBox::new(
            self.x1.max(other.x1),
            self.y1.max(other.y1),
            self.x2.min(other.x2),
            self.y2.min(other.y2),
        )
    }

    /// Overlap area, zero when disjoint or merely touching.
    pub fn overlap_area(&self, other: &BBox) -> f64 {
        self.intersect(other).map_or(0.0, |b| b.area())
    }

    pub fn overlaps(&self, other: &BBox) -> bool {
        self.intersect(other).is_some()
    }

    pub fn contains(&self, other: &BBox) -> bool {
        other.x1 >= self.x1 && other.y1 >= self.y1 && other.x2 <= self.x2 && other.y2 <= self.y2
    }

    pub fn translate(&self, dx: f64, dy: f64) -> BBox {
        BBox {
            x1: self.x1 + dx,
            y1: self.y1 + dy,
            x2: self.x2 + dx,
            y2: self.y2 + dy,
        }
    }
}
