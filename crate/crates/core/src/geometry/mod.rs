//! Polygons and the raster geometry built on them.
//!
//! Coordinates are in pixels with the origin at the top-left corner of the
//! image; pixel `(x, y)` covers the unit square `[x, x+1) × [y, y+1)` and its
//! center sits at `(x + 0.5, y + 0.5)`.

mod contour;
mod raster;
mod rect;

pub use contour::trace_contours;
pub use raster::{mask_iou, rasterize_polygon};
pub(crate) use raster::{polygon_spans, spans_iou, Span};
pub use rect::{convex_hull, min_area_rect, RotatedRect};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// Closed polygon given by its vertices in order; the closing edge is implicit.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    points: Vec<Point>,
}

impl Polygon {
    /// Consecutive duplicate vertices (including a repeated first vertex at
    /// the end) are collapsed. Fails on non-finite coordinates or fewer than
    /// three distinct vertices.
    pub fn new<P: Into<Point>>(points: impl IntoIterator<Item = P>) -> Result<Self> {
        let mut pts: Vec<Point> = Vec::new();
        for p in points {
            let p = p.into();
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::DegeneratePolygon(format!(
                    "non-finite vertex ({}, {})",
                    p.x, p.y
                )));
            }
            if pts.last() != Some(&p) {
                pts.push(p);
            }
        }
        while pts.len() > 1 && pts.first() == pts.last() {
            pts.pop();
        }
        if pts.len() < 3 {
            return Err(Error::DegeneratePolygon(format!(
                "{} distinct vertices, need at least 3",
                pts.len()
            )));
        }
        Ok(Self { points: pts })
    }

    /// Axis-aligned rectangle with corners `(x0, y0)` and `(x1, y1)`.
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Self::new([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Shoelace area; positive for clockwise order in image coordinates.
    pub fn signed_area(&self) -> f64 {
        let n = self.points.len();
        let mut acc = 0.0;
        for i in 0..n {
            let a = self.points[i];
            let b = self.points[(i + 1) % n];
            acc += a.x * b.y - b.x * a.y;
        }
        acc / 2.0
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    /// `(min_x, min_y, max_x, max_y)`.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        self.points.iter().fold(
            (
                f64::INFINITY,
                f64::INFINITY,
                f64::NEG_INFINITY,
                f64::NEG_INFINITY,
            ),
            |(x0, y0, x1, y1), p| (x0.min(p.x), y0.min(p.y), x1.max(p.x), y1.max(p.y)),
        )
    }

    pub fn scaled(&self, sx: f64, sy: f64) -> Result<Self> {
        Self::new(self.points.iter().map(|p| Point::new(p.x * sx, p.y * sy)))
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Result<Self> {
        Self::new(self.points.iter().map(|p| Point::new(p.x + dx, p.y + dy)))
    }
}
