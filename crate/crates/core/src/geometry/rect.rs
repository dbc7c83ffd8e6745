use serde::{Deserialize, Serialize};

use super::{Point, Polygon};
use crate::error::{Error, Result};

/// Rotated rectangle; `angle` (degrees, in `[-90, 90)`) is the direction of
/// the side of length `width`, measured clockwise from the +x axis in image
/// coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotatedRect {
    pub center: Point,
    pub width: f64,
    pub height: f64,
    pub angle: f64,
}

impl RotatedRect {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    /// Corners in clockwise order starting from the (-w/2, -h/2) corner.
    pub fn corners(&self) -> [Point; 4] {
        let (s, c) = self.angle.to_radians().sin_cos();
        let (hw, hh) = (self.width / 2.0, self.height / 2.0);
        let at = |a: f64, b: f64| {
            Point::new(self.center.x + a * c - b * s, self.center.y + a * s + b * c)
        };
        [at(-hw, -hh), at(hw, -hh), at(hw, hh), at(-hw, hh)]
    }

    pub fn to_polygon(&self) -> Result<Polygon> {
        Polygon::new(self.corners())
    }
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Convex hull by Andrew's monotone chain; collinear points are dropped.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for pass in [&pts[..], &pts.iter().rev().copied().collect::<Vec<_>>()[..]] {
        let base = hull.len();
        for &p in pass {
            while hull.len() >= base + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

fn normalize_angle(deg: f64) -> f64 {
    let mut a = deg;
    while a >= 90.0 {
        a -= 180.0;
    }
    while a < -90.0 {
        a += 180.0;
    }
    a
}

/// Minimum-area enclosing rectangle of `points` by rotating calipers over
/// the convex hull. Among equal-area candidates the one whose angle is
/// closest to 0 wins, so axis-aligned inputs come back with angle 0.
pub fn min_area_rect(points: &[Point]) -> Result<RotatedRect> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("min_area_rect of no points".into()));
    }
    if let Some(p) = points
        .iter()
        .find(|p| !(p.x.is_finite() && p.y.is_finite()))
    {
        return Err(Error::InvalidArgument(format!(
            "non-finite point ({}, {})",
            p.x, p.y
        )));
    }
    let hull = convex_hull(points);
    if hull.len() == 1 {
        return Ok(RotatedRect {
            center: hull[0],
            width: 0.0,
            height: 0.0,
            angle: 0.0,
        });
    }

    let n = hull.len();
    let mut best: Option<(f64, RotatedRect)> = None;
    for i in 0..n {
        let (a, b) = (hull[i], hull[(i + 1) % n]);
        let len = (b.x - a.x).hypot(b.y - a.y);
        let (ux, uy) = ((b.x - a.x) / len, (b.y - a.y) / len);
        let (mut u0, mut u1, mut v0, mut v1) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for p in &hull {
            let u = p.x * ux + p.y * uy;
            let v = -p.x * uy + p.y * ux;
            u0 = u0.min(u);
            u1 = u1.max(u);
            v0 = v0.min(v);
            v1 = v1.max(v);
        }
        let angle = normalize_angle(uy.atan2(ux).to_degrees());
        let (um, vm) = ((u0 + u1) / 2.0, (v0 + v1) / 2.0);
        let center = Point::new(um * ux - vm * uy, um * uy + vm * ux);
        let rect = RotatedRect {
            center,
            width: u1 - u0,
            height: v1 - v0,
            angle,
        };
        let area = rect.area();
        let better = match &best {
            None => true,
            Some((ba, br)) => {
                let tol = 1e-9 * ba.abs().max(1.0);
                area < ba - tol || (area <= ba + tol && rect.angle.abs() < br.angle.abs())
            }
        };
        if better {
            best = Some((area, rect));
        }
    }
    Ok(best.expect("hull has at least one edge").1)
}
