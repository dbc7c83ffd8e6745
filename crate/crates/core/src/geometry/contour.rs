//! Outer-boundary tracing on label maps.
//!
//! Boundaries are followed along pixel edges ("cracks") rather than through
//! pixel centers, so the traced polygon has integer corner coordinates and
//! re-rasterizes to exactly the pixels it encloses. The turn rule is the
//! Moore-neighbour rule for 8-connected foreground: at a vertex where only
//! the two diagonal pixels belong to the component, the trace turns towards
//! the component so that diagonal neighbours stay inside one contour.

use super::{Point, Polygon};
use crate::grid::LabelMap;

// Headings in image coordinates (y grows downwards), clockwise order.
const EAST: u8 = 0;
const STEP: [(isize, isize); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

/// One outer boundary polygon per component id present in `labels`, sorted
/// by id. Holes are not reported: the polygon of a component with holes
/// encloses the holes as well.
///
/// When an id occupies several disconnected regions (possible after label
/// dilation), only the region containing its first pixel in row-major
/// order is traced.
pub fn trace_contours(labels: &LabelMap) -> Vec<(u32, Polygon)> {
    let w = labels.width();
    let mut first = vec![usize::MAX; labels.count() as usize + 1];
    for (i, &l) in labels.as_slice().iter().enumerate() {
        if l != 0 && first[l as usize] == usize::MAX {
            first[l as usize] = i;
        }
    }
    first
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &i)| i != usize::MAX)
        .map(|(id, &i)| {
            let corners = trace_outer(labels, id as u32, i % w, i / w);
            let poly = Polygon::new(corners).expect("pixel boundary has at least four corners");
            (id as u32, poly)
        })
        .collect()
}

/// Corner points of the outer boundary of the region of `id` containing the
/// pixel `(px, py)`, which must be that region's first pixel in row-major
/// order. Traversal is clockwise with the region on the right-hand side.
pub(crate) fn trace_outer(labels: &LabelMap, id: u32, px: usize, py: usize) -> Vec<Point> {
    let (w, h) = (labels.width() as isize, labels.height() as isize);
    let inside = |x: isize, y: isize| {
        x >= 0 && y >= 0 && x < w && y < h && labels.get(x as usize, y as usize) == id
    };
    // The two pixels flanking the next edge when leaving (vx, vy) along `d`:
    // (ahead-right, ahead-left).
    let flanks = |vx: isize, vy: isize, d: u8| match d {
        0 => ((vx, vy), (vx, vy - 1)),
        1 => ((vx - 1, vy), (vx, vy)),
        2 => ((vx - 1, vy - 1), (vx - 1, vy)),
        _ => ((vx, vy - 1), (vx - 1, vy - 1)),
    };

    let start = (px as isize, py as isize);
    let (mut vx, mut vy) = start;
    let mut d = EAST;
    let mut corners = Vec::new();
    loop {
        let (dx, dy) = STEP[d as usize];
        vx += dx;
        vy += dy;
        let (right, left) = flanks(vx, vy, d);
        let next = if inside(left.0, left.1) {
            (d + 3) % 4
        } else if inside(right.0, right.1) {
            d
        } else {
            (d + 1) % 4
        };
        if next != d {
            corners.push(Point::new(vx as f64, vy as f64));
        }
        d = next;
        if (vx, vy) == start && d == EAST {
            break;
        }
    }
    corners
}
