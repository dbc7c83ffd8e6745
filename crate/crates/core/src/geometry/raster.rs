use rayon::prelude::*;

use super::Polygon;
use crate::error::{Error, Result};
use crate::grid::{ensure_same_dims, BitMask};

/// Half-open run of set pixels `[x0, x1)` on row `y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Span {
    pub y: u32,
    pub x0: u32,
    pub x1: u32,
}

// Rows above this many pixels are filled on the rayon pool.
const PARALLEL_PIXELS: usize = 1 << 16;

fn check_fillable(poly: &Polygon, width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidArgument(format!(
            "raster dimensions must be positive, got {width}x{height}"
        )));
    }
    if poly.signed_area() == 0.0 {
        return Err(Error::DegeneratePolygon("zero area".into()));
    }
    Ok(())
}

fn row_range(poly: &Polygon, height: usize) -> std::ops::Range<usize> {
    let (_, y0, _, y1) = poly.bounds();
    let lo = (y0 - 0.5).floor().max(0.0);
    let hi = (y1 + 0.5).ceil().min(height as f64);
    if hi <= lo {
        return 0..0;
    }
    lo as usize..hi as usize
}

/// Even-odd crossings of the horizontal line through the centers of row `y`,
/// sorted ascending. Uses the half-open vertex rule so every crossing is
/// counted once.
fn row_crossings(poly: &Polygon, y: usize, out: &mut Vec<f64>) {
    out.clear();
    let yc = y as f64 + 0.5;
    let pts = poly.points();
    let n = pts.len();
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        if (a.y > yc) != (b.y > yc) {
            out.push((b.x - a.x) * (yc - a.y) / (b.y - a.y) + a.x);
        }
    }
    out.sort_by(f64::total_cmp);
}

/// Pixels of one row whose centers fall in `[lo, hi)`, clipped to the image.
fn pixel_run(lo: f64, hi: f64, width: usize) -> Option<(usize, usize)> {
    let mut start = (lo - 0.5).ceil().max(0.0) as usize;
    while start > 0 && start as f64 - 0.5 >= lo {
        start -= 1;
    }
    while start < width && (start as f64 + 0.5) < lo {
        start += 1;
    }
    let mut end = (hi - 0.5).ceil().clamp(0.0, width as f64) as usize;
    while end < width && (end as f64 + 0.5) < hi {
        end += 1;
    }
    while end > start && (end as f64 - 0.5) >= hi {
        end -= 1;
    }
    (start < end).then_some((start, end))
}

fn fill_row(
    poly: &Polygon,
    y: usize,
    width: usize,
    scratch: &mut Vec<f64>,
    mut emit: impl FnMut(usize, usize),
) {
    row_crossings(poly, y, scratch);
    for pair in scratch.chunks_exact(2) {
        if let Some((x0, x1)) = pixel_run(pair[0], pair[1], width) {
            emit(x0, x1);
        }
    }
}

/// Rasterizes `poly` onto a `width × height` grid: a pixel is set iff its
/// center lies inside the polygon under the even-odd rule. Geometry outside
/// the image is clipped.
pub fn rasterize_polygon(poly: &Polygon, width: usize, height: usize) -> Result<BitMask> {
    check_fillable(poly, width, height)?;
    let mut mask = BitMask::new(width, height);
    let rows = row_range(poly, height);
    let first = rows.start;
    let body = &mut mask.as_mut_slice()[rows.start * width..rows.end * width];
    let fill = |(dy, row): (usize, &mut [u8]), scratch: &mut Vec<f64>| {
        fill_row(poly, first + dy, width, scratch, |x0, x1| {
            row[x0..x1].fill(1)
        });
    };
    if body.len() >= PARALLEL_PIXELS {
        body.par_chunks_mut(width)
            .enumerate()
            .for_each_init(Vec::new, |scratch, item| fill(item, scratch));
    } else {
        let mut scratch = Vec::new();
        body.chunks_mut(width)
            .enumerate()
            .for_each(|item| fill(item, &mut scratch));
    }
    Ok(mask)
}

/// Same pixel set as [`rasterize_polygon`] as sorted runs.
pub(crate) fn polygon_spans(poly: &Polygon, width: usize, height: usize) -> Result<Vec<Span>> {
    check_fillable(poly, width, height)?;
    let mut spans = Vec::new();
    let mut scratch = Vec::new();
    for y in row_range(poly, height) {
        fill_row(poly, y, width, &mut scratch, |x0, x1| {
            spans.push(Span {
                y: y as u32,
                x0: x0 as u32,
                x1: x1 as u32,
            })
        });
    }
    Ok(spans)
}

fn span_area(spans: &[Span]) -> usize {
    spans.iter().map(|s| (s.x1 - s.x0) as usize).sum()
}

/// IoU of two span lists produced by [`polygon_spans`]; two empty sets give 1.
pub(crate) fn spans_iou(a: &[Span], b: &[Span]) -> f64 {
    let (area_a, area_b) = (span_area(a), span_area(b));
    let (mut i, mut j, mut inter) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        let (sa, sb) = (a[i], b[j]);
        if (sa.y, sa.x1) <= (sb.y, sb.x0) {
            i += 1;
            continue;
        }
        if (sb.y, sb.x1) <= (sa.y, sa.x0) {
            j += 1;
            continue;
        }
        // Same row and overlapping.
        inter += (sa.x1.min(sb.x1) - sa.x0.max(sb.x0)) as usize;
        if sa.x1 <= sb.x1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    let union = area_a + area_b - inter;
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// `|a ∧ b| / |a ∨ b|`, defined as 1 when both masks are empty.
pub fn mask_iou(a: &BitMask, b: &BitMask) -> Result<f64> {
    ensure_same_dims(a.dims(), b.dims())?;
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.as_slice().iter().zip(b.as_slice()) {
        inter += (x & y) as usize;
        union += (x | y) as usize;
    }
    Ok(if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    })
}
