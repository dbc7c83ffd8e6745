//! Square-window morphology: erosion, dilation (the max-pool of text
//! dilation), its real-valued variant with a subgradient, kernel label
//! generation and the proportional dilation-size rule.
//!
//! Every window operation runs on the van Herk / Gil-Werman running
//! extremum, which costs three comparisons per pixel per axis regardless of
//! the window size.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{polygon_spans, Polygon};
use crate::grid::{ensure_same_dims, BitMask, LabelMap, ScalarMap};

/// Side length `s` of the square structuring element. Always odd, so the
/// window centered on a pixel spans `s / 2` pixels on each side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u32")]
pub struct DilationSize(u32);

impl DilationSize {
    pub const DEFAULT: DilationSize = DilationSize(9);

    pub fn new(s: i64) -> Result<Self> {
        if s < 1 || s % 2 == 0 || s > u32::MAX as i64 {
            return Err(Error::InvalidDilationSize(s));
        }
        Ok(Self(s as u32))
    }

    /// Nearest odd size ≥ 1; even values round up.
    pub fn coerce(s: i64) -> Self {
        if s < 1 {
            Self(1)
        } else if s % 2 == 0 {
            Self((s + 1).min(u32::MAX as i64) as u32)
        } else {
            Self(s as u32)
        }
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0 as usize
    }

    /// `s / 2`, the padding of the equivalent max-pool.
    #[inline]
    pub fn radius(self) -> usize {
        (self.0 / 2) as usize
    }
}

impl Default for DilationSize {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl TryFrom<i64> for DilationSize {
    type Error = Error;
    fn try_from(s: i64) -> Result<Self> {
        Self::new(s)
    }
}

impl From<DilationSize> for u32 {
    fn from(s: DilationSize) -> u32 {
        s.0
    }
}

impl fmt::Display for DilationSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Running extremum of `line` over windows of `2r + 1` centered samples.
/// Samples beyond either end take the value `pad`. `op` must be associative,
/// commutative and idempotent (a lattice join or meet).
fn running_extremum<T: Copy>(
    line: &[T],
    out: &mut [T],
    r: usize,
    pad: T,
    op: impl Fn(T, T) -> T,
    prefix: &mut Vec<T>,
    suffix: &mut Vec<T>,
) {
    let n = line.len();
    let s = 2 * r + 1;
    let m = n + 2 * r;
    let at = |k: usize| {
        if k < r || k >= n + r {
            pad
        } else {
            line[k - r]
        }
    };

    prefix.clear();
    prefix.reserve(m);
    for k in 0..m {
        let v = at(k);
        let acc = if k % s == 0 { v } else { op(prefix[k - 1], v) };
        prefix.push(acc);
    }
    suffix.clear();
    suffix.resize(m, pad);
    for k in (0..m).rev() {
        let v = at(k);
        suffix[k] = if k == m - 1 || (k + 1) % s == 0 {
            v
        } else {
            op(v, suffix[k + 1])
        };
    }
    for (j, o) in out.iter_mut().enumerate() {
        *o = op(suffix[j], prefix[j + 2 * r]);
    }
}

/// Separable `s × s` window extremum over a row-major image. The vertical
/// pass runs the same recurrence with whole rows as elements so memory is
/// walked in order.
pub(crate) fn window_extremum<T: Copy>(
    data: &[T],
    width: usize,
    height: usize,
    size: DilationSize,
    pad: T,
    op: impl Fn(T, T) -> T + Copy,
) -> Vec<T> {
    let r = size.radius();
    if r == 0 || data.is_empty() {
        return data.to_vec();
    }

    let mut horiz = vec![pad; data.len()];
    let (mut prefix, mut suffix) = (Vec::new(), Vec::new());
    for (src, dst) in data.chunks_exact(width).zip(horiz.chunks_exact_mut(width)) {
        running_extremum(src, dst, r, pad, op, &mut prefix, &mut suffix);
    }

    let s = 2 * r + 1;
    let m = height + 2 * r;
    let pad_row = vec![pad; width];
    let row = |k: usize| -> &[T] {
        if k < r || k >= height + r {
            &pad_row
        } else {
            &horiz[(k - r) * width..(k - r + 1) * width]
        }
    };
    let mut g = vec![pad; m * width];
    for k in 0..m {
        let src = row(k);
        if k % s == 0 {
            g[k * width..(k + 1) * width].copy_from_slice(src);
        } else {
            let (done, cur) = g.split_at_mut(k * width);
            let prev = &done[(k - 1) * width..];
            for ((c, &p), &v) in cur[..width].iter_mut().zip(prev).zip(src) {
                *c = op(p, v);
            }
        }
    }
    let mut h = vec![pad; m * width];
    for k in (0..m).rev() {
        let src = row(k);
        if k == m - 1 || (k + 1) % s == 0 {
            h[k * width..(k + 1) * width].copy_from_slice(src);
        } else {
            let (cur, later) = h.split_at_mut((k + 1) * width);
            let next = &later[..width];
            for ((c, &v), &nx) in cur[k * width..].iter_mut().zip(src).zip(next) {
                *c = op(v, nx);
            }
        }
    }
    let mut out = vec![pad; data.len()];
    for (j, o) in out.chunks_exact_mut(width).enumerate() {
        let hs = &h[j * width..(j + 1) * width];
        let gs = &g[(j + 2 * r) * width..(j + 2 * r + 1) * width];
        for ((o, &a), &b) in o.iter_mut().zip(hs).zip(gs) {
            *o = op(a, b);
        }
    }
    out
}

/// Binary erosion: a pixel survives iff its whole `s × s` window is set.
/// Pixels outside the image count as background.
pub fn erode(mask: &BitMask, s: DilationSize) -> BitMask {
    let (w, h) = mask.dims();
    let bits = window_extremum(mask.as_slice(), w, h, s, 0u8, |a, b| a & b);
    BitMask::from_bits(w, h, bits).unwrap_or_else(|_| BitMask::new(w, h))
}

/// Binary dilation: a pixel is set iff any pixel of its `s × s` window is
/// set. Identical to a max-pool with stride 1 and padding `s / 2`.
pub fn dilate(mask: &BitMask, s: DilationSize) -> BitMask {
    let (w, h) = mask.dims();
    let bits = window_extremum(mask.as_slice(), w, h, s, 0u8, |a, b| a | b);
    BitMask::from_bits(w, h, bits).unwrap_or_else(|_| BitMask::new(w, h))
}

/// Real-valued window maximum (max-pool semantics: outside pixels never win).
pub fn soft_dilate(map: &ScalarMap, s: DilationSize) -> ScalarMap {
    let (w, h) = map.dims();
    let v = window_extremum(map.as_slice(), w, h, s, f64::NEG_INFINITY, f64::max);
    ScalarMap::from_vec_unchecked(w, h, v)
}

#[derive(Clone, Copy)]
struct Candidate {
    value: f64,
    index: usize,
}

fn pick_max(a: Candidate, b: Candidate) -> Candidate {
    if a.value > b.value || (a.value == b.value && a.index <= b.index) {
        a
    } else {
        b
    }
}

/// Input pixel that wins each window of [`soft_dilate`]; ties go to the
/// lowest row-major index.
pub fn soft_dilate_argmax(map: &ScalarMap, s: DilationSize) -> Vec<usize> {
    let (w, h) = map.dims();
    let cand: Vec<Candidate> = map
        .as_slice()
        .iter()
        .enumerate()
        .map(|(index, &value)| Candidate { value, index })
        .collect();
    let pad = Candidate {
        value: f64::NEG_INFINITY,
        index: usize::MAX,
    };
    window_extremum(&cand, w, h, s, pad, pick_max)
        .into_iter()
        .map(|c| c.index)
        .collect()
}

/// Vector-Jacobian product of [`soft_dilate`]: each upstream value is routed
/// to the argmax pixel of its window and contributions are summed.
pub fn soft_dilate_vjp(
    map: &ScalarMap,
    s: DilationSize,
    upstream: &ScalarMap,
) -> Result<ScalarMap> {
    ensure_same_dims(map.dims(), upstream.dims())?;
    let (w, h) = map.dims();
    let mut grad = vec![0.0; w * h];
    for (src, &g) in soft_dilate_argmax(map, s)
        .into_iter()
        .zip(upstream.as_slice())
    {
        grad[src] += g;
    }
    Ok(ScalarMap::from_vec_unchecked(w, h, grad))
}

/// Ground truth for one image: the filled text regions and the per-instance
/// eroded kernels.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelLabels {
    /// Union of all rasterized polygons.
    pub text: BitMask,
    /// Kernel pixels labeled with their instance id (polygon index + 1).
    /// Where kernels overlap the later polygon wins, so an id may be absent.
    pub kernels: LabelMap,
    /// Indices of polygons whose kernel erodes to nothing.
    pub empty_kernels: Vec<usize>,
}

/// Builds the text-region and text-kernel labels of an image. Each polygon
/// is eroded on its own so touching instances keep separate kernels.
pub fn generate_labels(
    polys: &[Polygon],
    width: usize,
    height: usize,
    s: DilationSize,
) -> Result<KernelLabels> {
    let mut text = BitMask::new(width, height);
    let mut kernels = LabelMap::new(width, height);
    let mut empty_kernels = Vec::new();

    for (i, poly) in polys.iter().enumerate() {
        let id =
            u32::try_from(i + 1).map_err(|_| Error::InvalidArgument("too many polygons".into()))?;
        let spans = polygon_spans(poly, width, height)?;
        if spans.is_empty() {
            empty_kernels.push(i);
            continue;
        }
        let x0 = spans.iter().map(|s| s.x0 as usize).min().unwrap_or(0);
        let x1 = spans.iter().map(|s| s.x1 as usize).max().unwrap_or(0);
        let y0 = spans[0].y as usize;
        let y1 = spans[spans.len() - 1].y as usize + 1;

        // Erode inside the bounding box only: the instance is empty outside it.
        let (bw, bh) = (x1 - x0, y1 - y0);
        let mut crop = BitMask::new(bw, bh);
        for sp in &spans {
            for x in sp.x0 as usize..sp.x1 as usize {
                text.set(x, sp.y as usize, true);
                crop.set(x - x0, sp.y as usize - y0, true);
            }
        }
        let kernel = erode(&crop, s);
        let mut any = false;
        for y in 0..bh {
            for x in 0..bw {
                if kernel.get(x, y) {
                    kernels.set(x + x0, y + y0, id);
                    any = true;
                }
            }
        }
        if !any {
            empty_kernels.push(i);
        }
    }
    Ok(KernelLabels {
        text,
        kernels,
        empty_kernels,
    })
}

/// Proportional dilation size for a new shorter image side:
/// `round(new_side × default_s / default_side)`, halves rounded away from
/// zero. The result may be even; pass it through [`DilationSize::coerce`].
pub fn scale_dilation_size(new_side: i64, default_side: i64, default_s: i64) -> Result<i64> {
    if new_side <= 0 || default_side <= 0 || default_s <= 0 {
        return Err(Error::InvalidArgument(format!(
            "dilation scaling needs positive inputs, got ({new_side}, {default_side}, {default_s})"
        )));
    }
    let num = (new_side as i128) * (default_s as i128);
    let den = default_side as i128;
    let rounded = (2 * num + den) / (2 * den);
    i64::try_from(rounded).map_err(|_| Error::InvalidArgument("dilation size overflow".into()))
}
