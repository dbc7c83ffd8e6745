//! Detection matching, precision/recall/F-measure and the kernel
//! representation upper-bound study.
//!
//! Matching is greedy and one-to-one in descending mask-IoU order with ties
//! broken by (detection index, ground-truth index). It is this crate's own
//! protocol, not an emulation of any dataset's official script.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{polygon_spans, spans_iou, Polygon, Span};
use crate::morphology::{generate_labels, DilationSize};
use crate::postprocess::{Detection, PostprocessConfig, TextDilation};

impl AsRef<Polygon> for Polygon {
    fn as_ref(&self) -> &Polygon {
        self
    }
}

impl AsRef<Polygon> for Detection {
    fn as_ref(&self) -> &Polygon {
        &self.polygon
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    /// `(detection index, ground-truth index, IoU)`, in match order.
    pub pairs: Vec<(usize, usize, f64)>,
    pub unmatched_dets: Vec<usize>,
    pub unmatched_gts: Vec<usize>,
}

fn rasterize_all<P: AsRef<Polygon> + Sync>(polys: &[P], canvas: (usize, usize)) -> Vec<Vec<Span>> {
    // Zero-area polygons cover no pixels.
    polys
        .par_iter()
        .map(|p| polygon_spans(p.as_ref(), canvas.0, canvas.1).unwrap_or_default())
        .collect()
}

fn span_bounds(spans: &[Span]) -> Option<(u32, u32, u32, u32)> {
    let first = spans.first()?;
    let last = spans.last()?;
    let x0 = spans.iter().map(|s| s.x0).min()?;
    let x1 = spans.iter().map(|s| s.x1).max()?;
    Some((x0, first.y, x1, last.y + 1))
}

/// Greedy one-to-one matching of detections to ground truth by mask IoU on a
/// `canvas = (width, height)` raster. Only pairs with IoU ≥ `iou_thresh`
/// can match.
pub fn match_detections<D, G>(
    dets: &[D],
    gts: &[G],
    iou_thresh: f64,
    canvas: (usize, usize),
) -> Result<MatchResult>
where
    D: AsRef<Polygon> + Sync,
    G: AsRef<Polygon> + Sync,
{
    if !(iou_thresh > 0.0 && iou_thresh <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "IoU threshold must be in (0, 1], got {iou_thresh}"
        )));
    }
    if canvas.0 == 0 || canvas.1 == 0 {
        return Err(Error::InvalidArgument("canvas must be non-empty".into()));
    }
    let det_spans = rasterize_all(dets, canvas);
    let gt_spans = rasterize_all(gts, canvas);
    let gt_boxes: Vec<_> = gt_spans.iter().map(|s| span_bounds(s)).collect();
    let (gt_spans, gt_boxes) = (&gt_spans, &gt_boxes);

    let mut candidates: Vec<(usize, usize, f64)> = det_spans
        .par_iter()
        .enumerate()
        .flat_map_iter(|(d, ds)| {
            let db = span_bounds(ds);
            gt_spans.iter().enumerate().filter_map(move |(g, gs)| {
                let overlapping = match (db, gt_boxes[g]) {
                    (Some(a), Some(b)) => a.0 < b.2 && b.0 < a.2 && a.1 < b.3 && b.1 < a.3,
                    (None, None) => true,
                    _ => false,
                };
                if !overlapping {
                    return None;
                }
                let iou = spans_iou(ds, gs);
                (iou >= iou_thresh).then_some((d, g, iou))
            })
        })
        .collect();
    candidates.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));

    let mut det_used = vec![false; dets.len()];
    let mut gt_used = vec![false; gts.len()];
    let mut pairs = Vec::new();
    for (d, g, iou) in candidates {
        if !det_used[d] && !gt_used[g] {
            det_used[d] = true;
            gt_used[g] = true;
            pairs.push((d, g, iou));
        }
    }
    let unmatched = |used: &[bool]| {
        used.iter()
            .enumerate()
            .filter(|(_, &u)| !u)
            .map(|(i, _)| i)
            .collect()
    };
    Ok(MatchResult {
        unmatched_dets: unmatched(&det_used),
        unmatched_gts: unmatched(&gt_used),
        pairs,
    })
}

/// Precision, recall and their harmonic mean.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

impl Prf {
    /// With no detections precision is 1; with no ground truth recall is 1.
    pub fn from_counts(pairs: usize, n_dets: usize, n_gts: usize) -> Self {
        let precision = if n_dets == 0 {
            1.0
        } else {
            pairs as f64 / n_dets as f64
        };
        let recall = if n_gts == 0 {
            1.0
        } else {
            pairs as f64 / n_gts as f64
        };
        let f_measure = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            precision,
            recall,
            f_measure,
        }
    }
}

pub fn compute_prf(m: &MatchResult, n_dets: usize, n_gts: usize) -> Prf {
    Prf::from_counts(m.pairs.len(), n_dets, n_gts)
}

/// Matching counts for one image.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub pairs: usize,
    pub dets: usize,
    pub gts: usize,
}

impl Counts {
    pub fn prf(&self) -> Prf {
        Prf::from_counts(self.pairs, self.dets, self.gts)
    }
}

impl std::iter::Sum for Counts {
    fn sum<I: Iterator<Item = Counts>>(iter: I) -> Self {
        iter.fold(Counts::default(), |a, b| Counts {
            pairs: a.pairs + b.pairs,
            dets: a.dets + b.dets,
            gts: a.gts + b.gts,
        })
    }
}

pub fn evaluate_image<D, G>(
    dets: &[D],
    gts: &[G],
    iou_thresh: f64,
    canvas: (usize, usize),
) -> Result<Counts>
where
    D: AsRef<Polygon> + Sync,
    G: AsRef<Polygon> + Sync,
{
    let m = match_detections(dets, gts, iou_thresh, canvas)?;
    Ok(Counts {
        pairs: m.pairs.len(),
        dets: dets.len(),
        gts: gts.len(),
    })
}

/// Settings of the upper-bound study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperBoundConfig {
    pub canvas: (usize, usize),
    pub iou_thresh: f64,
    /// Post-processing applied to the perfect kernel map. Its `s` is
    /// overridden by the size under study.
    pub postprocess: PostprocessConfig,
}

impl Default for UpperBoundConfig {
    fn default() -> Self {
        Self {
            canvas: (640, 640),
            iou_thresh: 0.5,
            postprocess: PostprocessConfig {
                threshold: 0.5,
                min_kernel_area: 0,
                ..PostprocessConfig::default()
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperBound {
    pub s: DilationSize,
    pub per_image: Vec<Counts>,
    pub aggregate: Prf,
}

/// How much F-measure the kernel representation itself gives up: every image's
/// ground truth is eroded into kernels, those kernels are fed back as a perfect
/// prediction, and the rebuilt text lines are matched against the original
/// polygons. Counts are summed over images before computing P/R/F.
pub fn upper_bound_experiment(
    gt_sets: &[Vec<Polygon>],
    s: DilationSize,
    cfg: &UpperBoundConfig,
) -> Result<UpperBound> {
    let (w, h) = cfg.canvas;
    let pipeline = TextDilation::new(PostprocessConfig {
        s,
        ..cfg.postprocess.clone()
    })?;
    let per_image = gt_sets
        .par_iter()
        .map(|gts| {
            let labels = generate_labels(gts, w, h, s)?;
            let kernel_map = labels.kernels.to_mask().to_scalar();
            let dets = pipeline.run(&kernel_map);
            evaluate_image(&dets, gts, cfg.iou_thresh, cfg.canvas)
        })
        .collect::<Result<Vec<Counts>>>()?;
    let aggregate = per_image.iter().copied().sum::<Counts>().prf();
    Ok(UpperBound {
        s,
        per_image,
        aggregate,
    })
}

/// Smallest canvas holding every polygon, at least `min`.
pub fn canvas_for<'a>(
    polys: impl IntoIterator<Item = &'a Polygon>,
    min: (usize, usize),
) -> (usize, usize) {
    polys.into_iter().fold(min, |(w, h), p| {
        let (_, _, x1, y1) = p.bounds();
        (
            w.max(x1.ceil().max(0.0) as usize),
            h.max(y1.ceil().max(0.0) as usize),
        )
    })
}
