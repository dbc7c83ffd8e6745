//! Text dilation: rebuilding complete text regions from a predicted kernel
//! map.
//!
//! Inference runs binarize → label → small-kernel filter → label dilation →
//! geometry. Training skips binarization and labeling and max-pools the raw
//! kernel map, which keeps the step differentiable.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::ccl::Connectivity;
use crate::error::Result;
use crate::geometry::Polygon;
use crate::grid::{BitMask, LabelMap, ScalarMap};
use crate::morphology::{soft_dilate, window_extremum, DilationSize};
use crate::registry::{extractors, labelers, ComponentLabeler, RegionExtractor};

/// A reconstructed text line.
#[derive(Clone, Debug, PartialEq)]
pub struct Detection {
    pub polygon: Polygon,
    /// Mean kernel-map value over the component's kernel pixels, clamped to [0, 1].
    pub score: f64,
    /// Component id after filtering.
    pub label: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PostprocessConfig {
    /// Kernel pixels are those with value strictly above this.
    pub threshold: f64,
    pub s: DilationSize,
    /// Components with fewer kernel pixels are dropped before dilation.
    pub min_kernel_area: usize,
    /// Region extractor name, `polygon` or `rect`.
    pub output_mode: String,
    pub connectivity: Connectivity,
    /// Labeler name, `union-find` or `tiled`.
    pub labeler: String,
}

impl Default for PostprocessConfig {
    fn default() -> Self {
        Self {
            threshold: 0.0,
            s: DilationSize::DEFAULT,
            min_kernel_area: 10,
            output_mode: "polygon".into(),
            connectivity: Connectivity::Eight,
            labeler: "union-find".into(),
        }
    }
}

/// Wall-clock cost of each stage in milliseconds. `ccl` includes
/// binarization and the area filter.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub ccl: f64,
    pub dilate: f64,
    pub contour: f64,
    pub total: f64,
}

impl std::ops::AddAssign for StageTimings {
    fn add_assign(&mut self, rhs: Self) {
        self.ccl += rhs.ccl;
        self.dilate += rhs.dilate;
        self.contour += rhs.contour;
        self.total += rhs.total;
    }
}

/// Strict threshold: set iff `value > threshold`.
pub fn binarize(map: &ScalarMap, threshold: f64) -> BitMask {
    let (w, h) = map.dims();
    let bits = map
        .as_slice()
        .iter()
        .map(|&v| u8::from(v > threshold))
        .collect();
    BitMask::from_bits(w, h, bits).unwrap_or_else(|_| BitMask::new(w, h))
}

/// Max-pools a label map: each pixel takes the largest id in its `s × s`
/// window, so contested pixels go to the higher id.
pub fn dilate_labels(labels: &LabelMap, s: DilationSize) -> LabelMap {
    let (w, h) = labels.dims();
    let out = window_extremum(labels.as_slice(), w, h, s, 0u32, u32::max);
    LabelMap::from_parts(w, h, out, labels.count())
}

/// Drops components smaller than `min_area` and renumbers the rest in their
/// original order.
pub fn filter_small_components(labels: &LabelMap, min_area: usize) -> LabelMap {
    let areas = labels.areas();
    let mut remap = vec![0u32; areas.len()];
    let mut kept = 0;
    for id in 1..areas.len() {
        if areas[id] > 0 && areas[id] >= min_area {
            kept += 1;
            remap[id] = kept;
        }
    }
    if kept as usize == areas.len() - 1 {
        return labels.clone();
    }
    let (w, h) = labels.dims();
    let v = labels
        .as_slice()
        .iter()
        .map(|&l| remap[l as usize])
        .collect();
    LabelMap::from_parts(w, h, v, kept)
}

/// Training-time branch: the kernel map max-pooled as is.
pub fn training_forward(p_ker: &ScalarMap, s: DilationSize) -> ScalarMap {
    soft_dilate(p_ker, s)
}

/// Inference pipeline with its strategies resolved.
#[derive(Clone)]
pub struct TextDilation {
    cfg: PostprocessConfig,
    labeler: Arc<dyn ComponentLabeler>,
    extractor: Arc<dyn RegionExtractor>,
}

impl std::fmt::Debug for TextDilation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TextDilation")
            .field("cfg", &self.cfg)
            .field("labeler", &self.labeler.name())
            .field("extractor", &self.extractor.name())
            .finish()
    }
}

impl TextDilation {
    /// Resolves `cfg.labeler` and `cfg.output_mode` against the built-in registries.
    pub fn new(cfg: PostprocessConfig) -> Result<Self> {
        let labeler = labelers().get(&cfg.labeler)?;
        let extractor = extractors().get(&cfg.output_mode)?;
        Ok(Self::with_strategies(cfg, labeler, extractor))
    }

    pub fn with_strategies(
        cfg: PostprocessConfig,
        labeler: Arc<dyn ComponentLabeler>,
        extractor: Arc<dyn RegionExtractor>,
    ) -> Self {
        Self {
            cfg,
            labeler,
            extractor,
        }
    }

    pub fn config(&self) -> &PostprocessConfig {
        &self.cfg
    }

    pub fn run(&self, kernel_map: &ScalarMap) -> Vec<Detection> {
        self.run_timed(kernel_map).0
    }

    pub fn run_timed(&self, kernel_map: &ScalarMap) -> (Vec<Detection>, StageTimings) {
        let ms = |t: Instant| t.elapsed().as_secs_f64() * 1e3;
        let start = Instant::now();

        let t = Instant::now();
        let kernels = binarize(kernel_map, self.cfg.threshold);
        let labels = self.labeler.label(&kernels, self.cfg.connectivity);
        let labels = filter_small_components(&labels, self.cfg.min_kernel_area);
        let ccl = ms(t);

        let t = Instant::now();
        let grown = dilate_labels(&labels, self.cfg.s);
        let dilate = ms(t);

        let t = Instant::now();
        let regions = self.extractor.extract(&grown);
        let scores = kernel_scores(kernel_map, &labels);
        let detections = regions
            .into_iter()
            .map(|(label, polygon)| Detection {
                polygon,
                score: scores[label as usize],
                label,
            })
            .collect();
        let contour = ms(t);

        let timings = StageTimings {
            ccl,
            dilate,
            contour,
            total: ms(start),
        };
        (detections, timings)
    }
}

fn kernel_scores(kernel_map: &ScalarMap, labels: &LabelMap) -> Vec<f64> {
    let n = labels.count() as usize + 1;
    let (mut sum, mut count) = (vec![0.0; n], vec![0usize; n]);
    for (&l, &v) in labels.as_slice().iter().zip(kernel_map.as_slice()) {
        sum[l as usize] += v;
        count[l as usize] += 1;
    }
    sum.iter()
        .zip(&count)
        .map(|(&s, &c)| {
            if c == 0 {
                0.0
            } else {
                (s / c as f64).clamp(0.0, 1.0)
            }
        })
        .collect()
}

/// One-shot convenience wrapper around [`TextDilation`].
pub fn reconstruct_text_lines(
    kernel_map: &ScalarMap,
    cfg: &PostprocessConfig,
) -> Result<Vec<Detection>> {
    Ok(TextDilation::new(cfg.clone())?.run(kernel_map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rasterize_polygon;
    use crate::morphology::erode;

    fn s(v: i64) -> DilationSize {
        DilationSize::new(v).unwrap()
    }

    #[test]
    fn binarize_is_strict() {
        assert!(binarize(&ScalarMap::zeros(3, 3), 0.0).is_empty());
        let m = ScalarMap::from_values(2, 1, vec![0.4, 0.6]).unwrap();
        assert_eq!(binarize(&m, 0.5).as_slice(), &[0, 1]);
        let logits = ScalarMap::from_values(3, 1, vec![-1.0, 2.0, 0.0]).unwrap();
        assert_eq!(binarize(&logits, 0.0).as_slice(), &[0, 1, 0]);
    }

    #[test]
    fn contested_pixels_take_higher_id() {
        let mut v = vec![0u32; 7];
        v[1] = 1;
        v[4] = 2;
        let l = LabelMap::from_labels(7, 1, v).unwrap();
        let d = dilate_labels(&l, s(3));
        assert_eq!(d.as_slice(), &[1, 1, 1, 2, 2, 2, 0]);
        let d5 = dilate_labels(&l, s(5));
        assert_eq!(d5.as_slice(), &[1, 1, 2, 2, 2, 2, 2]);
        assert_eq!(d5.count(), 2);
        let bg = LabelMap::new(4, 4);
        assert_eq!(dilate_labels(&bg, s(5)), bg);
    }

    #[test]
    fn filter_renumbers_in_order() {
        let l = LabelMap::from_labels(6, 1, vec![1, 0, 2, 2, 0, 3]).unwrap();
        let f = filter_small_components(&l, 2);
        assert_eq!(f.as_slice(), &[0, 0, 1, 1, 0, 0]);
        assert_eq!(f.count(), 1);
    }

    #[test]
    fn eroded_rectangle_is_rebuilt() {
        let rect = Polygon::rect(10.0, 12.0, 50.0, 32.0).unwrap();
        let full = rasterize_polygon(&rect, 64, 48).unwrap();
        let kernel = erode(&full, s(9)).to_scalar();
        let cfg = PostprocessConfig {
            threshold: 0.5,
            ..Default::default()
        };
        let dets = reconstruct_text_lines(&kernel, &cfg).unwrap();
        assert_eq!(dets.len(), 1);
        assert_eq!(dets[0].score, 1.0);
        assert_eq!(rasterize_polygon(&dets[0].polygon, 64, 48).unwrap(), full);

        let rect_mode = PostprocessConfig {
            output_mode: "rect".into(),
            ..cfg
        };
        let dets = reconstruct_text_lines(&kernel, &rect_mode).unwrap();
        assert_eq!(rasterize_polygon(&dets[0].polygon, 64, 48).unwrap(), full);
    }

    #[test]
    fn background_yields_nothing() {
        let dets = reconstruct_text_lines(&ScalarMap::zeros(20, 20), &PostprocessConfig::default())
            .unwrap();
        assert!(dets.is_empty());
    }

    #[test]
    fn unknown_mode_is_an_error() {
        let cfg = PostprocessConfig {
            output_mode: "hexagon".into(),
            ..Default::default()
        };
        assert!(TextDilation::new(cfg).is_err());
    }

    #[test]
    fn training_forward_is_soft_dilate() {
        let m = ScalarMap::from_fn(9, 7, |x, y| ((x * 7 + y * 3) % 5) as f64 * 0.1);
        assert_eq!(training_forward(&m, s(3)), soft_dilate(&m, s(3)));
    }
}
