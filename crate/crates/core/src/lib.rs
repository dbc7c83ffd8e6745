//! Minimalist text-kernel representation for scene-text detection.
//!
//! A text line is modeled by its kernel, the region eroded by an `s × s`
//! square, and recovered by dilating each labeled kernel back out. This crate
//! covers everything around that idea that does not involve a neural network:
//!
//! - [`geometry`]: polygons, rasterization, mask IoU, contours and rotated rectangles
//! - [`morphology`]: erosion, dilation (and its subgradient), kernel label generation
//! - [`ccl`]: connected-components labeling, sequential and band-parallel
//! - [`postprocess`]: the text-dilation pipeline from kernel map to detections
//! - [`losses`]: Dice losses, hard example mining and gradients
//! - [`nas`]: architecture search space, reward and random search
//! - [`eval`]: matching, P/R/F and the representation upper bound
//! - [`io`], [`synth`]: file formats and synthetic data
//!
//! Pluggable stages are chosen by name through [`registry`].

pub mod ccl;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod losses;
pub mod morphology;
pub mod nas;
pub mod postprocess;
pub mod registry;
pub mod synth;

pub use ccl::{label_components, label_components_parallel, Connectivity};
pub use error::{Error, Result};
pub use geometry::{
    mask_iou, min_area_rect, rasterize_polygon, trace_contours, Point, Polygon, RotatedRect,
};
pub use grid::{BitMask, LabelMap, ScalarMap};
pub use morphology::{dilate, erode, generate_labels, soft_dilate, soft_dilate_vjp, DilationSize};
pub use postprocess::{reconstruct_text_lines, Detection, PostprocessConfig, TextDilation};
