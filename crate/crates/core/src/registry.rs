//! Named, runtime-selectable implementations of the pipeline's pluggable
//! stages: component labelers, region extractors and (in [`crate::nas`])
//! metrics oracles.

use std::sync::Arc;

use crate::ccl::{label_components, label_components_parallel, Connectivity};
use crate::error::{Error, Result};
use crate::geometry::{min_area_rect, trace_contours, Point, Polygon};
use crate::grid::{BitMask, LabelMap};

/// Strategy for connected-components labeling. Implementations must return
/// the canonical labeling (first-occurrence numbering).
pub trait ComponentLabeler: Send + Sync {
    fn name(&self) -> &'static str;
    fn label(&self, mask: &BitMask, connectivity: Connectivity) -> LabelMap;
}

/// Strategy for turning a (dilated) label map into one polygon per id.
pub trait RegionExtractor: Send + Sync {
    fn name(&self) -> &'static str;
    /// Polygons sorted by label id; ids absent from the map are skipped.
    fn extract(&self, labels: &LabelMap) -> Vec<(u32, Polygon)>;
}

/// Sequential two-pass union-find labeling.
#[derive(Clone, Copy, Debug, Default)]
pub struct UnionFindLabeler;

impl ComponentLabeler for UnionFindLabeler {
    fn name(&self) -> &'static str {
        "union-find"
    }

    fn label(&self, mask: &BitMask, connectivity: Connectivity) -> LabelMap {
        label_components(mask, connectivity)
    }
}

/// Band-parallel labeling on the ambient rayon pool.
#[derive(Clone, Copy, Debug)]
pub struct TiledLabeler {
    pub tiles: usize,
}

impl Default for TiledLabeler {
    fn default() -> Self {
        Self { tiles: 4 }
    }
}

impl ComponentLabeler for TiledLabeler {
    fn name(&self) -> &'static str {
        "tiled"
    }

    fn label(&self, mask: &BitMask, connectivity: Connectivity) -> LabelMap {
        label_components_parallel(mask, connectivity, self.tiles)
    }
}

/// Outer pixel-boundary contour of each region.
#[derive(Clone, Copy, Debug, Default)]
pub struct ContourExtractor;

impl RegionExtractor for ContourExtractor {
    fn name(&self) -> &'static str {
        "polygon"
    }

    fn extract(&self, labels: &LabelMap) -> Vec<(u32, Polygon)> {
        trace_contours(labels)
    }
}

/// Minimum-area rotated rectangle around all pixels of each id.
#[derive(Clone, Copy, Debug, Default)]
pub struct MinAreaRectExtractor;

impl RegionExtractor for MinAreaRectExtractor {
    fn name(&self) -> &'static str {
        "rect"
    }

    fn extract(&self, labels: &LabelMap) -> Vec<(u32, Polygon)> {
        // Only the outermost pixel of each row can contribute hull corners.
        let (w, h) = labels.dims();
        let n = labels.count() as usize;
        let mut extremes: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); n + 1];
        for y in 0..h {
            let row = &labels.as_slice()[y * w..(y + 1) * w];
            for (x, &id) in row.iter().enumerate() {
                if id == 0 {
                    continue;
                }
                let rows = &mut extremes[id as usize];
                match rows.last_mut() {
                    Some((ry, _, hi)) if *ry == y => *hi = x,
                    _ => rows.push((y, x, x)),
                }
            }
        }
        extremes
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, rows)| !rows.is_empty())
            .filter_map(|(id, rows)| {
                let pts: Vec<Point> = rows
                    .iter()
                    .flat_map(|&(y, lo, hi)| {
                        let (y0, y1) = (y as f64, y as f64 + 1.0);
                        let (x0, x1) = (lo as f64, hi as f64 + 1.0);
                        [
                            Point::new(x0, y0),
                            Point::new(x1, y0),
                            Point::new(x0, y1),
                            Point::new(x1, y1),
                        ]
                    })
                    .collect();
                let rect = min_area_rect(&pts).ok()?;
                Some((id as u32, rect.to_polygon().ok()?))
            })
            .collect()
    }
}

/// Name → implementation table for one kind of strategy.
pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: Vec<(String, Arc<T>)>,
}

impl<T: ?Sized> Registry<T> {
    pub fn empty(kind: &'static str) -> Self {
        Self {
            kind,
            entries: Vec::new(),
        }
    }

    /// Adds or replaces the entry called `name`.
    pub fn register(&mut self, name: impl Into<String>, item: Arc<T>) -> &mut Self {
        let name = name.into();
        match self.entries.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = item,
            None => self.entries.push((name, item)),
        }
        self
    }

    pub fn get(&self, name: &str) -> Result<Arc<T>> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, item)| Arc::clone(item))
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_owned(),
                known: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|(n, _)| n.as_str()).collect()
    }
}

/// Built-in labelers: `union-find` and `tiled`.
pub fn labelers() -> Registry<dyn ComponentLabeler> {
    let mut r: Registry<dyn ComponentLabeler> = Registry::empty("labeler");
    r.register("union-find", Arc::new(UnionFindLabeler));
    r.register("tiled", Arc::new(TiledLabeler::default()));
    r
}

/// Built-in extractors: `polygon` and `rect`.
pub fn extractors() -> Registry<dyn RegionExtractor> {
    let mut r: Registry<dyn RegionExtractor> = Registry::empty("output mode");
    r.register("polygon", Arc::new(ContourExtractor));
    r.register("rect", Arc::new(MinAreaRectExtractor));
    r
}
