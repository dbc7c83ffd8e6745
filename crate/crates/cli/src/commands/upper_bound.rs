use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use textkernel::eval::{canvas_for, upper_bound_experiment, Counts, Prf, UpperBoundConfig};
use textkernel::io::annotation::ParseMode;
use textkernel::DilationSize;

use super::{emit, list_files, parse_dilation, read_polygons, to_json, Size};
use crate::failure::{CliResult, Failure};

/// Inclusive range of dilation sizes written `A..B`; only odd values are used.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SizeRange {
    lo: i64,
    hi: i64,
}

impl SizeRange {
    fn sizes(self) -> Vec<DilationSize> {
        (self.lo..=self.hi)
            .filter_map(|v| DilationSize::new(v).ok())
            .collect()
    }
}

impl FromStr for SizeRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once("..")
            .ok_or_else(|| format!("expected A..B, got `{s}`"))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<i64>()
                .map_err(|_| format!("`{v}` is not an integer"))
        };
        let (lo, hi) = (parse(a)?, parse(b)?);
        let range = SizeRange { lo, hi };
        if range.sizes().is_empty() {
            return Err(format!("`{s}` contains no odd size ≥ 1"));
        }
        Ok(range)
    }
}

/// Best F-measure reachable from perfect kernels for each dilation size.
#[derive(Debug, Args)]
pub struct UpperBound {
    /// Directory of ground-truth `.txt` files.
    #[arg(long)]
    ann: PathBuf,
    #[arg(long, value_parser = parse_dilation, conflicts_with = "s_range")]
    s: Option<DilationSize>,
    /// Sweep every odd size in `A..B`, inclusive.
    #[arg(long)]
    s_range: Option<SizeRange>,
    /// Raster size; defaults to the smallest holding every polygon.
    #[arg(long)]
    size: Option<Size>,
    #[arg(long, default_value_t = 0.5)]
    iou: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Protocol {
    images: usize,
    canvas: (usize, usize),
    iou_thresh: f64,
    kernel_threshold: f64,
    min_kernel_area: usize,
}

#[derive(Serialize)]
struct Row {
    s: u32,
    #[serde(flatten)]
    counts: Counts,
    #[serde(flatten)]
    prf: Prf,
}

#[derive(Serialize)]
struct Report {
    protocol: Protocol,
    results: Vec<Row>,
}

impl UpperBound {
    pub fn run(self) -> CliResult<()> {
        let sizes = match (self.s, self.s_range) {
            (_, Some(r)) => r.sizes(),
            (Some(s), None) => vec![s],
            (None, None) => vec![DilationSize::DEFAULT],
        };
        let files = list_files(&self.ann, "txt")?;
        if files.is_empty() {
            return Err(Failure::Usage(format!(
                "no .txt annotations in {}",
                self.ann.display()
            )));
        }
        let gt_sets = files
            .par_iter()
            .map(|p| read_polygons(p, ParseMode::Strict))
            .collect::<CliResult<Vec<_>>>()?;
        let canvas = match self.size {
            Some(s) => s.tuple(),
            None => canvas_for(gt_sets.iter().flatten(), (1, 1)),
        };
        let cfg = UpperBoundConfig {
            canvas,
            iou_thresh: self.iou,
            ..UpperBoundConfig::default()
        };
        let results = sizes
            .into_iter()
            .map(|s| {
                let ub = upper_bound_experiment(&gt_sets, s, &cfg)?;
                Ok(Row {
                    s: s.into(),
                    counts: ub.per_image.iter().copied().sum(),
                    prf: ub.aggregate,
                })
            })
            .collect::<CliResult<Vec<_>>>()?;
        let report = Report {
            protocol: Protocol {
                images: gt_sets.len(),
                canvas,
                iou_thresh: cfg.iou_thresh,
                kernel_threshold: cfg.postprocess.threshold,
                min_kernel_area: cfg.postprocess.min_kernel_area,
            },
            results,
        };
        emit(self.out.as_deref(), &to_json(&report))
    }
}
