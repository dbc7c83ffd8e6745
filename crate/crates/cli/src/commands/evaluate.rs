use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use textkernel::eval::{canvas_for, evaluate_image};
use textkernel::io::annotation::ParseMode;
use textkernel::io::report::{ImageMetrics, MetricsReport, Timing};

use super::{emit, list_files, read_polygons, stem, to_json, Size};
use crate::failure::{CliResult, Failure};

/// Match detections against ground truth and report P/R/F.
#[derive(Debug, Args)]
pub struct Evaluate {
    /// Directory of detection files, named like the ground-truth files.
    #[arg(long)]
    dets: PathBuf,
    /// Directory of ground-truth `.txt` files.
    #[arg(long)]
    gts: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    iou: f64,
    /// IoU raster; defaults to the smallest one holding every polygon of an image.
    #[arg(long)]
    canvas: Option<Size>,
    /// Leave wall-clock timings out of the report.
    #[arg(long)]
    no_timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Protocol {
    matching: &'static str,
    iou_thresh: f64,
    canvas: Option<Size>,
}

impl Evaluate {
    pub fn run(self) -> CliResult<()> {
        if !(self.iou > 0.0 && self.iou <= 1.0) {
            return Err(Failure::Usage(format!(
                "--iou must be in (0, 1], got {}",
                self.iou
            )));
        }
        if !self.dets.is_dir() {
            return Err(Failure::Io {
                path: self.dets.clone(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
            });
        }
        let start = Instant::now();
        let gt_files = list_files(&self.gts, "txt")?;
        let parsed = gt_files
            .par_iter()
            .map(|gt_path| {
                let gts = read_polygons(gt_path, ParseMode::Strict)?;
                let det_path = self
                    .dets
                    .join(gt_path.file_name().expect("listed files have names"));
                let dets = if det_path.is_file() {
                    read_polygons(&det_path, ParseMode::Strict)?
                } else {
                    Vec::new()
                };
                Ok((stem(gt_path), dets, gts))
            })
            .collect::<CliResult<Vec<_>>>()?;
        let parse = start.elapsed().as_secs_f64() * 1e3;

        let images = parsed
            .par_iter()
            .map(|(name, dets, gts)| {
                let canvas = match self.canvas {
                    Some(c) => c.tuple(),
                    None => canvas_for(dets.iter().chain(gts), (1, 1)),
                };
                let counts = evaluate_image(dets, gts, self.iou, canvas)?;
                Ok(ImageMetrics::new(name.clone(), counts))
            })
            .collect::<CliResult<Vec<_>>>()?;
        let total = start.elapsed().as_secs_f64() * 1e3;

        let timing = (!self.no_timing).then_some(Timing {
            parse,
            total,
            ..Timing::default()
        });
        let protocol = Protocol {
            matching: "greedy-descending-iou",
            iou_thresh: self.iou,
            canvas: self.canvas,
        };
        emit(
            self.out.as_deref(),
            &to_json(&MetricsReport::new(protocol, images, timing)),
        )
    }
}
