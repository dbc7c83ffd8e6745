use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use textkernel::io::annotation::format_detection;
use textkernel::io::mapfile::read_map;
use textkernel::{Connectivity, DilationSize, PostprocessConfig, TextDilation};

use super::{emit, parse_dilation, Size};
use crate::failure::{CliResult, Failure};

/// Rebuild text lines from a kernel map.
#[derive(Debug, Args)]
pub struct Reconstruct {
    /// Kernel map file (mask or float).
    #[arg(long)]
    map: PathBuf,
    #[arg(long, default_value = "9", value_parser = parse_dilation)]
    s: DilationSize,
    /// Kernel pixels are those strictly above this value.
    #[arg(long, default_value_t = 0.0)]
    threshold: f64,
    /// Region extractor: `polygon` or `rect`.
    #[arg(long, default_value = "polygon")]
    mode: String,
    /// Drop kernels with fewer pixels.
    #[arg(long, default_value_t = 10)]
    min_area: usize,
    #[arg(long, default_value = "8")]
    connectivity: Connectivity,
    /// Component labeler: `union-find` or `tiled`.
    #[arg(long, default_value = "union-find")]
    labeler: String,
    /// Rescale output coordinates from the map size to this size.
    #[arg(long)]
    scale_to: Option<Size>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Reconstruct {
    pub fn run(self) -> CliResult<()> {
        let map = read_map(&self.map)
            .and_then(|m| m.to_scalar())
            .map_err(Failure::in_file(&self.map))?;
        let pipeline = TextDilation::new(PostprocessConfig {
            threshold: self.threshold,
            s: self.s,
            min_kernel_area: self.min_area,
            output_mode: self.mode,
            connectivity: self.connectivity,
            labeler: self.labeler,
        })?;
        let (sx, sy) = match self.scale_to {
            Some(t) => (
                t.width as f64 / map.width() as f64,
                t.height as f64 / map.height() as f64,
            ),
            None => (1.0, 1.0),
        };
        let mut text = String::new();
        for det in pipeline.run(&map) {
            let poly = det.polygon.scaled(sx, sy)?;
            writeln!(text, "{}", format_detection(&poly, det.score)).expect("writing to a string");
        }
        emit(self.out.as_deref(), &text)
    }
}
