use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde::Serialize;
use textkernel::io::mapfile::read_map;
use textkernel::io::report::Timing;
use textkernel::synth::kernel_map;
use textkernel::{DilationSize, PostprocessConfig, TextDilation};

use super::{emit, median, parse_dilation, to_json};
use crate::failure::{CliResult, Failure};

/// Time the reconstruction pipeline stage by stage.
#[derive(Debug, Args)]
pub struct Bench {
    /// Kernel map file; a synthetic 640x640 map is generated when omitted.
    #[arg(long)]
    map: Option<PathBuf>,
    /// Components of the synthetic map.
    #[arg(long, default_value_t = 20)]
    components: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    repeat: usize,
    #[arg(long, default_value = "9", value_parser = parse_dilation)]
    s: DilationSize,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Component labeler: `union-find` or `tiled`.
    #[arg(long, default_value = "union-find")]
    labeler: String,
    /// Leave wall-clock timings out of the report.
    #[arg(long)]
    no_timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Report {
    source: String,
    size: (usize, usize),
    repeat: usize,
    threads: usize,
    labeler: String,
    detections: usize,
    /// Median over repeats; `parse` is the one-off map load.
    #[serde(rename = "timing_ms", skip_serializing_if = "Option::is_none")]
    timing: Option<Timing>,
}

impl Bench {
    pub fn run(self) -> CliResult<()> {
        if self.repeat == 0 {
            return Err(Failure::Usage("--repeat must be at least 1".into()));
        }
        let start = Instant::now();
        let (map, source) = match &self.map {
            Some(path) => (
                read_map(path)
                    .and_then(|m| m.to_scalar())
                    .map_err(Failure::in_file(path))?,
                path.display().to_string(),
            ),
            None => (
                kernel_map(640, 640, self.components, self.s, self.seed)?,
                format!("synthetic:640x640:{}:{}", self.components, self.seed),
            ),
        };
        let parse = start.elapsed().as_secs_f64() * 1e3;
        let pipeline = TextDilation::new(PostprocessConfig {
            threshold: self.threshold,
            s: self.s,
            labeler: self.labeler.clone(),
            ..PostprocessConfig::default()
        })?;

        let mut samples = Vec::with_capacity(self.repeat);
        let mut detections = 0;
        for _ in 0..self.repeat {
            let (dets, t) = pipeline.run_timed(&map);
            detections = dets.len();
            samples.push(t);
        }
        let med = |f: fn(&textkernel::postprocess::StageTimings) -> f64| {
            median(samples.iter().map(f).collect())
        };
        let timing = (!self.no_timing).then(|| Timing {
            parse,
            ccl: med(|t| t.ccl),
            dilate: med(|t| t.dilate),
            contour: med(|t| t.contour),
            total: med(|t| t.total),
        });
        let report = Report {
            source,
            size: map.dims(),
            repeat: self.repeat,
            threads: rayon::current_num_threads(),
            labeler: self.labeler,
            detections,
            timing,
        };
        emit(self.out.as_deref(), &to_json(&report))
    }
}
