use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use textkernel::io::annotation::format_polygon;
use textkernel::synth::{generate, SynthConfig};

use super::{ensure_dir, to_json, write_file, Size};
use crate::failure::CliResult;

/// Generate a seeded dataset of separated text-line rectangles.
#[derive(Debug, Args)]
pub struct Synth {
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "640x640")]
    size: Size,
    #[arg(long, default_value_t = 4)]
    min_instances: usize,
    #[arg(long, default_value_t = 12)]
    max_instances: usize,
    /// Short side range of regular instances, `A..B`.
    #[arg(long, default_value = "18..48", value_parser = parse_range)]
    short_side: (usize, usize),
    #[arg(long, default_value = "40..160", value_parser = parse_range)]
    long_side: (usize, usize),
    /// Maximum absolute rotation in degrees.
    #[arg(long, default_value_t = 0.0)]
    max_rotation: f64,
    /// Share of instances made thinner than the kernel size.
    #[arg(long, default_value_t = 0.0)]
    thin_rate: f64,
    #[arg(long, default_value = "2..6", value_parser = parse_range)]
    thin_side: (usize, usize),
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got `{s}`"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<usize>()
            .map_err(|_| format!("`{v}` is not a count"))
    };
    let (lo, hi) = (parse(a)?, parse(b)?);
    if lo == 0 || lo > hi {
        return Err(format!("`{s}` is not a non-empty positive range"));
    }
    Ok((lo, hi))
}

#[derive(Serialize)]
struct ImageEntry {
    name: String,
    instances: usize,
    thin: usize,
}

#[derive(Serialize)]
struct Manifest {
    seed: u64,
    config: SynthConfig,
    images: Vec<ImageEntry>,
}

impl Synth {
    pub fn run(self) -> CliResult<()> {
        let cfg = SynthConfig {
            width: self.size.width,
            height: self.size.height,
            instances: (self.min_instances, self.max_instances),
            long_side: self.long_side,
            short_side: self.short_side,
            max_rotation: self.max_rotation,
            thin_rate: self.thin_rate,
            thin_side: self.thin_side,
            ..SynthConfig::default()
        };
        let images = generate(&cfg, self.count, self.seed)?;
        ensure_dir(&self.out)?;
        let mut entries = Vec::with_capacity(images.len());
        for (i, img) in images.iter().enumerate() {
            let name = format!("img_{i:04}");
            let mut text = String::new();
            for p in &img.polygons {
                writeln!(text, "{}", format_polygon(p)).expect("writing to a string");
            }
            write_file(&self.out.join(format!("{name}.txt")), text.as_bytes())?;
            entries.push(ImageEntry {
                name,
                instances: img.polygons.len(),
                thin: img.thin_count(),
            });
        }
        let manifest = Manifest {
            seed: self.seed,
            config: cfg,
            images: entries,
        };
        write_file(
            &self.out.join("manifest.json"),
            to_json(&manifest).as_bytes(),
        )
    }
}
