use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use textkernel::generate_labels;
use textkernel::io::annotation::ParseMode;
use textkernel::io::mapfile::MapData;

use super::{ensure_dir, list_files, read_polygons, stem, to_json, write_file, Size, SizeArg};
use crate::failure::{CliResult, Failure};

/// Rasterize annotations into text masks and kernel instance maps.
#[derive(Debug, Args)]
pub struct GenLabels {
    /// Directory of `.txt` annotation files.
    #[arg(long)]
    ann: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Output raster size.
    #[arg(long, default_value = "640x640")]
    size: Size,
    /// Dilation size, or `auto` to scale 9 by the short side over 640.
    #[arg(long, default_value = "9")]
    s: SizeArg,
    /// Resolution the annotations were drawn at; coordinates are rescaled
    /// to `--size` when it differs.
    #[arg(long)]
    ann_size: Option<Size>,
    /// Skip malformed lines instead of failing.
    #[arg(long)]
    lenient: bool,
}

#[derive(Serialize)]
struct ImageSummary {
    name: String,
    instances: usize,
    text_pixels: usize,
    kernel_pixels: usize,
    /// Indices of instances whose kernel eroded away.
    empty_kernels: Vec<usize>,
}

#[derive(Serialize)]
struct Summary {
    size: Size,
    s: u32,
    images: Vec<ImageSummary>,
}

impl GenLabels {
    pub fn run(self) -> CliResult<()> {
        let s = self.s.resolve(self.size)?;
        let mode = if self.lenient {
            ParseMode::Lenient
        } else {
            ParseMode::Strict
        };
        let files = list_files(&self.ann, "txt")?;
        ensure_dir(&self.out)?;
        let (sx, sy) = match self.ann_size {
            Some(a) => (
                self.size.width as f64 / a.width as f64,
                self.size.height as f64 / a.height as f64,
            ),
            None => (1.0, 1.0),
        };
        let images = files
            .par_iter()
            .map(|path| {
                let polys = read_polygons(path, mode)?
                    .iter()
                    .map(|p| p.scaled(sx, sy))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(Failure::in_file(path))?;
                let labels = generate_labels(&polys, self.size.width, self.size.height, s)
                    .map_err(Failure::in_file(path))?;
                let name = stem(path);
                let ker = MapData::Float {
                    width: self.size.width,
                    height: self.size.height,
                    values: labels
                        .kernels
                        .as_slice()
                        .iter()
                        .map(|&id| id as f32)
                        .collect(),
                };
                write_file(
                    &self.out.join(format!("{name}.tex.fkm")),
                    &MapData::Mask(labels.text.clone()).encode(),
                )?;
                write_file(&self.out.join(format!("{name}.ker.fkm")), &ker.encode())?;
                Ok(ImageSummary {
                    name,
                    instances: polys.len(),
                    text_pixels: labels.text.count_ones(),
                    kernel_pixels: labels.kernels.to_mask().count_ones(),
                    empty_kernels: labels.empty_kernels,
                })
            })
            .collect::<CliResult<Vec<_>>>()?;
        print!(
            "{}",
            to_json(&Summary {
                size: self.size,
                s: s.into(),
                images,
            })
        );
        Ok(())
    }
}
