pub mod bench;
pub mod evaluate;
pub mod gen_labels;
pub mod loss_check;
pub mod nas_demo;
pub mod reconstruct;
pub mod synth;
pub mod upper_bound;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use textkernel::io::annotation::{parse_annotations, ParseMode};
use textkernel::io::write_atomic;
use textkernel::morphology::scale_dilation_size;
use textkernel::{DilationSize, Polygon};

use crate::failure::{CliResult, Failure};

/// Raster size written as `WxH`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Size {
    pub width: usize,
    pub height: usize,
}

impl Size {
    pub fn tuple(self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn short_side(self) -> usize {
        self.width.min(self.height)
    }
}

impl FromStr for Size {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (w, h) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected WxH, got `{s}`"))?;
        let parse = |v: &str| match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(format!("invalid dimension `{v}` in `{s}`")),
        };
        Ok(Size {
            width: parse(w)?,
            height: parse(h)?,
        })
    }
}

impl fmt::Display for Size {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

/// `--s`: an explicit odd size, or `auto` to scale the default (9 at a
/// 640-pixel short side) to the target raster.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SizeArg {
    Fixed(DilationSize),
    Auto,
}

impl SizeArg {
    pub fn resolve(self, target: Size) -> CliResult<DilationSize> {
        match self {
            SizeArg::Fixed(s) => Ok(s),
            SizeArg::Auto => {
                let raw = scale_dilation_size(
                    target.short_side() as i64,
                    640,
                    DilationSize::DEFAULT.get() as i64,
                )?;
                Ok(DilationSize::coerce(raw))
            }
        }
    }
}

impl FromStr for SizeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(SizeArg::Auto);
        }
        parse_dilation(s).map(SizeArg::Fixed)
    }
}

pub fn parse_dilation(s: &str) -> Result<DilationSize, String> {
    let v: i64 = s.parse().map_err(|_| format!("`{s}` is not an integer"))?;
    DilationSize::new(v).map_err(|e| e.to_string())
}

/// Files in `dir` with extension `ext`, sorted by name.
pub fn list_files(dir: &Path, ext: &str) -> CliResult<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(Failure::io(dir))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(Failure::io(dir))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == ext) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn read_polygons(path: &Path, mode: ParseMode) -> CliResult<Vec<Polygon>> {
    let ann = parse_annotations(path, mode).map_err(Failure::in_file(path))?;
    for (line, message) in &ann.warnings {
        eprintln!("{}: line {line}: skipped: {message}", path.display());
    }
    Ok(ann.polygons)
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(Failure::io(dir))
}

/// Atomic write that creates missing parent directories.
pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    write_atomic(path, bytes).map_err(Failure::io(path))
}

/// Writes to `out` when given, otherwise to stdout.
pub fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => write_file(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

/// Median of a non-empty sample.
pub fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}
