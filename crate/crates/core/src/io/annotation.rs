//! Polygon annotations, one text instance per line:
//!
//! ```text
//! x1,y1,x2,y2,...,xn,yn[,extra]
//! ```
//!
//! Coordinates are integers and there must be an even number of them, at
//! least six. Everything after the last leading integer field is ignored,
//! which covers both dataset transcriptions (`###`, words) and the score
//! column written for detections.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Point, Polygon};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ParseMode {
    /// Any malformed line fails the whole file.
    #[default]
    Strict,
    /// Malformed lines are skipped and reported as warnings.
    Lenient,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Annotations {
    pub polygons: Vec<Polygon>,
    /// `(line number, message)` for each skipped line in lenient mode.
    pub warnings: Vec<(usize, String)>,
}

fn parse_line(line: &str) -> std::result::Result<Polygon, String> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    let coords: Vec<i64> = fields.iter().map_while(|f| f.parse::<i64>().ok()).collect();
    if !coords.len().is_multiple_of(2) {
        return Err(format!("odd number of coordinates ({})", coords.len()));
    }
    if coords.len() < 6 {
        return Err(format!(
            "need at least 3 points, found {}",
            coords.len() / 2
        ));
    }
    let points = coords
        .chunks_exact(2)
        .map(|c| Point::new(c[0] as f64, c[1] as f64));
    Polygon::new(points).map_err(|e| e.to_string())
}

pub fn parse_annotations_str(text: &str, mode: ParseMode) -> Result<Annotations> {
    let mut out = Annotations::default();
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        match parse_line(line) {
            Ok(p) => out.polygons.push(p),
            Err(message) => match mode {
                ParseMode::Strict => {
                    return Err(Error::Parse {
                        line: i + 1,
                        message,
                    })
                }
                ParseMode::Lenient => out.warnings.push((i + 1, message)),
            },
        }
    }
    Ok(out)
}

pub fn parse_annotations(path: &Path, mode: ParseMode) -> Result<Annotations> {
    let text = std::fs::read_to_string(path)?;
    parse_annotations_str(&text, mode)
}

/// One annotation line; coordinates are rounded to the nearest integer.
pub fn format_polygon(poly: &Polygon) -> String {
    poly.points()
        .iter()
        .flat_map(|p| [p.x, p.y])
        .map(|v| format!("{}", v.round() as i64))
        .collect::<Vec<_>>()
        .join(",")
}

/// Annotation line followed by the score with six decimals.
pub fn format_detection(poly: &Polygon, score: f64) -> String {
    format!("{},{score:.6}", format_polygon(poly))
}
