//! Seeded synthetic datasets: well-separated text-line rectangles (optionally
//! rotated), with an optional share of instances too thin to survive erosion.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Polygon};
use crate::grid::ScalarMap;
use crate::morphology::{generate_labels, DilationSize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub width: usize,
    pub height: usize,
    /// Inclusive range of instances per image.
    pub instances: (usize, usize),
    /// Inclusive range of the long side.
    pub long_side: (usize, usize),
    /// Inclusive range of the short side of regular instances.
    pub short_side: (usize, usize),
    /// Maximum absolute rotation in degrees; 0 keeps rectangles axis-aligned.
    pub max_rotation: f64,
    /// Probability that an instance is made thin.
    pub thin_rate: f64,
    /// Inclusive range of the short side of thin instances.
    pub thin_side: (usize, usize),
    /// Minimum free space between the cells that hold instances.
    pub gap: usize,
    /// Minimum distance from the image border.
    pub margin: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            width: 640,
            height: 640,
            instances: (4, 12),
            long_side: (40, 160),
            short_side: (18, 48),
            max_rotation: 0.0,
            thin_rate: 0.0,
            thin_side: (2, 6),
            gap: 12,
            margin: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthImage {
    pub polygons: Vec<Polygon>,
    /// Parallel to `polygons`: whether the instance was made thin.
    pub thin: Vec<bool>,
}

impl SynthImage {
    pub fn thin_count(&self) -> usize {
        self.thin.iter().filter(|&&t| t).count()
    }
}

fn check_range(name: &str, (lo, hi): (usize, usize)) -> Result<()> {
    if lo > hi || hi == 0 {
        return Err(Error::InvalidArgument(format!(
            "invalid {name} range {lo}..={hi}"
        )));
    }
    Ok(())
}

/// `count` images drawn from one seeded stream. Instances sit in distinct
/// cells of a regular grid, so they never overlap and stay at least
/// `cfg.gap` pixels apart.
pub fn generate(cfg: &SynthConfig, count: usize, seed: u64) -> Result<Vec<SynthImage>> {
    check_range("instances", cfg.instances)?;
    check_range("long side", cfg.long_side)?;
    check_range("short side", cfg.short_side)?;
    check_range("thin side", cfg.thin_side)?;
    if !(0.0..=1.0).contains(&cfg.thin_rate) {
        return Err(Error::InvalidArgument(format!(
            "thin rate {} outside [0, 1]",
            cfg.thin_rate
        )));
    }
    let (long_max, short_max) = (cfg.long_side.1, cfg.short_side.1.max(cfg.thin_side.1));
    let (cell_w, cell_h) = if cfg.max_rotation != 0.0 {
        let d = ((long_max * long_max + short_max * short_max) as f64)
            .sqrt()
            .ceil() as usize;
        (d + cfg.gap, d + cfg.gap)
    } else {
        (long_max + cfg.gap, short_max + cfg.gap)
    };
    let usable = |side: usize| side.saturating_sub(2 * cfg.margin);
    let (nx, ny) = (usable(cfg.width) / cell_w, usable(cfg.height) / cell_h);
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument(format!(
            "a {}x{} canvas cannot hold one {cell_w}x{cell_h} cell",
            cfg.width, cfg.height
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells: Vec<(usize, usize)> =
        (0..ny).flat_map(|j| (0..nx).map(move |i| (i, j))).collect();
    let mut images = Vec::with_capacity(count);
    for _ in 0..count {
        let n = rng
            .gen_range(cfg.instances.0..=cfg.instances.1)
            .min(cells.len());
        cells.shuffle(&mut rng);
        let mut chosen = cells[..n].to_vec();
        chosen.sort_unstable_by_key(|&(i, j)| (j, i));
        let mut polygons = Vec::with_capacity(n);
        let mut thin = Vec::with_capacity(n);
        for (i, j) in chosen {
            let is_thin = rng.gen_bool(cfg.thin_rate);
            let long = rng.gen_range(cfg.long_side.0..=cfg.long_side.1);
            let short_range = if is_thin {
                cfg.thin_side
            } else {
                cfg.short_side
            };
            let short = rng.gen_range(short_range.0..=short_range.1);
            let angle = if cfg.max_rotation != 0.0 {
                rng.gen_range(-cfg.max_rotation.abs()..=cfg.max_rotation.abs())
            } else {
                0.0
            };
            let x0 = cfg.margin + i * cell_w;
            let y0 = cfg.margin + j * cell_h;
            let poly = if angle == 0.0 {
                let ox = x0 + rng.gen_range(0..=cell_w - cfg.gap - long);
                let oy = y0 + rng.gen_range(0..=cell_h - cfg.gap - short);
                Polygon::rect(
                    ox as f64,
                    oy as f64,
                    (ox + long) as f64,
                    (oy + short) as f64,
                )?
            } else {
                let cx = x0 as f64 + (cell_w - cfg.gap) as f64 / 2.0;
                let cy = y0 as f64 + (cell_h - cfg.gap) as f64 / 2.0;
                let (s, c) = angle.to_radians().sin_cos();
                let (hl, hs) = (long as f64 / 2.0, short as f64 / 2.0);
                let corner = |a: f64, b: f64| {
                    Point::new((cx + a * c - b * s).round(), (cy + a * s + b * c).round())
                };
                Polygon::new([
                    corner(-hl, -hs),
                    corner(hl, -hs),
                    corner(hl, hs),
                    corner(-hl, hs),
                ])?
            };
            polygons.push(poly);
            thin.push(is_thin);
        }
        images.push(SynthImage { polygons, thin });
    }
    Ok(images)
}

/// Perfect kernel map of one synthetic image with exactly `components`
/// axis-aligned instances: 1.0 on kernel pixels, 0.0 elsewhere.
pub fn kernel_map(
    width: usize,
    height: usize,
    components: usize,
    s: DilationSize,
    seed: u64,
) -> Result<ScalarMap> {
    let cfg = SynthConfig {
        width,
        height,
        instances: (components, components),
        short_side: (2 * s.get(), 4 * s.get()),
        ..SynthConfig::default()
    };
    let image = generate(&cfg, 1, seed)?.pop().expect("one image");
    if image.polygons.len() != components {
        return Err(Error::InvalidArgument(format!(
            "only {} of {components} components fit on a {width}x{height} map",
            image.polygons.len()
        )));
    }
    let labels = generate_labels(&image.polygons, width, height, s)?;
    Ok(labels.kernels.to_mask().to_scalar())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccl::{label_components, Connectivity};
    use crate::postprocess::binarize;

    #[test]
    fn deterministic_for_a_seed() {
        let cfg = SynthConfig::default();
        assert_eq!(
            generate(&cfg, 3, 42).unwrap(),
            generate(&cfg, 3, 42).unwrap()
        );
        assert_ne!(
            generate(&cfg, 3, 42).unwrap(),
            generate(&cfg, 3, 43).unwrap()
        );
    }

    #[test]
    fn instances_are_disjoint_and_inside() {
        let cfg = SynthConfig {
            max_rotation: 30.0,
            ..SynthConfig::default()
        };
        for img in generate(&cfg, 5, 1).unwrap() {
            for p in &img.polygons {
                let (x0, y0, x1, y1) = p.bounds();
                assert!(x0 >= 0.0 && y0 >= 0.0 && x1 <= 640.0 && y1 <= 640.0);
            }
            for (a, pa) in img.polygons.iter().enumerate() {
                for pb in &img.polygons[a + 1..] {
                    let (ax0, ay0, ax1, ay1) = pa.bounds();
                    let (bx0, by0, bx1, by1) = pb.bounds();
                    assert!(ax1 <= bx0 || bx1 <= ax0 || ay1 <= by0 || by1 <= ay0);
                }
            }
        }
    }

    #[test]
    fn thin_rate_extremes() {
        let all = SynthConfig {
            thin_rate: 1.0,
            ..SynthConfig::default()
        };
        let img = generate(&all, 1, 0).unwrap().pop().unwrap();
        assert_eq!(img.thin_count(), img.polygons.len());
        assert!(generate(
            &SynthConfig {
                thin_rate: 1.5,
                ..all
            },
            1,
            0
        )
        .is_err());
    }

    #[test]
    fn kernel_map_has_requested_components() {
        let s = DilationSize::new(9).unwrap();
        let map = kernel_map(640, 640, 20, s, 5).unwrap();
        let labels = label_components(&binarize(&map, 0.5), Connectivity::Eight);
        assert_eq!(labels.count(), 20);
    }
}
