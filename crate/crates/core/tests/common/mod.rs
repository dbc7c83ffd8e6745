//! Independent reference implementations used as test oracles. None of
//! these share code paths with the library routines they check.

#![allow(dead_code)]

use rand::Rng;
use textkernel::{BitMask, LabelMap, Polygon, ScalarMap};

/// Crossing-number point-in-polygon test (W. R. Franklin's PNPOLY).
pub fn point_in_polygon(poly: &Polygon, x: f64, y: f64) -> bool {
    let pts = poly.points();
    let mut inside = false;
    let mut j = pts.len() - 1;
    for i in 0..pts.len() {
        let (pi, pj) = (pts[i], pts[j]);
        if (pi.y > y) != (pj.y > y) && x < (pj.x - pi.x) * (y - pi.y) / (pj.y - pi.y) + pi.x {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Tests every pixel center.
pub fn brute_force_raster(poly: &Polygon, w: usize, h: usize) -> BitMask {
    BitMask::from_fn(w, h, |x, y| {
        point_in_polygon(poly, x as f64 + 0.5, y as f64 + 0.5)
    })
}

/// O(s²) window scan. `outside` is the value of pixels beyond the border,
/// or `None` to skip them.
pub fn naive_window<T: Copy>(
    get: impl Fn(usize, usize) -> T,
    w: usize,
    h: usize,
    s: usize,
    outside: Option<T>,
    combine: impl Fn(T, T) -> T,
) -> Vec<T> {
    let r = (s / 2) as isize;
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut acc: Option<T> = None;
            for dy in -r..=r {
                for dx in -r..=r {
                    let (qx, qy) = (x + dx, y + dy);
                    let v = if qx < 0 || qy < 0 || qx >= w as isize || qy >= h as isize {
                        match outside {
                            Some(v) => v,
                            None => continue,
                        }
                    } else {
                        get(qx as usize, qy as usize)
                    };
                    acc = Some(match acc {
                        None => v,
                        Some(a) => combine(a, v),
                    });
                }
            }
            out.push(acc.expect("window holds the center pixel"));
        }
    }
    out
}

/// Minkowski sum with an `s × s` square: every set pixel stamps its window.
pub fn minkowski_dilate(mask: &BitMask, s: usize) -> BitMask {
    let (w, h) = mask.dims();
    let r = (s / 2) as isize;
    let mut out = BitMask::new(w, h);
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) {
                continue;
            }
            for qy in (y as isize - r).max(0)..=(y as isize + r).min(h as isize - 1) {
                for qx in (x as isize - r).max(0)..=(x as isize + r).min(w as isize - 1) {
                    out.set(qx as usize, qy as usize, true);
                }
            }
        }
    }
    out
}

pub fn naive_erode(mask: &BitMask, s: usize) -> BitMask {
    let (w, h) = mask.dims();
    let v = naive_window(|x, y| mask.get(x, y), w, h, s, Some(false), |a, b| a && b);
    BitMask::from_bits(w, h, v.into_iter().map(u8::from).collect()).unwrap()
}

pub fn naive_soft_dilate(map: &ScalarMap, s: usize) -> Vec<f64> {
    let (w, h) = map.dims();
    naive_window(|x, y| map.get(x, y), w, h, s, None, f64::max)
}

/// Breadth-first flood fill, numbering components by their first pixel.
pub fn flood_fill_labels(mask: &BitMask, eight: bool) -> (Vec<u32>, u32) {
    let (w, h) = mask.dims();
    let mut labels = vec![0u32; w * h];
    let mut next = 0;
    let mut queue = std::collections::VecDeque::new();
    for start in 0..w * h {
        if !mask.get(start % w, start / w) || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for dy in -1..=1isize {
                for dx in -1..=1isize {
                    if (dx == 0 && dy == 0) || (!eight && dx != 0 && dy != 0) {
                        continue;
                    }
                    let (qx, qy) = (x + dx, y + dy);
                    if qx < 0 || qy < 0 || qx >= w as isize || qy >= h as isize {
                        continue;
                    }
                    let q = qy as usize * w + qx as usize;
                    if mask.get(qx as usize, qy as usize) && labels[q] == 0 {
                        labels[q] = next;
                        queue.push_back(q);
                    }
                }
            }
        }
    }
    (labels, next)
}

/// Component `id` of `labels` with its holes filled: every pixel that cannot
/// reach the border through 4-connected non-component pixels.
pub fn filled_component(labels: &LabelMap, id: u32) -> BitMask {
    let (w, h) = labels.dims();
    let outside = BitMask::from_fn(w, h, |x, y| labels.get(x, y) != id);
    let mut reached = vec![false; w * h];
    let mut stack: Vec<usize> = (0..w * h)
        .filter(|&i| {
            let (x, y) = (i % w, i / w);
            (x == 0 || y == 0 || x == w - 1 || y == h - 1) && outside.get(x, y)
        })
        .collect();
    for &i in &stack {
        reached[i] = true;
    }
    while let Some(i) = stack.pop() {
        let (x, y) = (i % w, i / w);
        let mut push = |qx: usize, qy: usize| {
            let q = qy * w + qx;
            if outside.get(qx, qy) && !reached[q] {
                reached[q] = true;
                stack.push(q);
            }
        };
        if x > 0 {
            push(x - 1, y);
        }
        if x + 1 < w {
            push(x + 1, y);
        }
        if y > 0 {
            push(x, y - 1);
        }
        if y + 1 < h {
            push(x, y + 1);
        }
    }
    BitMask::from_fn(w, h, |x, y| !reached[y * w + x])
}

pub fn random_mask(rng: &mut impl Rng, w: usize, h: usize, density: f64) -> BitMask {
    BitMask::from_fn(w, h, |_, _| rng.gen_bool(density))
}

/// Central finite-difference gradient of `f` at `x`.
pub fn central_difference(x: &[f64], step: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + step;
            let plus = f(&probe);
            probe[i] = x[i] - step;
            let minus = f(&probe);
            probe[i] = x[i];
            (plus - minus) / (2.0 * step)
        })
        .collect()
}

/// ‖a − b‖ / max(‖a‖, ‖b‖), or the absolute difference when both are tiny.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b));
    if scale < 1e-12 {
        norm(&diff)
    } else {
        norm(&diff) / scale
    }
}
