//! Connected-components labeling of binary masks.
//!
//! Both labelers produce the same canonical output: components are numbered
//! `1..=count` in order of their first pixel in row-major order.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::grid::{BitMask, LabelMap};

/// Pixel adjacency used to decide whether two set pixels are connected.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl TryFrom<u8> for Connectivity {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self, Error> {
        match v {
            4 => Ok(Self::Four),
            8 => Ok(Self::Eight),
            _ => Err(Error::InvalidArgument(format!(
                "connectivity must be 4 or 8, got {v}"
            ))),
        }
    }
}

impl From<Connectivity> for u8 {
    fn from(c: Connectivity) -> u8 {
        match c {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

impl FromStr for Connectivity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        s.trim()
            .parse::<u8>()
            .map_err(|_| Error::InvalidArgument(format!("connectivity must be 4 or 8, got `{s}`")))
            .and_then(Self::try_from)
    }
}

impl fmt::Display for Connectivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        u8::from(*self).fmt(f)
    }
}

/// Disjoint sets over provisional labels, union by rank with path halving.
#[derive(Default)]
struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn make_set(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        self.rank.push(0);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (ka, kb) = (self.rank[ra as usize], self.rank[rb as usize]);
        if ka < kb {
            self.parent[ra as usize] = rb;
        } else {
            self.parent[rb as usize] = ra;
            if ka == kb {
                self.rank[ra as usize] += 1;
            }
        }
    }
}

const NO_LABEL: u32 = u32::MAX;

/// Two-pass labeling: provisional labels with equivalences recorded in a
/// union-find, then a canonical renumbering pass.
pub fn label_components(mask: &BitMask, connectivity: Connectivity) -> LabelMap {
    let (w, h) = mask.dims();
    let bits = mask.as_slice();
    let mut provisional = vec![NO_LABEL; w * h];
    let mut sets = UnionFind::default();

    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if bits[i] == 0 {
                continue;
            }
            let mut label = NO_LABEL;
            let mut visit = |q: usize, sets: &mut UnionFind| {
                let l = provisional[q];
                if l == NO_LABEL {
                    return;
                }
                if label == NO_LABEL {
                    label = l;
                } else if l != label {
                    sets.union(label, l);
                }
            };
            if x > 0 {
                visit(i - 1, &mut sets);
            }
            if y > 0 {
                visit(i - w, &mut sets);
                if connectivity == Connectivity::Eight {
                    if x > 0 {
                        visit(i - w - 1, &mut sets);
                    }
                    if x + 1 < w {
                        visit(i - w + 1, &mut sets);
                    }
                }
            }
            provisional[i] = if label == NO_LABEL {
                sets.make_set()
            } else {
                label
            };
        }
    }

    let mut canonical = vec![0u32; sets.parent.len()];
    let mut count = 0u32;
    let labels = provisional
        .iter()
        .map(|&p| {
            if p == NO_LABEL {
                return 0;
            }
            let root = sets.find(p) as usize;
            if canonical[root] == 0 {
                count += 1;
                canonical[root] = count;
            }
            canonical[root]
        })
        .collect();
    LabelMap::from_parts(w, h, labels, count)
}

/// Find over a forest where every parent index is ≤ its child's; read-only so
/// bands can resolve roots concurrently.
#[inline]
fn find_root(parent: &[u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        x = parent[x as usize];
    }
    x
}

/// Link the trees of `a` and `b` under the smaller root index. Keeps the
/// invariant that each tree's root is its lowest pixel index.
#[inline]
fn link_min(parent: &mut [u32], base: usize, a: usize, b: usize) {
    let mut ra = a;
    while parent[ra - base] as usize != ra {
        let up = parent[ra - base] as usize;
        parent[ra - base] = parent[up - base];
        ra = up;
    }
    let mut rb = b;
    while parent[rb - base] as usize != rb {
        let up = parent[rb - base] as usize;
        parent[rb - base] = parent[up - base];
        rb = up;
    }
    match ra.cmp(&rb) {
        std::cmp::Ordering::Less => parent[rb - base] = ra as u32,
        std::cmp::Ordering::Greater => parent[ra - base] = rb as u32,
        std::cmp::Ordering::Equal => {}
    }
}

fn split_bands<'a, T>(
    mut data: &'a mut [T],
    bounds: &[(usize, usize)],
    width: usize,
) -> Vec<&'a mut [T]> {
    let mut out = Vec::with_capacity(bounds.len());
    for &(r0, r1) in bounds {
        let (band, rest) = data.split_at_mut((r1 - r0) * width);
        out.push(band);
        data = rest;
    }
    out
}

/// Band-parallel labeling with the same output as [`label_components`].
///
/// The image is cut into `tiles` horizontal bands (at most one per row) that
/// are labeled concurrently on the current rayon pool. Each pixel's
/// provisional parent is a pixel index, and trees are always linked under the
/// smaller index, so a component's root is its first pixel in row-major
/// order. Seams between bands are then merged sequentially and the final
/// numbering follows from the order of the roots. A `tiles` of 0 is treated
/// as 1.
pub fn label_components_parallel(
    mask: &BitMask,
    connectivity: Connectivity,
    tiles: usize,
) -> LabelMap {
    let (w, h) = mask.dims();
    let n = w * h;
    assert!(
        n < u32::MAX as usize,
        "mask too large for 32-bit pixel indices"
    );
    let bits = mask.as_slice();
    let bands = tiles.clamp(1, h.max(1));
    let bounds: Vec<(usize, usize)> = (0..bands)
        .map(|b| (b * h / bands, (b + 1) * h / bands))
        .collect();
    let eight = connectivity == Connectivity::Eight;

    // Band-local union-find; parents never leave the band here.
    let mut parent: Vec<u32> = (0..n as u32).collect();
    split_bands(&mut parent, &bounds, w)
        .into_par_iter()
        .zip(bounds.par_iter())
        .for_each(|(band, &(r0, r1))| {
            let base = r0 * w;
            for y in r0..r1 {
                for x in 0..w {
                    let i = y * w + x;
                    if bits[i] == 0 {
                        continue;
                    }
                    if x > 0 && bits[i - 1] != 0 {
                        link_min(band, base, i, i - 1);
                    }
                    if y > r0 {
                        if bits[i - w] != 0 {
                            link_min(band, base, i, i - w);
                        }
                        if eight {
                            if x > 0 && bits[i - w - 1] != 0 {
                                link_min(band, base, i, i - w - 1);
                            }
                            if x + 1 < w && bits[i - w + 1] != 0 {
                                link_min(band, base, i, i - w + 1);
                            }
                        }
                    }
                }
            }
            // Parents precede children, so one forward sweep flattens the band.
            for k in 0..band.len() {
                let p = band[k] as usize - base;
                band[k] = band[p];
            }
        });

    // Seams: the first row of each band against the last row of the one above.
    for &(r0, _) in bounds.iter().skip(1) {
        if r0 == 0 {
            continue;
        }
        for x in 0..w {
            let i = r0 * w + x;
            if bits[i] == 0 {
                continue;
            }
            let mut join = |q: usize| {
                if bits[q] != 0 {
                    link_min(&mut parent, 0, i, q);
                }
            };
            join(i - w);
            if eight {
                if x > 0 {
                    join(i - w - 1);
                }
                if x + 1 < w {
                    join(i - w + 1);
                }
            }
        }
    }

    // Resolve roots and count them per band.
    let mut roots = vec![0u32; n];
    let root_counts: Vec<u32> = split_bands(&mut roots, &bounds, w)
        .into_par_iter()
        .zip(bounds.par_iter())
        .map(|(band, &(r0, _))| {
            let base = r0 * w;
            let mut count = 0;
            for (k, r) in band.iter_mut().enumerate() {
                let i = base + k;
                if bits[i] != 0 {
                    *r = find_root(&parent, i as u32);
                    count += u32::from(*r as usize == i);
                }
            }
            count
        })
        .collect();
    let offsets: Vec<u32> = root_counts
        .iter()
        .scan(0u32, |acc, &c| {
            let start = *acc;
            *acc += c;
            Some(start)
        })
        .collect();
    let total: u32 = root_counts.iter().sum();

    // Number the roots in index order, then let every pixel adopt its root's id.
    let mut ids = vec![0u32; n];
    split_bands(&mut ids, &bounds, w)
        .into_par_iter()
        .zip(bounds.par_iter().zip(offsets.par_iter()))
        .for_each(|(band, (&(r0, _), &offset))| {
            let base = r0 * w;
            let mut next = offset;
            for (k, id) in band.iter_mut().enumerate() {
                let i = base + k;
                if bits[i] != 0 && roots[i] as usize == i {
                    next += 1;
                    *id = next;
                }
            }
        });
    let mut labels = vec![0u32; n];
    split_bands(&mut labels, &bounds, w)
        .into_par_iter()
        .zip(bounds.par_iter())
        .for_each(|(band, &(r0, _))| {
            let base = r0 * w;
            for (k, l) in band.iter_mut().enumerate() {
                let i = base + k;
                if bits[i] != 0 {
                    *l = ids[roots[i] as usize];
                }
            }
        });
    LabelMap::from_parts(w, h, labels, total)
}
