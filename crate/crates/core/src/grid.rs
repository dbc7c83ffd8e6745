//! Dense row-major raster containers shared by every stage of the pipeline.

use crate::error::{Error, Result};

fn check_len(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidArgument(format!(
            "raster dimensions must be positive, got {width}x{height}"
        )));
    }
    if width.checked_mul(height) != Some(len) {
        return Err(Error::InvalidArgument(format!(
            "buffer of length {len} does not match {width}x{height}"
        )));
    }
    Ok(())
}

/// Binary image. Stored as one byte per pixel holding 0 or 1.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMask {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

impl BitMask {
    /// All-zero mask. Zero dimensions are rejected by [`BitMask::from_bits`]
    /// but allowed here so that intermediate crops can be empty.
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![0; width * height],
        }
    }

    pub fn filled(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![1; width * height],
        }
    }

    /// Builds a mask from row-major values; any non-zero byte counts as set.
    pub fn from_bits(width: usize, height: usize, bits: Vec<u8>) -> Result<Self> {
        check_len(width, height, bits.len())?;
        let bits = bits.into_iter().map(|b| u8::from(b != 0)).collect();
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(u8::from(f(x, y)));
            }
        }
        Self {
            width,
            height,
            bits,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x] != 0
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = u8::from(value);
    }

    /// Row-major 0/1 bytes.
    #[inline]
    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }

    #[inline]
    pub(crate) fn as_mut_slice(&mut self) -> &mut [u8] {
        &mut self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b != 0).count()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }

    pub fn not(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|&b| 1 - b).collect(),
        }
    }

    pub fn or_assign(&mut self, other: &BitMask) -> Result<()> {
        ensure_same_dims(self.dims(), other.dims())?;
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
        Ok(())
    }

    /// `true` when every set pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BitMask) -> bool {
        self.dims() == other.dims() && self.bits.iter().zip(&other.bits).all(|(&a, &b)| a <= b)
    }

    /// Indicator map: 1.0 on set pixels, 0.0 elsewhere.
    pub fn to_scalar(&self) -> ScalarMap {
        ScalarMap {
            width: self.width,
            height: self.height,
            values: self.bits.iter().map(|&b| f64::from(b)).collect(),
        }
    }
}

impl std::fmt::Debug for BitMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "BitMask {}x{}", self.width, self.height)?;
        for row in self.bits.chunks(self.width.max(1)) {
            let line: String = row
                .iter()
                .map(|&b| if b != 0 { '#' } else { '.' })
                .collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// Integer image assigning each pixel a component id; 0 is background.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    count: u32,
}

impl LabelMap {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            labels: vec![0; width * height],
            count: 0,
        }
    }

    /// Wraps raw labels. `count` is recomputed as the largest id present.
    pub fn from_labels(width: usize, height: usize, labels: Vec<u32>) -> Result<Self> {
        check_len(width, height, labels.len())?;
        let count = labels.iter().copied().max().unwrap_or(0);
        Ok(Self {
            width,
            height,
            labels,
            count,
        })
    }

    pub(crate) fn from_parts(width: usize, height: usize, labels: Vec<u32>, count: u32) -> Self {
        debug_assert_eq!(labels.len(), width * height);
        Self {
            width,
            height,
            labels,
            count,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Number of components; ids run over `1..=count`.
    #[inline]
    pub fn count(&self) -> u32 {
        self.count
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    #[inline]
    pub fn as_slice(&self) -> &[u32] {
        &self.labels
    }

    pub(crate) fn set(&mut self, x: usize, y: usize, id: u32) {
        self.labels[y * self.width + x] = id;
        self.count = self.count.max(id);
    }

    /// Set wherever the label is non-zero.
    pub fn to_mask(&self) -> BitMask {
        BitMask {
            width: self.width,
            height: self.height,
            bits: self.labels.iter().map(|&l| u8::from(l != 0)).collect(),
        }
    }

    /// Set exactly where the label equals `id`.
    pub fn component_mask(&self, id: u32) -> BitMask {
        BitMask {
            width: self.width,
            height: self.height,
            bits: self.labels.iter().map(|&l| u8::from(l == id)).collect(),
        }
    }

    /// Pixel count per id, indexed by id (entry 0 is the background area).
    pub fn areas(&self) -> Vec<usize> {
        let mut areas = vec![0usize; self.count as usize + 1];
        for &l in &self.labels {
            areas[l as usize] += 1;
        }
        areas
    }
}

/// Real-valued image (probabilities, logits, gradients).
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ScalarMap {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self::constant(width, height, 0.0)
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            values: vec![value; width * height],
        }
    }

    /// Rejects empty dimensions and non-finite values.
    pub fn from_values(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        check_len(width, height, values.len())?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite value {} at index {i}",
                values[i]
            )));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            values,
        }
    }

    pub(crate) fn from_vec_unchecked(width: usize, height: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), width * height);
        Self {
            width,
            height,
            values,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.values[y * self.width + x] = v;
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

pub(crate) fn ensure_same_dims(expected: (usize, usize), found: (usize, usize)) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
