//! Binary raster container.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "FKM1"
//! 4       4     width, u32 little-endian
//! 8       4     height, u32 little-endian
//! 12      1     dtype: 0 = bit-packed mask, 1 = f32 little-endian
//! 13      ...   payload
//! ```
//!
//! Masks are packed most-significant bit first, each row padded to a whole
//! byte; padding bits are written as zero and ignored on read. Float maps
//! are stored row-major.

use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{BitMask, ScalarMap};

pub const MAGIC: &[u8; 4] = b"FKM1";
const HEADER_LEN: usize = 13;

#[derive(Clone, Debug, PartialEq)]
pub enum MapData {
    Mask(BitMask),
    /// Row-major values; kept as f32 so files round-trip bit for bit.
    Float {
        width: usize,
        height: usize,
        values: Vec<f32>,
    },
}

impl MapData {
    pub fn dims(&self) -> (usize, usize) {
        match self {
            MapData::Mask(m) => m.dims(),
            MapData::Float { width, height, .. } => (*width, *height),
        }
    }

    /// Narrows a scalar map to f32 storage.
    pub fn from_scalar(map: &ScalarMap) -> Self {
        MapData::Float {
            width: map.width(),
            height: map.height(),
            values: map.as_slice().iter().map(|&v| v as f32).collect(),
        }
    }

    /// Masks become 0/1 maps; floats must be finite.
    pub fn to_scalar(&self) -> Result<ScalarMap> {
        match self {
            MapData::Mask(m) => Ok(m.to_scalar()),
            MapData::Float {
                width,
                height,
                values,
            } => ScalarMap::from_values(
                *width,
                *height,
                values.iter().map(|&v| f64::from(v)).collect(),
            ),
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let (w, h) = self.dims();
        let mut out = Vec::with_capacity(HEADER_LEN + payload_len(self.dtype(), w, h));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(w as u32).to_le_bytes());
        out.extend_from_slice(&(h as u32).to_le_bytes());
        out.push(self.dtype());
        match self {
            MapData::Mask(m) => {
                for row in m.as_slice().chunks_exact(w) {
                    for byte in row.chunks(8) {
                        let packed = byte
                            .iter()
                            .enumerate()
                            .fold(0u8, |acc, (k, &b)| acc | (b << (7 - k)));
                        out.push(packed);
                    }
                }
            }
            MapData::Float { values, .. } => {
                for v in values {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::MapFormat(format!(
                "truncated header ({} bytes)",
                bytes.len()
            )));
        }
        if &bytes[..4] != MAGIC {
            return Err(Error::MapFormat("bad magic, expected FKM1".into()));
        }
        let word =
            |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes")) as usize;
        let (w, h) = (word(4), word(8));
        let dtype = bytes[12];
        if w == 0 || h == 0 {
            return Err(Error::MapFormat(format!("empty raster {w}x{h}")));
        }
        if dtype > 1 {
            return Err(Error::MapFormat(format!("unknown dtype {dtype}")));
        }
        let payload = &bytes[HEADER_LEN..];
        let expected = payload_len(dtype, w, h);
        if payload.len() != expected {
            return Err(Error::MapFormat(format!(
                "payload is {} bytes, header implies {expected}",
                payload.len()
            )));
        }
        Ok(match dtype {
            0 => {
                let stride = w.div_ceil(8);
                let mut bits = Vec::with_capacity(w * h);
                for row in payload.chunks_exact(stride) {
                    bits.extend((0..w).map(|x| (row[x / 8] >> (7 - x % 8)) & 1));
                }
                MapData::Mask(BitMask::from_bits(w, h, bits)?)
            }
            _ => MapData::Float {
                width: w,
                height: h,
                values: payload
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
                    .collect(),
            },
        })
    }

    fn dtype(&self) -> u8 {
        match self {
            MapData::Mask(_) => 0,
            MapData::Float { .. } => 1,
        }
    }
}

fn payload_len(dtype: u8, w: usize, h: usize) -> usize {
    if dtype == 0 {
        w.div_ceil(8) * h
    } else {
        4 * w * h
    }
}

pub fn read_map(path: &Path) -> Result<MapData> {
    MapData::decode(&std::fs::read(path)?)
}

pub fn write_map(path: &Path, map: &MapData) -> Result<()> {
    super::write_atomic(path, &map.encode())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let m = MapData::Mask(BitMask::from_bits(3, 2, vec![1, 0, 1, 0, 1, 1]).unwrap());
        let bytes = m.encode();
        assert_eq!(&bytes[..4], b"FKM1");
        assert_eq!(&bytes[4..13], &[3, 0, 0, 0, 2, 0, 0, 0, 0]);
        assert_eq!(&bytes[13..], &[0b1010_0000, 0b0110_0000]);
        assert_eq!(MapData::decode(&bytes).unwrap(), m);
    }

    #[test]
    fn float_layout() {
        let m = MapData::Float {
            width: 1,
            height: 1,
            values: vec![1.5],
        };
        let bytes = m.encode();
        assert_eq!(bytes[12], 1);
        assert_eq!(&bytes[13..], &1.5f32.to_le_bytes());
    }

    #[test]
    fn rejects_malformed() {
        let good = MapData::Mask(BitMask::filled(9, 2)).encode();
        assert!(MapData::decode(&good[..good.len() - 1]).is_err());
        let mut extra = good.clone();
        extra.push(0);
        assert!(MapData::decode(&extra).is_err());
        let mut magic = good.clone();
        magic[0] = b'X';
        assert!(MapData::decode(&magic).is_err());
        let mut dtype = good;
        dtype[12] = 7;
        assert!(MapData::decode(&dtype).is_err());
        assert!(MapData::decode(b"FKM1").is_err());
    }

    #[test]
    fn non_finite_floats_survive_file_but_not_scalar() {
        let m = MapData::Float {
            width: 2,
            height: 1,
            values: vec![f32::NAN, 0.5],
        };
        let back = MapData::decode(&m.encode()).unwrap();
        assert_eq!(back.encode(), m.encode());
        assert!(back.to_scalar().is_err());
    }
}
