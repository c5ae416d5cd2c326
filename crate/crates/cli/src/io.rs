//! Binary tensor files.
//!
//! Layout, all little-endian:
//!
//! ```text
//! b"TRTC" | version: u8 = 1 | order: u64 | extents: order x u64 | values: prod(extents) x f64
//! ```
//!
//! Values are in canonical first-index-fastest order. In observed-tensor files
//! a NaN marks a missing entry; ground-truth files must not contain NaN.

use std::fs;
use std::path::Path;

use trc_core::{DenseTensor, ObservationMask};

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"TRTC";
pub const VERSION: u8 = 1;
const HEADER_FIXED: usize = 4 + 1 + 8;

/// Serializes `t`, writing NaN wherever `mask` marks an entry missing.
pub fn encode(t: &DenseTensor, mask: Option<&ObservationMask>) -> Result<Vec<u8>> {
    if let Some(m) = mask {
        if m.shape() != t.shape() {
            return Err(trc_core::Error::ShapeMismatch {
                left: t.shape().to_vec(),
                right: m.shape().to_vec(),
            }
            .into());
        }
    }
    let mut out = Vec::with_capacity(HEADER_FIXED + 8 * (t.order() + t.len()));
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(t.order() as u64).to_le_bytes());
    for &e in t.shape() {
        out.extend_from_slice(&(e as u64).to_le_bytes());
    }
    for (k, &v) in t.data().iter().enumerate() {
        let v = match mask {
            Some(m) if !m.is_observed(k) => f64::NAN,
            _ => v,
        };
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

/// Raw contents of a tensor file: extents and values, NaN preserved.
#[derive(Debug, Clone)]
pub struct RawTensor {
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

fn take<'a>(bytes: &'a [u8], at: usize, len: usize, expected_total: usize) -> Result<&'a [u8]> {
    bytes.get(at..at + len).ok_or(Error::Truncated {
        expected: expected_total.max(at + len),
        found: bytes.len(),
    })
}

fn read_u64(bytes: &[u8], at: usize) -> Result<u64> {
    let raw = take(bytes, at, 8, 0)?;
    Ok(u64::from_le_bytes(raw.try_into().expect("slice of length 8")))
}

pub fn decode(bytes: &[u8]) -> Result<RawTensor> {
    let magic: [u8; 4] = take(bytes, 0, 4, HEADER_FIXED)?.try_into().expect("length 4");
    if magic != MAGIC {
        return Err(Error::BadMagic(magic));
    }
    let version = take(bytes, 4, 1, HEADER_FIXED)?[0];
    if version != VERSION {
        return Err(Error::BadVersion(version));
    }
    let order = read_u64(bytes, 5)? as usize;
    let header = order
        .checked_mul(8)
        .and_then(|b| b.checked_add(HEADER_FIXED))
        .ok_or_else(|| Error::Usage(format!("implausible tensor order {order}")))?;
    if bytes.len() < header {
        return Err(Error::Truncated {
            expected: header,
            found: bytes.len(),
        });
    }
    let shape = (0..order)
        .map(|k| read_u64(bytes, HEADER_FIXED + 8 * k).map(|e| e as usize))
        .collect::<Result<Vec<_>>>()?;
    let count = shape
        .iter()
        .try_fold(1usize, |acc, &e| acc.checked_mul(e))
        .ok_or_else(|| Error::Usage(format!("extents {shape:?} overflow")))?;
    let expected = count
        .checked_mul(8)
        .and_then(|b| b.checked_add(header))
        .ok_or_else(|| Error::Usage(format!("extents {shape:?} overflow")))?;
    if bytes.len() < expected {
        return Err(Error::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(Error::TrailingBytes(bytes.len() - expected));
    }
    let values = bytes[header..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok(RawTensor { shape, values })
}

impl RawTensor {
    /// Splits NaN markers into a mask; missing entries become 0 in the tensor.
    pub fn into_observed(self) -> Result<(DenseTensor, ObservationMask)> {
        let mut observed = Vec::with_capacity(self.values.len());
        let mut data = Vec::with_capacity(self.values.len());
        for (index, v) in self.values.into_iter().enumerate() {
            if v.is_nan() {
                observed.push(false);
                data.push(0.0);
            } else if v.is_finite() {
                observed.push(true);
                data.push(v);
            } else {
                return Err(Error::BadValue { index, value: v });
            }
        }
        let mask = ObservationMask::new(self.shape.clone(), observed)?;
        Ok((DenseTensor::new(self.shape, data)?, mask))
    }

    /// Requires every entry present and finite.
    pub fn into_ground_truth(self) -> Result<DenseTensor> {
        let missing = self.values.iter().filter(|v| v.is_nan()).count();
        if missing > 0 {
            return Err(Error::MissingInGroundTruth(missing));
        }
        if let Some(index) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::BadValue {
                index,
                value: self.values[index],
            });
        }
        Ok(DenseTensor::new(self.shape, self.values)?)
    }
}

fn read_raw(path: &Path) -> Result<RawTensor> {
    decode(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

/// Reads an observed-tensor file; NaN entries become missing-mask bits.
pub fn read_tensor(path: &Path) -> Result<(DenseTensor, ObservationMask)> {
    read_raw(path)?.into_observed()
}

/// Reads a ground-truth file, rejecting NaN.
pub fn read_ground_truth(path: &Path) -> Result<DenseTensor> {
    read_raw(path)?.into_ground_truth()
}

pub fn write_tensor(path: &Path, t: &DenseTensor, mask: Option<&ObservationMask>) -> Result<()> {
    fs::write(path, encode(t, mask)?).map_err(|e| Error::io(path, e))
}
