//! Binary file formats. Everything is little-endian.
//!
//! * Hair files (`DLHR`): strand point counts, xyz as f32, optional
//!   per-strand scalar attribute.
//! * Containers (`DLCK`): a sequence of tagged chunks holding a scalp
//!   texture (`SCLP`), density map (`DENS`), codec (`CODC`) or groom
//!   parameters (`GPRM`). Unknown chunks are carried along and ignored.

mod container;
mod hair;

pub use container::{Container, CONTAINER_MAGIC, CONTAINER_VERSION};
pub use hair::{read_cyhair, write_ply, HairFile, HAIR_HEADER_LEN, HAIR_MAGIC, HAIR_VERSION};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("bad magic: expected \"{}\", found \"{}\"", expected.escape_ascii(), found.escape_ascii())]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("unsupported format version {found} (newest supported: {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },

    #[error("truncated: needed {needed} bytes, {available} available")]
    Truncated { needed: u64, available: u64 },

    #[error("count overflow: {0}")]
    CountOverflow(String),

    #[error("{0} unexpected trailing bytes")]
    TrailingBytes(u64),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("missing chunk {0}")]
    MissingChunk(String),
}

impl FormatError {
    pub fn code(&self) -> &'static str {
        match self {
            FormatError::BadMagic { .. } => "bad_magic",
            FormatError::UnsupportedVersion { .. } => "unsupported_version",
            FormatError::Truncated { .. } => "truncated",
            FormatError::CountOverflow(_) => "count_overflow",
            FormatError::TrailingBytes(_) => "trailing_bytes",
            FormatError::InvalidValue(_) => "invalid_value",
            FormatError::MissingChunk(_) => "missing_chunk",
        }
    }
}

/// Bounds-checked little-endian reader over a byte slice.
pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    pub fn take(&mut self, n: u64) -> Result<&'a [u8], FormatError> {
        if n > self.remaining() as u64 {
            return Err(FormatError::Truncated {
                needed: n,
                available: self.remaining() as u64,
            });
        }
        let n = n as usize;
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn tag(&mut self) -> Result<[u8; 4], FormatError> {
        Ok(self.take(4)?.try_into().expect("4 bytes"))
    }

    pub fn u16(&mut self) -> Result<u16, FormatError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    pub fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    pub fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    pub fn f32s(&mut self, count: u64) -> Result<Vec<f32>, FormatError> {
        let n = checked_bytes(count, 4)?;
        Ok(self
            .take(n)?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect())
    }

    pub fn f64s(&mut self, count: u64) -> Result<Vec<f64>, FormatError> {
        let n = checked_bytes(count, 8)?;
        Ok(self
            .take(n)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }

    pub fn expect_magic(&mut self, expected: [u8; 4]) -> Result<(), FormatError> {
        let found = if self.remaining() >= 4 {
            self.tag()?
        } else {
            let mut f = [0u8; 4];
            let rest = self.take(self.remaining() as u64)?;
            f[..rest.len()].copy_from_slice(rest);
            f
        };
        if found != expected {
            return Err(FormatError::BadMagic { expected, found });
        }
        Ok(())
    }

    pub fn finish(&self) -> Result<(), FormatError> {
        match self.remaining() {
            0 => Ok(()),
            n => Err(FormatError::TrailingBytes(n as u64)),
        }
    }
}

pub(crate) fn checked_bytes(count: u64, width: u64) -> Result<u64, FormatError> {
    count
        .checked_mul(width)
        .ok_or_else(|| FormatError::CountOverflow(format!("{count} items of {width} bytes")))
}

pub(crate) fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub(crate) fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub(crate) fn put_f32s(out: &mut Vec<u8>, values: &[f32]) {
    out.reserve(values.len() * 4);
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub(crate) fn put_f64s(out: &mut Vec<u8>, values: &[f64]) {
    out.reserve(values.len() * 8);
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub(crate) fn to_u32(n: usize, what: &str) -> Result<u32, FormatError> {
    u32::try_from(n).map_err(|_| FormatError::CountOverflow(format!("{what} {n} exceeds u32")))
}
