//! Strand files.
//!
//! Layout (version 1):
//!
//! ```text
//! magic        4 bytes  "DLHR"
//! version      u32      1
//! flags        u32      bit 0: per-strand attribute present
//! strand_count u32
//! total_points u64
//! point_counts u32 x strand_count
//! points       f32 x 3 x total_points   (x, y, z interleaved)
//! attributes   f32 x strand_count        (only with flag bit 0)
//! ```

use std::io::Write;
use std::path::Path;

use super::{put_f32s, put_u32, put_u64, to_u32, FormatError, Reader};
use crate::strand::{resample, Hairstyle, Strand};
use crate::{Error, Result, Vec3, STRAND_POINTS};

pub const HAIR_MAGIC: [u8; 4] = *b"DLHR";
pub const HAIR_VERSION: u32 = 1;
pub const HAIR_HEADER_LEN: u64 = 24;

const FLAG_ATTRIBUTES: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct HairFile {
    point_counts: Vec<u32>,
    points: Vec<f32>,
    attributes: Option<Vec<f32>>,
}

impl HairFile {
    pub fn new(point_counts: Vec<u32>, points: Vec<f32>, attributes: Option<Vec<f32>>) -> Result<Self> {
        if point_counts.is_empty() {
            return Err(Error::Empty("hair file has no strands"));
        }
        to_u32(point_counts.len(), "strand count")?;
        let total: u64 = point_counts.iter().map(|c| *c as u64).sum();
        if points.len() as u64 != 3 * total {
            return Err(Error::LengthMismatch {
                expected: (3 * total) as usize,
                got: points.len(),
            });
        }
        if let Some(a) = &attributes {
            if a.len() != point_counts.len() {
                return Err(Error::LengthMismatch {
                    expected: point_counts.len(),
                    got: a.len(),
                });
            }
        }
        Ok(Self {
            point_counts,
            points,
            attributes,
        })
    }

    /// Single-precision copy of a hairstyle.
    pub fn from_hairstyle(hair: &Hairstyle) -> Self {
        let point_counts = hair.strands().iter().map(|s| s.len() as u32).collect();
        let points = hair
            .strands()
            .iter()
            .flat_map(|s| s.points().iter().flat_map(|p| [p.x as f32, p.y as f32, p.z as f32]))
            .collect();
        Self {
            point_counts,
            points,
            attributes: None,
        }
    }

    pub fn with_attributes(mut self, attributes: Vec<f32>) -> Result<Self> {
        if attributes.len() != self.point_counts.len() {
            return Err(Error::LengthMismatch {
                expected: self.point_counts.len(),
                got: attributes.len(),
            });
        }
        self.attributes = Some(attributes);
        Ok(self)
    }

    pub fn strand_count(&self) -> usize {
        self.point_counts.len()
    }

    pub fn point_counts(&self) -> &[u32] {
        &self.point_counts
    }

    pub fn total_points(&self) -> u64 {
        self.point_counts.iter().map(|c| *c as u64).sum()
    }

    pub fn points(&self) -> &[f32] {
        &self.points
    }

    pub fn attributes(&self) -> Option<&[f32]> {
        self.attributes.as_deref()
    }

    /// Strands as stored, widened to f64.
    pub fn strands(&self) -> Result<Vec<Strand>> {
        let mut offset = 0;
        self.point_counts
            .iter()
            .map(|&c| {
                let c = c as usize;
                let pts = self.points[offset * 3..(offset + c) * 3]
                    .chunks_exact(3)
                    .map(|p| Vec3::new(p[0] as f64, p[1] as f64, p[2] as f64))
                    .collect();
                offset += c;
                Strand::new(pts)
            })
            .collect()
    }

    /// Strands resampled to [`STRAND_POINTS`] points. Strands that already have
    /// that many points are passed through unchanged.
    pub fn to_hairstyle(&self) -> Result<Hairstyle> {
        let strands = self
            .strands()?
            .into_iter()
            .map(|s| {
                if s.len() == STRAND_POINTS {
                    Ok(s)
                } else {
                    resample(&s, STRAND_POINTS)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Hairstyle::new(strands)
    }

    pub fn encoded_len(strand_count: u64, total_points: u64, attributes: bool) -> u64 {
        HAIR_HEADER_LEN + 4 * strand_count + 12 * total_points + if attributes { 4 * strand_count } else { 0 }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.point_counts.len() as u64;
        let mut out = Vec::with_capacity(Self::encoded_len(n, self.total_points(), self.attributes.is_some()) as usize);
        out.extend_from_slice(&HAIR_MAGIC);
        put_u32(&mut out, HAIR_VERSION);
        put_u32(&mut out, if self.attributes.is_some() { FLAG_ATTRIBUTES } else { 0 });
        put_u32(&mut out, n as u32);
        put_u64(&mut out, self.total_points());
        for c in &self.point_counts {
            put_u32(&mut out, *c);
        }
        put_f32s(&mut out, &self.points);
        if let Some(a) = &self.attributes {
            put_f32s(&mut out, a);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FormatError> {
        let mut r = Reader::new(bytes);
        r.expect_magic(HAIR_MAGIC)?;
        let version = r.u32()?;
        if version == 0 || version > HAIR_VERSION {
            return Err(FormatError::UnsupportedVersion {
                found: version,
                supported: HAIR_VERSION,
            });
        }
        let flags = r.u32()?;
        if flags & !FLAG_ATTRIBUTES != 0 {
            return Err(FormatError::InvalidValue(format!("unknown flags {flags:#x}")));
        }
        let strand_count = r.u32()?;
        if strand_count == 0 {
            return Err(FormatError::InvalidValue("zero strands".into()));
        }
        let total_points = r.u64()?;
        let table = r.take(4 * strand_count as u64)?;
        let point_counts: Vec<u32> = table
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        let mut sum: u64 = 0;
        for c in &point_counts {
            sum = sum
                .checked_add(*c as u64)
                .ok_or_else(|| FormatError::CountOverflow("point count sum".into()))?;
        }
        if sum != total_points {
            return Err(FormatError::InvalidValue(format!(
                "point counts sum to {sum}, header says {total_points}"
            )));
        }
        let coords = total_points
            .checked_mul(3)
            .ok_or_else(|| FormatError::CountOverflow(format!("{total_points} points")))?;
        let points = r.f32s(coords)?;
        let attributes = if flags & FLAG_ATTRIBUTES != 0 {
            Some(r.f32s(strand_count as u64)?)
        } else {
            None
        };
        r.finish()?;
        Ok(Self {
            point_counts,
            points,
            attributes,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(Self::from_bytes(&std::fs::read(path)?)?)
    }
}

const CYHAIR_HEADER_LEN: usize = 128;

/// Imports a cyHair (`HAIR` magic) file. Coordinates are multiplied by
/// `scale`; thickness, transparency and color arrays are skipped.
pub fn read_cyhair(bytes: &[u8], scale: f32) -> Result<HairFile> {
    let mut r = Reader::new(bytes);
    r.expect_magic(*b"HAIR")?;
    let hair_count = r.u32()?;
    let point_count = r.u32()?;
    let flags = r.u32()?;
    let default_segments = r.u32()?;
    r.take((CYHAIR_HEADER_LEN - 20) as u64)?;
    if flags & 0b10 == 0 {
        return Err(FormatError::InvalidValue("cyHair file has no point array".into()).into());
    }
    if hair_count == 0 {
        return Err(Error::Empty("hair file has no strands"));
    }
    let point_counts: Vec<u32> = if flags & 0b1 != 0 {
        (0..hair_count)
            .map(|_| Ok(r.u16()? as u32 + 1))
            .collect::<Result<_, FormatError>>()?
    } else {
        vec![default_segments + 1; hair_count as usize]
    };
    let total: u64 = point_counts.iter().map(|c| *c as u64).sum();
    if total != point_count as u64 {
        return Err(
            FormatError::InvalidValue(format!("segments imply {total} points, header says {point_count}")).into(),
        );
    }
    let points = r.f32s(3 * point_count as u64)?.into_iter().map(|v| v * scale).collect();
    HairFile::new(point_counts, points, None)
}

/// ASCII PLY with one vertex per strand point and an edge per segment.
pub fn write_ply<W: Write>(hair: &HairFile, mut out: W) -> Result<()> {
    let total = hair.total_points();
    let edges: u64 = hair.point_counts().iter().map(|c| c.saturating_sub(1) as u64).sum();
    writeln!(out, "ply")?;
    writeln!(out, "format ascii 1.0")?;
    writeln!(out, "element vertex {total}")?;
    writeln!(out, "property float x")?;
    writeln!(out, "property float y")?;
    writeln!(out, "property float z")?;
    writeln!(out, "element edge {edges}")?;
    writeln!(out, "property int vertex1")?;
    writeln!(out, "property int vertex2")?;
    writeln!(out, "end_header")?;
    for p in hair.points().chunks_exact(3) {
        writeln!(out, "{} {} {}", p[0], p[1], p[2])?;
    }
    let mut base: u64 = 0;
    for c in hair.point_counts() {
        for k in 1..*c as u64 {
            writeln!(out, "{} {}", base + k - 1, base + k)?;
        }
        base += *c as u64;
    }
    out.flush()?;
    Ok(())
}
