//! Chunked container.
//!
//! ```text
//! magic    4 bytes "DLCK"
//! version  u32     1
//! chunks   until end of file:
//!   tag     4 bytes
//!   length  u64
//!   payload length bytes
//! ```
//!
//! Payloads:
//!
//! * `SCLP`: resolution u32, channels u32, dtype u32 (1 = f32),
//!   validity u8 x res^2, data f32 x res^2 x channels.
//! * `DENS`: resolution u32, dtype u32 (1 = f32), values f32 x res^2.
//! * `CODC`: point_count u32, latent_dim u32, dtype u32 (2 = f64),
//!   mean, basis (row-major, latent_dim rows), scales, variances,
//!   total_variance, all f64.
//! * `GPRM`: groom parameters as UTF-8 text.

use std::path::Path;

use super::{put_f32s, put_f64s, put_u32, put_u64, to_u32, FormatError, Reader};
use crate::codec::CodecModel;
use crate::codec::StrandCodec;
use crate::groom::GroomParams;
use crate::texture::{DensityMap, ScalpTexture};
use crate::{Result, LATENT_DIM};

pub const CONTAINER_MAGIC: [u8; 4] = *b"DLCK";
pub const CONTAINER_VERSION: u32 = 1;

const TAG_TEXTURE: [u8; 4] = *b"SCLP";
const TAG_DENSITY: [u8; 4] = *b"DENS";
const TAG_CODEC: [u8; 4] = *b"CODC";
const TAG_PARAMS: [u8; 4] = *b"GPRM";

const DTYPE_F32: u32 = 1;
const DTYPE_F64: u32 = 2;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Container {
    chunks: Vec<([u8; 4], Vec<u8>)>,
}

fn tag_name(tag: [u8; 4]) -> String {
    String::from_utf8_lossy(&tag).into_owned()
}

impl Container {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn chunks(&self) -> &[([u8; 4], Vec<u8>)] {
        &self.chunks
    }

    /// Appends a chunk, replacing an existing one with the same tag.
    pub fn put_raw(&mut self, tag: [u8; 4], payload: Vec<u8>) {
        match self.chunks.iter_mut().find(|(t, _)| *t == tag) {
            Some(c) => c.1 = payload,
            None => self.chunks.push((tag, payload)),
        }
    }

    pub fn raw(&self, tag: [u8; 4]) -> Option<&[u8]> {
        self.chunks.iter().find(|(t, _)| *t == tag).map(|(_, p)| p.as_slice())
    }

    fn required(&self, tag: [u8; 4]) -> Result<&[u8], FormatError> {
        self.raw(tag).ok_or_else(|| FormatError::MissingChunk(tag_name(tag)))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&CONTAINER_MAGIC);
        put_u32(&mut out, CONTAINER_VERSION);
        for (tag, payload) in &self.chunks {
            out.extend_from_slice(tag);
            put_u64(&mut out, payload.len() as u64);
            out.extend_from_slice(payload);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FormatError> {
        let mut r = Reader::new(bytes);
        r.expect_magic(CONTAINER_MAGIC)?;
        let version = r.u32()?;
        if version == 0 || version > CONTAINER_VERSION {
            return Err(FormatError::UnsupportedVersion {
                found: version,
                supported: CONTAINER_VERSION,
            });
        }
        let mut chunks = Vec::new();
        while r.remaining() > 0 {
            let tag = r.tag()?;
            let len = r.u64()?;
            let payload = r.take(len)?.to_vec();
            chunks.push((tag, payload));
        }
        Ok(Self { chunks })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(Self::from_bytes(&std::fs::read(path)?)?)
    }

    pub fn put_texture(&mut self, t: &ScalpTexture) -> Result<()> {
        let mut p = Vec::new();
        put_u32(&mut p, to_u32(t.resolution(), "resolution")?);
        put_u32(&mut p, to_u32(t.channels(), "channels")?);
        put_u32(&mut p, DTYPE_F32);
        p.extend(t.validity().iter().map(|v| *v as u8));
        put_f32s(&mut p, t.data());
        self.put_raw(TAG_TEXTURE, p);
        Ok(())
    }

    pub fn texture(&self) -> Result<ScalpTexture> {
        let mut r = Reader::new(self.required(TAG_TEXTURE)?);
        let res = r.u32()? as u64;
        let channels = r.u32()? as u64;
        expect_dtype(r.u32()?, DTYPE_F32)?;
        let texels = res * res;
        let validity = r
            .take(texels)?
            .iter()
            .map(|b| match b {
                0 => Ok(false),
                1 => Ok(true),
                v => Err(FormatError::InvalidValue(format!("validity byte {v}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let count = texels
            .checked_mul(channels)
            .ok_or_else(|| FormatError::CountOverflow("texture size".into()))?;
        let data = r.f32s(count)?;
        r.finish()?;
        ScalpTexture::from_parts(res as usize, channels as usize, data, validity)
    }

    pub fn put_density(&mut self, d: &DensityMap) -> Result<()> {
        let mut p = Vec::new();
        put_u32(&mut p, to_u32(d.resolution(), "resolution")?);
        put_u32(&mut p, DTYPE_F32);
        put_f32s(&mut p, d.values());
        self.put_raw(TAG_DENSITY, p);
        Ok(())
    }

    pub fn density(&self) -> Result<DensityMap> {
        let mut r = Reader::new(self.required(TAG_DENSITY)?);
        let res = r.u32()? as u64;
        expect_dtype(r.u32()?, DTYPE_F32)?;
        let values = r.f32s(res * res)?;
        r.finish()?;
        DensityMap::new(res as usize, values)
    }

    pub fn put_codec(&mut self, c: &CodecModel) -> Result<()> {
        let mut p = Vec::new();
        put_u32(&mut p, to_u32(c.point_count(), "point count")?);
        put_u32(&mut p, LATENT_DIM as u32);
        put_u32(&mut p, DTYPE_F64);
        put_f64s(&mut p, c.mean());
        put_f64s(&mut p, c.basis());
        put_f64s(&mut p, c.scales());
        put_f64s(&mut p, c.variances());
        put_f64s(&mut p, &[c.total_variance()]);
        self.put_raw(TAG_CODEC, p);
        Ok(())
    }

    pub fn codec(&self) -> Result<CodecModel> {
        let mut r = Reader::new(self.required(TAG_CODEC)?);
        let points = r.u32()? as u64;
        let latent = r.u32()?;
        if latent as usize != LATENT_DIM {
            return Err(FormatError::InvalidValue(format!("latent dimension {latent}")).into());
        }
        expect_dtype(r.u32()?, DTYPE_F64)?;
        let dim = 3 * points;
        let mean = r.f64s(dim)?;
        let basis = r.f64s(dim * LATENT_DIM as u64)?;
        let scales = r.f64s(LATENT_DIM as u64)?;
        let variances = r.f64s(LATENT_DIM as u64)?;
        let total = r.f64s(1)?[0];
        r.finish()?;
        CodecModel::from_parts(points as usize, mean, basis, scales, variances, total)
    }

    pub fn put_params(&mut self, p: &GroomParams) {
        self.put_raw(TAG_PARAMS, p.to_text().into_bytes());
    }

    pub fn params(&self) -> Result<GroomParams> {
        let text = std::str::from_utf8(self.required(TAG_PARAMS)?)
            .map_err(|_| FormatError::InvalidValue("params chunk is not UTF-8".into()))?;
        GroomParams::from_text(text)
    }
}

fn expect_dtype(found: u32, expected: u32) -> Result<(), FormatError> {
    if found == expected {
        Ok(())
    } else {
        Err(FormatError::InvalidValue(format!("dtype {found}, expected {expected}")))
    }
}
