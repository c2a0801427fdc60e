//! Scalp textures of strand latents.
//!
//! A hairstyle is baked by encoding each strand and storing its code at the
//! texel under its root. Sparse textures are completed with push-pull, and new
//! hairstyles are drawn by sampling roots from the density map and decoding the
//! bilinearly fetched latent at each root.

mod pushpull;

pub use pushpull::push_pull;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;

use crate::codec::{LatentCode, StrandCodec};
use crate::scalp::{texel_of_uv, ScalpMask, ScalpSurface};
use crate::strand::Hairstyle;
use crate::util::hash2;
use crate::{Error, Result, LATENT_DIM, TEXTURE_RESOLUTION};

/// Per-texel probability of a strand growing there.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMap {
    resolution: usize,
    values: Vec<f32>,
}

impl DensityMap {
    pub fn new(resolution: usize, values: Vec<f32>) -> Result<Self> {
        if values.len() != resolution * resolution {
            return Err(Error::LengthMismatch {
                expected: resolution * resolution,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidInput("density values must lie in [0, 1]".into()));
        }
        Ok(Self { resolution, values })
    }

    pub fn zeros(resolution: usize) -> Self {
        Self {
            resolution,
            values: vec![0.0; resolution * resolution],
        }
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn get(&self, ix: usize, iy: usize) -> f32 {
        self.values[iy * self.resolution + ix]
    }

    pub fn set(&mut self, ix: usize, iy: usize, value: f32) {
        assert!((0.0..=1.0).contains(&value), "density {value} outside [0, 1]");
        self.values[iy * self.resolution + ix] = value;
    }

    /// Bilinear density at a UV position (texel centers at half-integer offsets).
    pub fn bilinear(&self, uv: [f64; 2]) -> f64 {
        let taps = bilinear_taps(self.resolution, uv);
        taps.iter().map(|&(ix, iy, w)| w * self.get(ix, iy) as f64).sum()
    }

    /// Zeroes every texel outside `mask`.
    pub fn restrict_to(&mut self, mask: &ScalpMask) {
        for (v, ok) in self.values.iter_mut().zip(mask.cells()) {
            if !ok {
                *v = 0.0;
            }
        }
    }

    /// 3x3 box blur over masked texels, renormalized so the maximum is 1.
    pub fn blurred(&self, mask: &ScalpMask) -> Self {
        let n = self.resolution;
        let mut out = vec![0.0f64; n * n];
        for iy in 0..n {
            for ix in 0..n {
                if !mask.is_valid(ix, iy) {
                    continue;
                }
                let mut sum = 0.0;
                let mut count = 0.0;
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        let (x, y) = (ix as i64 + dx, iy as i64 + dy);
                        if x < 0 || y < 0 || x >= n as i64 || y >= n as i64 {
                            continue;
                        }
                        let (x, y) = (x as usize, y as usize);
                        if mask.is_valid(x, y) {
                            sum += self.get(x, y) as f64;
                            count += 1.0;
                        }
                    }
                }
                out[iy * n + ix] = sum / count;
            }
        }
        let max = out.iter().cloned().fold(0.0, f64::max);
        let values = out
            .iter()
            .map(|v| {
                if max > 0.0 {
                    (v / max).clamp(0.0, 1.0) as f32
                } else {
                    0.0
                }
            })
            .collect();
        Self { resolution: n, values }
    }
}

/// Texels of 64-dimensional strand latents plus an occupancy flag per texel.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalpTexture {
    resolution: usize,
    channels: usize,
    data: Vec<f32>,
    validity: Vec<bool>,
}

impl ScalpTexture {
    pub fn empty(resolution: usize, channels: usize) -> Self {
        Self {
            resolution,
            channels,
            data: vec![0.0; resolution * resolution * channels],
            validity: vec![false; resolution * resolution],
        }
    }

    pub fn from_parts(resolution: usize, channels: usize, data: Vec<f32>, validity: Vec<bool>) -> Result<Self> {
        let texels = resolution * resolution;
        if data.len() != texels * channels {
            return Err(Error::LengthMismatch {
                expected: texels * channels,
                got: data.len(),
            });
        }
        if validity.len() != texels {
            return Err(Error::LengthMismatch {
                expected: texels,
                got: validity.len(),
            });
        }
        Ok(Self {
            resolution,
            channels,
            data,
            validity,
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn validity(&self) -> &[bool] {
        &self.validity
    }

    pub fn valid_count(&self) -> usize {
        self.validity.iter().filter(|v| **v).count()
    }

    pub fn is_valid(&self, ix: usize, iy: usize) -> bool {
        self.validity[iy * self.resolution + ix]
    }

    pub fn texel(&self, ix: usize, iy: usize) -> &[f32] {
        let start = (iy * self.resolution + ix) * self.channels;
        &self.data[start..start + self.channels]
    }

    pub fn set_texel(&mut self, ix: usize, iy: usize, values: &[f32]) {
        assert_eq!(values.len(), self.channels);
        let idx = iy * self.resolution + ix;
        self.data[idx * self.channels..(idx + 1) * self.channels].copy_from_slice(values);
        self.validity[idx] = true;
    }

    pub fn clear_texel(&mut self, ix: usize, iy: usize) {
        let idx = iy * self.resolution + ix;
        self.data[idx * self.channels..(idx + 1) * self.channels].fill(0.0);
        self.validity[idx] = false;
    }

    /// True when every texel of `mask` holds a valid code.
    pub fn covers(&self, mask: &ScalpMask) -> bool {
        mask.cells().iter().zip(&self.validity).all(|(m, v)| !m || *v)
    }

    /// Bilinear latent fetch. Invalid neighbors are dropped and the remaining
    /// weights renormalized; `None` when no neighbor is valid.
    pub fn fetch(&self, uv: [f64; 2]) -> Option<Vec<f64>> {
        let mut acc = vec![0.0; self.channels];
        let mut total = 0.0;
        for (ix, iy, w) in bilinear_taps(self.resolution, uv) {
            if w == 0.0 || !self.is_valid(ix, iy) {
                continue;
            }
            total += w;
            for (a, v) in acc.iter_mut().zip(self.texel(ix, iy)) {
                *a += w * *v as f64;
            }
        }
        if total == 0.0 {
            return None;
        }
        acc.iter_mut().for_each(|a| *a /= total);
        Some(acc)
    }
}

/// The four bilinear taps (clamped to the grid) and their weights.
fn bilinear_taps(resolution: usize, uv: [f64; 2]) -> [(usize, usize, f64); 4] {
    let n = resolution as f64;
    let x = (uv[0] * n - 0.5).clamp(0.0, n - 1.0);
    let y = (uv[1] * n - 0.5).clamp(0.0, n - 1.0);
    let x0 = (x.floor() as usize).min(resolution - 1);
    let y0 = (y.floor() as usize).min(resolution - 1);
    let x1 = (x0 + 1).min(resolution - 1);
    let y1 = (y0 + 1).min(resolution - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    [
        (x0, y0, (1.0 - fx) * (1.0 - fy)),
        (x1, y0, fx * (1.0 - fy)),
        (x0, y1, (1.0 - fx) * fy),
        (x1, y1, fx * fy),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BakeOptions {
    pub resolution: usize,
    /// Seeds the choice among strands that share a texel.
    pub seed: u64,
    /// Apply a 3x3 box blur to the density map.
    pub blur: bool,
}

impl Default for BakeOptions {
    fn default() -> Self {
        Self {
            resolution: TEXTURE_RESOLUTION,
            seed: 0,
            blur: false,
        }
    }
}

/// Encodes every strand at the texel under its root. When several roots share
/// a texel, one of them is kept at random (the smallest seeded hash of its
/// index wins). Density is the per-texel root count divided by the largest
/// count over the scalp mask.
pub fn bake<C: StrandCodec + ?Sized>(
    hair: &Hairstyle,
    codec: &C,
    surface: &ScalpSurface,
    options: &BakeOptions,
) -> Result<(ScalpTexture, DensityMap)> {
    if hair.points_per_strand() != codec.point_count() {
        return Err(Error::LengthMismatch {
            expected: codec.point_count(),
            got: hair.points_per_strand(),
        });
    }
    let res = options.resolution;
    let located: Vec<Option<usize>> = hair
        .strands()
        .par_iter()
        .map(|s| {
            let uv = surface.world_to_uv(&s.root()).ok()?;
            if !ScalpSurface::in_chart(uv) {
                return None;
            }
            let (ix, iy) = texel_of_uv(res, uv)?;
            Some(iy * res + ix)
        })
        .collect();
    let outside: Vec<usize> = located
        .iter()
        .enumerate()
        .filter_map(|(i, t)| t.is_none().then_some(i))
        .collect();
    if !outside.is_empty() {
        return Err(Error::RootsOutsideChart { indices: outside });
    }

    let mut counts = vec![0u32; res * res];
    let mut winner: Vec<Option<(u64, usize)>> = vec![None; res * res];
    for (i, texel) in located.iter().enumerate() {
        let t = texel.expect("checked above");
        counts[t] += 1;
        let key = hash2(options.seed, i as u64);
        match winner[t] {
            Some((best, _)) if best <= key => {}
            _ => winner[t] = Some((key, i)),
        }
    }

    let claimed: Vec<(usize, usize)> = winner
        .iter()
        .enumerate()
        .filter_map(|(t, w)| w.map(|(_, i)| (t, i)))
        .collect();
    let codes: Vec<(usize, LatentCode)> = claimed
        .par_iter()
        .map(|&(t, i)| {
            let s = &hair.strands()[i];
            let frame = surface.frame_at(&s.root())?;
            Ok((t, codec.encode(s, &frame)?))
        })
        .collect::<Result<_>>()?;

    let mut texture = ScalpTexture::empty(res, LATENT_DIM);
    for (t, z) in codes {
        let values: Vec<f32> = z.0.iter().map(|v| *v as f32).collect();
        texture.set_texel(t % res, t / res, &values);
    }

    let mask = ScalpMask::new(res);
    let max = counts
        .iter()
        .zip(mask.cells())
        .filter(|(_, m)| **m)
        .map(|(c, _)| *c)
        .max()
        .unwrap_or(0);
    let values = counts
        .iter()
        .zip(mask.cells())
        .map(|(c, m)| {
            if *m && max > 0 {
                (*c as f64 / max as f64).clamp(0.0, 1.0) as f32
            } else {
                0.0
            }
        })
        .collect();
    let mut density = DensityMap::new(res, values)?;
    if options.blur {
        density = density.blurred(&mask);
    }
    Ok((texture, density))
}

/// Draws `n` UV positions: a masked texel is picked with probability
/// proportional to its density, then the position is jittered uniformly
/// inside that texel.
pub fn sample_roots<R: Rng + ?Sized>(
    density: &DensityMap,
    mask: &ScalpMask,
    n: usize,
    rng: &mut R,
) -> Result<Vec<[f64; 2]>> {
    if density.resolution() != mask.resolution() {
        return Err(Error::LengthMismatch {
            expected: mask.resolution(),
            got: density.resolution(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidInput("sample count must be at least 1".into()));
    }
    let res = density.resolution();
    let (texels, weights): (Vec<usize>, Vec<f64>) = density
        .values()
        .iter()
        .zip(mask.cells())
        .enumerate()
        .filter(|(_, (d, m))| **m && **d > 0.0)
        .map(|(t, (d, _))| (t, *d as f64))
        .unzip();
    if texels.is_empty() {
        return Err(Error::ZeroDensity);
    }
    let dist = WeightedIndex::new(&weights).map_err(|_| Error::ZeroDensity)?;
    let n_f = res as f64;
    Ok((0..n)
        .map(|_| {
            let t = texels[dist.sample(rng)];
            let (ix, iy) = (t % res, t / res);
            let ju: f64 = rng.random();
            let jv: f64 = rng.random();
            [(ix as f64 + ju) / n_f, (iy as f64 + jv) / n_f]
        })
        .collect())
}

/// Samples `n` roots from `density`, fetches their latents from the
/// interpolated texture and decodes each strand at its root frame.
pub fn decode_hairstyle<C: StrandCodec + ?Sized, R: Rng + ?Sized>(
    texture: &ScalpTexture,
    density: &DensityMap,
    n: usize,
    codec: &C,
    surface: &ScalpSurface,
    rng: &mut R,
) -> Result<Hairstyle> {
    if texture.channels() != LATENT_DIM {
        return Err(Error::LengthMismatch {
            expected: LATENT_DIM,
            got: texture.channels(),
        });
    }
    if texture.resolution() != density.resolution() {
        return Err(Error::LengthMismatch {
            expected: texture.resolution(),
            got: density.resolution(),
        });
    }
    let mask = ScalpMask::new(texture.resolution());
    if !texture.covers(&mask) {
        return Err(Error::InvalidInput(
            "texture must be interpolated before decoding".into(),
        ));
    }
    let roots = sample_roots(density, &mask, n, rng)?;
    let strands = roots
        .par_iter()
        .map(|&uv| {
            let z = texture.fetch(uv).ok_or(Error::OutsideChart { u: uv[0], v: uv[1] })?;
            let frame = surface.uv_to_world(uv)?;
            Ok(codec.decode(&LatentCode::from_slice(&z)?, &frame))
        })
        .collect::<Result<Vec<_>>>()?;
    Hairstyle::new(strands)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{test_corpus, CodecModel};
    use crate::scalp::texel_center;
    use crate::strand::Strand;
    use crate::Vec3;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn codec() -> CodecModel {
        CodecModel::fit_local(&test_corpus::wavy(200, 32, 3)).unwrap()
    }

    fn strand_at(surface: &ScalpSurface, uv: [f64; 2], length: f64) -> Strand {
        let f = surface.uv_to_world(uv).unwrap();
        Strand::new(
            (0..32)
                .map(|i| f.to_world(&Vec3::new(0.0, 0.0, length * i as f64 / 31.0)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn bake_single_strand() {
        let surface = ScalpSurface::default();
        let hair = Hairstyle::new(vec![strand_at(&surface, [0.5, 0.5], 0.1)]).unwrap();
        let (tex, dens) = bake(&hair, &codec(), &surface, &BakeOptions::default()).unwrap();
        assert_eq!(tex.valid_count(), 1);
        assert!(tex.is_valid(128, 128));
        assert_eq!(dens.get(128, 128), 1.0);
        assert_eq!(dens.values().iter().filter(|v| **v != 0.0).count(), 1);
    }

    #[test]
    fn bake_two_distinct_texels() {
        let surface = ScalpSurface::default();
        let c = codec();
        let a = strand_at(&surface, texel_center(256, 100, 120), 0.1);
        let b = strand_at(&surface, texel_center(256, 140, 90), 0.2);
        let hair = Hairstyle::new(vec![a.clone(), b.clone()]).unwrap();
        let (tex, _) = bake(&hair, &c, &surface, &BakeOptions::default()).unwrap();
        assert_eq!(tex.valid_count(), 2);
        for (s, (ix, iy)) in [(a, (100, 120)), (b, (140, 90))] {
            let z = c.encode(&s, &surface.frame_at(&s.root()).unwrap()).unwrap();
            let stored = tex.texel(ix, iy);
            for (x, y) in z.0.iter().zip(stored) {
                assert_eq!(*x as f32, *y);
            }
        }
    }

    #[test]
    fn bake_collisions_pick_one_deterministically() {
        let surface = ScalpSurface::default();
        let c = codec();
        let uv = texel_center(256, 128, 128);
        let hair = Hairstyle::new(
            (0..5)
                .map(|k| strand_at(&surface, uv, 0.05 + 0.02 * k as f64))
                .collect(),
        )
        .unwrap();
        let opts = BakeOptions {
            seed: 9,
            ..BakeOptions::default()
        };
        let (t1, d1) = bake(&hair, &c, &surface, &opts).unwrap();
        let (t2, _) = bake(&hair, &c, &surface, &opts).unwrap();
        assert_eq!(t1, t2);
        assert_eq!(t1.valid_count(), 1);
        assert_eq!(d1.get(128, 128), 1.0);
        // The stored code is one of the five candidates.
        let stored = t1.texel(128, 128);
        assert!(hair.strands().iter().any(|s| {
            let z = c.encode(s, &surface.frame_at(&s.root()).unwrap()).unwrap();
            z.0.iter().zip(stored).all(|(a, b)| *a as f32 == *b)
        }));
    }

    #[test]
    fn bake_occupancy_matches_histogram() {
        let surface = ScalpSurface::default();
        let c = codec();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mask = ScalpMask::new(256);
        let mut dens = DensityMap::zeros(256);
        for iy in 0..256 {
            for ix in 0..256 {
                if mask.is_valid(ix, iy) {
                    dens.set(ix, iy, 1.0);
                }
            }
        }
        let uvs = sample_roots(&dens, &mask, 10_000, &mut rng).unwrap();
        let hair = Hairstyle::new(uvs.iter().map(|uv| strand_at(&surface, *uv, 0.1)).collect()).unwrap();
        let (tex, density) = bake(&hair, &c, &surface, &BakeOptions::default()).unwrap();
        // Oracle: recount distinct root texels independently from the UVs.
        let mut seen = std::collections::BTreeMap::new();
        for s in hair.strands() {
            let uv = surface.world_to_uv(&s.root()).unwrap();
            let key = ((uv[0] * 256.0) as usize, (uv[1] * 256.0) as usize);
            *seen.entry(key).or_insert(0u32) += 1;
        }
        assert_eq!(tex.valid_count(), seen.len());
        let max = *seen.values().max().unwrap() as f32;
        for ((ix, iy), count) in seen {
            assert_eq!(density.get(ix, iy), count as f32 / max);
        }
        assert!(density.values().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn bake_reports_outside_roots() {
        let surface = ScalpSurface::default();
        let good = strand_at(&surface, [0.5, 0.5], 0.1);
        let bad = good.translated(Vec3::new(0.0, 0.0, -0.2));
        let hair = Hairstyle::new(vec![good.clone(), bad.clone(), good, bad]).unwrap();
        match bake(&hair, &codec(), &surface, &BakeOptions::default()) {
            Err(Error::RootsOutsideChart { indices }) => assert_eq!(indices, vec![1, 3]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sampling_single_texel() {
        let mask = ScalpMask::new(64);
        let mut dens = DensityMap::zeros(64);
        dens.set(30, 33, 0.4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for uv in sample_roots(&dens, &mask, 1000, &mut rng).unwrap() {
            assert_eq!(texel_of_uv(64, uv), Some((30, 33)));
            assert!(dens.bilinear(uv) > 0.0);
        }
    }

    #[test]
    fn sampling_zero_density_rejected() {
        let mask = ScalpMask::new(32);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            sample_roots(&DensityMap::zeros(32), &mask, 10, &mut rng),
            Err(Error::ZeroDensity)
        ));
        // Density only outside the mask also counts as zero.
        let mut d = DensityMap::zeros(32);
        d.set(0, 0, 1.0);
        assert!(sample_roots(&d, &mask, 10, &mut rng).is_err());
    }

    #[test]
    fn density_ratio_is_respected() {
        let mask = ScalpMask::full(8);
        let mut dens = DensityMap::zeros(8);
        dens.set(2, 2, 1.0);
        dens.set(5, 5, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let uvs = sample_roots(&dens, &mask, 1_000_000, &mut rng).unwrap();
        let hi = uvs.iter().filter(|uv| texel_of_uv(8, **uv) == Some((2, 2))).count();
        let lo = uvs.len() - hi;
        let ratio = hi as f64 / lo as f64;
        assert!((ratio - 2.0).abs() / 2.0 < 0.05, "ratio {ratio}");
    }

    #[test]
    fn fetch_renormalizes_near_invalid() {
        let mut tex = ScalpTexture::empty(4, 2);
        tex.set_texel(1, 1, &[2.0, -1.0]);
        // Any position whose taps include texel (1, 1) only sees that value.
        let z = tex.fetch([0.4, 0.4]).unwrap();
        assert_eq!(z, vec![2.0, -1.0]);
        assert!(tex.fetch([0.9, 0.9]).is_none());
    }

    #[test]
    fn decode_constant_texture() {
        let surface = ScalpSurface::default();
        let c = codec();
        let res = 32;
        let mut tex = ScalpTexture::empty(res, LATENT_DIM);
        let z: Vec<f32> = (0..LATENT_DIM).map(|k| ((k as f32) * 0.37).sin()).collect();
        let mask = ScalpMask::new(res);
        let mut dens = DensityMap::zeros(res);
        for iy in 0..res {
            for ix in 0..res {
                tex.set_texel(ix, iy, &z);
                if mask.is_valid(ix, iy) {
                    dens.set(ix, iy, 1.0);
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let hair = decode_hairstyle(&tex, &dens, 200, &c, &surface, &mut rng).unwrap();
        assert_eq!(hair.len(), 200);
        let code = LatentCode::from_slice(&z.iter().map(|v| *v as f64).collect::<Vec<_>>()).unwrap();
        let expected = c.decode_local(&code);
        // Rigid-motion invariant comparison: every strand is the decoded
        // shape placed in some root frame.
        for s in hair.strands() {
            let p = s.points();
            for j in 1..p.len() {
                let a = (p[j] - p[0]).norm();
                let b = (expected[j] - expected[0]).norm();
                assert!((a - b).abs() < 1e-12);
                let a = (p[j] - p[j - 1]).norm();
                let b = (expected[j] - expected[j - 1]).norm();
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn decode_is_reproducible() {
        let surface = ScalpSurface::default();
        let c = codec();
        let res = 16;
        let mut tex = ScalpTexture::empty(res, LATENT_DIM);
        let mut dens = DensityMap::zeros(res);
        let mask = ScalpMask::new(res);
        for iy in 0..res {
            for ix in 0..res {
                let z: Vec<f32> = (0..LATENT_DIM)
                    .map(|k| ((ix * 7 + iy * 3 + k) as f32 * 0.1).cos())
                    .collect();
                tex.set_texel(ix, iy, &z);
                if mask.is_valid(ix, iy) {
                    dens.set(ix, iy, 0.5);
                }
            }
        }
        let one = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            decode_hairstyle(&tex, &dens, 1, &c, &surface, &mut rng).unwrap()
        };
        assert_eq!(one(5), one(5));
    }

    #[test]
    fn decode_requires_interpolated_texture() {
        let surface = ScalpSurface::default();
        let tex = ScalpTexture::empty(16, LATENT_DIM);
        let dens = DensityMap::zeros(16);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(decode_hairstyle(&tex, &dens, 10, &codec(), &surface, &mut rng).is_err());
    }

    #[test]
    fn blur_keeps_range() {
        let mask = ScalpMask::new(32);
        let mut d = DensityMap::zeros(32);
        d.set(16, 16, 1.0);
        d.set(17, 16, 0.5);
        let b = d.blurred(&mask);
        assert!(b.values().iter().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(b.values().iter().cloned().fold(0.0, f32::max), 1.0);
        assert!(b.get(15, 15) > 0.0);
    }
}
