//! Procedural hairstyle synthesis.
//!
//! A sparse guide set is densified by blending guide shapes in root-local
//! frames, then refined by rounds of clumping, curling and noise at decaying
//! intensity with shrinkwrap against the scalp after each round. Every step is
//! a pure function of its inputs and a seeded generator.

mod noise;
pub mod ops;
mod params;

pub use noise::ValueNoise;
pub use ops::{clump, curl, droop, perturb_noise, shrinkwrap};
pub use params::{
    ClumpParams, CurlParams, DensityParams, Distribution, GroomParams, NoiseParams, ParamRange, RandomSpec, PARAM_NAMES,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::scalp::{ScalpMask, ScalpSurface};
use crate::strand::{resample, Hairstyle, Strand};
use crate::texture::{sample_roots, DensityMap};
use crate::util::hash2;
use crate::{Error, Result, Vec3, STRAND_POINTS, TEXTURE_RESOLUTION};

/// Sparse guide strands rooted on the scalp.
#[derive(Clone, Debug, PartialEq)]
pub struct GuideSet {
    guides: Vec<Strand>,
}

impl GuideSet {
    pub fn new(guides: Vec<Strand>, surface: &ScalpSurface) -> Result<Self> {
        if guides.is_empty() {
            return Err(Error::Empty("guide set has no guides"));
        }
        if guides.len() < 3 {
            return Err(Error::InvalidInput(format!(
                "need at least 3 guides, got {}",
                guides.len()
            )));
        }
        let outside: Vec<usize> = guides
            .iter()
            .enumerate()
            .filter(|(_, g)| surface.world_to_uv(&g.root()).is_err())
            .map(|(i, _)| i)
            .collect();
        if !outside.is_empty() {
            return Err(Error::RootsOutsideChart { indices: outside });
        }
        Ok(Self { guides })
    }

    pub fn guides(&self) -> &[Strand] {
        &self.guides
    }

    pub fn len(&self) -> usize {
        self.guides.len()
    }

    pub fn is_empty(&self) -> bool {
        self.guides.is_empty()
    }

    /// A built-in base hairstyle: `count` guides spread over the scalp on a
    /// sunflower pattern. Each guide leaves the scalp along its normal and
    /// bends downward over `length` meters; `sweep` tilts the fall toward -y.
    pub fn procedural(surface: &ScalpSurface, count: usize, length: f64, sweep: f64) -> Result<Self> {
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        let points = 24;
        let guides = (0..count)
            .map(|i| {
                let r = 0.47 * ((i as f64 + 0.5) / count as f64).sqrt();
                let a = golden * i as f64;
                let uv = [0.5 + r * a.cos(), 0.5 + r * a.sin()];
                let frame = surface.uv_to_world(uv)?;
                let fall = (Vec3::new(0.0, -sweep, -1.0) + frame.normal * 0.3).normalize();
                let mut pts = Vec::with_capacity(points);
                let mut p = frame.origin;
                pts.push(p);
                let step = length / (points - 1) as f64;
                for k in 1..points {
                    let t = k as f64 / (points - 1) as f64;
                    let dir = (frame.normal * (1.0 - t).powi(2) + fall * (1.0 - (1.0 - t).powi(2))).normalize();
                    p += dir * step;
                    pts.push(p);
                }
                Strand::new(pts)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(guides, surface)
    }

    /// Named built-in styles: `short`, `medium` and `long` (50 guides each).
    pub fn preset(name: &str, surface: &ScalpSurface) -> Result<Self> {
        match name {
            "short" => Self::procedural(surface, 50, 0.08, 0.1),
            "medium" => Self::procedural(surface, 50, 0.2, 0.3),
            "long" => Self::procedural(surface, 50, 0.35, 0.5),
            other => Err(Error::InvalidInput(format!("unknown base style '{other}'"))),
        }
    }
}

/// Density map described by `params`: baseline times smooth variation over
/// the scalp mask, zero on every texel touching the bald disk.
pub fn density_map(params: &DensityParams, mask: &ScalpMask, seed: u64) -> DensityMap {
    let res = mask.resolution();
    let field = ValueNoise::new(hash2(seed, 0xD3_u64));
    let mut out = DensityMap::zeros(res);
    let n = res as f64;
    for iy in 0..res {
        for ix in 0..res {
            if !mask.is_valid(ix, iy) {
                continue;
            }
            if params.bald_radius > 0.0 {
                // Distance from the disk center to the closest point of the texel.
                let cx = params.bald_u.clamp(ix as f64 / n, (ix + 1) as f64 / n);
                let cy = params.bald_v.clamp(iy as f64 / n, (iy + 1) as f64 / n);
                let d = ((cx - params.bald_u).powi(2) + (cy - params.bald_v).powi(2)).sqrt();
                if d < params.bald_radius {
                    continue;
                }
            }
            let [u, v] = mask.texel_center(ix, iy);
            let wobble = field.sample(&Vec3::new(4.0 * u, 4.0 * v, 0.5)).x;
            let value = params.baseline * (1.0 + params.variation * wobble);
            out.set(ix, iy, value.clamp(0.0, 1.0) as f32);
        }
    }
    out
}

/// Guide shape in its own root frame, resampled to the output point count.
fn local_guide(guide: &Strand, surface: &ScalpSurface) -> Result<(Vec<Vec3>, [f64; 2])> {
    let uv = surface.world_to_uv(&guide.root())?;
    let frame = surface.frame_at(&guide.root())?;
    let shape = resample(guide, STRAND_POINTS)?;
    Ok((shape.points().iter().map(|p| frame.to_local(p)).collect(), uv))
}

/// Densifies `guides` to `params.strand_count` strands. Roots are sampled
/// from the parameter-defined density map; each strand blends the local
/// shapes of its `params.neighbors` nearest guides (in UV) with inverse
/// squared distance weights and is placed in the frame at its root.
pub fn interpolate_guides<R: Rng + ?Sized>(
    guides: &GuideSet,
    params: &GroomParams,
    surface: &ScalpSurface,
    rng: &mut R,
) -> Result<Hairstyle> {
    params.validate()?;
    let mask = ScalpMask::new(TEXTURE_RESOLUTION);
    let density = density_map(&params.density, &mask, params.seed);
    interpolate_with_density(guides, params, surface, &density, &mask, rng)
}

fn interpolate_with_density<R: Rng + ?Sized>(
    guides: &GuideSet,
    params: &GroomParams,
    surface: &ScalpSurface,
    density: &DensityMap,
    mask: &ScalpMask,
    rng: &mut R,
) -> Result<Hairstyle> {
    let local: Vec<(Vec<Vec3>, [f64; 2])> = guides
        .guides()
        .iter()
        .map(|g| local_guide(g, surface))
        .collect::<Result<_>>()?;
    let roots = sample_roots(density, mask, params.strand_count, rng)?;
    let k = params.neighbors.min(local.len());
    let scale = params.length_scale;

    let strands = roots
        .par_iter()
        .map(|&uv| {
            let mut dists: Vec<(f64, usize)> = local
                .iter()
                .enumerate()
                .map(|(i, (_, g))| ((g[0] - uv[0]).powi(2) + (g[1] - uv[1]).powi(2), i))
                .collect();
            dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let nearest = &dists[..k];
            let weights: Vec<f64> = if nearest[0].0 == 0.0 {
                nearest.iter().map(|(d, _)| if *d == 0.0 { 1.0 } else { 0.0 }).collect()
            } else {
                nearest.iter().map(|(d, _)| 1.0 / d).collect()
            };
            let total: f64 = weights.iter().sum();
            let frame = surface.uv_to_world(uv)?;
            let pts = (0..STRAND_POINTS)
                .map(|j| {
                    let mut p = Vec3::zeros();
                    for ((_, gi), w) in nearest.iter().zip(&weights) {
                        p += local[*gi].0[j] * (*w / total);
                    }
                    frame.to_world(&(p * scale))
                })
                .collect();
            Ok(Strand::from_points_unchecked(pts))
        })
        .collect::<Result<Vec<_>>>()?;
    Hairstyle::new(strands)
}

/// One generated dataset sample.
#[derive(Clone, Debug, PartialEq)]
pub struct GroomSample {
    pub hair: Hairstyle,
    pub params: GroomParams,
    pub density: DensityMap,
}

/// Runs the operator pipeline for fixed parameters.
pub fn groom<R: Rng + ?Sized>(
    base: &GuideSet,
    params: &GroomParams,
    surface: &ScalpSurface,
    rng: &mut R,
) -> Result<GroomSample> {
    params.validate()?;
    let mask = ScalpMask::new(TEXTURE_RESOLUTION);
    let density = density_map(&params.density, &mask, params.seed);
    let mut hair = interpolate_with_density(base, params, surface, &density, &mask, rng)?;
    hair = droop(&hair, params.droop);
    let mut intensity = 1.0;
    for round in 0..params.rounds {
        let clump_p = ClumpParams {
            count: params.clump.count << round.min(16),
            strength: params.clump.strength * intensity,
            ..params.clump
        };
        let curl_p = CurlParams {
            radius: params.curl.radius * intensity,
            ..params.curl
        };
        let noise_p = NoiseParams {
            amplitude: params.noise.amplitude * intensity,
            ..params.noise
        };
        hair = clump(&hair, &clump_p, rng);
        hair = curl(&hair, &curl_p, rng);
        hair = perturb_noise(&hair, &noise_p, rng);
        hair = shrinkwrap(&hair, surface, params.margin);
        intensity *= params.round_decay;
    }
    if params.rounds == 0 {
        hair = shrinkwrap(&hair, surface, params.margin);
    }
    Ok(GroomSample {
        hair,
        params: *params,
        density,
    })
}

/// Draws parameters from `spec` and grooms `base` on the default scalp.
/// Fully determined by `(base, spec, seed)`.
pub fn generate_sample(base: &GuideSet, spec: &RandomSpec, seed: u64) -> Result<GroomSample> {
    generate_sample_on(base, &ScalpSurface::default(), spec, seed)
}

pub fn generate_sample_on(
    base: &GuideSet,
    surface: &ScalpSurface,
    spec: &RandomSpec,
    seed: u64,
) -> Result<GroomSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = spec.sample(&mut rng)?;
    params.seed = seed;
    groom(base, &params, surface, &mut rng)
}
