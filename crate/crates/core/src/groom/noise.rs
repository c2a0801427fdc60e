//! Hash-based vector value noise.
//!
//! Lattice vectors lie in the unit ball and are blended with smoothstep
//! trilinear weights, so every sample also lies in the unit ball.

use crate::util::{hash2, unit_f64};
use crate::Vec3;

#[derive(Clone, Copy, Debug)]
pub struct ValueNoise {
    seed: u64,
}

impl ValueNoise {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    fn lattice(&self, x: i64, y: i64, z: i64) -> Vec3 {
        let key = (x as u64).wrapping_mul(0x8CB9_2BA7_2F3D_8DD7)
            ^ (y as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
            ^ (z as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93);
        let h0 = hash2(self.seed, key);
        let h1 = hash2(h0, 1);
        let h2 = hash2(h0, 2);
        let v = Vec3::new(
            2.0 * unit_f64(h0) - 1.0,
            2.0 * unit_f64(h1) - 1.0,
            2.0 * unit_f64(h2) - 1.0,
        );
        let n = v.norm();
        if n > 1.0 {
            v / n
        } else {
            v
        }
    }

    pub fn sample(&self, p: &Vec3) -> Vec3 {
        let fx = p.x.floor();
        let fy = p.y.floor();
        let fz = p.z.floor();
        let (ix, iy, iz) = (fx as i64, fy as i64, fz as i64);
        let smooth = |t: f64| t * t * (3.0 - 2.0 * t);
        let (tx, ty, tz) = (smooth(p.x - fx), smooth(p.y - fy), smooth(p.z - fz));
        let mut acc = Vec3::zeros();
        for dz in 0..2 {
            let wz = if dz == 0 { 1.0 - tz } else { tz };
            for dy in 0..2 {
                let wy = if dy == 0 { 1.0 - ty } else { ty };
                for dx in 0..2 {
                    let wx = if dx == 0 { 1.0 - tx } else { tx };
                    acc += self.lattice(ix + dx, iy + dy, iz + dz) * (wx * wy * wz);
                }
            }
        }
        acc
    }

    /// Sum of `octaves` layers; octave `o` has frequency `frequency * 2^o` and
    /// weight `gain^o`.
    pub fn fractal(&self, p: &Vec3, frequency: f64, octaves: u32, gain: f64) -> Vec3 {
        let mut acc = Vec3::zeros();
        let mut f = frequency;
        let mut w = 1.0;
        for o in 0..octaves {
            let layer = ValueNoise::new(hash2(self.seed, 0xA5A5 + o as u64));
            acc += layer.sample(&(p * f)) * w;
            f *= 2.0;
            w *= gain;
        }
        acc
    }
}
