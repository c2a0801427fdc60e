//! Pyramid hole filling.
//!
//! Pull: each coarser level averages the valid texels among its 2x2 children;
//! a parent is valid when any child is. Push: walking back down, every
//! invalid texel takes the bilinear upsample of the (already complete) next
//! coarser level. Valid texels are never rewritten, so the result preserves
//! them bit-exactly and every fill is a convex combination of valid inputs.

use rayon::prelude::*;

use super::ScalpTexture;
use crate::scalp::ScalpMask;
use crate::{Error, Result};

struct Level {
    res: usize,
    values: Vec<f64>,
    valid: Vec<bool>,
}

fn pull(fine: &Level, channels: usize) -> Level {
    let res = fine.res.div_ceil(2);
    let mut values = vec![0.0; res * res * channels];
    let mut valid = vec![false; res * res];
    values
        .par_chunks_mut(res * channels)
        .zip(valid.par_chunks_mut(res))
        .enumerate()
        .for_each(|(y, (row_vals, row_valid))| {
            for x in 0..res {
                let out = &mut row_vals[x * channels..(x + 1) * channels];
                let mut count = 0usize;
                for (cx, cy) in [
                    (2 * x, 2 * y),
                    (2 * x + 1, 2 * y),
                    (2 * x, 2 * y + 1),
                    (2 * x + 1, 2 * y + 1),
                ] {
                    if cx >= fine.res || cy >= fine.res {
                        continue;
                    }
                    let idx = cy * fine.res + cx;
                    if !fine.valid[idx] {
                        continue;
                    }
                    count += 1;
                    for (o, v) in out.iter_mut().zip(&fine.values[idx * channels..(idx + 1) * channels]) {
                        *o += v;
                    }
                }
                if count > 0 {
                    let inv = count as f64;
                    out.iter_mut().for_each(|o| *o /= inv);
                    row_valid[x] = true;
                }
            }
        });
    Level { res, values, valid }
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    // Exact when a == b.
    a + t * (b - a)
}

/// Fills every invalid texel of `fine` from the complete level `coarse`.
fn push(fine: &mut Level, coarse: &Level, channels: usize) {
    let cres = coarse.res;
    let fres = fine.res;
    let coord = |i: usize| -> (usize, usize, f64) {
        let c = ((i as f64 + 0.5) / 2.0 - 0.5).clamp(0.0, (cres - 1) as f64);
        let i0 = (c.floor() as usize).min(cres - 1);
        let i1 = (i0 + 1).min(cres - 1);
        (i0, i1, c - i0 as f64)
    };
    fine.values
        .par_chunks_mut(fres * channels)
        .zip(fine.valid.par_chunks_mut(fres))
        .enumerate()
        .for_each(|(y, (row_vals, row_valid))| {
            let (y0, y1, fy) = coord(y);
            for x in 0..fres {
                if row_valid[x] {
                    continue;
                }
                let (x0, x1, fx) = coord(x);
                let tap = |xx: usize, yy: usize| {
                    let idx = yy * cres + xx;
                    &coarse.values[idx * channels..(idx + 1) * channels]
                };
                let (a, b, c, d) = (tap(x0, y0), tap(x1, y0), tap(x0, y1), tap(x1, y1));
                let out = &mut row_vals[x * channels..(x + 1) * channels];
                for k in 0..channels {
                    let top = lerp(a[k], b[k], fx);
                    let bottom = lerp(c[k], d[k], fx);
                    out[k] = lerp(top, bottom, fy);
                }
                row_valid[x] = true;
            }
        });
}

/// Completes a sparse texture over `mask`. Originally valid texels keep their
/// exact values; every masked texel is valid afterwards. Invalid texels outside
/// the mask are cleared to zero.
pub fn push_pull(raw: &ScalpTexture, mask: &ScalpMask) -> Result<ScalpTexture> {
    let res = raw.resolution();
    let channels = raw.channels();
    if mask.resolution() != res {
        return Err(Error::LengthMismatch {
            expected: res,
            got: mask.resolution(),
        });
    }
    if raw.valid_count() == 0 {
        return Err(Error::NoValidTexels);
    }

    let base = Level {
        res,
        values: raw.data().iter().map(|v| *v as f64).collect(),
        valid: raw.validity().to_vec(),
    };
    let mut levels = vec![base];
    while levels.last().unwrap().res > 1 {
        let next = pull(levels.last().unwrap(), channels);
        levels.push(next);
    }
    for k in (0..levels.len() - 1).rev() {
        let (lower, upper) = levels.split_at_mut(k + 1);
        push(&mut lower[k], &upper[0], channels);
    }

    let filled = &levels[0];
    let mut data = raw.data().to_vec();
    let mut validity = raw.validity().to_vec();
    for idx in 0..res * res {
        if raw.validity()[idx] {
            continue;
        }
        let out = &mut data[idx * channels..(idx + 1) * channels];
        if mask.cells()[idx] {
            for (o, v) in out.iter_mut().zip(&filled.values[idx * channels..(idx + 1) * channels]) {
                *o = *v as f32;
            }
            validity[idx] = true;
        } else {
            out.fill(0.0);
        }
    }
    ScalpTexture::from_parts(res, channels, data, validity)
}
