//! Strand geometry: polylines, forward-difference derivatives, arc-length
//! resampling and the strand reconstruction loss.

use crate::{Error, Result, Vec3};

/// A hair strand stored root-first as a polyline of 3D points (meters).
#[derive(Clone, Debug, PartialEq)]
pub struct Strand {
    points: Vec<Vec3>,
}

impl Strand {
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Sizing(format!(
                "a strand needs at least 2 points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidInput("strand has non-finite coordinates".into()));
        }
        Ok(Self { points })
    }

    /// Builds a strand without validation. Callers guarantee `len >= 2` and
    /// finite coordinates.
    pub(crate) fn from_points_unchecked(points: Vec<Vec3>) -> Self {
        debug_assert!(points.len() >= 2);
        Self { points }
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn points_mut(&mut self) -> &mut [Vec3] {
        &mut self.points
    }

    pub fn into_points(self) -> Vec<Vec3> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn root(&self) -> Vec3 {
        self.points[0]
    }

    pub fn arc_length(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    pub fn translated(&self, offset: Vec3) -> Self {
        Self {
            points: self.points.iter().map(|p| p + offset).collect(),
        }
    }
}

/// Forward differences of a strand: `directions[i] = p[i+1] - p[i]` and
/// `curvatures[i] = directions[i+1] - directions[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StrandDerivatives {
    pub directions: Vec<Vec3>,
    pub curvatures: Vec<Vec3>,
}

pub fn derivatives(strand: &Strand) -> Result<StrandDerivatives> {
    if strand.len() < 3 {
        return Err(Error::Sizing(format!(
            "derivatives need at least 3 points, got {}",
            strand.len()
        )));
    }
    let directions: Vec<Vec3> = strand.points.windows(2).map(|w| w[1] - w[0]).collect();
    let curvatures = directions.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(StrandDerivatives { directions, curvatures })
}

/// Resamples a polyline to `target_count` points equally spaced in arc length.
/// Both endpoints are reproduced exactly.
pub fn resample(strand: &Strand, target_count: usize) -> Result<Strand> {
    if target_count < 2 {
        return Err(Error::Sizing(format!(
            "resample target must be at least 2, got {target_count}"
        )));
    }
    let pts = &strand.points;
    let mut cumulative = Vec::with_capacity(pts.len());
    cumulative.push(0.0);
    for w in pts.windows(2) {
        let last = *cumulative.last().unwrap();
        cumulative.push(last + (w[1] - w[0]).norm());
    }
    let total = *cumulative.last().unwrap();
    if total <= 0.0 {
        return Err(Error::DegenerateStrand);
    }

    let mut out = Vec::with_capacity(target_count);
    out.push(pts[0]);
    let mut seg = 0;
    for k in 1..target_count - 1 {
        let s = total * k as f64 / (target_count - 1) as f64;
        while seg + 1 < pts.len() - 1 && cumulative[seg + 1] < s {
            seg += 1;
        }
        let span = cumulative[seg + 1] - cumulative[seg];
        let t = if span > 0.0 {
            ((s - cumulative[seg]) / span).clamp(0.0, 1.0)
        } else {
            0.0
        };
        out.push(pts[seg] + (pts[seg + 1] - pts[seg]) * t);
    }
    out.push(pts[pts.len() - 1]);
    Ok(Strand { points: out })
}

/// Weights of the strand data loss.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossConfig {
    pub lambda_dir: f64,
    pub lambda_cur: f64,
    /// Kept for configuration parity with variational codecs; the linear codec
    /// has no KL term.
    pub lambda_kl: f64,
    /// Average each term over its element count instead of summing.
    pub average: bool,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            lambda_dir: 2e-3,
            lambda_cur: 7.8e-2,
            lambda_kl: 6e-4,
            average: false,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = [self.lambda_dir, self.lambda_cur, self.lambda_kl]
            .iter()
            .all(|w| w.is_finite() && *w >= 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput("loss weights must be finite and >= 0".into()))
        }
    }
}

fn l1(a: &Vec3, b: &Vec3) -> f64 {
    (a.x - b.x).abs() + (a.y - b.y).abs() + (a.z - b.z).abs()
}

/// Position + weighted direction + weighted curvature L1 loss between two strands.
pub fn strand_data_loss(gt: &Strand, pred: &Strand, cfg: &LossConfig) -> Result<f64> {
    if gt.len() != pred.len() {
        return Err(Error::LengthMismatch {
            expected: gt.len(),
            got: pred.len(),
        });
    }
    let dg = derivatives(gt)?;
    let dp = derivatives(pred)?;
    Ok(data_loss_terms(gt.points(), pred.points(), &dg, &dp, cfg))
}

fn data_loss_terms(
    gt: &[Vec3],
    pred: &[Vec3],
    dg: &StrandDerivatives,
    dp: &StrandDerivatives,
    cfg: &LossConfig,
) -> f64 {
    let sum_l1 = |a: &[Vec3], b: &[Vec3]| -> f64 {
        let s: f64 = a.iter().zip(b).map(|(x, y)| l1(x, y)).sum();
        if cfg.average {
            s / a.len() as f64
        } else {
            s
        }
    };
    sum_l1(gt, pred)
        + cfg.lambda_dir * sum_l1(&dg.directions, &dp.directions)
        + cfg.lambda_cur * sum_l1(&dg.curvatures, &dp.curvatures)
}

/// A collection of strands sharing one point count.
#[derive(Clone, Debug, PartialEq)]
pub struct Hairstyle {
    strands: Vec<Strand>,
}

impl Hairstyle {
    pub fn new(strands: Vec<Strand>) -> Result<Self> {
        let first = strands.first().ok_or(Error::Empty("hairstyle has no strands"))?;
        let l = first.len();
        if let Some(bad) = strands.iter().find(|s| s.len() != l) {
            return Err(Error::LengthMismatch {
                expected: l,
                got: bad.len(),
            });
        }
        Ok(Self { strands })
    }

    pub fn strands(&self) -> &[Strand] {
        &self.strands
    }

    pub fn strands_mut(&mut self) -> &mut [Strand] {
        &mut self.strands
    }

    pub fn into_strands(self) -> Vec<Strand> {
        self.strands
    }

    pub fn len(&self) -> usize {
        self.strands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strands.is_empty()
    }

    pub fn points_per_strand(&self) -> usize {
        self.strands[0].len()
    }

    /// Applies `f` to each strand in parallel, keeping order.
    pub(crate) fn map_strands<F>(&self, f: F) -> Self
    where
        F: Fn(usize, &Strand) -> Strand + Sync,
    {
        use rayon::prelude::*;
        Self {
            strands: self.strands.par_iter().enumerate().map(|(i, s)| f(i, s)).collect(),
        }
    }
}

#[cfg(test)]
pub(crate) mod test_shapes {
    use super::*;

    /// Circular helix around +z sampled at uniform parameter steps.
    pub fn helix(radius: f64, pitch: f64, turns: f64, count: usize) -> Strand {
        let pts = (0..count)
            .map(|i| {
                let t = turns * std::f64::consts::TAU * i as f64 / (count - 1) as f64;
                Vec3::new(radius * t.cos(), radius * t.sin(), pitch * t / std::f64::consts::TAU)
            })
            .collect();
        Strand::new(pts).unwrap()
    }

    pub fn straight(count: usize, spacing: f64) -> Strand {
        Strand::new((0..count).map(|i| Vec3::new(0.0, 0.0, spacing * i as f64)).collect()).unwrap()
    }
}
