//! Linear strand codec.
//!
//! Strands are canonicalized into their root frames, flattened to `3 * L`
//! scalars and projected onto the top [`LATENT_DIM`] principal directions of a
//! training corpus. Latents are scale-normalized so each channel has unit
//! variance over the corpus, and the all-zero code decodes to the corpus mean.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::scalp::{RootFrame, ScalpSurface};
use crate::strand::{strand_data_loss, LossConfig, Strand};
use crate::{Error, Result, Vec3, LATENT_DIM};

/// Default latent perturbation used to derive channel weights.
pub const DEFAULT_EPSILON: f64 = 0.8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatentCode(pub [f64; LATENT_DIM]);

impl LatentCode {
    pub fn zeros() -> Self {
        Self([0.0; LATENT_DIM])
    }

    pub fn unit(index: usize, magnitude: f64) -> Self {
        let mut z = [0.0; LATENT_DIM];
        z[index] = magnitude;
        Self(z)
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        let z: [f64; LATENT_DIM] = values.try_into().map_err(|_| Error::LengthMismatch {
            expected: LATENT_DIM,
            got: values.len(),
        })?;
        Ok(Self(z))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// Anything that maps strands to fixed-width latents and back.
pub trait StrandCodec: Sync {
    fn point_count(&self) -> usize;

    /// Encodes a strand given in root-local coordinates.
    fn encode_local(&self, local: &[Vec3]) -> Result<LatentCode>;

    /// Decodes to root-local coordinates.
    fn decode_local(&self, z: &LatentCode) -> Vec<Vec3>;

    fn encode(&self, strand: &Strand, frame: &RootFrame) -> Result<LatentCode> {
        let local: Vec<Vec3> = strand.points().iter().map(|p| frame.to_local(p)).collect();
        self.encode_local(&local)
    }

    fn decode(&self, z: &LatentCode, frame: &RootFrame) -> Strand {
        let pts = self.decode_local(z).iter().map(|p| frame.to_world(p)).collect();
        Strand::from_points_unchecked(pts)
    }
}

/// Principal-component codec fit over a strand corpus.
#[derive(Clone, Debug, PartialEq)]
pub struct CodecModel {
    point_count: usize,
    mean: Vec<f64>,
    /// `LATENT_DIM` rows of `3 * point_count` scalars, orthonormal.
    basis: Vec<f64>,
    scales: Vec<f64>,
    /// Corpus variance captured by each component (zero for completion
    /// directions).
    variances: Vec<f64>,
    total_variance: f64,
}

/// Relative floor applied to component scales so latents stay finite.
const SCALE_FLOOR: f64 = 1e-6;
/// Components below this fraction of the leading eigenvalue are treated as
/// numerically empty and replaced by completion directions.
const RANK_TOLERANCE: f64 = 1e-12;

fn flatten(points: &[Vec3]) -> Vec<f64> {
    points.iter().flat_map(|p| [p.x, p.y, p.z]).collect()
}

fn unflatten(values: &[f64]) -> Vec<Vec3> {
    values.chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect()
}

/// Canonicalizes each strand into the frame of the scalp below its root.
pub fn canonicalize(corpus: &[Strand], surface: &ScalpSurface) -> Result<Vec<Vec<Vec3>>> {
    corpus
        .par_iter()
        .map(|s| {
            let frame = surface.frame_at(&s.root())?;
            Ok(s.points().iter().map(|p| frame.to_local(p)).collect())
        })
        .collect()
}

/// Fits a codec to world-space strands rooted on `surface`.
pub fn fit_codec(corpus: &[Strand], surface: &ScalpSurface) -> Result<CodecModel> {
    if corpus.len() <= LATENT_DIM {
        return Err(Error::CorpusTooSmall {
            needed: LATENT_DIM + 1,
            got: corpus.len(),
        });
    }
    let local = canonicalize(corpus, surface)?;
    CodecModel::fit_local(&local)
}

impl CodecModel {
    /// Fits a codec to strands already expressed in root-local coordinates.
    pub fn fit_local(corpus: &[Vec<Vec3>]) -> Result<Self> {
        let n = corpus.len();
        if n <= LATENT_DIM {
            return Err(Error::CorpusTooSmall {
                needed: LATENT_DIM + 1,
                got: n,
            });
        }
        let point_count = corpus[0].len();
        if point_count < 2 {
            return Err(Error::Sizing("codec strands need at least 2 points".into()));
        }
        if let Some(bad) = corpus.iter().find(|s| s.len() != point_count) {
            return Err(Error::LengthMismatch {
                expected: point_count,
                got: bad.len(),
            });
        }
        let dim = 3 * point_count;
        if dim < LATENT_DIM {
            return Err(Error::Sizing(format!(
                "strands of {point_count} points cannot hold {LATENT_DIM} components"
            )));
        }

        let rows: Vec<Vec<f64>> = corpus.iter().map(|s| flatten(s)).collect();
        let mut mean = vec![0.0; dim];
        for r in &rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let centered = DMatrix::from_fn(n, dim, |i, j| rows[i][j] - mean[j]);
        let total_variance = centered.norm_squared() / (n - 1) as f64;
        if !(total_variance > 0.0) || rows.iter().all(|r| r == &rows[0]) {
            return Err(Error::ZeroVariance);
        }

        let (eigvals, directions) = principal_directions(&centered);
        let lead = eigvals[0].max(0.0);
        let mut basis: Vec<DVector<f64>> = Vec::with_capacity(LATENT_DIM);
        let mut variances = Vec::with_capacity(LATENT_DIM);
        for (lambda, dir) in eigvals.iter().zip(directions) {
            if basis.len() == LATENT_DIM {
                break;
            }
            if *lambda > RANK_TOLERANCE * lead {
                if let Some(v) = orthonormalize(dir, &basis) {
                    basis.push(v);
                    variances.push(lambda / (n - 1) as f64);
                }
            }
        }
        // Complete rank-deficient corpora with orthonormal filler directions.
        let mut axis = 0;
        while basis.len() < LATENT_DIM {
            let e = DVector::from_fn(dim, |i, _| if i == axis { 1.0 } else { 0.0 });
            axis += 1;
            if let Some(v) = orthonormalize(e, &basis) {
                basis.push(v);
                variances.push(0.0);
            }
        }

        let lead_scale = variances[0].sqrt();
        let floor = SCALE_FLOOR * lead_scale;
        let scales: Vec<f64> = variances.iter().map(|v| v.sqrt().max(floor)).collect();
        Ok(Self {
            point_count,
            mean,
            basis: basis.iter().flat_map(|b| b.iter().copied()).collect(),
            scales,
            variances,
            total_variance,
        })
    }

    /// Assembles a model from raw parts, validating shapes.
    pub fn from_parts(
        point_count: usize,
        mean: Vec<f64>,
        basis: Vec<f64>,
        scales: Vec<f64>,
        variances: Vec<f64>,
        total_variance: f64,
    ) -> Result<Self> {
        let dim = 3 * point_count;
        if mean.len() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                got: mean.len(),
            });
        }
        if basis.len() != dim * LATENT_DIM {
            return Err(Error::LengthMismatch {
                expected: dim * LATENT_DIM,
                got: basis.len(),
            });
        }
        if scales.len() != LATENT_DIM || variances.len() != LATENT_DIM {
            return Err(Error::LengthMismatch {
                expected: LATENT_DIM,
                got: scales.len().min(variances.len()),
            });
        }
        if scales.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::InvalidInput("codec scales must be positive".into()));
        }
        Ok(Self {
            point_count,
            mean,
            basis,
            scales,
            variances,
            total_variance,
        })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn basis_row(&self, k: usize) -> &[f64] {
        let dim = 3 * self.point_count;
        &self.basis[k * dim..(k + 1) * dim]
    }

    pub fn basis(&self) -> &[f64] {
        &self.basis
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn scales_mut(&mut self) -> &mut [f64] {
        &mut self.scales
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn total_variance(&self) -> f64 {
        self.total_variance
    }

    pub fn mean_strand_local(&self) -> Vec<Vec3> {
        unflatten(&self.mean)
    }

    /// Largest deviation of the basis Gram matrix from identity.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..LATENT_DIM {
            for j in i..LATENT_DIM {
                let dot: f64 = self
                    .basis_row(i)
                    .iter()
                    .zip(self.basis_row(j))
                    .map(|(a, b)| a * b)
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// Projects a local strand onto the first `components` directions and
    /// reconstructs it.
    pub fn reconstruct_truncated(&self, local: &[Vec3], components: usize) -> Result<Vec<Vec3>> {
        let mut z = self.encode_local(local)?;
        for v in z.0.iter_mut().skip(components) {
            *v = 0.0;
        }
        Ok(self.decode_local(&z))
    }
}

impl StrandCodec for CodecModel {
    fn point_count(&self) -> usize {
        self.point_count
    }

    fn encode_local(&self, local: &[Vec3]) -> Result<LatentCode> {
        if local.len() != self.point_count {
            return Err(Error::LengthMismatch {
                expected: self.point_count,
                got: local.len(),
            });
        }
        let x: Vec<f64> = flatten(local).iter().zip(&self.mean).map(|(v, m)| v - m).collect();
        let mut z = [0.0; LATENT_DIM];
        for (k, zk) in z.iter_mut().enumerate() {
            let dot: f64 = self.basis_row(k).iter().zip(&x).map(|(b, v)| b * v).sum();
            *zk = dot / self.scales[k];
        }
        Ok(LatentCode(z))
    }

    fn decode_local(&self, z: &LatentCode) -> Vec<Vec3> {
        let mut x = self.mean.clone();
        for (k, zk) in z.0.iter().enumerate() {
            if *zk == 0.0 {
                continue;
            }
            let a = zk * self.scales[k];
            for (xi, b) in x.iter_mut().zip(self.basis_row(k)) {
                *xi += a * b;
            }
        }
        unflatten(&x)
    }
}

/// Eigenpairs of the centered corpus covariance, sorted by decreasing
/// eigenvalue. Uses the Gram matrix when there are fewer samples than
/// dimensions.
fn principal_directions(centered: &DMatrix<f64>) -> (Vec<f64>, Vec<DVector<f64>>) {
    let (n, dim) = centered.shape();
    if n <= dim {
        let gram = centered * centered.transpose();
        let eig = SymmetricEigen::new(gram);
        let order = sorted_desc(eig.eigenvalues.as_slice());
        let mut vals = Vec::with_capacity(order.len());
        let mut dirs = Vec::with_capacity(order.len());
        for i in order {
            let lambda = eig.eigenvalues[i];
            vals.push(lambda);
            let u = eig.eigenvectors.column(i);
            let v = centered.transpose() * u;
            let norm = v.norm();
            dirs.push(if norm > 0.0 { v / norm } else { v });
        }
        (vals, dirs)
    } else {
        let cov = centered.transpose() * centered;
        let eig = SymmetricEigen::new(cov);
        let order = sorted_desc(eig.eigenvalues.as_slice());
        let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let dirs = order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
        (vals, dirs)
    }
}

fn sorted_desc(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    order
}

/// Two-pass Gram-Schmidt against `basis`; `None` when `v` is (nearly) in its span.
fn orthonormalize(mut v: DVector<f64>, basis: &[DVector<f64>]) -> Option<DVector<f64>> {
    let start = v.norm();
    if start == 0.0 {
        return None;
    }
    for _ in 0..2 {
        for b in basis {
            let d = b.dot(&v);
            v.axpy(-d, b, 1.0);
        }
    }
    let norm = v.norm();
    (norm > 0.5 * start).then(|| v / norm)
}

/// Normalized per-channel loss weights.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelWeights {
    w: Vec<f64>,
}

impl ChannelWeights {
    pub fn from_raw(raw: &[f64]) -> Result<Self> {
        if raw.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidInput("channel weights must be finite and >= 0".into()));
        }
        let sum: f64 = raw.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::ZeroWeights);
        }
        Ok(Self {
            w: raw.iter().map(|w| w / sum).collect(),
        })
    }

    pub fn uniform(channels: usize) -> Self {
        Self {
            w: vec![1.0 / channels as f64; channels],
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.w.iter().sum::<f64>() / self.w.len() as f64
    }
}

/// Unnormalized weights: the strand data loss between the mean strand and the
/// strand decoded from a single latent channel perturbed by `epsilon`.
pub fn raw_channel_weights<C: StrandCodec + ?Sized>(codec: &C, cfg: &LossConfig, epsilon: f64) -> Result<Vec<f64>> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
    }
    cfg.validate()?;
    let frame = RootFrame::identity();
    let mean = codec.decode(&LatentCode::zeros(), &frame);
    (0..LATENT_DIM)
        .map(|i| {
            let perturbed = codec.decode(&LatentCode::unit(i, epsilon), &frame);
            strand_data_loss(&mean, &perturbed, cfg)
        })
        .collect()
}

pub fn channel_weights<C: StrandCodec + ?Sized>(codec: &C, cfg: &LossConfig, epsilon: f64) -> Result<ChannelWeights> {
    ChannelWeights::from_raw(&raw_channel_weights(codec, cfg, epsilon)?)
}

#[cfg(test)]
pub(crate) mod test_corpus {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    /// Local strands drawn from a linear model with `rank` smooth factors.
    pub fn low_rank(rank: usize, count: usize, points: usize, seed: u64) -> Vec<Vec<Vec3>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let factors: Vec<Vec<Vec3>> = (0..rank)
            .map(|k| {
                let fx = rng.random_range(0.5..3.0);
                let fy = rng.random_range(0.5..3.0);
                (0..points)
                    .map(|i| {
                        let t = i as f64 / (points - 1) as f64;
                        Vec3::new(
                            (fx * t * (k + 1) as f64).sin() * t,
                            (fy * t * (k + 2) as f64).cos() * t - t,
                            t * t * (k as f64 * 0.3 + 0.1),
                        ) * 0.01
                    })
                    .collect()
            })
            .collect();
        (0..count)
            .map(|_| {
                let coeffs: Vec<f64> = (0..rank)
                    .map(|k| rng.sample::<f64, _>(StandardNormal) / (1.0 + k as f64))
                    .collect();
                (0..points)
                    .map(|i| {
                        let t = i as f64 / (points - 1) as f64;
                        let mut p = Vec3::new(0.0, 0.0, 0.2 * t);
                        for (c, f) in coeffs.iter().zip(&factors) {
                            p += f[i] * *c;
                        }
                        p
                    })
                    .collect()
            })
            .collect()
    }

    /// Full-rank corpus of wavy strands, root at the origin.
    pub fn wavy(count: usize, points: usize, seed: u64) -> Vec<Vec<Vec3>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let len = rng.random_range(0.05..0.3);
                let amp = rng.random_range(0.0..0.02);
                let freq = rng.random_range(1.0..12.0);
                let phase = rng.random_range(0.0..std::f64::consts::TAU);
                let bend = rng.random_range(-0.5..0.5);
                let jitter: Vec<f64> = (0..points).map(|_| rng.random_range(-1e-3..1e-3)).collect();
                (0..points)
                    .map(|i| {
                        let t = i as f64 / (points - 1) as f64;
                        let a = freq * std::f64::consts::TAU * t + phase;
                        Vec3::new(
                            amp * a.cos() * t + bend * len * t * t,
                            amp * a.sin() * t + jitter[i] * t,
                            len * t,
                        )
                    })
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::test_corpus::*;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model() -> CodecModel {
        CodecModel::fit_local(&wavy(300, 64, 1)).unwrap()
    }

    #[test]
    fn basis_and_scales_invariants() {
        let m = model();
        assert!(m.orthonormality_error() < 1e-8);
        assert!(m.scales().iter().all(|s| *s > 0.0));
        assert!(m.scales().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn identical_corpus_is_rejected() {
        let s: Vec<Vec3> = (0..32).map(|i| Vec3::new(0.0, 0.0, i as f64 * 0.01)).collect();
        let corpus = vec![s; 100];
        assert!(matches!(CodecModel::fit_local(&corpus), Err(Error::ZeroVariance)));
    }

    #[test]
    fn small_corpus_is_rejected() {
        let corpus = wavy(64, 32, 2);
        assert!(matches!(
            CodecModel::fit_local(&corpus),
            Err(Error::CorpusTooSmall { needed: 65, got: 64 })
        ));
    }

    #[test]
    fn low_rank_spectrum() {
        let m = CodecModel::fit_local(&low_rank(10, 400, 64, 3)).unwrap();
        let tail: f64 = m.variances()[10..].iter().sum();
        assert!(
            tail <= 1e-8 * m.total_variance(),
            "tail fraction {}",
            tail / m.total_variance()
        );
        assert!(m.orthonormality_error() < 1e-8);
        assert!(m.scales().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn covariance_route_matches_gram_route() {
        // 40 points -> 120 dims; 150 samples takes the covariance route,
        // the first 100 of them the Gram route.
        let corpus = wavy(150, 40, 9);
        let big = CodecModel::fit_local(&corpus).unwrap();
        assert!(big.orthonormality_error() < 1e-8);
        let small = CodecModel::fit_local(&corpus[..100]).unwrap();
        assert!(small.orthonormality_error() < 1e-8);
        let sum: f64 = big.variances().iter().sum();
        assert!(sum <= big.total_variance() * (1.0 + 1e-9));
    }

    #[test]
    fn mean_encodes_to_zero() {
        let m = model();
        let z = m.encode_local(&m.mean_strand_local()).unwrap();
        assert!(z.0.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn basis_alignment() {
        let m = model();
        let mut x = m.mean().to_vec();
        for (xi, b) in x.iter_mut().zip(m.basis_row(3)) {
            *xi += m.scales()[3] * b;
        }
        let z = m.encode_local(&unflatten(&x)).unwrap();
        for (k, v) in z.0.iter().enumerate() {
            let want = if k == 3 { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-8, "z[{k}] = {v}");
        }
    }

    #[test]
    fn latent_round_trip() {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let frame = RootFrame::from_normal(Vec3::new(0.01, -0.02, 0.09), Vec3::new(0.2, -0.1, 1.0), Vec3::x());
        for _ in 0..1000 {
            let z = LatentCode(std::array::from_fn(|_| rng.random_range(-3.0..3.0)));
            let back = m.encode(&m.decode(&z, &frame), &frame).unwrap();
            for (a, b) in z.0.iter().zip(&back.0) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn decode_zero_places_root_at_origin() {
        let m = model();
        let frame = RootFrame::from_normal(Vec3::new(0.3, 0.1, -0.2), Vec3::y(), Vec3::x());
        let s = m.decode(&LatentCode::zeros(), &frame);
        assert_eq!(s.root(), frame.origin);
    }

    #[test]
    fn decode_is_affine() {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = LatentCode(std::array::from_fn(|_| rng.random_range(-1.0..1.0)));
        let b = LatentCode(std::array::from_fn(|_| rng.random_range(-1.0..1.0)));
        let ab = LatentCode(std::array::from_fn(|i| a.0[i] + b.0[i]));
        let (da, db, d0, dab) = (
            m.decode_local(&a),
            m.decode_local(&b),
            m.decode_local(&LatentCode::zeros()),
            m.decode_local(&ab),
        );
        for i in 0..da.len() {
            assert!((da[i] + db[i] - d0[i] - dab[i]).norm() < 1e-9);
        }
    }

    #[test]
    fn truncation_is_monotone() {
        let corpus = wavy(300, 64, 1);
        let m = CodecModel::fit_local(&corpus).unwrap();
        let cfg = LossConfig::default();
        for s in corpus.iter().take(20) {
            let gt = Strand::new(s.clone()).unwrap();
            let mut last = f64::INFINITY;
            for k in [1, 4, 8, 16, 32, 48, 64] {
                let rec = Strand::new(m.reconstruct_truncated(s, k).unwrap()).unwrap();
                // Orthogonal projection error in L2 is monotone in the
                // component count.
                let l2: f64 = s.iter().zip(rec.points()).map(|(a, b)| (a - b).norm_squared()).sum();
                assert!(l2 <= last * (1.0 + 1e-9) + 1e-30);
                last = l2;
            }
            let full = Strand::new(m.reconstruct_truncated(s, 64).unwrap()).unwrap();
            let half = Strand::new(m.reconstruct_truncated(s, 32).unwrap()).unwrap();
            let lf = strand_data_loss(&gt, &full, &cfg).unwrap();
            let lh = strand_data_loss(&gt, &half, &cfg).unwrap();
            assert!(lf <= lh * (1.0 + 1e-6), "{lf} > {lh}");
        }
    }

    #[test]
    fn in_span_strands_reconstruct() {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let cfg = LossConfig::default();
        for _ in 0..50 {
            let mut x = m.mean().to_vec();
            for k in 0..LATENT_DIM {
                let c = rng.random_range(-2.0..2.0) * m.scales()[k];
                for (xi, b) in x.iter_mut().zip(m.basis_row(k)) {
                    *xi += c * b;
                }
            }
            let s = Strand::new(unflatten(&x)).unwrap();
            let frame = RootFrame::identity();
            let rec = m.decode(&m.encode(&s, &frame).unwrap(), &frame);
            assert!(strand_data_loss(&s, &rec, &cfg).unwrap() <= 1e-6);
        }
    }

    #[test]
    fn encoding_is_rigid_invariant() {
        let m = model();
        let corpus = wavy(5, 64, 77);
        let frame = RootFrame::identity();
        let moved = RootFrame::from_normal(
            Vec3::new(0.5, -0.3, 0.2),
            Vec3::new(-0.4, 0.7, 0.3),
            Vec3::new(0.1, 0.2, 0.9),
        );
        for local in corpus {
            let s = Strand::new(local.clone()).unwrap();
            let placed = Strand::new(local.iter().map(|p| moved.to_world(p)).collect()).unwrap();
            let a = m.encode(&s, &frame).unwrap();
            let b = m.encode(&placed, &moved).unwrap();
            for (x, y) in a.0.iter().zip(&b.0) {
                assert!((x - y).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn length_mismatch_rejected() {
        let m = model();
        let s = Strand::new(vec![Vec3::zeros(), Vec3::z()]).unwrap();
        assert!(matches!(
            m.encode(&s, &RootFrame::identity()),
            Err(Error::LengthMismatch { expected: 64, got: 2 })
        ));
    }

    #[test]
    fn weights_sum_to_one_and_match_closed_form() {
        let m = model();
        let cfg = LossConfig::default();
        let w = channel_weights(&m, &cfg, DEFAULT_EPSILON).unwrap();
        assert_eq!(DEFAULT_EPSILON, 0.8);
        assert!((w.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);

        // Closed form from linearity: the perturbation displaces the mean by
        // epsilon * scale_i * basis_i, so the loss only depends on that offset.
        let raw: Vec<f64> = (0..LATENT_DIM)
            .map(|i| {
                let offset: Vec<Vec3> = unflatten(m.basis_row(i))
                    .into_iter()
                    .map(|b| b * (DEFAULT_EPSILON * m.scales()[i]))
                    .collect();
                let pos: f64 = offset.iter().map(|o| o.abs().sum()).sum();
                let dirs: Vec<Vec3> = offset.windows(2).map(|w| w[1] - w[0]).collect();
                let dir: f64 = dirs.iter().map(|d| d.abs().sum()).sum();
                let cur: f64 = dirs.windows(2).map(|w| (w[1] - w[0]).abs().sum()).sum();
                pos + cfg.lambda_dir * dir + cfg.lambda_cur * cur
            })
            .collect();
        let sum: f64 = raw.iter().sum();
        for (got, want) in w.as_slice().iter().zip(&raw) {
            assert!((got - want / sum).abs() <= 1e-12 * (want / sum).max(1e-3));
        }
    }

    #[test]
    fn weight_grows_with_scale() {
        let mut m = model();
        let cfg = LossConfig::default();
        let before = raw_channel_weights(&m, &cfg, 0.8).unwrap();
        m.scales_mut()[5] *= 1.5;
        let after = raw_channel_weights(&m, &cfg, 0.8).unwrap();
        assert!(after[5] > before[5]);
    }

    #[test]
    fn weight_errors() {
        let m = model();
        assert!(channel_weights(&m, &LossConfig::default(), 0.0).is_err());
        assert!(matches!(ChannelWeights::from_raw(&[0.0; 64]), Err(Error::ZeroWeights)));
    }
}
