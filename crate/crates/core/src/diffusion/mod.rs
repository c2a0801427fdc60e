//! Preconditioned denoising diffusion numerics.
//!
//! Tensors are `ndarray::ArrayD<f64>`. Closed-form denoisers operate along
//! the last axis; the training objective treats axis 0 of each clean sample
//! as the channel axis (64 latent channels, optionally followed by density).

mod gaussian;

pub use gaussian::{random_covariance, DiagonalMixtureDenoiser, GaussianDenoiser};

use std::io::Write;

use ndarray::{ArrayD, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::codec::ChannelWeights;
use crate::{Error, Result};

pub const DEFAULT_SIGMA_DATA: f64 = 1.0;
pub const DEFAULT_SIGMA_MIN: f64 = 0.002;
pub const DEFAULT_SIGMA_MAX: f64 = 80.0;
pub const DEFAULT_RHO: f64 = 7.0;
pub const DEFAULT_DROP_PROBABILITY: f64 = 0.10;

/// A clean sample, its noise and the noised input.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffusionSample {
    pub y: ArrayD<f64>,
    pub n: ArrayD<f64>,
    pub x: ArrayD<f64>,
    pub sigma: f64,
}

impl DiffusionSample {
    pub fn from_clean(y: ArrayD<f64>, n: ArrayD<f64>, sigma: f64) -> Result<Self> {
        check_shape(y.shape(), n.shape())?;
        check_sigma(sigma)?;
        let x = &y + &n;
        Ok(Self { y, n, x, sigma })
    }

    /// Draws `n ~ N(0, sigma^2 I)`.
    pub fn noised<R: Rng + ?Sized>(y: ArrayD<f64>, sigma: f64, rng: &mut R) -> Result<Self> {
        let n = y.mapv(|_| sigma * rng.sample::<f64, _>(StandardNormal));
        Self::from_clean(y, n, sigma)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrecondCoeffs {
    pub c_skip: f64,
    pub c_in: f64,
    pub c_out: f64,
    pub c_noise: f64,
    pub sigma_data: f64,
}

pub fn precond_coeffs(sigma: f64, sigma_data: f64) -> Result<PrecondCoeffs> {
    check_sigma(sigma)?;
    if !(sigma_data > 0.0 && sigma_data.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "sigma_data must be positive, got {sigma_data}"
        )));
    }
    let s2 = sigma * sigma + sigma_data * sigma_data;
    let root = s2.sqrt();
    Ok(PrecondCoeffs {
        c_skip: sigma_data * sigma_data / s2,
        c_in: 1.0 / root,
        c_out: sigma * sigma_data / root,
        c_noise: sigma.ln() / 4.0,
        sigma_data,
    })
}

/// Inverse of the `c_noise` mapping.
pub fn sigma_from_c_noise(c_noise: f64) -> f64 {
    (4.0 * c_noise).exp()
}

/// The raw network F: takes the scaled input `c_in * x`, `c_noise` and an
/// optional condition vector, returns a tensor of the input's shape.
pub trait Denoiser: Sync {
    fn forward(&self, x_in: &ArrayD<f64>, c_noise: f64, cond: Option<&[f64]>) -> Result<ArrayD<f64>>;
}

impl<F> Denoiser for F
where
    F: Fn(&ArrayD<f64>, f64, Option<&[f64]>) -> ArrayD<f64> + Sync,
{
    fn forward(&self, x_in: &ArrayD<f64>, c_noise: f64, cond: Option<&[f64]>) -> Result<ArrayD<f64>> {
        Ok(self(x_in, c_noise, cond))
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "sigma must be positive and finite, got {sigma}"
        )))
    }
}

fn check_shape(expected: &[usize], got: &[usize]) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::ShapeMismatch {
            expected: expected.to_vec(),
            got: got.to_vec(),
        })
    }
}

/// `c_skip * x + c_out * F(c_in * x, c_noise, cond)`.
pub fn denoise<D: Denoiser + ?Sized>(
    d: &D,
    x: &ArrayD<f64>,
    sigma: f64,
    sigma_data: f64,
    cond: Option<&[f64]>,
) -> Result<ArrayD<f64>> {
    let c = precond_coeffs(sigma, sigma_data)?;
    let f = d.forward(&(x * c.c_in), c.c_noise, cond)?;
    check_shape(x.shape(), f.shape())?;
    Ok(x * c.c_skip + f * c.c_out)
}

/// Per-element squared error of the denoised noisy input against `y`.
pub fn edm_loss<D: Denoiser + ?Sized>(
    d: &D,
    y: &ArrayD<f64>,
    n: &ArrayD<f64>,
    sigma: f64,
    sigma_data: f64,
    cond: Option<&[f64]>,
) -> Result<ArrayD<f64>> {
    check_shape(y.shape(), n.shape())?;
    let out = denoise(d, &(y + n), sigma, sigma_data, cond)?;
    Ok((out - y).mapv(|e| e * e))
}

/// Log-variance `u(sigma)`, piecewise linear in `ln sigma`.
#[derive(Clone, Debug, PartialEq)]
pub struct UncertaintyModel {
    log_sigma: Vec<f64>,
    values: Vec<f64>,
}

impl UncertaintyModel {
    /// `knots` are sigma values (strictly increasing, positive).
    pub fn new(knots: &[f64], values: &[f64]) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::Empty("uncertainty knots"));
        }
        if knots.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: knots.len(),
                got: values.len(),
            });
        }
        if knots.iter().any(|k| !(*k > 0.0 && k.is_finite())) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("knots must be positive and values finite".into()));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("knots must be strictly increasing".into()));
        }
        Ok(Self {
            log_sigma: knots.iter().map(|k| k.ln()).collect(),
            values: values.to_vec(),
        })
    }

    /// Constant `value` over `[sigma_lo, sigma_hi]`.
    pub fn constant(value: f64, sigma_lo: f64, sigma_hi: f64) -> Result<Self> {
        Self::new(&[sigma_lo, sigma_hi], &[value, value])
    }

    pub fn range(&self) -> (f64, f64) {
        (self.log_sigma[0].exp(), self.log_sigma[self.log_sigma.len() - 1].exp())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn eval(&self, sigma: f64) -> Result<f64> {
        check_sigma(sigma)?;
        let t = sigma.ln();
        let last = self.log_sigma.len() - 1;
        // Tolerate rounding of ln(exp(knot)) at the end knots.
        let slack = 1e-12 * (1.0 + t.abs());
        if t < self.log_sigma[0] - slack || t > self.log_sigma[last] + slack {
            let (lo, hi) = self.range();
            return Err(Error::SigmaOutOfRange { sigma, lo, hi });
        }
        if last == 0 {
            return Ok(self.values[0]);
        }
        let i = self.log_sigma[1..last].partition_point(|k| *k <= t);
        let (k0, k1) = (self.log_sigma[i], self.log_sigma[i + 1]);
        let s = ((t - k0) / (k1 - k0)).clamp(0.0, 1.0);
        Ok(self.values[i] + s * (self.values[i + 1] - self.values[i]))
    }
}

/// Per-sigma diagnostics of the weighted objective.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SigmaDiagnostic {
    pub sigma: f64,
    /// Channel-weighted mean loss before uncertainty scaling.
    pub raw_loss: f64,
    pub u: f64,
    /// `raw_loss / e^u + u`.
    pub weighted_loss: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedLoss {
    pub value: f64,
    /// One row per distinct sigma, ascending.
    pub per_sigma: Vec<SigmaDiagnostic>,
}

/// Resolves per-channel weights for `channels` channels. A weight vector
/// one shorter than the channel count gets a trailing density weight
/// (`density_weight`, default the mean of `w`).
pub fn expand_weights(w: &ChannelWeights, channels: usize, density_weight: Option<f64>) -> Result<Vec<f64>> {
    let mut out = w.as_slice().to_vec();
    if out.len() + 1 == channels {
        out.push(density_weight.unwrap_or_else(|| w.mean()));
    }
    if out.len() != channels {
        return Err(Error::LengthMismatch {
            expected: channels,
            got: w.len(),
        });
    }
    Ok(out)
}

/// Channel-weighted spatial mean: `mean_spatial(sum_c w_c L_c)`.
fn channel_weighted_mean(loss: &ArrayD<f64>, weights: &[f64]) -> f64 {
    let spatial = (loss.len() / loss.shape()[0]).max(1) as f64;
    loss.axis_iter(Axis(0))
        .zip(weights)
        .map(|(plane, w)| w * plane.sum())
        .sum::<f64>()
        / spatial
}

/// Mean over the batch of `mean_spatial(sum_c w_c L_c) / e^{u(sigma)} + u(sigma)`.
pub fn weighted_loss<D: Denoiser + ?Sized>(
    d: &D,
    u: &UncertaintyModel,
    w: &ChannelWeights,
    batch: &[DiffusionSample],
    sigma_data: f64,
    density_weight: Option<f64>,
) -> Result<WeightedLoss> {
    if batch.is_empty() {
        return Err(Error::Empty("loss batch"));
    }
    let mut rows: Vec<(f64, f64, f64)> = Vec::with_capacity(batch.len());
    for s in batch {
        if s.y.ndim() == 0 {
            return Err(Error::ShapeMismatch {
                expected: vec![w.len()],
                got: vec![],
            });
        }
        let weights = expand_weights(w, s.y.shape()[0], density_weight)?;
        let uv = u.eval(s.sigma)?;
        let loss = edm_loss(d, &s.y, &s.n, s.sigma, sigma_data, None)?;
        rows.push((s.sigma, channel_weighted_mean(&loss, &weights), uv));
    }
    let value = rows.iter().map(|(_, raw, u)| raw / u.exp() + u).sum::<f64>() / rows.len() as f64;

    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut per_sigma: Vec<SigmaDiagnostic> = Vec::new();
    let mut start = 0;
    while start < rows.len() {
        let sigma = rows[start].0;
        let end = start + rows[start..].iter().take_while(|r| r.0 == sigma).count();
        let raw = rows[start..end].iter().map(|r| r.1).sum::<f64>() / (end - start) as f64;
        let uv = rows[start].2;
        per_sigma.push(SigmaDiagnostic {
            sigma,
            raw_loss: raw,
            u: uv,
            weighted_loss: raw / uv.exp() + uv,
        });
        start = end;
    }
    Ok(WeightedLoss { value, per_sigma })
}

/// Writes diagnostics as CSV with header `sigma,raw_loss,u,weighted_loss`.
pub fn write_diagnostics_csv<W: Write>(rows: &[SigmaDiagnostic], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for r in rows {
        writer.serialize(r)?;
    }
    writer.flush()?;
    Ok(())
}

/// `n_steps` rho-spaced noise levels from `sigma_max` down to `sigma_min`,
/// followed by a terminal 0.
pub fn sigma_schedule(n_steps: usize, sigma_min: f64, sigma_max: f64, rho: f64) -> Result<Vec<f64>> {
    if n_steps == 0 {
        return Err(Error::InvalidInput("schedule needs at least one step".into()));
    }
    if !(sigma_min > 0.0 && sigma_max > sigma_min && sigma_max.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "invalid sigma range [{sigma_min}, {sigma_max}]"
        )));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidInput(format!("rho must be positive, got {rho}")));
    }
    let mut out = Vec::with_capacity(n_steps + 1);
    if n_steps == 1 {
        out.push(sigma_max);
    } else {
        let a = sigma_max.powf(1.0 / rho);
        let b = sigma_min.powf(1.0 / rho);
        for i in 0..n_steps {
            let t = i as f64 / (n_steps - 1) as f64;
            out.push((a + t * (b - a)).powf(rho));
        }
        out[0] = sigma_max;
        out[n_steps - 1] = sigma_min;
    }
    out.push(0.0);
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CfgConfig {
    pub drop_probability: f64,
    pub guidance_scale: f64,
}

impl Default for CfgConfig {
    fn default() -> Self {
        Self {
            drop_probability: DEFAULT_DROP_PROBABILITY,
            guidance_scale: 1.0,
        }
    }
}

impl CfgConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.drop_probability) {
            return Err(Error::InvalidInput(format!(
                "drop probability {} outside [0, 1]",
                self.drop_probability
            )));
        }
        if !(self.guidance_scale >= 0.0 && self.guidance_scale.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "guidance scale must be >= 0, got {}",
                self.guidance_scale
            )));
        }
        Ok(())
    }
}

/// Training-time condition dropout; `None` is the null condition.
pub fn cfg_dropout<'a, R: Rng + ?Sized>(
    cond: &'a [f64],
    rng: &mut R,
    drop_probability: f64,
) -> Result<Option<&'a [f64]>> {
    if !(0.0..=1.0).contains(&drop_probability) {
        return Err(Error::InvalidInput(format!(
            "drop probability {drop_probability} outside [0, 1]"
        )));
    }
    Ok(if rng.random_bool(drop_probability) {
        None
    } else {
        Some(cond)
    })
}

/// Denoised prediction with optional guidance. A scale of exactly 1 with a
/// condition evaluates the conditional branch only.
fn guided<D: Denoiser + ?Sized>(
    d: &D,
    x: &ArrayD<f64>,
    sigma: f64,
    sigma_data: f64,
    cfg: Option<&CfgConfig>,
    cond: Option<&[f64]>,
) -> Result<ArrayD<f64>> {
    match (cfg, cond) {
        (Some(c), Some(cv)) if c.guidance_scale != 1.0 => {
            let un = denoise(d, x, sigma, sigma_data, None)?;
            let co = denoise(d, x, sigma, sigma_data, Some(cv))?;
            Ok(&un + &((co - &un) * c.guidance_scale))
        }
        _ => denoise(d, x, sigma, sigma_data, cond),
    }
}

/// Deterministic Heun integration of the probability-flow ODE along
/// `schedule` (which must end in 0), starting from `x ~ N(0, sigma_0^2 I)`.
pub fn heun_sample<D: Denoiser + ?Sized, R: Rng + ?Sized>(
    d: &D,
    schedule: &[f64],
    shape: &[usize],
    rng: &mut R,
    sigma_data: f64,
    cfg: Option<&CfgConfig>,
    cond: Option<&[f64]>,
) -> Result<ArrayD<f64>> {
    if schedule.len() < 2 {
        return Err(Error::InvalidInput("schedule needs at least two entries".into()));
    }
    if *schedule.last().unwrap() != 0.0 || schedule[..schedule.len() - 1].iter().any(|s| !(*s > 0.0)) {
        return Err(Error::InvalidInput("schedule must be positive and end in 0".into()));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput("schedule must be strictly decreasing".into()));
    }
    if let Some(c) = cfg {
        c.validate()?;
    }
    let s0 = schedule[0];
    let mut x = ArrayD::from_shape_simple_fn(shape.to_vec(), || s0 * rng.sample::<f64, _>(StandardNormal));
    for w in schedule.windows(2) {
        let (s, s_next) = (w[0], w[1]);
        let d_cur = (&x - &guided(d, &x, s, sigma_data, cfg, cond)?) / s;
        let euler = &x + &(&d_cur * (s_next - s));
        if s_next == 0.0 {
            x = euler;
        } else {
            let d_next = (&euler - &guided(d, &euler, s_next, sigma_data, cfg, cond)?) / s_next;
            x = &x + &((d_cur + d_next) * (0.5 * (s_next - s)));
        }
    }
    Ok(x)
}
