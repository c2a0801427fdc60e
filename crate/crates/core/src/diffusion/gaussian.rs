//! Closed-form posterior-mean denoisers.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array2, ArrayD, Axis, Ix2};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{precond_coeffs, sigma_from_c_noise, Denoiser};
use crate::{Error, Result};

/// Exact denoiser for data `N(mu + M c, Sigma)`. `forward` is defined so the
/// preconditioned composite equals `mu + Sigma (Sigma + sigma^2 I)^-1 (x - mu)`.
#[derive(Clone, Debug)]
pub struct GaussianDenoiser {
    mean: Vec<f64>,
    eigvecs: Array2<f64>,
    eigvals: Vec<f64>,
    cond_map: Option<Array2<f64>>,
    sigma_data: f64,
}

impl GaussianDenoiser {
    /// `covariance` is row-major `dim x dim`.
    pub fn new(mean: Vec<f64>, covariance: &[f64], sigma_data: f64) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 {
            return Err(Error::Empty("gaussian mean"));
        }
        if covariance.len() != dim * dim {
            return Err(Error::LengthMismatch {
                expected: dim * dim,
                got: covariance.len(),
            });
        }
        let m = DMatrix::from_row_slice(dim, dim, covariance);
        if (&m - m.transpose()).abs().max() > 1e-12 * (1.0 + m.abs().max()) {
            return Err(Error::InvalidInput("covariance is not symmetric".into()));
        }
        let eig = SymmetricEigen::new(m);
        let top = eig.eigenvalues.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if eig.eigenvalues.iter().any(|l| *l < -1e-10 * top.max(1e-300)) {
            return Err(Error::InvalidInput("covariance is not positive semi-definite".into()));
        }
        let eigvecs = Array2::from_shape_fn((dim, dim), |(i, j)| eig.eigenvectors[(i, j)]);
        Ok(Self {
            mean,
            eigvecs,
            eigvals: eig.eigenvalues.iter().map(|l| l.max(0.0)).collect(),
            cond_map: None,
            sigma_data,
        })
    }

    pub fn diagonal(mean: Vec<f64>, variances: &[f64], sigma_data: f64) -> Result<Self> {
        let dim = mean.len();
        if variances.len() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                got: variances.len(),
            });
        }
        let mut cov = vec![0.0; dim * dim];
        for (i, v) in variances.iter().enumerate() {
            cov[i * dim + i] = *v;
        }
        Self::new(mean, &cov, sigma_data)
    }

    /// Conditional mean shift `M c`, with `M` row-major `dim x cond_len`.
    pub fn with_condition(mut self, map: &[f64], cond_len: usize) -> Result<Self> {
        let dim = self.mean.len();
        if map.len() != dim * cond_len {
            return Err(Error::LengthMismatch {
                expected: dim * cond_len,
                got: map.len(),
            });
        }
        self.cond_map = Some(Array2::from_shape_vec((dim, cond_len), map.to_vec()).expect("checked length"));
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean_for(&self, cond: Option<&[f64]>) -> Result<Vec<f64>> {
        match (cond, &self.cond_map) {
            (Some(c), Some(m)) => {
                if c.len() != m.ncols() {
                    return Err(Error::LengthMismatch {
                        expected: m.ncols(),
                        got: c.len(),
                    });
                }
                Ok(self
                    .mean
                    .iter()
                    .enumerate()
                    .map(|(i, mu)| mu + m.row(i).iter().zip(c).map(|(a, b)| a * b).sum::<f64>())
                    .collect())
            }
            _ => Ok(self.mean.clone()),
        }
    }

    /// Posterior mean of the clean sample given `x = y + N(0, sigma^2 I)`,
    /// applied to every row along the last axis.
    pub fn posterior_mean(&self, x: &ArrayD<f64>, sigma: f64, cond: Option<&[f64]>) -> Result<ArrayD<f64>> {
        let dim = self.dim();
        if x.ndim() == 0 || x.shape()[x.ndim() - 1] != dim {
            return Err(Error::ShapeMismatch {
                expected: vec![dim],
                got: x.shape().to_vec(),
            });
        }
        let mu = self.mean_for(cond)?;
        let rows = x.len() / dim;
        let mut centered = x
            .to_shape((rows, dim))
            .expect("row-major reshape")
            .into_owned()
            .into_dimensionality::<Ix2>()
            .expect("2d");
        for mut row in centered.axis_iter_mut(Axis(0)) {
            row.iter_mut().zip(&mu).for_each(|(v, m)| *v -= m);
        }
        let s2 = sigma * sigma;
        let mut proj = centered.dot(&self.eigvecs);
        for mut row in proj.axis_iter_mut(Axis(0)) {
            row.iter_mut().zip(&self.eigvals).for_each(|(v, l)| *v *= l / (l + s2));
        }
        let mut out = proj.dot(&self.eigvecs.t());
        for mut row in out.axis_iter_mut(Axis(0)) {
            row.iter_mut().zip(&mu).for_each(|(v, m)| *v += m);
        }
        Ok(out.into_shape_with_order(x.shape().to_vec()).expect("same size"))
    }
}

/// Row-major covariance `Q diag(lambda) Q^T` with a random rotation `Q` and
/// eigenvalues log-uniform in `[min_var, max_var]`.
pub fn random_covariance<R: Rng + ?Sized>(dim: usize, min_var: f64, max_var: f64, rng: &mut R) -> Result<Vec<f64>> {
    if dim == 0 || !(min_var > 0.0 && max_var >= min_var) {
        return Err(Error::InvalidInput(format!(
            "need dim >= 1 and 0 < min_var <= max_var, got {dim}, [{min_var}, {max_var}]"
        )));
    }
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = g.qr().q();
    let (lo, hi) = (min_var.ln(), max_var.ln());
    let lambda: Vec<f64> = (0..dim).map(|_| (lo + (hi - lo) * rng.random::<f64>()).exp()).collect();
    let mut out = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let v: f64 = (0..dim).map(|k| q[(i, k)] * lambda[k] * q[(j, k)]).sum();
            out[i * dim + j] = v;
            out[j * dim + i] = v;
        }
    }
    Ok(out)
}

fn raw_from_composite(composite: ArrayD<f64>, x: &ArrayD<f64>, c_skip: f64, c_out: f64) -> ArrayD<f64> {
    (composite - x * c_skip) / c_out
}

impl Denoiser for GaussianDenoiser {
    fn forward(&self, x_in: &ArrayD<f64>, c_noise: f64, cond: Option<&[f64]>) -> Result<ArrayD<f64>> {
        let sigma = sigma_from_c_noise(c_noise);
        let c = precond_coeffs(sigma, self.sigma_data)?;
        let x = x_in / c.c_in;
        let d = self.posterior_mean(&x, sigma, cond)?;
        Ok(raw_from_composite(d, &x, c.c_skip, c.c_out))
    }
}

/// Exact denoiser for a mixture of axis-aligned Gaussians.
#[derive(Clone, Debug)]
pub struct DiagonalMixtureDenoiser {
    log_weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    variances: Vec<Vec<f64>>,
    sigma_data: f64,
}

impl DiagonalMixtureDenoiser {
    pub fn new(weights: &[f64], means: Vec<Vec<f64>>, variances: Vec<Vec<f64>>, sigma_data: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty("mixture components"));
        }
        if means.len() != weights.len() || variances.len() != weights.len() {
            return Err(Error::LengthMismatch {
                expected: weights.len(),
                got: means.len().min(variances.len()),
            });
        }
        let dim = means[0].len();
        if means.iter().chain(&variances).any(|v| v.len() != dim) || dim == 0 {
            return Err(Error::InvalidInput("component dimensions disagree".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0)) || variances.iter().flatten().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidInput(
                "weights must be positive and variances non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        Ok(Self {
            log_weights: weights.iter().map(|w| (w / total).ln()).collect(),
            means,
            variances,
            sigma_data,
        })
    }

    pub fn posterior_mean(&self, x: &ArrayD<f64>, sigma: f64) -> Result<ArrayD<f64>> {
        let dim = self.means[0].len();
        if x.ndim() == 0 || x.shape()[x.ndim() - 1] != dim {
            return Err(Error::ShapeMismatch {
                expected: vec![dim],
                got: x.shape().to_vec(),
            });
        }
        let s2 = sigma * sigma;
        let mut out = x.clone();
        let mut logp = vec![0.0; self.means.len()];
        for row in out.as_slice_mut().expect("standard layout").chunks_mut(dim) {
            for (k, lp) in logp.iter_mut().enumerate() {
                *lp = self.log_weights[k]
                    + row
                        .iter()
                        .zip(&self.means[k])
                        .zip(&self.variances[k])
                        .map(|((xi, m), v)| {
                            let t = v + s2;
                            -0.5 * ((xi - m) * (xi - m) / t + t.ln())
                        })
                        .sum::<f64>();
            }
            let top = logp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let norm: f64 = logp.iter().map(|l| (l - top).exp()).sum();
            let src = row.to_vec();
            row.fill(0.0);
            for (k, lp) in logp.iter().enumerate() {
                let r = (lp - top).exp() / norm;
                for (i, o) in row.iter_mut().enumerate() {
                    let v = self.variances[k][i];
                    *o += r * (self.means[k][i] + v / (v + s2) * (src[i] - self.means[k][i]));
                }
            }
        }
        Ok(out)
    }
}

impl Denoiser for DiagonalMixtureDenoiser {
    fn forward(&self, x_in: &ArrayD<f64>, c_noise: f64, _cond: Option<&[f64]>) -> Result<ArrayD<f64>> {
        let sigma = sigma_from_c_noise(c_noise);
        let c = precond_coeffs(sigma, self.sigma_data)?;
        let x = (x_in / c.c_in).as_standard_layout().into_owned();
        let d = self.posterior_mean(&x, sigma)?;
        Ok(raw_from_composite(d, &x, c.c_skip, c.c_out))
    }
}
