//! Strand-based hair toolkit.
//!
//! The crate is organised around the data flow of a strand hairstyle:
//!
//! * [`strand`]: fixed-length polylines, their finite-difference derivatives and
//!   the position/direction/curvature reconstruction loss.
//! * [`scalp`]: an analytic ellipsoidal scalp cap with an invertible UV chart.
//! * [`groom`]: procedural grooming (guide interpolation, clumping, curling,
//!   noise, shrinkwrap) driven by seeded parameter randomization.
//! * [`codec`]: a 64-dimensional linear strand codec and per-channel loss weights.
//! * [`texture`]: scalp textures of strand latents, push-pull hole filling,
//!   density-driven root sampling and full-hairstyle decoding.
//! * [`diffusion`]: preconditioned denoising, weighted training losses and a
//!   Heun sampler with classifier-free guidance.
//! * [`metrics`]: precision/recall/F-score under joint distance and angle
//!   thresholds.
//! * [`io`] and [`dataset`]: binary file formats and batch dataset generation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod codec;
pub mod dataset;
pub mod diffusion;
mod error;
pub mod groom;
pub mod io;
pub mod metrics;
pub mod scalp;
pub mod strand;
pub mod texture;
mod util;

pub use error::{Error, Result};

/// 3D vector type used for all geometry, in meters unless stated otherwise.
pub type Vec3 = nalgebra::Vector3<f64>;

/// Number of points per strand after normalization.
pub const STRAND_POINTS: usize = 256;

/// Width of a strand latent code.
pub const LATENT_DIM: usize = 64;

/// Scalp texture side length in texels.
pub const TEXTURE_RESOLUTION: usize = 256;
