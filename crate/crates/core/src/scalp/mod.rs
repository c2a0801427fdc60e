//! Analytic scalp surface: an ellipsoidal cap with an azimuthal-equidistant UV
//! chart, plus texel bookkeeping for scalp textures.
//!
//! The chart maps the disk of radius 0.5 around `(0.5, 0.5)` onto the cap.
//! Distance from the chart center is proportional to the polar angle of the
//! ellipsoid parameterization, and the chart azimuth equals the ellipsoid
//! azimuth.

mod mesh;

pub use mesh::ScalpMesh;

use std::f64::consts::FRAC_PI_2;

use crate::{Error, Result, Vec3};

/// Chart radius in UV units; the cap boundary maps onto this circle.
pub const CHART_RADIUS: f64 = 0.5;
const CHART_CENTER: [f64; 2] = [0.5, 0.5];
const CHART_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalpSurface {
    pub center: Vec3,
    /// Semi-axes along x (left/right), y (front/back) and z (up).
    pub radii: Vec3,
    /// Polar angle bounding the cap, measured from +z.
    pub cap_angle: f64,
}

impl Default for ScalpSurface {
    fn default() -> Self {
        Self {
            center: Vec3::new(0.0, 0.0, 0.0),
            radii: Vec3::new(0.078, 0.095, 0.09),
            cap_angle: 1.2,
        }
    }
}

/// Orthonormal right-handed frame at a strand root. `normal` points away from
/// the head; `tangent` follows the surface-projected +x axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootFrame {
    pub origin: Vec3,
    pub tangent: Vec3,
    pub bitangent: Vec3,
    pub normal: Vec3,
}

impl RootFrame {
    pub fn identity() -> Self {
        Self {
            origin: Vec3::zeros(),
            tangent: Vec3::x(),
            bitangent: Vec3::y(),
            normal: Vec3::z(),
        }
    }

    /// Builds a frame from a normal, completing it with the projection of
    /// `reference` onto the normal's tangent plane.
    pub fn from_normal(origin: Vec3, normal: Vec3, reference: Vec3) -> Self {
        let n = normal.normalize();
        let mut t = reference - n * reference.dot(&n);
        if t.norm() < 1e-8 {
            let alt = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
            t = alt - n * alt.dot(&n);
        }
        let t = t.normalize();
        let b = n.cross(&t);
        Self {
            origin,
            tangent: t,
            bitangent: b,
            normal: n,
        }
    }

    pub fn with_origin(self, origin: Vec3) -> Self {
        Self { origin, ..self }
    }

    pub fn to_local(&self, p: &Vec3) -> Vec3 {
        let d = p - self.origin;
        Vec3::new(d.dot(&self.tangent), d.dot(&self.bitangent), d.dot(&self.normal))
    }

    pub fn to_world(&self, local: &Vec3) -> Vec3 {
        self.origin + self.tangent * local.x + self.bitangent * local.y + self.normal * local.z
    }

    /// Rotates a direction (no translation) from local to world coordinates.
    pub fn rotate_to_world(&self, v: &Vec3) -> Vec3 {
        self.tangent * v.x + self.bitangent * v.y + self.normal * v.z
    }

    /// Largest deviation from orthonormality, including the handedness check
    /// `tangent x bitangent = normal`.
    pub fn orthonormality_error(&self) -> f64 {
        let (t, b, n) = (self.tangent, self.bitangent, self.normal);
        [
            (t.norm() - 1.0).abs(),
            (b.norm() - 1.0).abs(),
            (n.norm() - 1.0).abs(),
            t.dot(&b).abs(),
            t.dot(&n).abs(),
            b.dot(&n).abs(),
            (t.cross(&b) - n).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

impl ScalpSurface {
    pub fn new(center: Vec3, radii: Vec3, cap_angle: f64) -> Result<Self> {
        if !radii.iter().all(|r| *r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidInput("ellipsoid radii must be positive".into()));
        }
        if !(cap_angle > 0.0 && cap_angle < FRAC_PI_2) {
            return Err(Error::InvalidInput(format!(
                "cap angle must lie in (0, pi/2), got {cap_angle}"
            )));
        }
        Ok(Self {
            center,
            radii,
            cap_angle,
        })
    }

    pub fn min_radius(&self) -> f64 {
        self.radii.min()
    }

    pub fn in_chart(uv: [f64; 2]) -> bool {
        let du = uv[0] - CHART_CENTER[0];
        let dv = uv[1] - CHART_CENTER[1];
        (du * du + dv * dv).sqrt() <= CHART_RADIUS + CHART_SLACK
    }

    /// Unit-sphere direction of the ellipsoid parameterization at `uv`.
    fn chart_direction(&self, uv: [f64; 2]) -> Result<Vec3> {
        let du = uv[0] - CHART_CENTER[0];
        let dv = uv[1] - CHART_CENTER[1];
        let rho = (du * du + dv * dv).sqrt();
        if !(rho <= CHART_RADIUS + CHART_SLACK) {
            return Err(Error::OutsideChart { u: uv[0], v: uv[1] });
        }
        let theta = rho.min(CHART_RADIUS) / CHART_RADIUS * self.cap_angle;
        let (s, c) = theta.sin_cos();
        if rho == 0.0 {
            return Ok(Vec3::z());
        }
        Ok(Vec3::new(s * du / rho, s * dv / rho, c))
    }

    pub fn uv_to_world(&self, uv: [f64; 2]) -> Result<RootFrame> {
        let d = self.chart_direction(uv)?;
        let origin = self.center + d.component_mul(&self.radii);
        let normal = d.component_div(&self.radii);
        Ok(RootFrame::from_normal(origin, normal, Vec3::x()))
    }

    pub fn world_to_uv(&self, p: &Vec3) -> Result<[f64; 2]> {
        let q = (p - self.center).component_div(&self.radii);
        let norm = q.norm();
        if !(norm > 0.0) {
            return Err(Error::InvalidInput(
                "the ellipsoid center has no chart coordinate".into(),
            ));
        }
        let d = q / norm;
        let horizontal = (d.x * d.x + d.y * d.y).sqrt();
        let theta = horizontal.atan2(d.z);
        if theta > self.cap_angle + CHART_SLACK {
            return Err(Error::OutsideCap {
                angle: theta,
                cap: self.cap_angle,
            });
        }
        let rho = theta / self.cap_angle * CHART_RADIUS;
        if horizontal == 0.0 {
            return Ok(CHART_CENTER);
        }
        Ok([
            CHART_CENTER[0] + rho * d.x / horizontal,
            CHART_CENTER[1] + rho * d.y / horizontal,
        ])
    }

    /// Frame at a strand root: orientation of the surface below `root`,
    /// origin at `root` itself.
    pub fn frame_at(&self, root: &Vec3) -> Result<RootFrame> {
        let uv = self.world_to_uv(root)?;
        Ok(self.uv_to_world(uv)?.with_origin(*root))
    }

    /// Scaled-sphere approximation of the ellipsoid signed distance: exact on
    /// the surface and at the center, negative inside.
    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        let q = (p - self.center).component_div(&self.radii);
        (q.norm() - 1.0) * self.min_radius()
    }

    /// Unit outward gradient of [`Self::signed_distance`]; `+z` at the center.
    pub fn outward_direction(&self, p: &Vec3) -> Vec3 {
        let q = (p - self.center).component_div(&self.radii);
        let g = q.component_div(&self.radii);
        let n = g.norm();
        if n > 0.0 {
            g / n
        } else {
            Vec3::z()
        }
    }

    /// Moves `p` out along the outward gradient until its signed distance is
    /// at least `margin`. Points already farther out are returned unchanged.
    pub fn push_outside(&self, p: &Vec3, margin: f64) -> Vec3 {
        if self.signed_distance(p) >= margin {
            return *p;
        }
        let mut x = *p;
        for _ in 0..8 {
            let gap = margin - self.signed_distance(&x);
            if gap <= 0.0 {
                return x;
            }
            // Newton step along the unit gradient; the distance field's
            // directional derivative along it is |grad|.
            let q = (x - self.center).component_div(&self.radii);
            let qn = q.norm();
            let dir = self.outward_direction(&x);
            let slope = if qn > 0.0 {
                self.min_radius() * q.component_div(&self.radii).norm() / qn
            } else {
                self.min_radius() / self.radii.z
            };
            x += dir * (gap / slope.max(1e-12));
        }
        if self.signed_distance(&x) >= margin {
            return x;
        }
        // Radial fallback lands exactly on the margin level set.
        let target = 1.0 + margin / self.min_radius();
        let q = (x - self.center).component_div(&self.radii);
        let qn = q.norm();
        let dir = if qn > 0.0 { q / qn } else { Vec3::z() };
        self.center + (dir * target * (1.0 + 1e-12)).component_mul(&self.radii)
    }
}

/// Texels of a square scalp texture whose full footprint lies on the chart.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalpMask {
    resolution: usize,
    valid: Vec<bool>,
}

impl ScalpMask {
    pub fn new(resolution: usize) -> Self {
        assert!(resolution >= 2, "mask resolution must be at least 2");
        let n = resolution as f64;
        let mut valid = vec![false; resolution * resolution];
        for iy in 0..resolution {
            for ix in 0..resolution {
                let corners = [
                    [ix as f64 / n, iy as f64 / n],
                    [(ix + 1) as f64 / n, iy as f64 / n],
                    [ix as f64 / n, (iy + 1) as f64 / n],
                    [(ix + 1) as f64 / n, (iy + 1) as f64 / n],
                ];
                valid[iy * resolution + ix] = corners.iter().all(|c| ScalpSurface::in_chart(*c));
            }
        }
        Self { resolution, valid }
    }

    /// Mask with every texel valid; used for synthetic textures in tests and tools.
    pub fn full(resolution: usize) -> Self {
        Self {
            resolution,
            valid: vec![true; resolution * resolution],
        }
    }

    pub fn from_cells(resolution: usize, valid: Vec<bool>) -> Result<Self> {
        if valid.len() != resolution * resolution {
            return Err(Error::LengthMismatch {
                expected: resolution * resolution,
                got: valid.len(),
            });
        }
        Ok(Self { resolution, valid })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn cells(&self) -> &[bool] {
        &self.valid
    }

    pub fn is_valid(&self, ix: usize, iy: usize) -> bool {
        self.valid[iy * self.resolution + ix]
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    pub fn texel_of_uv(&self, uv: [f64; 2]) -> Option<(usize, usize)> {
        texel_of_uv(self.resolution, uv)
    }

    pub fn texel_center(&self, ix: usize, iy: usize) -> [f64; 2] {
        texel_center(self.resolution, ix, iy)
    }
}

pub fn texel_of_uv(resolution: usize, uv: [f64; 2]) -> Option<(usize, usize)> {
    if !(0.0..=1.0).contains(&uv[0]) || !(0.0..=1.0).contains(&uv[1]) {
        return None;
    }
    let n = resolution as f64;
    let ix = ((uv[0] * n) as usize).min(resolution - 1);
    let iy = ((uv[1] * n) as usize).min(resolution - 1);
    Some((ix, iy))
}

pub fn texel_center(resolution: usize, ix: usize, iy: usize) -> [f64; 2] {
    let n = resolution as f64;
    [(ix as f64 + 0.5) / n, (iy as f64 + 0.5) / n]
}
