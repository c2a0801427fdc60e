//! Point-sampled precision, recall and F-score.
//!
//! Strands are resampled at uniform arc-length spacing into oriented points
//! (millimeters). A predicted point matches when some ground-truth point lies
//! within the distance threshold and its direction within the angle
//! threshold. Recall is computed the same way with the roles swapped.

mod grid;

pub use grid::PointGrid;

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::strand::Hairstyle;
use crate::{Error, Result, Vec3};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointSample {
    /// Millimeters.
    pub position: Vec3,
    /// Unit tangent.
    pub direction: Vec3,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdPair {
    /// Millimeters.
    pub distance: f64,
    /// Degrees.
    pub angle: f64,
}

impl ThresholdPair {
    pub fn new(distance: f64, angle: f64) -> Result<Self> {
        if !(distance > 0.0 && distance.is_finite() && angle > 0.0 && angle.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "thresholds must be positive, got {distance} mm / {angle} deg"
            )));
        }
        Ok(Self { distance, angle })
    }

    /// (2 mm, 20 deg), (3 mm, 30 deg), (4 mm, 40 deg).
    pub fn defaults() -> Vec<ThresholdPair> {
        vec![
            ThresholdPair {
                distance: 2.0,
                angle: 20.0,
            },
            ThresholdPair {
                distance: 3.0,
                angle: 30.0,
            },
            ThresholdPair {
                distance: 4.0,
                angle: 40.0,
            },
        ]
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MatchOptions {
    /// Compare directions up to sign.
    pub unsigned: bool,
    /// Greedy one-to-one matching instead of any-match.
    pub one_to_one: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThresholdScore {
    pub threshold_mm: f64,
    pub threshold_deg: f64,
    pub precision: f64,
    pub recall: f64,
    pub fscore: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub scores: Vec<ThresholdScore>,
}

impl MetricsReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "| Thresholds (mm/deg) | Precision | Recall | F-score |");
        let _ = writeln!(out, "|---------------------|-----------|--------|---------|");
        for s in &self.scores {
            let label = format!("{}/{}", s.threshold_mm, s.threshold_deg);
            let _ = writeln!(
                out,
                "| {:<19} | {:>9.2} | {:>6.2} | {:>7.2} |",
                label, s.precision, s.recall, s.fscore
            );
        }
        out
    }

    /// CSV with header `threshold_mm,threshold_deg,precision,recall,fscore`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for s in &self.scores {
            w.serialize(s)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn f_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

fn vertex_tangents(points: &[Vec3]) -> Vec<Vec3> {
    let n = points.len();
    let unit = |t: Vec3| {
        let len = t.norm();
        if len > 0.0 {
            t / len
        } else {
            Vec3::zeros()
        }
    };
    (0..n)
        .map(|i| {
            // Second-order one-sided differences at the ends.
            if n >= 3 && i == 0 {
                unit(points[1] * 4.0 - points[0] * 3.0 - points[2])
            } else if n >= 3 && i == n - 1 {
                unit(points[n - 1] * 3.0 - points[n - 2] * 4.0 + points[n - 3])
            } else {
                unit(points[(i + 1).min(n - 1)] - points[i.saturating_sub(1)])
            }
        })
        .collect()
}

/// Oriented samples every `spacing` millimeters along each strand, starting
/// at the root: `floor(length / spacing) + 1` samples per strand.
pub fn point_samples(hair: &Hairstyle, spacing: f64) -> Result<Vec<PointSample>> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::InvalidInput(format!("spacing must be positive, got {spacing}")));
    }
    let per_strand: Vec<Vec<PointSample>> = hair
        .strands()
        .par_iter()
        .map(|s| {
            let pts: Vec<Vec3> = s.points().iter().map(|p| p * 1000.0).collect();
            let tangents = vertex_tangents(&pts);
            let mut cum = Vec::with_capacity(pts.len());
            cum.push(0.0);
            for w in pts.windows(2) {
                cum.push(cum.last().unwrap() + (w[1] - w[0]).norm());
            }
            let total = *cum.last().unwrap();
            let count = (total / spacing + 1e-9).floor() as usize + 1;
            let fallback = tangents.iter().find(|t| t.norm() > 0.0).copied().unwrap_or(Vec3::z());
            let mut seg = 0;
            (0..count)
                .map(|k| {
                    let target = (k as f64 * spacing).min(total);
                    while seg + 2 < cum.len() && cum[seg + 1] < target {
                        seg += 1;
                    }
                    let span = cum[seg + 1] - cum[seg];
                    let t = if span > 0.0 {
                        ((target - cum[seg]) / span).clamp(0.0, 1.0)
                    } else {
                        0.0
                    };
                    let position = pts[seg] + (pts[seg + 1] - pts[seg]) * t;
                    let d = tangents[seg] * (1.0 - t) + tangents[seg + 1] * t;
                    let direction = if d.norm() > 1e-12 { d.normalize() } else { fallback };
                    PointSample { position, direction }
                })
                .collect()
        })
        .collect();
    Ok(per_strand.into_iter().flatten().collect())
}

/// Shared match predicate. `cos_angle` is `cos(angle threshold)`.
#[inline]
pub(crate) fn is_match(a: &PointSample, b: &PointSample, dist2: f64, cos_angle: f64, unsigned: bool) -> bool {
    let d = a.position - b.position;
    if d.norm_squared() > dist2 {
        return false;
    }
    let dot = a.direction.dot(&b.direction);
    let dot = if unsigned { dot.abs() } else { dot };
    dot >= cos_angle
}

fn check_inputs(pred: &[PointSample], gt: &[PointSample], thresholds: &[ThresholdPair]) -> Result<()> {
    if pred.is_empty() {
        return Err(Error::Empty("predicted samples"));
    }
    if gt.is_empty() {
        return Err(Error::Empty("ground-truth samples"));
    }
    if thresholds.is_empty() {
        return Err(Error::Empty("thresholds"));
    }
    for t in thresholds {
        ThresholdPair::new(t.distance, t.angle)?;
    }
    Ok(())
}

fn score(t: &ThresholdPair, matched_pred: usize, n_pred: usize, matched_gt: usize, n_gt: usize) -> ThresholdScore {
    let precision = 100.0 * matched_pred as f64 / n_pred as f64;
    let recall = 100.0 * matched_gt as f64 / n_gt as f64;
    ThresholdScore {
        threshold_mm: t.distance,
        threshold_deg: t.angle,
        precision,
        recall,
        fscore: f_score(precision, recall),
    }
}

/// Greedy one-to-one matching: queries in order, each taking the nearest
/// (then lowest-index) unclaimed target that satisfies the predicate.
fn greedy_count<F>(n_queries: usize, n_targets: usize, candidates: F) -> usize
where
    F: Fn(usize, &mut Vec<(f64, usize)>),
{
    let mut claimed = vec![false; n_targets];
    let mut buf = Vec::new();
    let mut count = 0;
    for q in 0..n_queries {
        buf.clear();
        candidates(q, &mut buf);
        let best = buf
            .iter()
            .filter(|(_, j)| !claimed[*j])
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if let Some((_, j)) = best {
            claimed[*j] = true;
            count += 1;
        }
    }
    count
}

/// Grid-accelerated matcher.
pub fn precision_recall_f(
    pred: &[PointSample],
    gt: &[PointSample],
    thresholds: &[ThresholdPair],
    options: MatchOptions,
) -> Result<MetricsReport> {
    check_inputs(pred, gt, thresholds)?;
    let scores = thresholds
        .iter()
        .map(|t| {
            let dist2 = t.distance * t.distance;
            let cos_a = t.angle.to_radians().cos();
            let gt_grid = PointGrid::new(gt, t.distance);
            let pred_grid = PointGrid::new(pred, t.distance);
            if options.one_to_one {
                let m = greedy_count(pred.len(), gt.len(), |q, out| {
                    gt_grid.for_each_candidate(&pred[q].position, |j| {
                        if is_match(&pred[q], &gt[j], dist2, cos_a, options.unsigned) {
                            out.push(((pred[q].position - gt[j].position).norm_squared(), j));
                        }
                    })
                });
                score(t, m, pred.len(), m, gt.len())
            } else {
                let mp = gt_grid.count_matched(pred, gt, dist2, cos_a, options.unsigned);
                let mg = pred_grid.count_matched(gt, pred, dist2, cos_a, options.unsigned);
                score(t, mp, pred.len(), mg, gt.len())
            }
        })
        .collect();
    Ok(MetricsReport { scores })
}

/// Quadratic-scan reference implementation of [`precision_recall_f`].
pub fn brute_force_prf(
    pred: &[PointSample],
    gt: &[PointSample],
    thresholds: &[ThresholdPair],
    options: MatchOptions,
) -> Result<MetricsReport> {
    check_inputs(pred, gt, thresholds)?;
    let scores = thresholds
        .iter()
        .map(|t| {
            let dist2 = t.distance * t.distance;
            let cos_a = t.angle.to_radians().cos();
            if options.one_to_one {
                let m = greedy_count(pred.len(), gt.len(), |q, out| {
                    for (j, g) in gt.iter().enumerate() {
                        if is_match(&pred[q], g, dist2, cos_a, options.unsigned) {
                            out.push(((pred[q].position - g.position).norm_squared(), j));
                        }
                    }
                });
                score(t, m, pred.len(), m, gt.len())
            } else {
                let count = |qs: &[PointSample], ts: &[PointSample]| {
                    qs.par_iter()
                        .filter(|q| ts.iter().any(|g| is_match(q, g, dist2, cos_a, options.unsigned)))
                        .count()
                };
                score(t, count(pred, gt), pred.len(), count(gt, pred), gt.len())
            }
        })
        .collect();
    Ok(MetricsReport { scores })
}

/// Samples both hairstyles at `spacing` mm and scores them with the grid matcher.
pub fn evaluate_hair(
    pred: &Hairstyle,
    gt: &Hairstyle,
    spacing: f64,
    thresholds: &[ThresholdPair],
    options: MatchOptions,
) -> Result<MetricsReport> {
    let p = point_samples(pred, spacing)?;
    let g = point_samples(gt, spacing)?;
    precision_recall_f(&p, &g, thresholds, options)
}

#[cfg(test)]
mod tests;
