use std::cmp::Ordering;
use std::f64::consts::TAU;

use crate::geometry::Point2;
use crate::model::Observation;

/// Orientation derived from the observed points alone, so that angle orderings and
/// "clockwise" agree across robots with different private frames.
///
/// The x axis points at the multiplicity-weighted centroid (or the unique farthest
/// location when the centroid is the observer). Handedness makes the first
/// non-vanishing odd moment of the transverse coordinate positive. When the
/// observation is symmetric enough that neither is defined, the private frame is used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalFrame {
    pub axis: Point2,
    pub handed: f64,
}

impl CanonicalFrame {
    pub fn of(obs: &Observation) -> Self {
        let scale = obs.points.iter().map(|(p, _)| p.norm()).fold(0.0, f64::max);
        let total: f64 = obs.points.iter().map(|(_, m)| *m as f64).sum();
        if scale == 0.0 {
            return CanonicalFrame { axis: Point2::new(1.0, 0.0), handed: 1.0 };
        }
        let tol = 1e-9 * total.max(1.0);
        let w = obs.points.iter().fold(Point2::ORIGIN, |acc, &(p, m)| acc + p * m as f64);
        let axis = if w.norm() > tol * scale {
            w.normalized()
        } else {
            let far: Vec<Point2> =
                obs.points.iter().map(|(p, _)| *p).filter(|p| p.norm() >= scale * (1.0 - 1e-9)).collect();
            if far.len() == 1 {
                far[0].normalized()
            } else {
                Point2::new(1.0, 0.0)
            }
        };
        let moment = |k: i32| -> f64 {
            obs.points
                .iter()
                .map(|&(p, m)| {
                    let along = p.dot(axis) / scale;
                    let across = axis.cross(p) / scale;
                    m as f64 * if k == 1 { along * across } else { across.powi(k) }
                })
                .sum()
        };
        let handed = [1, 3].into_iter().map(moment).find(|v| v.abs() > tol).map_or(1.0, f64::signum);
        CanonicalFrame { axis, handed }
    }

    /// Canonical polar angle in `[0, 2π)`.
    pub fn angle(&self, v: Point2) -> f64 {
        let x = v.dot(self.axis);
        let y = self.handed * self.axis.cross(v);
        let a = y.atan2(x);
        if a < 0.0 {
            a + TAU
        } else {
            a
        }
    }

    pub fn order(&self, a: Point2, b: Point2) -> Ordering {
        self.angle(a).total_cmp(&self.angle(b)).then(a.norm().total_cmp(&b.norm()))
    }

    /// Local rotation (counter-clockwise positive) that turns canonically clockwise by `theta`.
    pub fn clockwise(&self, theta: f64) -> f64 {
        -self.handed * theta
    }

    /// Canonically clockwise angle from direction `from` to direction `to`, in `[0, 2π)`.
    pub fn clockwise_angle(&self, from: Point2, to: Point2) -> f64 {
        let a = (self.angle(from) - self.angle(to)).rem_euclid(TAU);
        if a >= TAU {
            0.0
        } else {
            a
        }
    }
}
