use std::f64::consts::PI;

use super::{AlgoError, CanonicalFrame};
use crate::geometry::{ray_region_exit, voronoi_cell, Point2, RayExit};
use crate::model::Observation;

/// Rays closer than this (radians) to the direction q→p count as lying on it.
const ANGLE_TOL: f64 = 1e-9;

/// Ratio used when the ray q→p never leaves the castle's cell.
const UNBOUNDED_RATIO: f64 = 0.5;

/// Target of a side move for a robot at `p` heading to castle `q`.
///
/// The ray from `q` is turned canonically clockwise from q→p by a third of the free
/// angle to the first robot in q's cell (capped at π). Its length is the nearer of the
/// cell exit and the circle with diameter pq, scaled by how far `p` sits toward the
/// cell boundary along q→p.
pub fn side_move_target(p: Point2, q: Point2, obs: &Observation) -> Result<Point2, AlgoError> {
    // Observed locations are already merged globally; a frame's scale must not merge them again.
    if p == q {
        return Err(AlgoError::SideMoveColocated);
    }
    let canon = CanonicalFrame::of(obs);
    // The mover's own location is not a castle it competes with once it leaves.
    let castles: Vec<Point2> = obs.max_mult().into_iter().filter(|c| *c != p).collect();
    let cell = voronoi_cell(q, &castles).map_err(|e| AlgoError::SideMoveDegenerate(e.to_string()))?;
    if !cell.contains(p) {
        return Err(AlgoError::SideMoveDegenerate("mover outside the castle cell".into()));
    }

    let toward_p = p - q;
    let dist_qp = toward_p.norm();
    let theta_cw = obs
        .locations()
        .filter(|r| *r != q && cell.contains(*r))
        .map(|r| canon.clockwise_angle(toward_p, r - q))
        .filter(|a| *a > ANGLE_TOL && *a < 2.0 * PI - ANGLE_TOL)
        .fold(PI, f64::min);
    let theta_plus = theta_cw / 3.0;

    let u = toward_p.normalized();
    let ray = u.rotate(canon.clockwise(theta_plus));
    let exit_len = |dir: Point2| -> Result<Option<f64>, AlgoError> {
        match ray_region_exit(q, dir, &cell).map_err(|e| AlgoError::SideMoveDegenerate(e.to_string()))? {
            RayExit::At(x) => Ok(Some(x.dist(q))),
            RayExit::Unbounded => Ok(None),
        }
    };
    let ratio = match exit_len(u)? {
        Some(len) if len > 0.0 => (dist_qp / len).min(1.0),
        Some(_) => return Err(AlgoError::SideMoveDegenerate("castle on its own cell boundary".into())),
        None => UNBOUNDED_RATIO,
    };
    let to_circle = dist_qp * theta_plus.cos();
    let to_vprime = exit_len(ray)?.map_or(to_circle, |a| a.min(to_circle));
    Ok(q + ray * (ratio * to_vprime))
}

/// Normalized distance from the castle to the side-move target, as a function of the
/// normalized position `alpha` of the mover between castle and cell boundary.
///
/// `m` is the parameter of the cell boundary as it enters the closed form: the ray at
/// angle `theta_plus` meets the boundary at distance `1/(cos θ − sin θ/m)`. A
/// non-positive denominator means the ray never meets the boundary and that branch
/// is dropped.
pub fn side_move_scaled_length(alpha: f64, theta_plus: f64, m: f64) -> f64 {
    let (s, c) = theta_plus.sin_cos();
    let on_circle = alpha * alpha * c;
    let denom = c - s / m;
    if denom > 0.0 {
        on_circle.min(alpha / denom)
    } else {
        on_circle
    }
}
