//! Plane geometry used by observations, metrics and the side move.
//!
//! Everything here is a pure function over `f64` coordinates. Two points are
//! treated as the same location when they are within [`EPS_SNAP`].

use std::ops::{Add, Mul, Neg, Sub};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Colocation threshold in scenario length units.
pub const EPS_SNAP: f64 = 1e-9;

/// Slack used by containment predicates of circles and half-planes.
const CONTAIN_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("empty point set")]
    EmptyPointSet,
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("site not in sites")]
    SiteNotInSites,
    #[error("degenerate segment: endpoints coincide")]
    DegenerateSegment,
    #[error("ray origin lies outside the region")]
    OriginOutsideRegion,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn from_polar(radius: f64, angle: f64) -> Self {
        Point2::new(radius * angle.cos(), radius * angle.sin())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product; positive when `o` is counter-clockwise of `self`.
    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    pub fn normalized(self) -> Point2 {
        let n = self.norm();
        Point2::new(self.x / n, self.y / n)
    }

    /// Counter-clockwise rotation by `angle` radians.
    pub fn rotate(self, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Polar angle in `[0, 2π)`.
    pub fn angle(self) -> f64 {
        let a = self.y.atan2(self.x);
        if a < 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    }

    pub fn colocated(self, o: Point2) -> bool {
        self.dist(o) <= EPS_SNAP
    }

    pub fn lerp(self, o: Point2, t: f64) -> Point2 {
        self + (o - self) * t
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, k: f64) -> Point2 {
        Point2::new(self.x * k, self.y * k)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Point2,
    pub radius: f64,
}

impl Circle {
    pub fn contains(&self, p: Point2) -> bool {
        self.center.dist(p) <= self.radius + CONTAIN_TOL * self.radius.max(1.0)
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    fn from_diameter(a: Point2, b: Point2) -> Circle {
        let center = a.lerp(b, 0.5);
        Circle { center, radius: center.dist(a).max(center.dist(b)) }
    }

    /// Circumscribed circle, or `None` for (nearly) collinear triples.
    pub fn circumscribed(a: Point2, b: Point2, c: Point2) -> Option<Circle> {
        let b1 = b - a;
        let c1 = c - a;
        let d = 2.0 * b1.cross(c1);
        let scale = b1.norm().max(c1.norm());
        if d.abs() <= 1e-14 * scale * scale {
            return None;
        }
        let bb = b1.dot(b1);
        let cc = c1.dot(c1);
        let ux = (c1.y * bb - b1.y * cc) / d;
        let uy = (b1.x * cc - c1.x * bb) / d;
        let center = a + Point2::new(ux, uy);
        let radius = center.dist(a).max(center.dist(b)).max(center.dist(c));
        Some(Circle { center, radius })
    }
}

/// Closed half-plane `{p : normal·p ≤ offset}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub normal: Point2,
    pub offset: f64,
}

impl HalfPlane {
    /// Signed violation; positive values are outside.
    pub fn excess(&self, p: Point2) -> f64 {
        self.normal.dot(p) - self.offset
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.excess(p) <= CONTAIN_TOL * self.offset.abs().max(1.0)
    }
}

/// Convex region as an intersection of half-planes; an empty list is the whole plane.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Region {
    pub halfplanes: Vec<HalfPlane>,
}

impl Region {
    pub fn whole_plane() -> Self {
        Region { halfplanes: Vec::new() }
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.halfplanes.iter().all(|h| h.contains(p))
    }

    /// Strict interior test with a margin, used to keep side-move targets off boundaries.
    pub fn contains_strictly(&self, p: Point2, margin: f64) -> bool {
        self.halfplanes.iter().all(|h| h.excess(p) < -margin)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RayExit {
    At(Point2),
    Unbounded,
}

fn check_finite(points: &[Point2]) -> Result<(), GeomError> {
    if points.iter().all(|p| p.is_finite()) {
        Ok(())
    } else {
        Err(GeomError::NonFinite)
    }
}

/// Smallest enclosing circle by randomized incremental construction.
///
/// The shuffle uses a fixed seed so the result does not depend on any caller RNG.
pub fn smallest_enclosing_circle(points: &[Point2]) -> Result<Circle, GeomError> {
    if points.is_empty() {
        return Err(GeomError::EmptyPointSet);
    }
    check_finite(points)?;
    if points.len() == 1 {
        return Ok(Circle { center: points[0], radius: 0.0 });
    }
    let mut pts = points.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EC0_5EC0 ^ pts.len() as u64);
    pts.shuffle(&mut rng);

    let mut c = Circle { center: pts[0], radius: 0.0 };
    for i in 1..pts.len() {
        if c.contains(pts[i]) {
            continue;
        }
        c = Circle { center: pts[i], radius: 0.0 };
        for j in 0..i {
            if c.contains(pts[j]) {
                continue;
            }
            c = Circle::from_diameter(pts[i], pts[j]);
            for k in 0..j {
                if c.contains(pts[k]) {
                    continue;
                }
                c = Circle::circumscribed(pts[i], pts[j], pts[k])
                    .unwrap_or_else(|| widest_pair_circle(pts[i], pts[j], pts[k]));
            }
        }
    }
    Ok(c)
}

fn widest_pair_circle(a: Point2, b: Point2, c: Point2) -> Circle {
    let pairs = [(a, b), (a, c), (b, c)];
    let (p, q) = pairs.into_iter().max_by(|x, y| x.0.dist(x.1).total_cmp(&y.0.dist(y.1))).unwrap();
    Circle::from_diameter(p, q)
}

/// Convex hull vertices in counter-clockwise order, collinear points dropped.
///
/// Degenerate inputs give one vertex (all coincident) or the two extremes (collinear).
pub fn convex_hull(points: &[Point2]) -> Result<Vec<Point2>, GeomError> {
    if points.is_empty() {
        return Err(GeomError::EmptyPointSet);
    }
    check_finite(points)?;
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| a.colocated(*b));
    if pts.len() <= 2 {
        return Ok(pts);
    }
    let turn = |o: Point2, a: Point2, b: Point2| (a - o).cross(b - o);
    let mut lower: Vec<Point2> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point2> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    Ok(lower)
}

/// True when `p` lies inside or on the polygon given by CCW `hull` (tolerance `tol`).
pub fn hull_contains(hull: &[Point2], p: Point2, tol: f64) -> bool {
    match hull.len() {
        0 => false,
        1 => hull[0].dist(p) <= tol,
        2 => point_segment_distance(p, hull[0], hull[1]) <= tol,
        n => (0..n).all(|i| {
            let a = hull[i];
            let b = hull[(i + 1) % n];
            let edge = b - a;
            edge.cross(p - a) >= -tol * edge.norm()
        }),
    }
}

/// Voronoi cell of `site` over `sites`, as bisector half-planes toward every other distinct site.
pub fn voronoi_cell(site: Point2, sites: &[Point2]) -> Result<Region, GeomError> {
    check_finite(sites)?;
    check_finite(&[site])?;
    if !sites.iter().any(|s| s.colocated(site)) {
        return Err(GeomError::SiteNotInSites);
    }
    let mut halfplanes = Vec::new();
    for &s in sites {
        if s.colocated(site) {
            continue;
        }
        let normal = (s - site).normalized();
        let mid = site.lerp(s, 0.5);
        halfplanes.push(HalfPlane { normal, offset: normal.dot(mid) });
    }
    Ok(Region { halfplanes })
}

pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Number of positions on segment `p`–`q` within `eps`, excluding those at `p` and including those at `q`.
pub fn robots_on_segment(p: Point2, q: Point2, positions: &[Point2], eps: f64) -> Result<usize, GeomError> {
    if p.colocated(q) {
        return Err(GeomError::DegenerateSegment);
    }
    Ok(positions.iter().filter(|&&r| !r.colocated(p) && point_segment_distance(r, p, q) <= eps).count())
}

/// Number of positions strictly between `p` and `q` (neither endpoint) within `eps` of the segment.
pub fn robots_strictly_between(p: Point2, q: Point2, positions: &[Point2], eps: f64) -> Result<usize, GeomError> {
    if p.colocated(q) {
        return Err(GeomError::DegenerateSegment);
    }
    Ok(positions
        .iter()
        .filter(|&&r| !r.colocated(p) && !r.colocated(q) && point_segment_distance(r, p, q) <= eps)
        .count())
}

/// First boundary crossing of the ray `origin + t·direction`, `t ≥ 0`.
pub fn ray_region_exit(origin: Point2, direction: Point2, region: &Region) -> Result<RayExit, GeomError> {
    if !region.contains(origin) {
        return Err(GeomError::OriginOutsideRegion);
    }
    let dir = direction.normalized();
    let mut best: Option<f64> = None;
    for h in &region.halfplanes {
        let denom = h.normal.dot(dir);
        if denom <= 1e-15 {
            continue;
        }
        let t = ((h.offset - h.normal.dot(origin)) / denom).max(0.0);
        best = Some(best.map_or(t, |b: f64| b.min(t)));
    }
    Ok(match best {
        Some(t) => RayExit::At(origin + dir * t),
        None => RayExit::Unbounded,
    })
}
