//! Configurations, private observation frames, atomic moves and configuration metrics.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{convex_hull, smallest_enclosing_circle, Point2, EPS_SNAP};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("move requested for crashed robot {0}")]
    MoveOfCrashed(RobotId),
    #[error("robot {0} does not exist")]
    UnknownRobot(RobotId),
    #[error("non-finite move target for robot {0}")]
    NonFiniteTarget(RobotId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RobotId(pub usize);

impl fmt::Display for RobotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Correct,
    Crashed { at_step: u64 },
    Byzantine,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Correct => "correct",
            Status::Crashed { .. } => "crashed",
            Status::Byzantine => "byzantine",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub position: Point2,
    pub status: Status,
    /// Reachable distance per activation; `f64::INFINITY` means unlimited.
    pub delta: f64,
}

impl RobotState {
    pub fn correct(position: Point2, delta: f64) -> Self {
        RobotState { position, status: Status::Correct, delta }
    }

    pub fn is_crashed(&self) -> bool {
        matches!(self.status, Status::Crashed { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub robots: Vec<RobotState>,
    pub step: u64,
}

/// A set of colocated robots.
#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    pub position: Point2,
    pub robots: Vec<usize>,
}

impl Location {
    pub fn multiplicity(&self) -> usize {
        self.robots.len()
    }
}

/// Groups points into locations: union of pairs within [`EPS_SNAP`], represented by the lowest index.
pub fn group_locations(points: &[Point2]) -> Vec<Location> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if points[i].colocated(points[j]) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut out: Vec<Location> = Vec::new();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        match slot.get(&root) {
            Some(&k) => out[k].robots.push(i),
            None => {
                slot.insert(root, out.len());
                out.push(Location { position: points[root], robots: vec![i] });
            }
        }
    }
    out
}

impl Configuration {
    pub fn new(robots: Vec<RobotState>) -> Self {
        Configuration { robots, step: 0 }
    }

    pub fn from_positions(positions: &[Point2], delta: f64) -> Self {
        Configuration::new(positions.iter().map(|&p| RobotState::correct(p, delta)).collect())
    }

    pub fn len(&self) -> usize {
        self.robots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.robots.is_empty()
    }

    pub fn positions(&self) -> Vec<Point2> {
        self.robots.iter().map(|r| r.position).collect()
    }

    pub fn locations(&self) -> Vec<Location> {
        group_locations(&self.positions())
    }

    pub fn valence(&self) -> usize {
        self.locations().len()
    }

    /// Marks `robot` crashed at `step`; a crashed robot stays crashed.
    pub fn crash(&mut self, robot: RobotId, step: u64) -> Result<(), ModelError> {
        let r = self.robots.get_mut(robot.0).ok_or(ModelError::UnknownRobot(robot))?;
        if !r.is_crashed() {
            r.status = Status::Crashed { at_step: step };
        }
        Ok(())
    }

    pub fn correct_ids(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.robots[i].status == Status::Correct).collect()
    }
}

/// A robot's private coordinate system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationFrame {
    pub translation: Point2,
    pub rotation: f64,
    pub scale: f64,
    /// `1` or `-1`; `-1` mirrors the y axis after rotation.
    pub chirality: i8,
}

impl ObservationFrame {
    pub fn identity(at: Point2) -> Self {
        ObservationFrame { translation: at, rotation: 0.0, scale: 1.0, chirality: 1 }
    }

    /// Uniform rotation, log-uniform scale in `[0.1, 10]`, fair chirality coin.
    pub fn random<R: Rng + ?Sized>(at: Point2, rng: &mut R) -> Self {
        let rotation = rng.gen_range(0.0..TAU);
        let scale = 10f64.powf(rng.gen_range(-1.0..=1.0));
        let chirality = if rng.gen_bool(0.5) { 1 } else { -1 };
        ObservationFrame { translation: at, rotation, scale, chirality }
    }

    pub fn to_local(&self, g: Point2) -> Point2 {
        let r = (g - self.translation).rotate(self.rotation);
        let m = Point2::new(r.x, r.y * self.chirality as f64);
        m * self.scale
    }

    pub fn to_global(&self, l: Point2) -> Point2 {
        let m = l * (1.0 / self.scale);
        let r = Point2::new(m.x, m.y * self.chirality as f64);
        r.rotate(-self.rotation) + self.translation
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MultiplicityMode {
    WithMultiplicity,
    WithoutMultiplicity,
}

/// What one robot sees: distinct locations in its own frame, with counts.
///
/// The observer's own location is always present and sits exactly at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub mode: MultiplicityMode,
    pub points: Vec<(Point2, usize)>,
}

impl Observation {
    pub fn new(mode: MultiplicityMode, points: Vec<(Point2, usize)>) -> Self {
        let points = match mode {
            MultiplicityMode::WithMultiplicity => points,
            MultiplicityMode::WithoutMultiplicity => points.into_iter().map(|(p, _)| (p, 1)).collect(),
        };
        Observation { mode, points }
    }

    pub fn valence(&self) -> usize {
        self.points.len()
    }

    pub fn locations(&self) -> impl Iterator<Item = Point2> + '_ {
        self.points.iter().map(|(p, _)| *p)
    }

    /// Count at the observer's own location.
    pub fn own_multiplicity(&self) -> usize {
        self.points.iter().find(|(p, _)| *p == Point2::ORIGIN).map_or(1, |(_, m)| *m)
    }

    pub fn mulmax(&self) -> usize {
        self.points.iter().map(|(_, m)| *m).max().unwrap_or(0)
    }

    pub fn max_mult(&self) -> Vec<Point2> {
        let m = self.mulmax();
        self.points.iter().filter(|(_, k)| *k == m).map(|(p, _)| *p).collect()
    }

    /// Every robot position, repeated by multiplicity.
    pub fn robot_positions(&self) -> Vec<Point2> {
        self.points.iter().flat_map(|&(p, m)| std::iter::repeat_n(p, m)).collect()
    }
}

/// Snapshot of `config` as seen by `robot` through `frame`.
pub fn observe(
    config: &Configuration,
    robot: RobotId,
    frame: &ObservationFrame,
    mode: MultiplicityMode,
) -> Observation {
    let me = config.robots[robot.0].position;
    let points = config
        .locations()
        .into_iter()
        .map(|loc| {
            let local = if loc.position.colocated(me) { Point2::ORIGIN } else { frame.to_local(loc.position) };
            (local, loc.multiplicity())
        })
        .collect();
    Observation::new(mode, points)
}

/// Applies simultaneous moves computed on the pre-step configuration.
///
/// Targets within reach are landed on exactly; otherwise the mover travels exactly its
/// reachable distance. Endpoints within [`EPS_SNAP`] of a pre-step robot position are
/// snapped bit-exactly onto it.
pub fn apply_moves(config: &Configuration, moves: &[(RobotId, Point2)]) -> Result<Configuration, ModelError> {
    let before = config.positions();
    let snap = |p: Point2| before.iter().copied().find(|b| b.colocated(p)).unwrap_or(p);
    let mut next = config.clone();
    for &(id, target) in moves {
        let r = config.robots.get(id.0).ok_or(ModelError::UnknownRobot(id))?;
        if r.is_crashed() {
            return Err(ModelError::MoveOfCrashed(id));
        }
        if !target.is_finite() {
            return Err(ModelError::NonFiniteTarget(id));
        }
        let target = snap(target);
        let d = r.position.dist(target);
        let landed = if d <= r.delta { target } else { snap(r.position.lerp(target, r.delta / d)) };
        next.robots[id.0].position = landed;
    }
    next.step += 1;
    Ok(next)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub valence: usize,
    pub mulmax: usize,
    pub castles: Vec<Point2>,
    pub towers: Vec<Point2>,
    /// Smallest distance between two distinct locations; zero when univalent.
    pub nearest_neighbor_distance: f64,
    pub sec_diameter: f64,
    pub hull_vertices: Vec<Point2>,
}

impl Metrics {
    pub fn is_univalent(&self) -> bool {
        self.valence == 1
    }

    pub fn is_bivalent(&self) -> bool {
        self.valence == 2
    }

    pub fn is_distinct(&self) -> bool {
        self.mulmax == 1
    }
}

pub fn metrics(config: &Configuration) -> Metrics {
    let locs = config.locations();
    let mulmax = locs.iter().map(Location::multiplicity).max().unwrap_or(0);
    let castles = locs.iter().filter(|l| l.multiplicity() == mulmax).map(|l| l.position).collect();
    let towers = locs.iter().filter(|l| l.multiplicity() >= 2).map(|l| l.position).collect();
    let sites: Vec<Point2> = locs.iter().map(|l| l.position).collect();
    let mut nearest = if sites.len() > 1 { f64::INFINITY } else { 0.0 };
    for i in 0..sites.len() {
        for j in i + 1..sites.len() {
            nearest = nearest.min(sites[i].dist(sites[j]));
        }
    }
    let (sec_diameter, hull_vertices) = if sites.is_empty() {
        (0.0, Vec::new())
    } else {
        (
            smallest_enclosing_circle(&sites).map(|c| c.diameter()).unwrap_or(0.0),
            convex_hull(&sites).unwrap_or_default(),
        )
    };
    Metrics {
        valence: locs.len(),
        mulmax,
        castles,
        towers,
        nearest_neighbor_distance: nearest,
        sec_diameter,
        hull_vertices,
    }
}

/// True for a 1-bivalent configuration: two locations, one holding a single robot.
pub fn is_one_bivalent(config: &Configuration) -> bool {
    let locs = config.locations();
    locs.len() == 2 && locs.iter().any(|l| l.multiplicity() == 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gathered {
    Strong,
    Weak,
    No,
}

pub fn is_gathered(config: &Configuration) -> Gathered {
    let locs = config.locations();
    if locs.len() == 1 {
        return Gathered::Strong;
    }
    let mulmax = locs.iter().map(Location::multiplicity).max().unwrap_or(0);
    let castles: Vec<&Location> = locs.iter().filter(|l| l.multiplicity() == mulmax).collect();
    if castles.len() != 1 {
        return Gathered::No;
    }
    let correct = config.correct_ids();
    if !correct.is_empty() && correct.iter().all(|i| castles[0].robots.contains(i)) {
        Gathered::Weak
    } else {
        Gathered::No
    }
}

/// Sorted anonymous position multiset, rounded onto a grid of size `eps`.
pub fn anonymous_key(config: &Configuration, eps: f64) -> Vec<(i64, i64)> {
    let mut key: Vec<(i64, i64)> = config
        .robots
        .iter()
        .map(|r| ((r.position.x / eps).round() as i64, (r.position.y / eps).round() as i64))
        .collect();
    key.sort_unstable();
    key
}

/// Position multiset modulo translation, rotation, reflection and uniform scale, rounded to `eps`.
pub fn similarity_key(config: &Configuration, eps: f64) -> Vec<(i64, i64, usize)> {
    let locs = config.locations();
    let total: usize = locs.iter().map(Location::multiplicity).sum();
    let centroid = locs.iter().fold(Point2::ORIGIN, |acc, l| acc + l.position * l.multiplicity() as f64)
        * (1.0 / total.max(1) as f64);
    let spread = locs.iter().map(|l| l.position.dist(centroid)).fold(0.0, f64::max);
    if spread <= EPS_SNAP {
        return vec![(0, 0, total)];
    }
    let norm: Vec<(Point2, usize)> =
        locs.iter().map(|l| ((l.position - centroid) * (1.0 / spread), l.multiplicity())).collect();
    let mut best: Option<Vec<(i64, i64, usize)>> = None;
    for &(reference, _) in norm.iter().filter(|(p, _)| p.norm() > 1e-6) {
        let turn = -reference.angle();
        for mirror in [1.0, -1.0] {
            let mut cand: Vec<(i64, i64, usize)> = norm
                .iter()
                .map(|&(p, m)| {
                    let r = p.rotate(turn);
                    ((r.x / eps).round() as i64, (r.y * mirror / eps).round() as i64, m)
                })
                .collect();
            cand.sort_unstable();
            if best.as_ref().is_none_or(|b| cand < *b) {
                best = Some(cand);
            }
        }
    }
    best.unwrap_or_default()
}

/// Earliest repetition of the anonymous position multiset, compared pointwise within `eps`.
///
/// Returns `(first_index, period)` such that `trace[first_index + period]` repeats `trace[first_index]`.
pub fn detect_recurrence(trace: &[Configuration], eps: f64) -> Option<(usize, usize)> {
    let sorted: Vec<Vec<Point2>> = trace
        .iter()
        .map(|c| {
            let mut v = c.positions();
            v.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
            v
        })
        .collect();
    let same = |a: &[Point2], b: &[Point2]| a.len() == b.len() && multiset_close(a, b, eps);
    for j in 1..sorted.len() {
        for i in 0..j {
            if same(&sorted[i], &sorted[j]) {
                return Some((i, j - i));
            }
        }
    }
    None
}

fn multiset_close(a: &[Point2], b: &[Point2], eps: f64) -> bool {
    let mut used = vec![false; b.len()];
    a.iter().all(|p| match (0..b.len()).find(|&k| !used[k] && b[k].dist(*p) <= eps) {
        Some(k) => {
            used[k] = true;
            true
        }
        None => false,
    })
}
