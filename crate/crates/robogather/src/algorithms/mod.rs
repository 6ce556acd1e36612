//! Robot decision rules. Every rule maps one observation (local frame, observer at
//! the origin) to a decision in that same frame.

mod canonical;
mod side_move;

use rand::Rng;
use thiserror::Error;

use crate::geometry::{robots_on_segment, robots_strictly_between, Point2};
use crate::model::{MultiplicityMode, Observation};
use crate::rng::RandomSource;

pub use canonical::CanonicalFrame;
pub use side_move::{side_move_scaled_length, side_move_target};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgoError {
    #[error("two-robot rule misapplied: {0} distinct locations observed")]
    TwoRobotMisapplied(usize),
    #[error("side move: observer colocated with the target castle")]
    SideMoveColocated,
    #[error("side move: no valid region ({0})")]
    SideMoveDegenerate(String),
    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decision {
    Stay,
    MoveTo(Point2),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgorithmKind {
    ProbBasic,
    DetFt,
    /// Non-conforming: the side-move clause is removed.
    DetFtNaive,
    ProbFt,
    TwoRobotDet,
    Barycenter,
    NearestNeighbor,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 7] = [
        AlgorithmKind::ProbBasic,
        AlgorithmKind::DetFt,
        AlgorithmKind::DetFtNaive,
        AlgorithmKind::ProbFt,
        AlgorithmKind::TwoRobotDet,
        AlgorithmKind::Barycenter,
        AlgorithmKind::NearestNeighbor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::ProbBasic => "prob-basic",
            AlgorithmKind::DetFt => "det-ft",
            AlgorithmKind::DetFtNaive => "det-ft-naive",
            AlgorithmKind::ProbFt => "prob-ft",
            AlgorithmKind::TwoRobotDet => "two-robot",
            AlgorithmKind::Barycenter => "barycenter",
            AlgorithmKind::NearestNeighbor => "nearest-neighbor",
        }
    }

    pub fn from_name(s: &str) -> Result<Self, AlgoError> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| AlgoError::UnknownAlgorithm(s.to_string()))
    }

    /// Observation mode the rule is defined for.
    pub fn required_mode(self) -> MultiplicityMode {
        match self {
            AlgorithmKind::DetFt | AlgorithmKind::DetFtNaive | AlgorithmKind::ProbFt | AlgorithmKind::Barycenter => {
                MultiplicityMode::WithMultiplicity
            }
            _ => MultiplicityMode::WithoutMultiplicity,
        }
    }

    pub fn is_conforming(self) -> bool {
        self != AlgorithmKind::DetFtNaive
    }

    pub fn is_probabilistic(self) -> bool {
        matches!(self, AlgorithmKind::ProbBasic | AlgorithmKind::ProbFt)
    }
}

/// When a robot heading for a castle counts as blocked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlockedRule {
    /// Straight move iff robots on the segment (own location excluded, castle included) `< 2·mulmax`.
    #[default]
    Listing,
    /// Blocked iff at least `mulmax − 1` robots lie strictly between the robot and the castle.
    StrictlyBetween,
}

impl BlockedRule {
    pub fn name(self) -> &'static str {
        match self {
            BlockedRule::Listing => "listing",
            BlockedRule::StrictlyBetween => "strictly-between",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [BlockedRule::Listing, BlockedRule::StrictlyBetween].into_iter().find(|r| r.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlgorithmConfig {
    pub kind: AlgorithmKind,
    pub blocked_rule: BlockedRule,
}

impl AlgorithmConfig {
    pub fn new(kind: AlgorithmKind) -> Self {
        AlgorithmConfig { kind, blocked_rule: BlockedRule::default() }
    }

    pub fn decide(&self, obs: &Observation, rng: &mut RandomSource) -> Result<Decision, AlgoError> {
        match self.kind {
            AlgorithmKind::ProbBasic => Ok(alg_prob_basic(obs, rng)),
            AlgorithmKind::DetFt => alg_det_ft(obs, self.blocked_rule),
            AlgorithmKind::DetFtNaive => Ok(alg_det_ft_naive(obs)),
            AlgorithmKind::ProbFt => alg_prob_ft(obs, rng, self.blocked_rule),
            AlgorithmKind::TwoRobotDet => alg_two_robot_det(obs),
            AlgorithmKind::Barycenter => Ok(alg_barycenter(obs)),
            AlgorithmKind::NearestNeighbor => Ok(alg_nearest_neighbor(obs)),
        }
    }
}

/// Non-origin locations in a frame-independent order: canonical angle, then distance.
fn others_in_canonical_order(obs: &Observation) -> Vec<Point2> {
    let canon = CanonicalFrame::of(obs);
    let mut others: Vec<Point2> = obs.locations().filter(|p| *p != Point2::ORIGIN).collect();
    others.sort_by(|a, b| canon.order(*a, *b));
    others
}

/// Nearest of `candidates` (none at the origin); ties by canonical angle.
fn nearest(obs: &Observation, candidates: &[Point2]) -> Option<Point2> {
    let canon = CanonicalFrame::of(obs);
    let dmin = candidates.iter().map(|p| p.norm()).fold(f64::INFINITY, f64::min);
    let tol = 1e-12 * dmin.max(f64::MIN_POSITIVE);
    candidates.iter().copied().filter(|p| p.norm() <= dmin + tol).min_by(|a, b| canon.order(*a, *b))
}

/// Coin with probability `1/valence`; on success moves to a uniformly chosen other location.
pub fn alg_prob_basic(obs: &Observation, rng: &mut RandomSource) -> Decision {
    let v = obs.valence();
    if v <= 1 {
        return Decision::Stay;
    }
    let alpha = 1.0 / v as f64;
    if !rng.gen_bool(alpha) {
        return Decision::Stay;
    }
    let others = others_in_canonical_order(obs);
    Decision::MoveTo(others[rng.gen_range(0..others.len())])
}

pub fn alg_two_robot_det(obs: &Observation) -> Result<Decision, AlgoError> {
    match obs.valence() {
        0 | 1 => Ok(Decision::Stay),
        2 => Ok(Decision::MoveTo(obs.locations().find(|p| *p != Point2::ORIGIN).unwrap())),
        v => Err(AlgoError::TwoRobotMisapplied(v)),
    }
}

/// Castle the deterministic rule heads for, if any castle other than the observer's own exists.
fn target_castle(obs: &Observation) -> Option<Point2> {
    let others: Vec<Point2> = obs.max_mult().into_iter().filter(|p| *p != Point2::ORIGIN).collect();
    nearest(obs, &others)
}

fn is_blocked(obs: &Observation, q: Point2, rule: BlockedRule) -> bool {
    let positions = obs.robot_positions();
    let eps = 1e-9 * q.norm().max(1.0);
    match rule {
        BlockedRule::Listing => robots_on_segment(Point2::ORIGIN, q, &positions, eps).unwrap_or(0) >= 2 * obs.mulmax(),
        BlockedRule::StrictlyBetween => {
            robots_strictly_between(Point2::ORIGIN, q, &positions, eps).unwrap_or(0) + 1 >= obs.mulmax()
        }
    }
}

/// Deterministic crash-tolerant rule with the disambiguated side move.
pub fn alg_det_ft(obs: &Observation, rule: BlockedRule) -> Result<Decision, AlgoError> {
    let Some(q) = target_castle(obs) else {
        return Ok(Decision::Stay);
    };
    if is_blocked(obs, q, rule) {
        side_move_target(Point2::ORIGIN, q, obs).map(Decision::MoveTo)
    } else {
        Ok(Decision::MoveTo(q))
    }
}

/// The deterministic rule without the side-move clause: always a straight move.
pub fn alg_det_ft_naive(obs: &Observation) -> Decision {
    target_castle(obs).map_or(Decision::Stay, Decision::MoveTo)
}

pub fn alg_prob_ft(obs: &Observation, rng: &mut RandomSource, rule: BlockedRule) -> Result<Decision, AlgoError> {
    let castles = obs.max_mult();
    if !castles.contains(&Point2::ORIGIN) {
        return alg_det_ft(obs, rule);
    }
    if castles.len() == 1 {
        return Ok(Decision::Stay);
    }
    let alpha = (1.0 / obs.mulmax() as f64).min(0.5);
    if rng.gen_bool(alpha) {
        alg_det_ft(obs, rule)
    } else {
        Ok(Decision::Stay)
    }
}

pub fn alg_barycenter(obs: &Observation) -> Decision {
    let total: usize = obs.points.iter().map(|(_, m)| m).sum();
    let sum = obs.points.iter().fold(Point2::ORIGIN, |acc, &(p, m)| acc + p * m as f64);
    Decision::MoveTo(sum * (1.0 / total.max(1) as f64))
}

pub fn alg_nearest_neighbor(obs: &Observation) -> Decision {
    let others: Vec<Point2> = obs.locations().filter(|p| *p != Point2::ORIGIN).collect();
    nearest(obs, &others).map_or(Decision::Stay, Decision::MoveTo)
}
