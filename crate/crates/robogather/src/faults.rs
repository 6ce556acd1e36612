//! Crash plans and Byzantine controllers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::geometry::Point2;
use crate::model::{Configuration, Location, RobotId, Status};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FaultError {
    #[error("fault budget exceeded: {faults} faulty robots but f = {f}")]
    OverBudget { faults: usize, f: usize },
    #[error("f = {f} leaves no correct robot among n = {n}")]
    NoCorrectRobot { f: usize, n: usize },
    #[error("robot {0} listed more than once in the fault plan")]
    Duplicate(RobotId),
    #[error("robot {0} does not exist")]
    UnknownRobot(RobotId),
    #[error("threshold undefined for n = {n}, f = {f}")]
    ThresholdUndefined { n: usize, f: usize },
    #[error("unknown Byzantine strategy `{0}`")]
    UnknownStrategy(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ByzantineStrategy {
    /// Bait: after a correct robot joins it, reappear next to another correct robot.
    Attractor,
    /// Leave any gathering point for a nearby point the correct robots will head to.
    GatheredBreaker,
    /// On a two-location split, move from the larger group to the smaller one.
    Balancer,
    /// Balancer for odd n with a designated robot that flips the groups' roles.
    Switch { designated: RobotId },
    /// Listed global targets in order, then stay.
    Scripted(Vec<Point2>),
}

impl ByzantineStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            ByzantineStrategy::Attractor => "attractor",
            ByzantineStrategy::GatheredBreaker => "gathered-breaker",
            ByzantineStrategy::Balancer => "balancer",
            ByzantineStrategy::Switch { .. } => "switch",
            ByzantineStrategy::Scripted(_) => "scripted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrashEvent {
    pub robot: RobotId,
    pub at_step: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FaultPlan {
    pub crashes: Vec<CrashEvent>,
    pub byzantine: Vec<(RobotId, ByzantineStrategy)>,
    /// Declared fault budget.
    pub f: usize,
    /// Optional reach cap for Byzantine robots; unlimited when `None`.
    pub byzantine_delta: Option<f64>,
}

impl FaultPlan {
    pub fn validate(&self, n: usize) -> Result<(), FaultError> {
        let faults = self.crashes.len() + self.byzantine.len();
        if faults > self.f {
            return Err(FaultError::OverBudget { faults, f: self.f });
        }
        if self.f >= n {
            return Err(FaultError::NoCorrectRobot { f: self.f, n });
        }
        let mut seen = BTreeSet::new();
        for id in self.crashes.iter().map(|c| c.robot).chain(self.byzantine.iter().map(|b| b.0)) {
            if id.0 >= n {
                return Err(FaultError::UnknownRobot(id));
            }
            if !seen.insert(id) {
                return Err(FaultError::Duplicate(id));
            }
        }
        for (_, s) in &self.byzantine {
            if let ByzantineStrategy::Switch { designated } = s {
                if !self.byzantine.iter().any(|(id, _)| id == designated) {
                    return Err(FaultError::UnknownRobot(*designated));
                }
            }
        }
        Ok(())
    }

    pub fn is_byzantine(&self, robot: RobotId) -> bool {
        self.byzantine.iter().any(|(id, _)| *id == robot)
    }

    /// Marks Byzantine robots in a fresh configuration and sets their reach.
    pub fn mark_byzantine(&self, config: &mut Configuration) {
        for (id, _) in &self.byzantine {
            config.robots[id.0].status = Status::Byzantine;
            config.robots[id.0].delta = self.byzantine_delta.unwrap_or(f64::INFINITY);
        }
    }
}

/// Crashes every robot scheduled for `step`; returns the robots that changed status.
pub fn apply_crashes(config: &mut Configuration, plan: &FaultPlan, step: u64) -> Vec<RobotId> {
    let mut hit = Vec::new();
    for c in plan.crashes.iter().filter(|c| c.at_step == step) {
        if config.crash(c.robot, step).is_ok() {
            hit.push(c.robot);
        }
    }
    hit
}

/// Smallest scheduler bound at which the Byzantine split adversaries block gathering.
pub fn byz_k_threshold(n: usize, f: usize) -> Result<usize, FaultError> {
    let undefined = FaultError::ThresholdUndefined { n, f };
    if f == 0 || f >= n {
        return Err(undefined);
    }
    let correct = n - f;
    if n.is_multiple_of(2) {
        Ok(correct.div_ceil(f))
    } else if f >= 2 {
        Ok(correct.div_ceil(f - 1))
    } else {
        Err(undefined)
    }
}

/// Why a strategy chose to stay; surfaced in run notes.
#[derive(Debug, Clone, PartialEq)]
pub enum StayReason {
    NotBivalent,
    Waiting,
    ScriptDone,
}

impl fmt::Display for StayReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StayReason::NotBivalent => write!(f, "configuration is not bivalent"),
            StayReason::Waiting => write!(f, "nothing to counter"),
            StayReason::ScriptDone => write!(f, "script exhausted"),
        }
    }
}

/// Per-run Byzantine state (script cursors).
#[derive(Debug, Clone, Default)]
pub struct FaultController {
    cursors: BTreeMap<RobotId, usize>,
}

impl FaultController {
    pub fn new() -> Self {
        Self::default()
    }

    /// Global target chosen by `robot` under `strategy`, or the reason it stays.
    pub fn decide(
        &mut self,
        strategy: &ByzantineStrategy,
        config: &Configuration,
        robot: RobotId,
    ) -> Result<Point2, StayReason> {
        if let ByzantineStrategy::Scripted(moves) = strategy {
            let cursor = self.cursors.entry(robot).or_insert(0);
            let target = moves.get(*cursor).copied().ok_or(StayReason::ScriptDone)?;
            *cursor += 1;
            return Ok(target);
        }
        byz_decide(strategy, config, robot)
    }

    pub fn state_key(&self) -> Vec<u64> {
        self.cursors.iter().flat_map(|(r, c)| [r.0 as u64, *c as u64]).collect()
    }
}

fn status_of(config: &Configuration, r: usize) -> Status {
    config.robots[r].status
}

/// Stateless strategies; `Scripted` needs a [`FaultController`] and is treated as finished here.
pub fn byz_decide(strategy: &ByzantineStrategy, config: &Configuration, robot: RobotId) -> Result<Point2, StayReason> {
    let me = config.robots[robot.0].position;
    match strategy {
        ByzantineStrategy::Scripted(_) => Err(StayReason::ScriptDone),
        ByzantineStrategy::Balancer | ByzantineStrategy::Switch { .. } => {
            let locs = config.locations();
            if locs.len() != 2 {
                return Err(StayReason::NotBivalent);
            }
            let (big, small) = if locs[0].multiplicity() >= locs[1].multiplicity() {
                (&locs[0], &locs[1])
            } else {
                (&locs[1], &locs[0])
            };
            if big.multiplicity() == small.multiplicity() || !big.robots.contains(&robot.0) {
                return Err(StayReason::Waiting);
            }
            if let ByzantineStrategy::Switch { designated } = strategy {
                if *designated == robot {
                    let others_left =
                        big.robots.iter().any(|&r| r != robot.0 && status_of(config, r) == Status::Byzantine);
                    let correct_left = small.robots.iter().any(|&r| status_of(config, r) == Status::Correct);
                    if others_left && correct_left {
                        return Err(StayReason::Waiting);
                    }
                }
            }
            Ok(small.position)
        }
        ByzantineStrategy::GatheredBreaker => {
            let correct = config.correct_ids();
            let Some(&first) = correct.first() else {
                return Err(StayReason::Waiting);
            };
            let p = config.robots[first].position;
            if !correct.iter().all(|&c| config.robots[c].position.colocated(p)) {
                return Err(StayReason::Waiting);
            }
            let reach = correct.iter().map(|&c| config.robots[c].delta).fold(1.0, f64::min);
            // Step back toward the origin when possible so broken configurations stay bounded.
            let right = p + Point2::new(reach, 0.0);
            let left = p - Point2::new(reach, 0.0);
            Ok(if left.norm() < right.norm() - 1e-12 { left } else { right })
        }
        ByzantineStrategy::Attractor => {
            let locs = config.locations();
            let mine = locs.iter().find(|l| l.position.colocated(me));
            let joined = mine.is_some_and(|l| l.robots.iter().any(|&r| status_of(config, r) == Status::Correct));
            if !joined {
                return Err(StayReason::Waiting);
            }
            attractor_bait(config, &locs, me).ok_or(StayReason::Waiting)
        }
    }
}

/// Point next to the correct robot farthest from `me`, on the side away from the others,
/// close enough that this point is its nearest neighbour and within its reach.
fn attractor_bait(config: &Configuration, locs: &[Location], me: Point2) -> Option<Point2> {
    let victim =
        config.correct_ids().into_iter().filter(|&c| !config.robots[c].position.colocated(me)).max_by(|&a, &b| {
            let (pa, pb) = (config.robots[a].position, config.robots[b].position);
            pa.dist(me).total_cmp(&pb.dist(me)).then(b.cmp(&a))
        })?;
    let at = config.robots[victim].position;
    let others: Vec<Point2> =
        locs.iter().map(|l| l.position).filter(|p| !p.colocated(at) && !p.colocated(me)).collect();
    let mut nearest = me.dist(at);
    for p in &others {
        nearest = nearest.min(p.dist(at));
    }
    let centre = others.iter().fold(me, |a, &p| a + p) * (1.0 / (others.len() + 1) as f64);
    let away = if (at - centre).norm() > 0.0 { (at - centre).normalized() } else { Point2::new(1.0, 0.0) };
    let gap = (nearest / 3.0).min(config.robots[victim].delta / 2.0);
    Some(at + away * gap)
}
