//! Built-in scenarios reproducing the constructions of the impossibility and
//! possibility arguments.

use super::scenario::{Goal, RecurrenceMode, Scenario};
use super::HarnessError;
use crate::algorithms::{AlgorithmKind, BlockedRule};
use crate::faults::{ByzantineStrategy, CrashEvent, FaultPlan};
use crate::geometry::Point2;
use crate::model::RobotId;
use crate::schedulers::{scripted_cycle_schedule, AdversaryPolicy, SchedulerKind, Script};

pub const CATALOG: [(&str, &str); 8] = [
    ("fig2-cycle", "n=5 nearest-neighbour robots cycling between equivalent bivalent configurations"),
    ("k2-swap", "2-bounded centralized adversary that swaps one robot in a round-robin order"),
    ("appendix-a1", "two towers between far crashed castles; straight moves cycle forever"),
    ("byz-balancer", "(4,1) Byzantine robot undoing every correct move of the deterministic rule"),
    ("byz-switch", "(5,2) Byzantine pair with a switch robot flipping the split"),
    ("byz-attractor", "(3,1) Byzantine bait that keeps the two correct robots apart"),
    ("byz-breaker", "(4,1) Byzantine robot leaving every gathering point"),
    ("lemma10-n2", "two robots with the randomized rule under a random unfair scheduler"),
];

fn p(x: f64, y: f64) -> Point2 {
    Point2::new(x, y)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    CATALOG.iter().map(|(n, _)| *n)
}

pub fn catalog_scenario(name: &str) -> Result<Scenario, HarnessError> {
    let s = match name {
        "fig2-cycle" => {
            // r1 alone at x = 1, everyone else at the origin.
            let mut pts = vec![p(1.0, 0.0)];
            pts.extend([Point2::ORIGIN; 4]);
            let mut s = Scenario::new(name, AlgorithmKind::NearestNeighbor, &pts, 10.0);
            s.scheduler = SchedulerKind::Scripted(Script::Cycle(scripted_cycle_schedule(5, true)?));
            s.goal = Goal::Strong;
            s.recurrence = RecurrenceMode::Similar;
            s.max_steps = 100;
            s
        }
        "k2-swap" => {
            // 1-bivalent with the single robot first in the order, so the swap fires at once.
            let pts = [p(1.0, 0.0), Point2::ORIGIN, Point2::ORIGIN, Point2::ORIGIN];
            let mut s = Scenario::new(name, AlgorithmKind::NearestNeighbor, &pts, 10.0);
            s.scheduler =
                SchedulerKind::Scripted(Script::Adaptive(AdversaryPolicy::TwoBoundedSwap { order: vec![0, 1, 2, 3] }));
            s.validate_as = Some(SchedulerKind::TwoBoundedCentralized);
            s.recurrence = RecurrenceMode::Similar;
            s.max_steps = 1000;
            s
        }
        "appendix-a1" => {
            // Reach 1, towers 2·D apart with D = 2, far castles 10·D apart.
            let mut pts = vec![p(2.0, 0.0), p(-2.0, 0.0)];
            pts.extend([p(-10.0, 0.0); 3]);
            pts.extend([p(10.0, 0.0); 3]);
            pts.extend([p(-2.0, 0.0); 2]);
            pts.extend([p(2.0, 0.0); 2]);
            let mut s = Scenario::new(name, AlgorithmKind::DetFtNaive, &pts, 1.0);
            s.algorithm.blocked_rule = BlockedRule::StrictlyBetween;
            s.scheduler = SchedulerKind::Scripted(Script::Cycle(vec![vec![0], vec![1]]));
            s.faults = FaultPlan {
                crashes: (2..pts.len()).map(|r| CrashEvent { robot: RobotId(r), at_step: 0 }).collect(),
                f: pts.len() - 2,
                ..Default::default()
            };
            s.goal = Goal::Weak;
            s.recurrence = RecurrenceMode::Anonymous;
            s
        }
        "byz-balancer" => {
            let pts = [Point2::ORIGIN, Point2::ORIGIN, p(1.0, 0.0), p(1.0, 0.0)];
            let mut s = Scenario::new(name, AlgorithmKind::DetFt, &pts, 1.0);
            s.scheduler = SchedulerKind::Scripted(Script::Adaptive(AdversaryPolicy::Countermove { switch: None }));
            s.validate_as = Some(SchedulerKind::FairKBounded { k: 3 });
            s.faults =
                FaultPlan { byzantine: vec![(RobotId(0), ByzantineStrategy::Balancer)], f: 1, ..Default::default() };
            s.goal = Goal::Weak;
            s.recurrence = RecurrenceMode::Labeled;
            s
        }
        "byz-switch" => {
            let pts = [Point2::ORIGIN, Point2::ORIGIN, Point2::ORIGIN, p(1.0, 0.0), p(1.0, 0.0)];
            let mut s = Scenario::new(name, AlgorithmKind::DetFt, &pts, 1.0);
            s.scheduler = SchedulerKind::Scripted(Script::Adaptive(AdversaryPolicy::Countermove { switch: Some(1) }));
            s.validate_as = Some(SchedulerKind::FairKBounded { k: 3 });
            let switch = ByzantineStrategy::Switch { designated: RobotId(1) };
            s.faults = FaultPlan {
                byzantine: vec![(RobotId(0), switch.clone()), (RobotId(1), switch)],
                f: 2,
                ..Default::default()
            };
            s.goal = Goal::Weak;
            s.recurrence = RecurrenceMode::Labeled;
            s
        }
        "byz-attractor" => {
            let pts = [Point2::ORIGIN, p(4.0, 0.0), p(1.0, 0.0)];
            let mut s = Scenario::new(name, AlgorithmKind::DetFt, &pts, 2.0);
            s.scheduler = SchedulerKind::Scripted(Script::Adaptive(AdversaryPolicy::AttractorBait));
            s.validate_as = Some(SchedulerKind::FairKBounded { k: 2 });
            s.faults =
                FaultPlan { byzantine: vec![(RobotId(2), ByzantineStrategy::Attractor)], f: 1, ..Default::default() };
            s.goal = Goal::Weak;
            s.max_steps = 200;
            s
        }
        "byz-breaker" => {
            let pts = [p(1.0, 0.0), p(3.0, 0.0), p(7.0, 0.0), Point2::ORIGIN];
            let mut s = Scenario::new(name, AlgorithmKind::NearestNeighbor, &pts, 10.0);
            s.scheduler = SchedulerKind::RoundRobin { order: vec![0, 1, 2, 3] };
            s.faults = FaultPlan {
                byzantine: vec![(RobotId(3), ByzantineStrategy::GatheredBreaker)],
                f: 1,
                ..Default::default()
            };
            s.goal = Goal::None;
            s.max_steps = 1000;
            s
        }
        "lemma10-n2" => {
            let mut s = Scenario::new(name, AlgorithmKind::ProbBasic, &[Point2::ORIGIN, p(10.0, 0.0)], 1.0);
            s.scheduler = SchedulerKind::UnfairArbitrary;
            s.seed = 1;
            s
        }
        other => return Err(HarnessError::Scenario(format!("unknown catalog scenario `{other}`"))),
    };
    s.validate()?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_builds_and_serializes() {
        for name in names() {
            let s = catalog_scenario(name).unwrap();
            assert_eq!(s.name, name);
            let back = Scenario::from_toml(&s.to_toml().unwrap()).unwrap();
            assert_eq!(back, s, "{name}");
        }
        assert!(catalog_scenario("nope").is_err());
    }
}
