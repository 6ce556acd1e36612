//! Activation daemons: generators that emit legal activation sets, validators that
//! check a recorded history against a class, and the adversarial schedules used by the
//! impossibility constructions.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::model::{is_one_bivalent, Configuration, Location, RobotId, Status};
use crate::rng::RandomSource;

/// Default bound on how long an unfair generator may starve a robot.
pub const DEFAULT_STARVATION_CAP: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchedError {
    #[error("all robots crashed")]
    AllCrashed,
    #[error("invalid scheduler: {0}")]
    Invalid(String),
}

/// Per-step activation sets.
pub type ActivationHistory = Vec<Vec<RobotId>>;

/// Adaptive adversaries whose choices depend on the configuration or on outcomes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdversaryPolicy {
    /// Round-robin over `order` until a 1-bivalent configuration has its single robot next,
    /// then swap that robot with the one-before-last robot of the order, once.
    TwoBoundedSwap { order: Vec<usize> },
    /// Re-activates the current robot until it moves, then advances along `order`.
    Derandomizer { order: Vec<usize>, probabilistic: bool },
    /// Centralized schedule of a bivalent split in which every correct move is undone by a
    /// Byzantine move; `switch` enables the odd-n variant with a designated switch robot.
    Countermove { switch: Option<usize> },
    /// Alternates one correct robot (least recently activated first) with the Byzantine robot.
    AttractorBait,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Script {
    /// Fixed sequence of activation sets, repeated forever.
    Cycle(Vec<Vec<usize>>),
    Adaptive(AdversaryPolicy),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchedulerKind {
    UnfairArbitrary,
    UnfairCentralized,
    /// Every robot at least once in every `window` consecutive steps (`None` = unbounded).
    FairArbitrary {
        window: Option<usize>,
    },
    FairCentralized {
        window: Option<usize>,
    },
    /// Centralized; between two activations of a robot no other robot is activated more than `k` times.
    FairKBounded {
        k: usize,
    },
    RoundRobin {
        order: Vec<usize>,
    },
    TwoBoundedCentralized,
    FullySynchronous,
    Scripted(Script),
}

impl SchedulerKind {
    pub fn is_centralized(&self) -> bool {
        matches!(
            self,
            SchedulerKind::UnfairCentralized
                | SchedulerKind::FairCentralized { .. }
                | SchedulerKind::FairKBounded { .. }
                | SchedulerKind::RoundRobin { .. }
                | SchedulerKind::TwoBoundedCentralized
        )
    }

    /// Parses names such as `fair-k-bounded:3`, `round-robin:2,0,1` or `fair-arbitrary:20`.
    pub fn parse(spec: &str, n: usize) -> Result<Self, SchedError> {
        let (name, arg) = match spec.split_once(':') {
            Some((a, b)) => (a.trim(), Some(b.trim())),
            None => (spec.trim(), None),
        };
        let num = |what: &str| -> Result<usize, SchedError> {
            arg.ok_or_else(|| SchedError::Invalid(format!("{name} needs {what}")))?
                .parse()
                .map_err(|_| SchedError::Invalid(format!("bad {what} in `{spec}`")))
        };
        let window = || -> Result<Option<usize>, SchedError> {
            match arg {
                None | Some("inf") => Ok(None),
                Some(_) => num("window").map(Some),
            }
        };
        let kind = match name {
            "unfair-arbitrary" => SchedulerKind::UnfairArbitrary,
            "unfair-centralized" => SchedulerKind::UnfairCentralized,
            "fair-arbitrary" => SchedulerKind::FairArbitrary { window: window()? },
            "fair-centralized" => SchedulerKind::FairCentralized { window: window()? },
            "fair-k-bounded" => SchedulerKind::FairKBounded { k: num("k")? },
            "two-bounded-centralized" => SchedulerKind::TwoBoundedCentralized,
            "fully-synchronous" => SchedulerKind::FullySynchronous,
            "round-robin" => {
                let order = match arg {
                    None => (0..n).collect(),
                    Some(list) => list
                        .split(',')
                        .map(|s| s.trim().parse::<usize>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|_| SchedError::Invalid(format!("bad order in `{spec}`")))?,
                };
                SchedulerKind::RoundRobin { order }
            }
            other => return Err(SchedError::Invalid(format!("unknown scheduler `{other}`"))),
        };
        kind.check(n)?;
        Ok(kind)
    }

    pub fn check(&self, n: usize) -> Result<(), SchedError> {
        match self {
            SchedulerKind::FairKBounded { k: 0 } => Err(SchedError::Invalid("k must be at least 1".into())),
            SchedulerKind::RoundRobin { order } => {
                let set: BTreeSet<usize> = order.iter().copied().collect();
                if order.len() != n || set.len() != n || set.iter().any(|&i| i >= n) {
                    Err(SchedError::Invalid("round-robin order must be a permutation of the robots".into()))
                } else {
                    Ok(())
                }
            }
            SchedulerKind::FairCentralized { window: Some(w) } if *w < n => {
                Err(SchedError::Invalid(format!("centralized window {w} is shorter than n = {n}")))
            }
            SchedulerKind::FairArbitrary { window: Some(0) } => {
                Err(SchedError::Invalid("window must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let win = |w: &Option<usize>| w.map_or("inf".to_string(), |w| w.to_string());
        match self {
            SchedulerKind::UnfairArbitrary => write!(f, "unfair-arbitrary"),
            SchedulerKind::UnfairCentralized => write!(f, "unfair-centralized"),
            SchedulerKind::FairArbitrary { window } => write!(f, "fair-arbitrary:{}", win(window)),
            SchedulerKind::FairCentralized { window } => write!(f, "fair-centralized:{}", win(window)),
            SchedulerKind::FairKBounded { k } => write!(f, "fair-k-bounded:{k}"),
            SchedulerKind::RoundRobin { order } => {
                let s: Vec<String> = order.iter().map(|i| i.to_string()).collect();
                write!(f, "round-robin:{}", s.join(","))
            }
            SchedulerKind::TwoBoundedCentralized => write!(f, "two-bounded-centralized"),
            SchedulerKind::FullySynchronous => write!(f, "fully-synchronous"),
            SchedulerKind::Scripted(_) => write!(f, "scripted"),
        }
    }
}

/// The cyclic schedule r3…rn, r1, r2 (robots 0-indexed: 2…n−1, 0, 1).
///
/// `grouped` activates r3…rn together as one set; otherwise every activation is a singleton.
pub fn scripted_cycle_schedule(n: usize, grouped: bool) -> Result<Vec<Vec<usize>>, SchedError> {
    if n < 3 {
        return Err(SchedError::Invalid("cycle schedule needs n ≥ 3".into()));
    }
    let rest: Vec<usize> = (2..n).collect();
    let mut out = if grouped { vec![rest] } else { rest.into_iter().map(|i| vec![i]).collect() };
    out.push(vec![0]);
    out.push(vec![1]);
    Ok(out)
}

/// Running k-bound bookkeeping: `since[s][r]` counts activations of `s` since `r` was last active.
#[derive(Debug, Clone)]
struct BoundCounter {
    since: Vec<Vec<usize>>,
}

impl BoundCounter {
    fn new(n: usize) -> Self {
        BoundCounter { since: vec![vec![0; n]; n] }
    }

    fn may_activate(&self, s: usize, k: usize) -> bool {
        self.since[s].iter().enumerate().all(|(r, &c)| r == s || c < k)
    }

    fn record(&mut self, set: &[usize]) {
        let n = self.since.len();
        for &r in set {
            for s in 0..n {
                self.since[s][r] = 0;
            }
        }
        for &s in set {
            for r in 0..n {
                if r != s && !set.contains(&r) {
                    self.since[s][r] += 1;
                }
            }
        }
    }

    fn worst(&self) -> Option<(usize, usize, usize)> {
        let mut worst = None;
        for (s, row) in self.since.iter().enumerate() {
            for (r, &c) in row.iter().enumerate() {
                if r != s && worst.is_none_or(|(_, _, w)| c > w) {
                    worst = Some((s, r, c));
                }
            }
        }
        worst
    }
}

/// Stateful activation generator for one run.
#[derive(Debug, Clone)]
pub struct Scheduler {
    kind: SchedulerKind,
    n: usize,
    rng: RandomSource,
    starvation_cap: usize,
    step: usize,
    last: Vec<Option<usize>>,
    bounds: BoundCounter,
    cursor: usize,
    order: Vec<usize>,
    swapped: bool,
    repeats: usize,
    pending_advance: bool,
}

impl Scheduler {
    pub fn new(kind: SchedulerKind, n: usize, rng: RandomSource, starvation_cap: usize) -> Result<Self, SchedError> {
        kind.check(n)?;
        let order = match &kind {
            SchedulerKind::RoundRobin { order } => order.clone(),
            SchedulerKind::Scripted(Script::Adaptive(
                AdversaryPolicy::TwoBoundedSwap { order } | AdversaryPolicy::Derandomizer { order, .. },
            )) => order.clone(),
            _ => (0..n).collect(),
        };
        if order.len() != n {
            return Err(SchedError::Invalid("order must list every robot".into()));
        }
        Ok(Scheduler {
            kind,
            n,
            rng,
            starvation_cap: starvation_cap.max(1),
            step: 0,
            last: vec![None; n],
            bounds: BoundCounter::new(n),
            cursor: 0,
            order,
            swapped: false,
            repeats: 0,
            pending_advance: false,
        })
    }

    pub fn kind(&self) -> &SchedulerKind {
        &self.kind
    }

    fn gap(&self, r: usize) -> usize {
        self.last[r].map_or(self.step + 1, |l| self.step - l)
    }

    /// Robots that must be activated now to respect a window.
    fn due(&self, window: usize) -> Vec<usize> {
        (0..self.n).filter(|&r| self.gap(r) >= window).collect()
    }

    fn random_subset(&mut self) -> Vec<usize> {
        loop {
            let set: Vec<usize> = (0..self.n).filter(|_| self.rng.gen_bool(0.5)).collect();
            if !set.is_empty() {
                return set;
            }
        }
    }

    fn arbitrary(&mut self, window: usize) -> Vec<usize> {
        let mut set = self.random_subset();
        for r in self.due(window) {
            if !set.contains(&r) {
                set.push(r);
            }
        }
        set.sort_unstable();
        set
    }

    /// Earliest-deadline choice when any deadline is tight, uniform otherwise.
    fn centralized(&mut self, window: usize) -> usize {
        let mut by_deadline: Vec<usize> = (0..self.n).collect();
        by_deadline.sort_by_key(|&r| (self.last[r].map_or(0, |l| l + 1), r));
        let tight = by_deadline.iter().enumerate().any(|(i, &r)| {
            let deadline = self.last[r].map_or(window, |l| l + window);
            deadline <= self.step + i + 1
        });
        if tight {
            by_deadline[0]
        } else {
            self.rng.gen_range(0..self.n)
        }
    }

    fn k_bounded(&mut self, k: usize) -> usize {
        let legal: Vec<usize> = (0..self.n).filter(|&s| self.bounds.may_activate(s, k)).collect();
        legal[self.rng.gen_range(0..legal.len())]
    }

    fn least_recent(&self, among: impl Iterator<Item = usize>) -> Option<usize> {
        among.min_by_key(|&r| (self.last[r].map_or(-1, |l| l as i64), r))
    }

    pub fn next_activation(&mut self, config: &Configuration) -> Result<Vec<RobotId>, SchedError> {
        if config.robots.iter().all(|r| r.is_crashed()) {
            return Err(SchedError::AllCrashed);
        }
        let cap = self.starvation_cap;
        let set: Vec<usize> = match self.kind.clone() {
            SchedulerKind::UnfairArbitrary => self.arbitrary(cap),
            SchedulerKind::FairArbitrary { window } => self.arbitrary(window.unwrap_or(cap)),
            SchedulerKind::UnfairCentralized => vec![self.centralized(cap.max(self.n))],
            SchedulerKind::FairCentralized { window } => vec![self.centralized(window.unwrap_or(cap).max(self.n))],
            SchedulerKind::FairKBounded { k } => vec![self.k_bounded(k)],
            SchedulerKind::TwoBoundedCentralized => vec![self.k_bounded(2)],
            SchedulerKind::RoundRobin { order } => vec![order[self.step % self.n]],
            SchedulerKind::FullySynchronous => (0..self.n).collect(),
            SchedulerKind::Scripted(Script::Cycle(seq)) => {
                if seq.is_empty() {
                    return Err(SchedError::Invalid("empty script".into()));
                }
                seq[self.step % seq.len()].clone()
            }
            SchedulerKind::Scripted(Script::Adaptive(policy)) => self.adaptive(&policy, config)?,
        };
        if set.is_empty() || set.iter().any(|&r| r >= self.n) {
            return Err(SchedError::Invalid(format!("illegal activation set {set:?}")));
        }
        for &r in &set {
            self.last[r] = Some(self.step);
        }
        self.bounds.record(&set);
        self.step += 1;
        Ok(set.into_iter().map(RobotId).collect())
    }

    fn adaptive(&mut self, policy: &AdversaryPolicy, config: &Configuration) -> Result<Vec<usize>, SchedError> {
        Ok(match policy {
            AdversaryPolicy::TwoBoundedSwap { .. } => {
                if !self.swapped {
                    self.maybe_swap(config);
                }
                let r = self.order[self.cursor];
                self.cursor = (self.cursor + 1) % self.n;
                vec![r]
            }
            AdversaryPolicy::Derandomizer { probabilistic, .. } => {
                if self.pending_advance || !probabilistic || self.repeats >= self.starvation_cap {
                    if self.repeats > 0 {
                        self.cursor = (self.cursor + 1) % self.n;
                    }
                    self.repeats = 0;
                    self.pending_advance = false;
                }
                self.repeats += 1;
                vec![self.order[self.cursor]]
            }
            AdversaryPolicy::Countermove { switch } => vec![self.countermove(config, *switch)],
            AdversaryPolicy::AttractorBait => {
                let byz: Vec<usize> = ids_with(config, |s| s == Status::Byzantine);
                let last_was_correct = self.step > 0
                    && self.last.iter().enumerate().any(|(r, l)| *l == Some(self.step - 1) && !byz.contains(&r));
                if last_was_correct && !byz.is_empty() {
                    vec![self.least_recent(byz.into_iter()).unwrap()]
                } else {
                    let correct = ids_with(config, |s| s == Status::Correct);
                    let b = byz.first().map(|&b| config.robots[b].position);
                    let pick = self
                        .least_recent(correct.iter().copied().filter(|&c| b != Some(config.robots[c].position)))
                        .or_else(|| self.least_recent(correct.iter().copied()))
                        .or_else(|| self.least_recent(0..self.n));
                    vec![pick.unwrap()]
                }
            }
        })
    }

    fn maybe_swap(&mut self, config: &Configuration) {
        if !is_one_bivalent(config) || self.n < 3 {
            return;
        }
        let locs = config.locations();
        let single = locs.iter().find(|l| l.multiplicity() == 1).unwrap().robots[0];
        if self.order[self.cursor] != single || self.cursor == self.n - 1 {
            return;
        }
        // The single robot trades places with the one-before-last robot of the order.
        self.order.swap(self.cursor, self.n - 2);
        self.swapped = true;
    }

    fn countermove(&self, config: &Configuration, switch: Option<usize>) -> usize {
        let locs = config.locations();
        let fallback = || self.least_recent(0..self.n).unwrap();
        if locs.len() != 2 {
            return fallback();
        }
        let byz_in = |l: &Location| l.robots.iter().filter(|&&r| config.robots[r].status == Status::Byzantine).count();
        let correct_in = |l: &Location| -> Vec<usize> {
            l.robots.iter().copied().filter(|&r| config.robots[r].status == Status::Correct).collect()
        };
        let (big, small) =
            if locs[0].multiplicity() >= locs[1].multiplicity() { (&locs[0], &locs[1]) } else { (&locs[1], &locs[0]) };
        let diff = big.multiplicity() - small.multiplicity();
        let non_switch_byz = |l: &Location| {
            l.robots
                .iter()
                .copied()
                .filter(|&r| config.robots[r].status == Status::Byzantine && Some(r) != switch)
                .collect::<Vec<_>>()
        };
        let pick = match switch {
            None if diff >= 2 => self.least_recent(non_switch_byz(big).into_iter()),
            None => {
                let calm = if byz_in(&locs[0]) <= byz_in(&locs[1]) { &locs[0] } else { &locs[1] };
                self.least_recent(correct_in(calm).into_iter())
            }
            Some(_) if diff >= 3 => self.least_recent(non_switch_byz(big).into_iter()).or(switch),
            Some(sw) => {
                let switch_ready =
                    big.robots.contains(&sw) && (non_switch_byz(big).is_empty() || correct_in(small).is_empty());
                if switch_ready {
                    Some(sw)
                } else {
                    self.least_recent(correct_in(small).into_iter())
                }
            }
        };
        pick.unwrap_or_else(fallback)
    }

    /// Reports whether each activated robot actually moved.
    pub fn feedback(&mut self, moved: &[(RobotId, bool)]) {
        if let SchedulerKind::Scripted(Script::Adaptive(AdversaryPolicy::Derandomizer { .. })) = self.kind {
            if moved.iter().any(|&(_, m)| m) {
                self.pending_advance = true;
            }
        }
    }

    /// Scheduler state relevant to future choices, for cycle detection; `None` when choices are random.
    pub fn state_key(&self) -> Option<Vec<u64>> {
        match &self.kind {
            SchedulerKind::RoundRobin { .. } => Some(vec![(self.step % self.n) as u64]),
            SchedulerKind::FullySynchronous => Some(Vec::new()),
            SchedulerKind::Scripted(Script::Cycle(seq)) => Some(vec![(self.step % seq.len().max(1)) as u64]),
            SchedulerKind::Scripted(Script::Adaptive(AdversaryPolicy::TwoBoundedSwap { .. })) => {
                let mut key = vec![self.swapped as u64, self.cursor as u64];
                key.extend(self.order.iter().map(|&r| r as u64));
                Some(key)
            }
            SchedulerKind::Scripted(Script::Adaptive(
                AdversaryPolicy::Countermove { .. } | AdversaryPolicy::AttractorBait,
            )) => {
                let mut recency: Vec<usize> = (0..self.n).collect();
                recency.sort_by_key(|&r| (self.last[r].map_or(-1, |l| l as i64), r));
                let mut key: Vec<u64> = recency.into_iter().map(|r| r as u64).collect();
                key.push(self.last.iter().position(|l| *l == self.step.checked_sub(1)).map_or(u64::MAX, |r| r as u64));
                Some(key)
            }
            _ => None,
        }
    }
}

fn ids_with(config: &Configuration, pred: impl Fn(Status) -> bool) -> Vec<usize> {
    (0..config.len()).filter(|&i| pred(config.robots[i].status)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub step: usize,
    pub reason: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {}: {}", self.step, self.reason)
    }
}

fn check_window(history: &ActivationHistory, n: usize, window: usize) -> Result<(), Violation> {
    let mut last: Vec<Option<usize>> = vec![None; n];
    for (t, set) in history.iter().enumerate() {
        for id in set {
            last[id.0] = Some(t);
        }
        for (r, l) in last.iter().enumerate() {
            let gap = l.map_or(t + 1, |l| t - l);
            if gap >= window {
                return Err(Violation {
                    step: t,
                    reason: format!("r{r} not activated within a window of {window} steps"),
                });
            }
        }
    }
    Ok(())
}

/// Checks `history` against every constraint of `kind` for `n` robots.
pub fn validate_history(kind: &SchedulerKind, history: &ActivationHistory, n: usize) -> Result<(), Violation> {
    kind.check(n).map_err(|e| Violation { step: 0, reason: e.to_string() })?;
    for (t, set) in history.iter().enumerate() {
        if set.is_empty() {
            return Err(Violation { step: t, reason: "empty activation set".into() });
        }
        if let Some(bad) = set.iter().find(|r| r.0 >= n) {
            return Err(Violation { step: t, reason: format!("unknown robot {bad}") });
        }
        let distinct: BTreeSet<_> = set.iter().collect();
        if distinct.len() != set.len() {
            return Err(Violation { step: t, reason: "robot listed twice".into() });
        }
        if kind.is_centralized() && set.len() != 1 {
            return Err(Violation { step: t, reason: format!("centralized step activates {} robots", set.len()) });
        }
    }
    match kind {
        SchedulerKind::FairArbitrary { window: Some(w) } | SchedulerKind::FairCentralized { window: Some(w) } => {
            check_window(history, n, *w)
        }
        SchedulerKind::FairKBounded { k } => check_k_bound(history, n, *k),
        SchedulerKind::TwoBoundedCentralized => check_k_bound(history, n, 2),
        SchedulerKind::RoundRobin { order } => {
            for (t, set) in history.iter().enumerate() {
                if set[0].0 != order[t % n] {
                    return Err(Violation { step: t, reason: format!("expected r{}, got {}", order[t % n], set[0]) });
                }
            }
            Ok(())
        }
        SchedulerKind::FullySynchronous => {
            for (t, set) in history.iter().enumerate() {
                if set.len() != n {
                    return Err(Violation { step: t, reason: format!("only {} of {n} robots active", set.len()) });
                }
            }
            Ok(())
        }
        SchedulerKind::Scripted(Script::Cycle(seq)) => {
            for (t, set) in history.iter().enumerate() {
                let want: Vec<RobotId> = seq[t % seq.len()].iter().map(|&r| RobotId(r)).collect();
                if *set != want {
                    return Err(Violation { step: t, reason: "deviates from the script".into() });
                }
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

fn check_k_bound(history: &ActivationHistory, n: usize, k: usize) -> Result<(), Violation> {
    let mut bounds = BoundCounter::new(n);
    for (t, set) in history.iter().enumerate() {
        let ids: Vec<usize> = set.iter().map(|r| r.0).collect();
        bounds.record(&ids);
        if let Some((s, r, c)) = bounds.worst() {
            if c > k {
                return Err(Violation {
                    step: t,
                    reason: format!("r{s} activated {c} times while r{r} waits (k = {k})"),
                });
            }
        }
    }
    Ok(())
}
