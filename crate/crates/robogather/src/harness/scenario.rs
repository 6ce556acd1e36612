//! Scenario description and its TOML file format.

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::algorithms::{AlgorithmConfig, AlgorithmKind, BlockedRule};
use crate::faults::{ByzantineStrategy, CrashEvent, FaultPlan};
use crate::geometry::{Point2, EPS_SNAP};
use crate::model::{Configuration, MultiplicityMode, RobotId, RobotState};
use crate::schedulers::{AdversaryPolicy, SchedulerKind, Script, DEFAULT_STARVATION_CAP};

/// Header every scenario file must carry.
pub const FORMAT_VERSION: &str = "robogather-scenario/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Goal {
    Strong,
    Weak,
    /// Never stop on gathering; run to the budget or a recurrence.
    None,
}

impl Goal {
    fn name(self) -> &'static str {
        match self {
            Goal::Strong => "strong",
            Goal::Weak => "weak",
            Goal::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecurrenceMode {
    Off,
    /// Sorted position multiset with statuses.
    Anonymous,
    /// Location multiset up to translation, rotation, reflection and scale.
    Similar,
    /// Positions listed by robot id.
    Labeled,
}

impl RecurrenceMode {
    fn name(self) -> &'static str {
        match self {
            RecurrenceMode::Off => "off",
            RecurrenceMode::Anonymous => "anonymous",
            RecurrenceMode::Similar => "similar",
            RecurrenceMode::Labeled => "labeled",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotSpec {
    pub position: Point2,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub robots: Vec<RobotSpec>,
    pub algorithm: AlgorithmConfig,
    pub multiplicity: MultiplicityMode,
    pub scheduler: SchedulerKind,
    /// Class the emitted history is checked against; defaults to `scheduler`.
    pub validate_as: Option<SchedulerKind>,
    pub starvation_cap: usize,
    pub faults: FaultPlan,
    pub seed: u64,
    pub max_steps: u64,
    /// Grid used to round coordinates for recurrence keys.
    pub eps_snap: f64,
    pub goal: Goal,
    pub recurrence: RecurrenceMode,
}

impl Scenario {
    /// A scenario with defaults: fair arbitrary scheduling, strong goal, no faults.
    pub fn new(name: &str, algorithm: AlgorithmKind, positions: &[Point2], delta: f64) -> Self {
        Scenario {
            name: name.to_string(),
            robots: positions.iter().map(|&position| RobotSpec { position, delta }).collect(),
            algorithm: AlgorithmConfig::new(algorithm),
            multiplicity: algorithm.required_mode(),
            scheduler: SchedulerKind::FairArbitrary { window: None },
            validate_as: None,
            starvation_cap: DEFAULT_STARVATION_CAP,
            faults: FaultPlan::default(),
            seed: 0,
            max_steps: 10_000,
            eps_snap: EPS_SNAP,
            goal: Goal::Strong,
            recurrence: RecurrenceMode::Off,
        }
    }

    pub fn n(&self) -> usize {
        self.robots.len()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Scenario(m));
        if self.robots.is_empty() {
            return bad("a scenario needs at least one robot".into());
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1".into());
        }
        if !(self.eps_snap > 0.0 && self.eps_snap.is_finite()) {
            return bad("eps_snap must be positive".into());
        }
        for (i, r) in self.robots.iter().enumerate() {
            if !r.position.is_finite() {
                return bad(format!("robot {i} has a non-finite position"));
            }
            if r.delta.is_nan() || r.delta <= 0.0 {
                return bad(format!("robot {i} needs a positive delta"));
            }
        }
        self.scheduler.check(self.n()).map_err(|e| HarnessError::Scenario(e.to_string()))?;
        if let Some(v) = &self.validate_as {
            v.check(self.n()).map_err(|e| HarnessError::Scenario(e.to_string()))?;
        }
        self.faults.validate(self.n()).map_err(|e| HarnessError::Scenario(e.to_string()))?;
        Ok(())
    }

    pub fn initial_configuration(&self) -> Configuration {
        let mut config =
            Configuration::new(self.robots.iter().map(|r| RobotState::correct(r.position, r.delta)).collect());
        self.faults.mark_byzantine(&mut config);
        config
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| HarnessError::Scenario(e.to_string()))?;
        let s = file.into_scenario()?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> Result<String, HarnessError> {
        toml::to_string(&ScenarioFile::from_scenario(self)?).map_err(|e| HarnessError::Scenario(e.to_string()))
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    format: String,
    name: String,
    algorithm: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    blocked_rule: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    multiplicity: Option<bool>,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_max_steps")]
    max_steps: u64,
    #[serde(default = "default_eps")]
    eps_snap: f64,
    #[serde(default = "default_goal")]
    goal: String,
    #[serde(default = "default_recurrence")]
    recurrence: String,
    #[serde(default = "default_delta")]
    delta: f64,
    scheduler: SchedulerSection,
    robots: Vec<RobotEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    faults: Option<FaultSection>,
}

fn default_max_steps() -> u64 {
    10_000
}
fn default_eps() -> f64 {
    EPS_SNAP
}
fn default_goal() -> String {
    "strong".into()
}
fn default_recurrence() -> String {
    "off".into()
}
fn default_delta() -> f64 {
    1.0
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchedulerSection {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    starvation_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    validate_as: Option<String>,
    /// Activation sets for `kind = "scripted"`, repeated forever.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    script: Option<Vec<Vec<usize>>>,
    /// Adaptive adversary for `kind = "scripted"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    policy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    switch: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RobotEntry {
    x: f64,
    y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FaultSection {
    f: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    byzantine_delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    crashes: Vec<CrashEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    byzantine: Vec<ByzantineEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CrashEntry {
    robot: usize,
    step: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ByzantineEntry {
    robot: usize,
    strategy: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    designated: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    targets: Option<Vec<[f64; 2]>>,
}

fn scenario_err(m: impl Into<String>) -> HarnessError {
    HarnessError::Scenario(m.into())
}

impl ScenarioFile {
    fn into_scenario(self) -> Result<Scenario, HarnessError> {
        if self.format != FORMAT_VERSION {
            return Err(scenario_err(format!("unsupported format `{}` (expected `{FORMAT_VERSION}`)", self.format)));
        }
        let n = self.robots.len();
        let kind = AlgorithmKind::from_name(&self.algorithm).map_err(|e| scenario_err(e.to_string()))?;
        let blocked_rule = match &self.blocked_rule {
            None => BlockedRule::default(),
            Some(s) => BlockedRule::from_name(s).ok_or_else(|| scenario_err(format!("unknown blocked rule `{s}`")))?,
        };
        let multiplicity = match self.multiplicity {
            None => kind.required_mode(),
            Some(true) => MultiplicityMode::WithMultiplicity,
            Some(false) => MultiplicityMode::WithoutMultiplicity,
        };
        let goal = match self.goal.as_str() {
            "strong" => Goal::Strong,
            "weak" => Goal::Weak,
            "none" => Goal::None,
            g => return Err(scenario_err(format!("unknown goal `{g}`"))),
        };
        let recurrence = match self.recurrence.as_str() {
            "off" => RecurrenceMode::Off,
            "anonymous" => RecurrenceMode::Anonymous,
            "similar" => RecurrenceMode::Similar,
            "labeled" => RecurrenceMode::Labeled,
            r => return Err(scenario_err(format!("unknown recurrence mode `{r}`"))),
        };
        let sched = &self.scheduler;
        let scheduler = if sched.kind == "scripted" {
            let script = match (&sched.script, &sched.policy) {
                (Some(sets), None) => Script::Cycle(sets.clone()),
                (None, Some(p)) => {
                    let order = sched.order.clone().unwrap_or_else(|| (0..n).collect());
                    Script::Adaptive(match p.as_str() {
                        "two-bounded-swap" => AdversaryPolicy::TwoBoundedSwap { order },
                        "derandomizer" => {
                            AdversaryPolicy::Derandomizer { order, probabilistic: kind.is_probabilistic() }
                        }
                        "countermove" => AdversaryPolicy::Countermove { switch: sched.switch },
                        "attractor-bait" => AdversaryPolicy::AttractorBait,
                        other => return Err(scenario_err(format!("unknown adversary policy `{other}`"))),
                    })
                }
                _ => return Err(scenario_err("scripted scheduler needs exactly one of `script` or `policy`")),
            };
            SchedulerKind::Scripted(script)
        } else {
            SchedulerKind::parse(&sched.kind, n).map_err(|e| scenario_err(e.to_string()))?
        };
        let validate_as = sched
            .validate_as
            .as_deref()
            .map(|s| SchedulerKind::parse(s, n))
            .transpose()
            .map_err(|e| scenario_err(e.to_string()))?;

        let faults = match self.faults {
            None => FaultPlan::default(),
            Some(fs) => {
                let mut byzantine = Vec::new();
                for b in fs.byzantine {
                    let strategy = match b.strategy.as_str() {
                        "attractor" => ByzantineStrategy::Attractor,
                        "gathered-breaker" => ByzantineStrategy::GatheredBreaker,
                        "balancer" => ByzantineStrategy::Balancer,
                        "switch" => ByzantineStrategy::Switch {
                            designated: RobotId(b.designated.ok_or_else(|| scenario_err("switch needs `designated`"))?),
                        },
                        "scripted" => ByzantineStrategy::Scripted(
                            b.targets
                                .ok_or_else(|| scenario_err("scripted Byzantine robot needs `targets`"))?
                                .into_iter()
                                .map(|[x, y]| Point2::new(x, y))
                                .collect(),
                        ),
                        other => return Err(scenario_err(format!("unknown Byzantine strategy `{other}`"))),
                    };
                    byzantine.push((RobotId(b.robot), strategy));
                }
                FaultPlan {
                    crashes: fs
                        .crashes
                        .iter()
                        .map(|c| CrashEvent { robot: RobotId(c.robot), at_step: c.step })
                        .collect(),
                    byzantine,
                    f: fs.f,
                    byzantine_delta: fs.byzantine_delta,
                }
            }
        };
        Ok(Scenario {
            name: self.name,
            robots: self
                .robots
                .iter()
                .map(|r| RobotSpec { position: Point2::new(r.x, r.y), delta: r.delta.unwrap_or(self.delta) })
                .collect(),
            algorithm: AlgorithmConfig { kind, blocked_rule },
            multiplicity,
            scheduler,
            validate_as,
            starvation_cap: sched.starvation_cap.unwrap_or(DEFAULT_STARVATION_CAP),
            faults,
            seed: self.seed,
            max_steps: self.max_steps,
            eps_snap: self.eps_snap,
            goal,
            recurrence,
        })
    }

    fn from_scenario(s: &Scenario) -> Result<Self, HarnessError> {
        let mut sched = SchedulerSection {
            kind: s.scheduler.to_string(),
            starvation_cap: (s.starvation_cap != DEFAULT_STARVATION_CAP).then_some(s.starvation_cap),
            validate_as: s.validate_as.as_ref().map(|k| k.to_string()),
            script: None,
            policy: None,
            order: None,
            switch: None,
        };
        if let SchedulerKind::Scripted(script) = &s.scheduler {
            match script {
                Script::Cycle(sets) => sched.script = Some(sets.clone()),
                Script::Adaptive(p) => {
                    let (name, order, switch) = match p {
                        AdversaryPolicy::TwoBoundedSwap { order } => ("two-bounded-swap", Some(order.clone()), None),
                        AdversaryPolicy::Derandomizer { order, .. } => ("derandomizer", Some(order.clone()), None),
                        AdversaryPolicy::Countermove { switch } => ("countermove", None, *switch),
                        AdversaryPolicy::AttractorBait => ("attractor-bait", None, None),
                    };
                    sched.policy = Some(name.into());
                    sched.order = order;
                    sched.switch = switch;
                }
            }
        }
        let faults = if s.faults == FaultPlan::default() {
            None
        } else {
            Some(FaultSection {
                f: s.faults.f,
                byzantine_delta: s.faults.byzantine_delta,
                crashes: s.faults.crashes.iter().map(|c| CrashEntry { robot: c.robot.0, step: c.at_step }).collect(),
                byzantine: s
                    .faults
                    .byzantine
                    .iter()
                    .map(|(id, strat)| ByzantineEntry {
                        robot: id.0,
                        strategy: strat.name().into(),
                        designated: match strat {
                            ByzantineStrategy::Switch { designated } => Some(designated.0),
                            _ => None,
                        },
                        targets: match strat {
                            ByzantineStrategy::Scripted(t) => Some(t.iter().map(|p| [p.x, p.y]).collect()),
                            _ => None,
                        },
                    })
                    .collect(),
            })
        };
        Ok(ScenarioFile {
            format: FORMAT_VERSION.into(),
            name: s.name.clone(),
            algorithm: s.algorithm.kind.name().into(),
            blocked_rule: (s.algorithm.blocked_rule != BlockedRule::default())
                .then(|| s.algorithm.blocked_rule.name().into()),
            multiplicity: (s.multiplicity != s.algorithm.kind.required_mode())
                .then_some(s.multiplicity == MultiplicityMode::WithMultiplicity),
            seed: s.seed,
            max_steps: s.max_steps,
            eps_snap: s.eps_snap,
            goal: s.goal.name().into(),
            recurrence: s.recurrence.name().into(),
            delta: 1.0,
            scheduler: sched,
            robots: s
                .robots
                .iter()
                .map(|r| RobotEntry { x: r.position.x, y: r.position.y, delta: (r.delta != 1.0).then_some(r.delta) })
                .collect(),
            faults,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
format = "robogather-scenario/1"
name = "two robots"
algorithm = "two-robot"
seed = 7
max_steps = 100
goal = "strong"

[scheduler]
kind = "scripted"
script = [[0], [1]]
validate_as = "round-robin:0,1"

[[robots]]
x = 0.0
y = 0.0

[[robots]]
x = 10.0
y = 0.0
delta = 2.5
"#;

    #[test]
    fn parses_sample_file() {
        let s = Scenario::from_toml(SAMPLE).unwrap();
        assert_eq!(s.n(), 2);
        assert_eq!(s.robots[0].delta, 1.0);
        assert_eq!(s.robots[1].delta, 2.5);
        assert_eq!(s.scheduler, SchedulerKind::Scripted(Script::Cycle(vec![vec![0], vec![1]])));
        assert_eq!(s.validate_as, Some(SchedulerKind::RoundRobin { order: vec![0, 1] }));
        assert_eq!(Scenario::from_toml(&s.to_toml().unwrap()).unwrap(), s);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(Scenario::from_toml(&SAMPLE.replace("robogather-scenario/1", "v0")).is_err());
        assert!(Scenario::from_toml(&SAMPLE.replace("two-robot", "teleport")).is_err());
        assert!(Scenario::from_toml(&SAMPLE.replace("max_steps = 100", "max_steps = 0")).is_err());
        assert!(Scenario::from_toml(&SAMPLE.replace("seed = 7", "seed = 7\nspeed = 3")).is_err());
        let unlimited = SAMPLE.replace("delta = 2.5", "delta = inf");
        assert_eq!(Scenario::from_toml(&unlimited).unwrap().robots[1].delta, f64::INFINITY);
    }
}
