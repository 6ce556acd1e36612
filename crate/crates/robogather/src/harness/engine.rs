use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::scenario::{Goal, RecurrenceMode, Scenario};
use super::HarnessError;
use crate::algorithms::Decision;
use crate::faults::{apply_crashes, FaultController};
use crate::model::{
    apply_moves, is_gathered, metrics, observe, similarity_key, Configuration, Gathered, Metrics, ObservationFrame,
    RobotId, Status,
};
use crate::rng::{substream, RandomSource, Substream};
use crate::schedulers::{ActivationHistory, Scheduler};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    StrongGathered(u64),
    WeakGathered(u64),
    /// The state at step `first` reappears at `first + period`.
    Recurrence {
        first: u64,
        period: u64,
    },
    BudgetExhausted,
}

impl Outcome {
    pub fn gathered_at(&self) -> Option<u64> {
        match *self {
            Outcome::StrongGathered(s) | Outcome::WeakGathered(s) => Some(s),
            _ => None,
        }
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Outcome::StrongGathered(s) => write!(f, "strong-gathered step={s}"),
            Outcome::WeakGathered(s) => write!(f, "weak-gathered step={s}"),
            Outcome::Recurrence { first, period } => write!(f, "recurrence first={first} period={period}"),
            Outcome::BudgetExhausted => write!(f, "budget-exhausted"),
        }
    }
}

/// One trace line: robot state at the start of `step` and what it did during that step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: u64,
    pub robot: usize,
    pub x: f64,
    pub y: f64,
    pub status: String,
    pub activated: bool,
    pub decision_kind: String,
    pub target_x: Option<f64>,
    pub target_y: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub record_trace: bool,
    pub record_metrics: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { record_trace: true, record_metrics: true }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub outcome: Outcome,
    pub final_config: Configuration,
    pub steps_executed: u64,
    /// Metrics of the configuration at the start of every step, plus the final one.
    pub metrics_series: Vec<Metrics>,
    pub history: ActivationHistory,
    pub trace: Vec<TraceRow>,
    pub notes: Vec<String>,
}

impl RunResult {
    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<(), HarnessError> {
        write_trace_csv(&self.trace, out)
    }

    /// Stable `key = value` summary.
    pub fn summary(&self, scenario: &Scenario) -> String {
        let mut s = String::new();
        let m = metrics(&self.final_config);
        s.push_str(&format!("scenario = {}\n", scenario.name));
        s.push_str(&format!("seed = {}\n", scenario.seed));
        s.push_str(&format!("outcome = {}\n", self.outcome));
        s.push_str(&format!("steps_executed = {}\n", self.steps_executed));
        s.push_str(&format!("final_valence = {}\n", m.valence));
        s.push_str(&format!("final_mulmax = {}\n", m.mulmax));
        s.push_str(&format!("final_sec_diameter = {}\n", m.sec_diameter));
        for note in &self.notes {
            s.push_str(&format!("note = {note}\n"));
        }
        s
    }
}

pub fn write_trace_csv<W: Write>(rows: &[TraceRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace_csv<R: Read>(input: R) -> Result<Vec<TraceRow>, HarnessError> {
    csv::Reader::from_reader(input).deserialize().collect::<Result<Vec<TraceRow>, _>>().map_err(HarnessError::from)
}

/// Activation sets recorded in a trace, one per executed step.
pub fn history_from_trace(rows: &[TraceRow]) -> ActivationHistory {
    let mut history: ActivationHistory = Vec::new();
    for row in rows.iter().filter(|r| r.activated) {
        let step = row.step as usize;
        if history.len() <= step {
            history.resize(step + 1, Vec::new());
        }
        history[step].push(RobotId(row.robot));
    }
    history
}

fn recurrence_key(config: &Configuration, mode: RecurrenceMode, eps: f64) -> Vec<i64> {
    let status_code = |s: Status| match s {
        Status::Correct => 0,
        Status::Crashed { .. } => 1,
        Status::Byzantine => 2,
    };
    let grid = |v: f64| (v / eps).round() as i64;
    match mode {
        RecurrenceMode::Off => Vec::new(),
        RecurrenceMode::Anonymous => {
            let mut cells: Vec<(i64, i64, i64)> =
                config.robots.iter().map(|r| (grid(r.position.x), grid(r.position.y), status_code(r.status))).collect();
            cells.sort_unstable();
            cells.into_iter().flat_map(|(a, b, c)| [a, b, c]).collect()
        }
        RecurrenceMode::Similar => {
            // Similarity classes only make sense on a coarse grid.
            similarity_key(config, eps.max(1e-6)).into_iter().flat_map(|(a, b, m)| [a, b, m as i64]).collect()
        }
        RecurrenceMode::Labeled => {
            config.robots.iter().flat_map(|r| [grid(r.position.x), grid(r.position.y), status_code(r.status)]).collect()
        }
    }
}

/// Runs `scenario` with full trace and metrics recording.
pub fn run(scenario: &Scenario) -> Result<RunResult, HarnessError> {
    run_with(scenario, RunOptions::default())
}

pub fn run_with(scenario: &Scenario, options: RunOptions) -> Result<RunResult, HarnessError> {
    scenario.validate()?;
    let n = scenario.n();
    let mut config = scenario.initial_configuration();
    let mut scheduler = Scheduler::new(
        scenario.scheduler.clone(),
        n,
        substream(scenario.seed, Substream::Scheduler),
        scenario.starvation_cap,
    )?;
    let mut frames = substream(scenario.seed, Substream::Frames);
    let mut coins: Vec<RandomSource> = (0..n).map(|r| substream(scenario.seed, Substream::Coins(r))).collect();
    let mut controller = FaultController::new();
    let strategy_of: HashMap<usize, _> = scenario.faults.byzantine.iter().map(|(id, s)| (id.0, s.clone())).collect();

    let mut seen: HashMap<Vec<i64>, u64> = HashMap::new();
    let mut history = Vec::new();
    let mut trace = Vec::new();
    let mut series = Vec::new();
    let mut notes = Vec::new();
    if scenario.recurrence != RecurrenceMode::Off && scheduler.state_key().is_none() {
        notes.push("recurrence check skipped: scheduler choices are random".to_string());
    }

    let mut step: u64 = 0;
    let outcome = loop {
        apply_crashes(&mut config, &scenario.faults, step);
        if options.record_metrics {
            series.push(metrics(&config));
        }
        let gathered = is_gathered(&config);
        match (scenario.goal, gathered) {
            (Goal::Strong | Goal::Weak, Gathered::Strong) => break Outcome::StrongGathered(step),
            (Goal::Weak, Gathered::Weak) => break Outcome::WeakGathered(step),
            _ => {}
        }
        if scenario.recurrence != RecurrenceMode::Off {
            if let Some(sched_key) = scheduler.state_key() {
                let mut key = recurrence_key(&config, scenario.recurrence, scenario.eps_snap);
                key.push(-1);
                key.extend(sched_key.into_iter().map(|v| v as i64));
                key.push(-1);
                key.extend(controller.state_key().into_iter().map(|v| v as i64));
                if let Some(&first) = seen.get(&key) {
                    break Outcome::Recurrence { first, period: step - first };
                }
                seen.insert(key, step);
            }
        }
        if step >= scenario.max_steps {
            break Outcome::BudgetExhausted;
        }

        let active = scheduler.next_activation(&config)?;
        let mut moves: Vec<(RobotId, crate::geometry::Point2)> = Vec::new();
        let mut kinds: Vec<(&'static str, Option<crate::geometry::Point2>)> = vec![("idle", None); n];
        for &id in &active {
            let robot = &config.robots[id.0];
            match robot.status {
                Status::Crashed { .. } => kinds[id.0] = ("crashed", None),
                Status::Byzantine => {
                    let strategy = &strategy_of[&id.0];
                    match controller.decide(strategy, &config, id) {
                        Ok(target) => {
                            moves.push((id, target));
                            kinds[id.0] = ("byz-move", Some(target));
                        }
                        Err(reason) => {
                            if options.record_trace {
                                notes.push(format!("step {step}: {id} ({}) stays: {reason}", strategy.name()));
                            }
                            kinds[id.0] = ("byz-stay", None);
                        }
                    }
                }
                Status::Correct => {
                    let frame = ObservationFrame::random(robot.position, &mut frames);
                    let obs = observe(&config, id, &frame, scenario.multiplicity);
                    match scenario.algorithm.decide(&obs, &mut coins[id.0])? {
                        Decision::Stay => kinds[id.0] = ("stay", None),
                        Decision::MoveTo(local) => {
                            let target = frame.to_global(local);
                            moves.push((id, target));
                            kinds[id.0] = ("move", Some(target));
                        }
                    }
                }
            }
        }
        let next = apply_moves(&config, &moves)?;
        let moved: Vec<(RobotId, bool)> =
            active.iter().map(|&id| (id, next.robots[id.0].position != config.robots[id.0].position)).collect();
        scheduler.feedback(&moved);
        if options.record_trace {
            for (i, r) in config.robots.iter().enumerate() {
                let (kind, target) = kinds[i];
                trace.push(TraceRow {
                    step,
                    robot: i,
                    x: r.position.x,
                    y: r.position.y,
                    status: r.status.label().to_string(),
                    activated: active.contains(&RobotId(i)),
                    decision_kind: kind.to_string(),
                    target_x: target.map(|t| t.x),
                    target_y: target.map(|t| t.y),
                });
            }
        }
        history.push(active);
        config = next;
        step += 1;
    };

    if options.record_trace {
        for (i, r) in config.robots.iter().enumerate() {
            trace.push(TraceRow {
                step,
                robot: i,
                x: r.position.x,
                y: r.position.y,
                status: r.status.label().to_string(),
                activated: false,
                decision_kind: "end".to_string(),
                target_x: None,
                target_y: None,
            });
        }
    }
    Ok(RunResult { outcome, final_config: config, steps_executed: step, metrics_series: series, history, trace, notes })
}
