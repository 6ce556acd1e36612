use rayon::prelude::*;

use super::engine::{run_with, Outcome, RunOptions};
use super::scenario::Scenario;
use super::HarnessError;

/// Hard ceiling on per-run steps during Monte Carlo sweeps.
pub const MONTE_CARLO_STEP_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Stats {
    pub runs: usize,
    pub successes: usize,
    /// Mean steps to gathering over successful runs.
    pub mean_steps: f64,
    pub stddev: f64,
    /// Normal-approximation 95% confidence half-width of the mean.
    pub ci_half_width: f64,
    /// Fewer than 30 samples behind the mean: the normal approximation is shaky.
    pub small_sample: bool,
    pub recurrences: usize,
    pub budget_exhausted: usize,
}

impl Stats {
    pub fn success_rate(&self) -> f64 {
        if self.runs == 0 {
            0.0
        } else {
            self.successes as f64 / self.runs as f64
        }
    }

    pub fn from_outcomes(outcomes: &[Outcome]) -> Self {
        let steps: Vec<f64> = outcomes.iter().filter_map(|o| o.gathered_at()).map(|s| s as f64).collect();
        let k = steps.len();
        let mean = if k == 0 { f64::NAN } else { steps.iter().sum::<f64>() / k as f64 };
        let stddev =
            if k < 2 { 0.0 } else { (steps.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (k - 1) as f64).sqrt() };
        Stats {
            runs: outcomes.len(),
            successes: k,
            mean_steps: mean,
            stddev,
            ci_half_width: if k == 0 { f64::NAN } else { 1.96 * stddev / (k as f64).sqrt() },
            small_sample: k < 30,
            recurrences: outcomes.iter().filter(|o| matches!(o, Outcome::Recurrence { .. })).count(),
            budget_exhausted: outcomes.iter().filter(|o| **o == Outcome::BudgetExhausted).count(),
        }
    }

    pub fn summary(&self) -> String {
        format!(
            "runs = {}\nsuccesses = {}\nsuccess_rate = {}\nmean_steps = {}\nstddev = {}\nci95_half_width = {}\nsmall_sample = {}\nrecurrences = {}\nbudget_exhausted = {}\n",
            self.runs,
            self.successes,
            self.success_rate(),
            self.mean_steps,
            self.stddev,
            self.ci_half_width,
            self.small_sample,
            self.recurrences,
            self.budget_exhausted
        )
    }
}

/// Runs `repeats` copies of `scenario` with seeds `seed + i·seed_stride`, in parallel.
///
/// Outcomes are collected in repeat order, so the statistics do not depend on thread timing.
pub fn monte_carlo(scenario: &Scenario, repeats: usize, seed_stride: u64) -> Result<Stats, HarnessError> {
    if repeats == 0 {
        return Err(HarnessError::Scenario("repeats must be at least 1".into()));
    }
    scenario.validate()?;
    let options = RunOptions { record_trace: false, record_metrics: false };
    let outcomes = (0..repeats)
        .into_par_iter()
        .map(|i| {
            let mut s = scenario.clone();
            s.seed = scenario.seed.wrapping_add((i as u64).wrapping_mul(seed_stride));
            s.max_steps = s.max_steps.min(MONTE_CARLO_STEP_CAP);
            run_with(&s, options).map(|r| r.outcome)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Stats::from_outcomes(&outcomes))
}
