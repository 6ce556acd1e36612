//! Acceptance criteria. Each criterion prints one `PASS`/`FAIL` line with its measured
//! values; the test fails if any criterion fails.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config as PropConfig, RngAlgorithm, TestCaseError, TestError, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use robogather::algorithms::{alg_det_ft, side_move_scaled_length, AlgorithmKind, BlockedRule, Decision};
use robogather::faults::{CrashEvent, FaultPlan};
use robogather::geometry::{
    convex_hull, hull_contains, point_segment_distance, smallest_enclosing_circle, voronoi_cell, Circle, Point2,
};
use robogather::harness::analytic::{balance_probability, binomial, increase_probability, markov_absorption};
use robogather::harness::{
    catalog, catalog_scenario, monte_carlo, run, run_with, Goal, Outcome, RecurrenceMode, RunOptions, Scenario,
    TraceRow,
};
use robogather::model::{MultiplicityMode, Observation, RobotId};
use robogather::schedulers::{scripted_cycle_schedule, validate_history, SchedulerKind, Script};

type Verdict = Result<String, String>;

struct Criterion {
    id: u32,
    title: &'static str,
    limit: Duration,
    check: fn() -> Verdict,
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn p(x: f64, y: f64) -> Point2 {
    Point2::new(x, y)
}

// ---------------------------------------------------------------------------------------
// 1–7, 11: scenario runs

fn two_robot_expected_steps() -> Verdict {
    let s = catalog_scenario("lemma10-n2").map_err(|e| e.to_string())?;
    let d0 = s.robots[0].position.dist(s.robots[1].position);
    let delta = s.robots[0].delta;
    ensure(d0 == 10.0 && delta == 1.0, "catalog scenario drifted from D0 = 10, reach 1")?;
    let stats = monte_carlo(&s, 1000, 1).map_err(|e| e.to_string())?;
    let bound = 2.0 * (d0 / delta).ceil();
    let detail = format!(
        "runs={} successes={} mean={:.3} ci95=±{:.3} bound={bound}",
        stats.runs, stats.successes, stats.mean_steps, stats.ci_half_width
    );
    ensure(stats.successes == 1000, format!("{detail}: not every run gathered"))?;
    ensure(stats.mean_steps <= bound, format!("{detail}: mean above bound"))?;
    ensure(stats.mean_steps + stats.ci_half_width <= 22.0, format!("{detail}: mean + ci above 22"))?;
    Ok(detail)
}

fn cycle_of_equivalent_configurations() -> Verdict {
    let s = catalog_scenario("fig2-cycle").map_err(|e| e.to_string())?;
    let r = run(&s).map_err(|e| e.to_string())?;
    let pass_len = match &s.scheduler {
        SchedulerKind::Scripted(Script::Cycle(groups)) => groups.len() as u64,
        other => return Err(format!("unexpected scheduler {other}")),
    };
    let Outcome::Recurrence { first, period } = r.outcome else {
        return Err(format!("outcome {}", r.outcome));
    };
    ensure(period == pass_len, format!("period {period}, schedule pass {pass_len}"))?;
    ensure(first + period <= 3 * pass_len, format!("detected at {} > 3 passes", first + period))?;
    validate_history(&s.scheduler, &r.history, s.robots.len()).map_err(|v| v.to_string())?;

    // Same construction activating one robot per step.
    let mut rr = s.clone();
    rr.scheduler = SchedulerKind::Scripted(Script::Cycle(scripted_cycle_schedule(5, false).unwrap()));
    let r2 = run(&rr).map_err(|e| e.to_string())?;
    let Outcome::Recurrence { period: rr_period, .. } = r2.outcome else {
        return Err(format!("singleton mode outcome {}", r2.outcome));
    };
    ensure(rr_period == 5, format!("singleton mode period {rr_period}"))?;
    Ok(format!(
        "recurrence first={first} period={period} (pass = {pass_len} groups); singleton mode period={rr_period}"
    ))
}

fn two_bounded_swap() -> Verdict {
    let s = catalog_scenario("k2-swap").map_err(|e| e.to_string())?;
    let r = run(&s).map_err(|e| e.to_string())?;
    let n = s.robots.len();
    validate_history(&SchedulerKind::TwoBoundedCentralized, &r.history, n).map_err(|v| v.to_string())?;
    ensure(matches!(r.outcome, Outcome::Recurrence { .. }), format!("outcome {}", r.outcome))?;
    // The swap is visible: the history is no longer the initial round-robin order.
    let plain = SchedulerKind::RoundRobin { order: (0..n).collect() };
    ensure(validate_history(&plain, &r.history, n).is_err(), "no swap took place")?;
    Ok(format!("{} over {} steps, valid 2-bounded", r.outcome, r.history.len()))
}

fn side_move_necessity() -> Verdict {
    let naive = catalog_scenario("appendix-a1").map_err(|e| e.to_string())?;
    ensure(naive.algorithm.kind == AlgorithmKind::DetFtNaive, "catalog entry must use the naive rule")?;
    let towers = naive.robots[0].position.dist(naive.robots[1].position) / 2.0;
    ensure(towers == 2.0 * naive.robots[0].delta, "tower spacing is not twice the reach")?;
    let r = run(&naive).map_err(|e| e.to_string())?;
    let Outcome::Recurrence { first, period } = r.outcome else {
        return Err(format!("naive outcome {}", r.outcome));
    };
    ensure(first + period <= 50, format!("naive recurrence detected at step {}", first + period))?;

    let mut fixed = naive.clone();
    fixed.algorithm.kind = AlgorithmKind::DetFt;
    fixed.max_steps = 10_000;
    let r2 = run(&fixed).map_err(|e| e.to_string())?;
    let Outcome::WeakGathered(at) = r2.outcome else {
        return Err(format!("side-move outcome {}", r2.outcome));
    };

    let mut listing = fixed.clone();
    listing.algorithm.blocked_rule = BlockedRule::Listing;
    let r3 = run(&listing).map_err(|e| e.to_string())?;
    Ok(format!(
        "naive: recurrence first={first} period={period}; side move: weak-gathered step={at}; info: listing threshold gives {}",
        r3.outcome
    ))
}

fn crash_tolerant_probabilistic() -> Verdict {
    let pts = [p(0.0, 0.0), p(3.0, 1.0), p(-2.0, 4.0), p(5.0, -3.0), p(1.0, 7.0)];
    let mut s = Scenario::new("crash-5-2", AlgorithmKind::ProbFt, &pts, 1.0);
    s.scheduler = SchedulerKind::FairArbitrary { window: Some(20) };
    s.faults = FaultPlan {
        crashes: vec![CrashEvent { robot: RobotId(1), at_step: 3 }, CrashEvent { robot: RobotId(3), at_step: 7 }],
        f: 2,
        ..Default::default()
    };
    s.multiplicity = MultiplicityMode::WithMultiplicity;
    s.goal = Goal::Weak;
    s.max_steps = 100_000;
    let stats = monte_carlo(&s, 200, 1).map_err(|e| e.to_string())?;
    let detail = format!(
        "success={}/{} rate={:.3} mean={:.2} ci95=±{:.2}",
        stats.successes,
        stats.runs,
        stats.success_rate(),
        stats.mean_steps,
        stats.ci_half_width
    );
    ensure(stats.success_rate() >= 0.99, detail.clone())?;
    Ok(detail)
}

fn byzantine_blocking() -> Verdict {
    let mut parts = Vec::new();
    for name in ["byz-balancer", "byz-switch"] {
        let s = catalog_scenario(name).map_err(|e| e.to_string())?;
        ensure(s.max_steps >= 10_000, format!("{name}: budget below 10^4"))?;
        let r = run(&s).map_err(|e| e.to_string())?;
        ensure(r.outcome.gathered_at().is_none(), format!("{name}: gathered ({})", r.outcome))?;
        ensure(matches!(r.outcome, Outcome::Recurrence { .. }), format!("{name}: outcome {}", r.outcome))?;
        let k3 = SchedulerKind::FairKBounded { k: 3 };
        validate_history(&k3, &r.history, s.robots.len()).map_err(|v| format!("{name}: {v}"))?;
        validate_history(&SchedulerKind::FairCentralized { window: None }, &r.history, s.robots.len())
            .map_err(|v| format!("{name}: {v}"))?;
        parts.push(format!("{name}: {}", r.outcome));
    }
    Ok(parts.join("; "))
}

/// Configurations recorded in a trace, keyed by step.
fn trace_configs(rows: &[TraceRow]) -> BTreeMap<u64, Vec<&TraceRow>> {
    let mut by_step: BTreeMap<u64, Vec<&TraceRow>> = BTreeMap::new();
    for row in rows {
        by_step.entry(row.step).or_default().push(row);
    }
    by_step
}

fn gathered_breaker() -> Verdict {
    let s = catalog_scenario("byz-breaker").map_err(|e| e.to_string())?;
    ensure(s.max_steps == 1000, "budget is not 10^3 steps")?;
    let r = run(&s).map_err(|e| e.to_string())?;
    let mut first_gathered = None;
    let mut counts: HashMap<Vec<(i64, i64)>, usize> = HashMap::new();
    for (step, rows) in trace_configs(&r.trace) {
        let correct: Vec<&&TraceRow> = rows.iter().filter(|r| r.status == "correct").collect();
        let gathered = correct.iter().all(|r| r.x == correct[0].x && r.y == correct[0].y);
        if gathered && first_gathered.is_none() {
            first_gathered = Some(step);
        }
        if first_gathered.is_some() && !gathered {
            let mut key: Vec<(i64, i64)> =
                rows.iter().map(|r| ((r.x * 1e9).round() as i64, (r.y * 1e9).round() as i64)).collect();
            key.sort_unstable();
            *counts.entry(key).or_default() += 1;
        }
    }
    let first = first_gathered.ok_or("correct robots never gathered")?;
    let most = counts.values().copied().max().unwrap_or(0);
    ensure(most >= 10, format!("most frequent non-gathered configuration seen {most} times"))?;
    Ok(format!("first gathered at step {first}; a non-gathered configuration recurs {most} times"))
}

fn replay_determinism() -> Verdict {
    let mut total = 0;
    for name in catalog::names() {
        let s = catalog_scenario(name).map_err(|e| e.to_string())?;
        let mut a = Vec::new();
        let mut b = Vec::new();
        run(&s).and_then(|r| r.write_trace_csv(&mut a)).map_err(|e| e.to_string())?;
        run(&s).and_then(|r| r.write_trace_csv(&mut b)).map_err(|e| e.to_string())?;
        ensure(!a.is_empty() && a == b, format!("{name}: traces differ"))?;
        total += a.len();
    }
    Ok(format!("{} catalog scenarios, {total} trace bytes, identical on replay", catalog::CATALOG.len()))
}

// ---------------------------------------------------------------------------------------
// 8: geometry oracles

fn brute_force_sec(points: &[Point2]) -> Circle {
    let covers = |c: &Circle| points.iter().all(|q| c.center.dist(*q) <= c.radius * (1.0 + 1e-12) + 1e-12);
    let mut best = Circle { center: points[0], radius: 0.0 };
    if points.len() == 1 {
        return best;
    }
    best.radius = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let center = Point2::new((points[i].x + points[j].x) / 2.0, (points[i].y + points[j].y) / 2.0);
            let c = Circle { center, radius: center.dist(points[i]) };
            if c.radius < best.radius && covers(&c) {
                best = c;
            }
            for k in j + 1..points.len() {
                if let Some(c) = Circle::circumscribed(points[i], points[j], points[k]) {
                    if c.radius < best.radius && covers(&c) {
                        best = c;
                    }
                }
            }
        }
    }
    best
}

fn geometry_oracles() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for set in 0..500 {
        let n = rng.gen_range(1..=10);
        let pts: Vec<Point2> = (0..n).map(|_| p(rng.gen_range(-100.0..100.0), rng.gen_range(-100.0..100.0))).collect();
        let got = smallest_enclosing_circle(&pts).map_err(|e| e.to_string())?;
        let want = brute_force_sec(&pts);
        let err = (got.radius - want.radius).abs().max(got.center.dist(want.center));
        worst = worst.max(err);
        ensure(err <= 1e-9 * want.radius.max(1.0), format!("set {set}: SEC off by {err:e}"))?;
    }
    let mut probes = 0;
    for set in 0..200 {
        let n = rng.gen_range(1..=8);
        let sites: Vec<Point2> = (0..n).map(|_| p(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0))).collect();
        let cells: Vec<_> =
            sites.iter().map(|s| voronoi_cell(*s, &sites)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
        for _ in 0..1000 {
            let q = p(rng.gen_range(-80.0..80.0), rng.gen_range(-80.0..80.0));
            let dists: Vec<f64> = sites.iter().map(|s| s.dist(q)).collect();
            let dmin = dists.iter().copied().fold(f64::INFINITY, f64::min);
            for (i, cell) in cells.iter().enumerate() {
                // Probes on a bisector (within rounding) may go either way.
                if (dists[i] - dmin).abs() > 1e-9 && (dists[i] - dmin).abs() < 1e-6 {
                    continue;
                }
                let nearest = dists[i] <= dmin + 1e-9;
                ensure(cell.contains(q) == nearest, format!("set {set}: probe {q:?} vs site {i}"))?;
            }
            probes += 1;
        }
    }
    Ok(format!("500 SEC sets, worst deviation {worst:.1e}; {probes} Voronoi probes match nearest site"))
}

// ---------------------------------------------------------------------------------------
// 9: analytic formulas

/// Sums the weight of every move/stay outcome of `i` incoming and `o` outgoing robots.
fn enumerate(i: usize, o: usize, m: usize, weight: impl Fn(usize, usize) -> f64) -> f64 {
    let q = 1.0 / m as f64;
    let mut total = 0.0;
    for mask in 0u32..(1 << (i + o)) {
        let arrived = (0..i).filter(|b| mask & (1 << b) != 0).count();
        let departed = (i..i + o).filter(|b| mask & (1 << b) != 0).count();
        let moved = arrived + departed;
        let prob = q.powi(moved as i32) * (1.0 - q).powi((i + o - moved) as i32);
        total += prob * weight(arrived, departed);
    }
    total
}

/// One walk of the castle-count chain, simulated from its coin-level description.
fn chain_walk(n: usize, p_keep: f64, rng: &mut ChaCha8Rng) -> u64 {
    #[derive(Clone, Copy)]
    enum S {
        D,
        K(usize),
    }
    let half = n / 2;
    let mut s = S::D;
    let mut steps = 0;
    loop {
        steps += 1;
        s = match s {
            S::D => match (0..half).filter(|_| rng.gen_bool(0.5)).count() {
                0 => S::D,
                x => S::K(x),
            },
            S::K(0) => S::K(half),
            S::K(1) => return steps,
            S::K(k) => S::K((0..k).filter(|_| rng.gen_bool(p_keep)).count()),
        };
    }
}

fn analytic_formulas() -> Verdict {
    let mut worst: f64 = 0.0;
    for m in [2, 3, 5] {
        for i in 0..=4 {
            for o in 0..=4 {
                let want = enumerate(i, o, m, |a, d| if a == d { 1.0 } else { 0.0 });
                let got = balance_probability(i, o, m).map_err(|e| e.to_string())?;
                worst = worst.max((got - want).abs());
                ensure((got - want).abs() <= 1e-12, format!("balance({i},{o},{m}) = {got}, enumeration {want}"))?;
                for x in 0..=i {
                    // A chosen set of x arrivals plus a balanced remainder: C(a, x) choices when a - x = d.
                    let want = enumerate(i, o, m, |a, d| if a >= x && a - x == d { binomial(a, x) } else { 0.0 });
                    let got = increase_probability(i, o, x, m).map_err(|e| e.to_string())?;
                    worst = worst.max((got - want).abs());
                    ensure(
                        (got - want).abs() <= 1e-12,
                        format!("increase({i},{o},{x},{m}) = {got}, enumeration {want}"),
                    )?;
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_rel: f64 = 0.0;
    for n in [4, 6, 8] {
        for pk in [0.1, 0.25, 0.5] {
            let a = markov_absorption(n, pk).map_err(|e| e.to_string())?;
            ensure((a.probability - 1.0).abs() <= 1e-9, format!("n={n} p={pk}: absorption {}", a.probability))?;
            let walks = 1_000_000;
            let mean = (0..walks).map(|_| chain_walk(n, pk, &mut rng)).sum::<u64>() as f64 / walks as f64;
            let rel = (mean - a.expected_steps).abs() / a.expected_steps;
            worst_rel = worst_rel.max(rel);
            ensure(rel <= 0.02, format!("n={n} p={pk}: solved {} vs walks {mean}", a.expected_steps))?;
        }
    }
    Ok(format!("enumeration max error {worst:.1e}; hitting time within {:.2}% of 10^6 walks", worst_rel * 100.0))
}

// ---------------------------------------------------------------------------------------
// 10: invariant suites

fn arb_layout(min: usize, max: usize) -> impl Strategy<Value = Vec<Point2>> {
    // Small integer grid so towers and castles show up often.
    prop::collection::vec((-6i32..=6, -6i32..=6), min..=max)
        .prop_map(|v| v.into_iter().map(|(x, y)| p(x as f64 * 1.5, y as f64)).collect())
}

fn scenario_with(kind: AlgorithmKind, pts: &[Point2], scheduler: SchedulerKind, seed: u64, steps: u64) -> Scenario {
    let mut s = Scenario::new("prop", kind, pts, 0.75);
    s.scheduler = scheduler;
    s.seed = seed;
    s.goal = Goal::None;
    s.recurrence = RecurrenceMode::Off;
    s.max_steps = steps;
    s
}

fn run_positions(s: &Scenario) -> Result<(Vec<robogather::model::Metrics>, Vec<Vec<Point2>>), TestCaseError> {
    let r = run_with(s, RunOptions { record_trace: true, record_metrics: true })
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    let positions =
        trace_configs(&r.trace).into_values().map(|rows| rows.iter().map(|r| p(r.x, r.y)).collect()).collect();
    Ok((r.metrics_series, positions))
}

fn castle_persistence(s: &Scenario) -> Result<(), TestCaseError> {
    let (m, _) = run_positions(s)?;
    let mut unique = false;
    for w in m.windows(2) {
        unique |= w[0].castles.len() == 1;
        if unique {
            prop_assert_eq!(w[1].castles.len(), 1);
            prop_assert!(w[1].mulmax >= w[0].mulmax);
        }
        if w[1].castles.len() > w[0].castles.len() {
            prop_assert!(w[1].mulmax < w[0].mulmax);
        }
    }
    Ok(())
}

/// Under the listing's `2·mulmax` blocked threshold a straight mover with limited reach can
/// stop on a robot lying on its path and raise a second castle. Reported, not asserted.
fn listing_threshold_breaks_persistence() -> usize {
    let mut runner = TestRunner::new_with_rng(PropConfig::default(), TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let strategy = (arb_layout(3, 8), any::<u64>());
    (0..1000)
        .filter(|_| {
            let (pts, seed) = strategy.new_tree(&mut runner).unwrap().current();
            let s = scenario_with(AlgorithmKind::ProbFt, &pts, SchedulerKind::UnfairArbitrary, seed, 60);
            castle_persistence(&s).is_err()
        })
        .count()
}

type Property = Box<dyn Fn(&mut TestRunner) -> Result<(), String>>;

fn wrap<T: std::fmt::Debug>(r: Result<(), TestError<T>>) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

fn properties() -> Vec<(&'static str, Property)> {
    vec![
        (
            "centralized valence step",
            Box::new(move |t: &mut TestRunner| {
                let kinds = prop_oneof![
                    Just(AlgorithmKind::ProbBasic),
                    Just(AlgorithmKind::DetFt),
                    Just(AlgorithmKind::ProbFt),
                    Just(AlgorithmKind::NearestNeighbor)
                ];
                wrap(t.run(&(arb_layout(2, 7), kinds, any::<u64>()), |(pts, kind, seed)| {
                    let s = scenario_with(kind, &pts, SchedulerKind::UnfairCentralized, seed, 40);
                    let (m, _) = run_positions(&s)?;
                    for w in m.windows(2) {
                        prop_assert!(w[0].valence.abs_diff(w[1].valence) <= 1);
                    }
                    Ok(())
                }))
            }) as Property,
        ),
        (
            "enclosing circle non-increasing (randomized rule)",
            Box::new(move |t: &mut TestRunner| {
                wrap(t.run(&(arb_layout(2, 7), any::<u64>()), |(pts, seed)| {
                    let s = scenario_with(AlgorithmKind::ProbBasic, &pts, SchedulerKind::UnfairArbitrary, seed, 40);
                    let (m, _) = run_positions(&s)?;
                    for w in m.windows(2) {
                        prop_assert!(w[1].sec_diameter <= w[0].sec_diameter * (1.0 + 1e-12) + 1e-12);
                    }
                    Ok(())
                }))
            }),
        ),
        (
            "max multiplicity non-decreasing (deterministic rule, centralized)",
            Box::new(move |t: &mut TestRunner| {
                wrap(t.run(&(arb_layout(3, 8), any::<u64>()), |(pts, seed)| {
                    let s = scenario_with(AlgorithmKind::DetFt, &pts, SchedulerKind::UnfairCentralized, seed, 60);
                    let (m, _) = run_positions(&s)?;
                    for w in m.windows(2) {
                        prop_assert!(w[1].mulmax >= w[0].mulmax);
                    }
                    Ok(())
                }))
            }),
        ),
        (
            "nearest-neighbour distance non-increasing (deterministic rule, fair)",
            Box::new(move |t: &mut TestRunner| {
                wrap(t.run(&(arb_layout(3, 8), any::<u64>()), |(mut pts, seed)| {
                    pts.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());
                    pts.dedup();
                    prop_assume!(pts.len() >= 3);
                    let n = pts.len();
                    let s = scenario_with(
                        AlgorithmKind::DetFt,
                        &pts,
                        SchedulerKind::FairArbitrary { window: Some(2 * n) },
                        seed,
                        60,
                    );
                    let (m, _) = run_positions(&s)?;
                    // Robot-to-robot distance: a tower puts two robots at distance zero.
                    let d =
                        |m: &robogather::model::Metrics| if m.mulmax > 1 { 0.0 } else { m.nearest_neighbor_distance };
                    for w in m.windows(2).filter(|w| w[0].mulmax == 1) {
                        let (a, b) = (d(&w[0]), d(&w[1]));
                        prop_assert!(b <= a * (1.0 + 1e-12) + 1e-12, "{} -> {}", a, b);
                    }
                    Ok(())
                }))
            }),
        ),
        (
            "convex hull containment (randomized crash-tolerant rule)",
            Box::new(move |t: &mut TestRunner| {
                wrap(t.run(&(arb_layout(3, 8), any::<u64>()), |(pts, seed)| {
                    let s = scenario_with(AlgorithmKind::ProbFt, &pts, SchedulerKind::UnfairArbitrary, seed, 60);
                    let (_, positions) = run_positions(&s)?;
                    for w in positions.windows(2) {
                        let hull = convex_hull(&w[0]).map_err(|e| TestCaseError::fail(e.to_string()))?;
                        for q in &w[1] {
                            prop_assert!(hull_contains(&hull, *q, 1e-9), "{:?} left {:?}", q, hull);
                        }
                    }
                    Ok(())
                }))
            }),
        ),
        (
            "unique castle persists (randomized crash-tolerant rule)",
            Box::new(move |t: &mut TestRunner| {
                // The blocked test must be the one the persistence argument relies on; see
                // `listing_threshold_breaks_persistence` for the other threshold.
                wrap(t.run(&(arb_layout(3, 8), any::<u64>()), |(pts, seed)| {
                    let mut s = scenario_with(AlgorithmKind::ProbFt, &pts, SchedulerKind::UnfairArbitrary, seed, 60);
                    s.algorithm.blocked_rule = BlockedRule::StrictlyBetween;
                    castle_persistence(&s)
                }))
            }),
        ),
        (
            "gathered configurations are absorbing",
            Box::new(move |t: &mut TestRunner| {
                let kinds = prop_oneof![
                    Just(AlgorithmKind::ProbBasic),
                    Just(AlgorithmKind::DetFt),
                    Just(AlgorithmKind::ProbFt)
                ];
                let strategy =
                    (kinds, 2usize..7, 0usize..3, (-9.0..9.0f64, -9.0..9.0f64), arb_layout(2, 2), any::<u64>());
                wrap(t.run(&strategy, |(kind, n, crashed, (gx, gy), extra, seed)| {
                    // Weak gathering (crashed robots elsewhere) is only stable when the correct group
                    // is the sole castle, and only for the crash-tolerant rules.
                    let crashed =
                        if kind == AlgorithmKind::ProbBasic { 0 } else { crashed.min(n - 1).min(extra.len()) };
                    let g = p(gx, gy);
                    let mut pts = vec![g; n];
                    pts.extend(extra.iter().take(crashed).copied().filter(|e| *e != g));
                    let crashes = (n..pts.len()).map(|r| CrashEvent { robot: RobotId(r), at_step: 0 }).collect();
                    let mut s = scenario_with(kind, &pts, SchedulerKind::UnfairArbitrary, seed, 30);
                    s.faults = FaultPlan { crashes, f: pts.len() - n, ..Default::default() };
                    let (_, positions) = run_positions(&s)?;
                    for cfg in &positions {
                        prop_assert_eq!(cfg, &positions[0]);
                    }
                    Ok(())
                }))
            }),
        ),
        (
            "side-move target guarantees",
            Box::new(move |t: &mut TestRunner| {
                let strategy = (
                    2usize..5,
                    (0.0..2.0 * PI, 2.0..10.0f64),
                    prop::collection::vec(0.05..0.95f64, 4),
                    prop::collection::vec((-12.0..12.0f64, -12.0..12.0f64), 0..4),
                    (0.0..2.0 * PI, 1.2..3.0f64),
                );
                wrap(t.run(&strategy, |(m, (ang, dist), fractions, extra, (other_ang, other_scale))| {
                    let q = Point2::ORIGIN;
                    let mover = Point2::from_polar(dist, ang);
                    let other = Point2::from_polar(dist * other_scale, other_ang);
                    let mut layout = vec![(mover, 1), (q, m), (other, m)];
                    for f in fractions.iter().take(m - 1) {
                        layout.push((q.lerp(mover, *f), 1));
                    }
                    for (x, y) in extra {
                        let e = p(x, y);
                        // Extras must not change which castle the mover heads for.
                        prop_assume!(e.dist(q) > 1e-3 && e.dist(other) > 1e-3 && e.dist(mover) > 1e-3);
                        layout.push((e, 1));
                    }
                    prop_assume!(mover.dist(q) < mover.dist(other));
                    let local: Vec<(Point2, usize)> =
                        layout.iter().map(|&(g, k)| (if g == mover { Point2::ORIGIN } else { g - mover }, k)).collect();
                    let obs = Observation::new(MultiplicityMode::WithMultiplicity, local);
                    let decision = alg_det_ft(&obs, BlockedRule::StrictlyBetween)
                        .map_err(|e| TestCaseError::fail(e.to_string()))?;
                    let Decision::MoveTo(t_local) = decision else {
                        return Err(TestCaseError::fail("blocked robot stayed"));
                    };
                    let target = t_local + mover;
                    prop_assert!(target.dist(q) < mover.dist(q), "not closer to the castle");
                    let cell = voronoi_cell(q, &[q, other]).map_err(|e| TestCaseError::fail(e.to_string()))?;
                    prop_assert!(cell.contains(target), "target left the castle cell");
                    let on_path = layout
                        .iter()
                        .skip(1)
                        .filter(|(r, _)| *r != q && point_segment_distance(*r, target, q) <= 1e-9)
                        .count();
                    prop_assert_eq!(on_path, 0, "robot on the path to the castle");
                    Ok(())
                }))
            }),
        ),
        (
            "side-move length monotone and paths non-crossing",
            Box::new(move |t: &mut TestRunner| {
                let slope = prop_oneof![-50.0..-0.05f64, 0.05..50.0f64];
                wrap(t.run(&(0.001..1.0f64, 0.001..1.0f64, 0.001..(PI / 3.0), slope), |(a1, a2, theta, m)| {
                    prop_assume!((a1 - a2).abs() > 1e-9);
                    let (lo, hi) = if a1 < a2 { (a1, a2) } else { (a2, a1) };
                    let (l_lo, l_hi) = (side_move_scaled_length(lo, theta, m), side_move_scaled_length(hi, theta, m));
                    prop_assert!(l_lo < l_hi);
                    // Mover on the +x axis at its ratio, target on the ray turned clockwise by theta.
                    let ray = p(theta.cos(), -theta.sin());
                    let (s1, e1, s2, e2) = (p(lo, 0.0), ray * l_lo, p(hi, 0.0), ray * l_hi);
                    let orient = |a: Point2, b: Point2, c: Point2| (b - a).cross(c - a);
                    let crosses =
                        orient(s1, e1, s2) * orient(s1, e1, e2) < 0.0 && orient(s2, e2, s1) * orient(s2, e2, e1) < 0.0;
                    prop_assert!(!crosses);
                    Ok(())
                }))
            }),
        ),
    ]
}

fn invariant_suites() -> Verdict {
    let mut failures = Vec::new();
    let mut names = Vec::new();
    for (name, prop) in properties() {
        let config = PropConfig { cases: 1000, failure_persistence: None, ..PropConfig::default() };
        let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
        match prop(&mut runner) {
            Ok(()) => names.push(name),
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    if failures.is_empty() {
        let broken = listing_threshold_breaks_persistence();
        Ok(format!(
            "{} suites × 1000 cases; info: listing threshold breaks castle persistence in {broken}/1000 runs",
            names.len()
        ))
    } else {
        Err(failures.join(" | "))
    }
}

// ---------------------------------------------------------------------------------------

const CRITERIA: [Criterion; 11] = [
    Criterion {
        id: 1,
        title: "two-robot expected steps",
        limit: Duration::from_secs(5),
        check: two_robot_expected_steps,
    },
    Criterion {
        id: 2,
        title: "cycle of equivalent configurations",
        limit: Duration::from_secs(1),
        check: cycle_of_equivalent_configurations,
    },
    Criterion { id: 3, title: "2-bounded swap adversary", limit: Duration::from_secs(1), check: two_bounded_swap },
    Criterion { id: 4, title: "side move necessity", limit: Duration::from_secs(5), check: side_move_necessity },
    Criterion {
        id: 5,
        title: "crash-tolerant probabilistic gathering",
        limit: Duration::from_secs(60),
        check: crash_tolerant_probabilistic,
    },
    Criterion {
        id: 6,
        title: "Byzantine blocking executions",
        limit: Duration::from_secs(10),
        check: byzantine_blocking,
    },
    Criterion { id: 7, title: "gathered breaker", limit: Duration::from_secs(1), check: gathered_breaker },
    Criterion { id: 8, title: "geometry oracles", limit: Duration::from_secs(10), check: geometry_oracles },
    Criterion { id: 9, title: "analytic formulas", limit: Duration::from_secs(30), check: analytic_formulas },
    Criterion { id: 10, title: "invariant suites", limit: Duration::from_secs(120), check: invariant_suites },
    Criterion { id: 11, title: "replay determinism", limit: Duration::from_secs(5), check: replay_determinism },
];

#[test]
fn acceptance() {
    let mut failed = Vec::new();
    for c in &CRITERIA {
        let start = Instant::now();
        let verdict = (c.check)();
        let took = start.elapsed();
        let verdict = match verdict {
            Ok(detail) if took > c.limit => Err(format!("{detail}; took {took:.2?} > {:?}", c.limit)),
            v => v,
        };
        match verdict {
            Ok(detail) => println!("PASS [{:>2}] {} ({took:.2?}): {detail}", c.id, c.title),
            Err(why) => {
                println!("FAIL [{:>2}] {} ({took:.2?}): {why}", c.id, c.title);
                failed.push(c.id);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
