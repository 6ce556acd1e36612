use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use robogather::harness::analytic::{
    balance_probability, increase_probability, markov_absorption, single_castle_lower_bound,
};
use robogather::harness::catalog::{catalog_scenario, CATALOG};
use robogather::harness::engine::{history_from_trace, read_trace_csv};
use robogather::harness::{monte_carlo, run, HarnessError, Outcome, Scenario};
use robogather::schedulers::{validate_history, SchedulerKind};

/// Directory for trace files when `--trace` is not given.
const OUT_DIR_ENV: &str = "ROBOGATHER_OUT";

#[derive(Parser)]
#[command(name = "robogather", version, about = "Gathering simulator for oblivious mobile robots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario (a TOML file or `catalog:<name>`).
    Run {
        scenario: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Trace CSV destination.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Exit with status 2 unless the outcome matches.
        #[arg(long, value_enum)]
        assert: Option<Expect>,
    },
    /// Repeat a scenario with shifted seeds and report statistics.
    Montecarlo {
        scenario: String,
        #[arg(long, default_value_t = 100)]
        repeats: usize,
        #[arg(long, default_value_t = 1)]
        stride: u64,
        /// Exit with status 2 if the success rate falls below this value.
        #[arg(long)]
        assert_success_rate: Option<f64>,
    },
    /// Check the activation history of a trace CSV against a scheduler class.
    Validate {
        trace: PathBuf,
        /// Class such as `round-robin`, `fair-k-bounded:2`, `fully-synchronous`.
        #[arg(long)]
        scheduler: String,
    },
    /// Evaluate the analytic formulas.
    Analytic {
        #[command(subcommand)]
        formula: Formula,
    },
    /// List built-in scenarios, or print one as a scenario file.
    Catalog { name: Option<String> },
}

#[derive(Subcommand)]
enum Formula {
    Balance {
        #[arg(long)]
        i: usize,
        #[arg(long)]
        o: usize,
        #[arg(long)]
        m: usize,
    },
    Increase {
        #[arg(long)]
        i: usize,
        #[arg(long)]
        o: usize,
        #[arg(long)]
        x: usize,
        #[arg(long)]
        m: usize,
    },
    /// Lower bound on forming a single castle; castles as `in:out` pairs.
    SingleCastle {
        #[arg(long, value_delimiter = ',')]
        castles: Vec<String>,
        #[arg(long)]
        m: usize,
    },
    Markov {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Expect {
    Strong,
    Weak,
    Gathered,
    Recurrence,
    Budget,
}

impl Expect {
    fn matches(self, o: &Outcome) -> bool {
        match self {
            Expect::Strong => matches!(o, Outcome::StrongGathered(_)),
            Expect::Weak => matches!(o, Outcome::WeakGathered(_)),
            Expect::Gathered => o.gathered_at().is_some(),
            Expect::Recurrence => matches!(o, Outcome::Recurrence { .. }),
            Expect::Budget => *o == Outcome::BudgetExhausted,
        }
    }
}

enum Failure {
    Error(String),
    Assertion(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure::Error(e.to_string())
    }
}

fn load(spec: &str) -> Result<Scenario, Failure> {
    if let Some(name) = spec.strip_prefix("catalog:") {
        return Ok(catalog_scenario(name)?);
    }
    let text = std::fs::read_to_string(spec).map_err(|e| Failure::Error(format!("{spec}: {e}")))?;
    Ok(Scenario::from_toml(&text)?)
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { scenario, seed, trace, assert } => {
            let mut s = load(&scenario)?;
            if let Some(seed) = seed {
                s.seed = seed;
            }
            let result = run(&s)?;
            print!("{}", result.summary(&s));
            let dest = trace.or_else(|| {
                std::env::var_os(OUT_DIR_ENV).map(|dir| PathBuf::from(dir).join(format!("{}.trace.csv", s.name)))
            });
            if let Some(path) = dest {
                let file = File::create(&path).map_err(|e| Failure::Error(format!("{}: {e}", path.display())))?;
                result.write_trace_csv(BufWriter::new(file))?;
                println!("trace = {}", path.display());
            }
            if let Some(expect) = assert {
                if !expect.matches(&result.outcome) {
                    return Err(Failure::Assertion(format!("unexpected outcome {}", result.outcome)));
                }
            }
        }
        Command::Montecarlo { scenario, repeats, stride, assert_success_rate } => {
            let s = load(&scenario)?;
            let stats = monte_carlo(&s, repeats, stride)?;
            print!("scenario = {}\n{}", s.name, stats.summary());
            if let Some(min) = assert_success_rate {
                if stats.success_rate() < min {
                    return Err(Failure::Assertion(format!("success rate {} below {min}", stats.success_rate())));
                }
            }
        }
        Command::Validate { trace, scheduler } => {
            let file = File::open(&trace).map_err(|e| Failure::Error(format!("{}: {e}", trace.display())))?;
            let rows = read_trace_csv(file)?;
            let n = rows.iter().map(|r| r.robot + 1).max().unwrap_or(0);
            let kind = SchedulerKind::parse(&scheduler, n).map_err(|e| Failure::Error(e.to_string()))?;
            let history = history_from_trace(&rows);
            match validate_history(&kind, &history, n) {
                Ok(()) => println!("ok: {} steps valid under {kind}", history.len()),
                Err(v) => return Err(Failure::Assertion(format!("violation at {v}"))),
            }
        }
        Command::Analytic { formula } => {
            let err = |e: robogather::harness::analytic::AnalyticError| Failure::Error(e.to_string());
            match formula {
                Formula::Balance { i, o, m } => println!("balance = {}", balance_probability(i, o, m).map_err(err)?),
                Formula::Increase { i, o, x, m } => {
                    println!("increase = {}", increase_probability(i, o, x, m).map_err(err)?)
                }
                Formula::SingleCastle { castles, m } => {
                    let parsed = castles
                        .iter()
                        .map(|c| {
                            let (a, b) = c.split_once(':')?;
                            Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
                        })
                        .collect::<Option<Vec<(usize, usize)>>>()
                        .ok_or_else(|| Failure::Error("castles must be `in:out` pairs".into()))?;
                    println!("single_castle_lower_bound = {}", single_castle_lower_bound(&parsed, m).map_err(err)?)
                }
                Formula::Markov { n, p } => {
                    let a = markov_absorption(n, p).map_err(err)?;
                    println!("absorption_probability = {}", a.probability);
                    println!("expected_steps = {}", a.expected_steps);
                    for (state, steps) in a.expected_by_state {
                        println!("expected_steps_from.{state} = {steps}");
                    }
                }
            }
        }
        Command::Catalog { name: None } => {
            for (name, about) in CATALOG {
                println!("{name:<14} {about}");
            }
        }
        Command::Catalog { name: Some(name) } => print!("{}", catalog_scenario(&name)?.to_toml()?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Error(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Assertion(m)) => {
            eprintln!("assertion failed: {m}");
            ExitCode::from(2)
        }
    }
}
