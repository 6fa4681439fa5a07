//! `delayrv`: run rendezvous experiments under delay faults.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use delayrv::adversary::{
    worst_case_search, FaultModel, FaultSchedule, Objective, Scripted, SearchLimits,
};
use delayrv::engine::{monte_carlo, sweep, sweep_csv, Summary, SweepCell};
use delayrv::setup::AdversarySpec;
use delayrv::uxs::{
    find_uxs_cached, search_uxs_ladder, verify_uxs, SearchConfig, UxsLibrary, VerifyMode,
};
use delayrv::Error;

use config::{ConfigError, ExperimentConfig, RawConfig, DEFAULT_SEED};

const EXIT_TRUNCATED: u8 = 3;
const EXIT_CONFIG: u8 = 2;
const EXIT_RESOURCE: u8 = 4;
const EXIT_OTHER: u8 = 1;

#[derive(Parser)]
#[command(
    name = "delayrv",
    version,
    about = "Rendezvous of two mobile agents under delay faults"
)]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `run.seed`; the default is 1.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    horizon: Option<u64>,
}

#[derive(Copy, Clone, ValueEnum)]
enum ObjectiveArg {
    MaxCost,
    PreventMeeting,
}

#[derive(Copy, Clone, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Sampled,
}

#[derive(Subcommand)]
enum Command {
    /// One run; prints a summary line and optionally writes a JSONL trace.
    Run {
        #[command(flatten)]
        common: Common,
        /// Trace output path (JSONL).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded trials of one scenario; prints a CSV summary.
    Montecarlo {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo summary for each cell of the `[sweep]` grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Worst bounded-fault schedule for the configured scenario.
    WorstCase {
        #[command(flatten)]
        common: Common,
        /// Consecutive-fault bound; defaults to `adversary.c`.
        #[arg(long)]
        c: Option<u64>,
        #[arg(long, value_enum, default_value = "max-cost")]
        objective: ObjectiveArg,
        /// Schedule output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks a stored sequence against every graph of at most `m` nodes.
    VerifyUxs {
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, default_value = "exhaustive")]
        mode: ModeArg,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Directory of `uxs_m<k>.txt` files; the shipped library otherwise.
        #[arg(long)]
        dir: Option<PathBuf>,
    },
    /// Searches a sequence for size bound `m`.
    SearchUxs {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Cache directory: reused when it verifies, written otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parses a fault schedule and checks it against a fault model.
    ValidateSchedule {
        schedule: PathBuf,
        /// `bounded:<c>`, `unbounded` or `random:<p>`.
        #[arg(long)]
        model: String,
    },
}

enum Failure {
    Config(String),
    Core(Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(Error::Io(e))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: --jobs: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::ResourceLimit(_) => EXIT_RESOURCE,
                Error::InvalidParameter(_)
                | Error::Parse { .. }
                | Error::ScheduleRejected { .. }
                | Error::Io(_) => EXIT_CONFIG,
                _ => EXIT_OTHER,
            })
        }
    }
}

fn load(common: &Common) -> Result<(RawConfig, ExperimentConfig), Failure> {
    let mut raw = RawConfig::load(&common.config)?;
    if let Some(s) = common.seed {
        raw.set("run.seed", s.to_string());
    }
    if let Some(h) = common.horizon {
        raw.set("run.horizon", h.to_string());
    }
    let exp = ExperimentConfig::from_raw(&raw)?;
    Ok((raw, exp))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn dispatch(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Run { common, out } => {
            let (_, exp) = load(&common)?;
            let trace_path = out.or_else(|| exp.trace_out.clone());
            let result = exp.scenario(exp.seed, trace_path.is_some())?.run()?;
            if let Some(p) = &trace_path {
                result.write_trace(std::io::BufWriter::new(std::fs::File::create(p)?))?;
            }
            let fmt_opt = |o: Option<String>| o.unwrap_or_else(|| "-".into());
            println!(
                "met={} cost={} rounds={} meeting_round={} meeting_node={} per_agent={},{} crossings={} truncated={}",
                result.met,
                result.cost,
                result.rounds,
                fmt_opt(result.meeting_round.map(|r| r.to_string())),
                fmt_opt(result.meeting_node.map(|n| n.to_string())),
                result.per_agent[0],
                result.per_agent[1],
                result.crossings.len(),
                result.truncated,
            );
            Ok(if result.met { 0 } else { EXIT_TRUNCATED })
        }
        Command::Montecarlo {
            common,
            trials,
            out,
        } => {
            let (_, exp) = load(&common)?;
            let trials = trials.unwrap_or(exp.trials);
            if trials == 0 {
                return Err(Failure::Config("--trials must be positive".into()));
            }
            let mc = monte_carlo(trials, exp.seed, |s| exp.scenario(s, false))?;
            emit(
                out.as_deref(),
                &format!("{}\n{}\n", Summary::CSV_COLUMNS, mc.summary.csv_fields()),
            )?;
            Ok(0)
        }
        Command::Sweep {
            common,
            trials,
            out,
        } => {
            let (raw, exp) = load(&common)?;
            let trials = trials.unwrap_or(exp.trials);
            if trials == 0 {
                return Err(Failure::Config("--trials must be positive".into()));
            }
            let mut cells = Vec::new();
            for params in raw.sweep_grid() {
                let mut cell_raw = raw.clone();
                for (k, v) in &params {
                    cell_raw.set(k, v.clone());
                }
                let cell = Arc::new(ExperimentConfig::from_raw(&cell_raw)?);
                cells.push(SweepCell {
                    params,
                    build: Arc::new(move |s| cell.scenario(s, false)),
                });
            }
            emit(out.as_deref(), &sweep_csv(&sweep(&cells, trials, exp.seed)))?;
            Ok(0)
        }
        Command::WorstCase {
            common,
            c,
            objective,
            out,
        } => {
            let (_, exp) = load(&common)?;
            let c = match (c, &exp.adversary) {
                (Some(c), _) => c,
                (None, AdversarySpec::MaxDelay { c }) => *c,
                _ => {
                    return Err(Failure::Config(
                        "worst-case needs --c or `adversary.kind = max-delay`".into(),
                    ))
                }
            };
            let objective = match objective {
                ObjectiveArg::MaxCost => Objective::MaxCost,
                ObjectiveArg::PreventMeeting => Objective::PreventMeeting,
            };
            let wc = worst_case_search(
                &exp.run_config(),
                exp.programs()?,
                c,
                objective,
                SearchLimits::default(),
            )?;
            if let Some(p) = &out {
                let header = format!(
                    "# worst case: c={c} objective={objective:?} value={}\n",
                    wc.score.value
                );
                std::fs::write(p, header + &wc.schedule.to_text())?;
            }
            println!(
                "value={} unmet={} met={} cost={} faults={} states={} method={:?}",
                wc.score.value,
                wc.score.unmet,
                wc.met,
                wc.cost,
                wc.schedule.len(),
                wc.states,
                wc.method,
            );
            Ok(0)
        }
        Command::VerifyUxs {
            m,
            mode,
            trials,
            seed,
            dir,
        } => {
            let library = match &dir {
                Some(d) => UxsLibrary::from_dir(d)?,
                None => UxsLibrary::shipped(),
            };
            let mode = match mode {
                ModeArg::Exhaustive => VerifyMode::Exhaustive,
                ModeArg::Sampled => VerifyMode::Sampled {
                    trials,
                    seed: seed.unwrap_or(DEFAULT_SEED),
                },
            };
            let uxs = library.for_size(m);
            let report = verify_uxs(&uxs.terms, m, mode)?;
            println!(
                "m={m} length={} graphs={} instances={} failures={} {}",
                uxs.len(),
                report.graphs,
                report.instances,
                report.failure_count,
                if report.passed() { "pass" } else { "FAIL" }
            );
            Ok(if report.passed() { 0 } else { EXIT_OTHER })
        }
        Command::SearchUxs {
            m,
            budget,
            seed,
            out,
        } => {
            let mut config = SearchConfig {
                seed: seed.unwrap_or(DEFAULT_SEED),
                ..SearchConfig::default()
            };
            if let Some(b) = budget {
                config.budget = b;
            }
            let uxs = match &out {
                Some(dir) => find_uxs_cached(m, &config, dir)?,
                None => search_uxs_ladder(m, &config)?
                    .pop()
                    .expect("ladder is non-empty"),
            };
            let terms: Vec<String> = uxs.terms.iter().map(u32::to_string).collect();
            println!("m={m} length={} terms=[{}]", uxs.len(), terms.join(","));
            Ok(0)
        }
        Command::ValidateSchedule { schedule, model } => {
            let model = parse_model(&model)?;
            let text = std::fs::read_to_string(&schedule)?;
            let s = FaultSchedule::parse(&text)?;
            Scripted::new(s.clone(), model)?;
            println!("ok: {} entries, {model}", s.len());
            Ok(0)
        }
    }
}

fn parse_model(text: &str) -> Result<FaultModel, Failure> {
    let bad = || {
        Failure::Config(format!(
            "--model: expected bounded:<c>, unbounded or random:<p>, got `{text}`"
        ))
    };
    let model = match text.split_once(':') {
        None if text == "unbounded" => FaultModel::Unbounded,
        Some(("bounded", c)) => FaultModel::Bounded {
            c: c.parse().map_err(|_| bad())?,
        },
        Some(("random", p)) => FaultModel::Random {
            p: p.parse().map_err(|_| bad())?,
        },
        _ => return Err(bad()),
    };
    model.validate()?;
    Ok(model)
}
