use clap::{Args, Parser, Subcommand, ValueEnum};
use ringcheck::ctl::{self, builtin_properties, parse_formula, Fairness, MaxUid};
use ringcheck::protocol::{identity_uids, validate_uids, Protocol, Uid, Variant};
use ringcheck::simulate::{self, run_async, run_seed, Scheduler, SimError};
use ringcheck::smv::emit_smv;
use ringcheck::statespace::{explore_with_jobs, ExploreError, ExploreLimits, StateGraph};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

mod report;

use report::{Evidence, PropertyReport, ReportDocument, SimulateDocument, SimulateRun};

#[derive(Parser, Debug)]
#[command(name = "ringcheck", version, about = "Model checker and simulator for ring leader election")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Explore the state space and check CTL properties.
    Check(CheckArgs),
    /// Explore the state space and report its size.
    Explore(ExploreArgs),
    /// Run seeded asynchronous simulations of one ring.
    Simulate(SimulateArgs),
    /// Simulate random rings over a range of sizes.
    Sweep(SweepArgs),
    /// Write the SMV model of one ring.
    ExportSmv(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FairnessArg {
    Running,
    Off,
}

impl From<FairnessArg> for Fairness {
    fn from(f: FairnessArg) -> Self {
        match f {
            FairnessArg::Running => Fairness::RunningAll,
            FairnessArg::Off => Fairness::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchedulerArg {
    Uniform,
    RoundRobin,
}

#[derive(Debug, Clone)]
struct UidList(Vec<Uid>);

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: ringcheck::protocol::UnknownVariant| e.to_string())
}

fn parse_uids(s: &str) -> Result<UidList, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u8>()
                .map(Uid)
                .map_err(|_| format!("`{}` is not a uid", t.trim()))
        })
        .collect::<Result<_, _>>()
        .map(UidList)
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("`{s}` is not of the form a..b"))?;
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("`{t}` is not a ring size"));
    Ok((num(a)?, num(b.trim_start_matches('='))?))
}

#[derive(Debug, Clone)]
struct VariantList(Vec<Variant>);

fn parse_variants(s: &str) -> Result<VariantList, String> {
    if s == "all" {
        return Ok(VariantList(Variant::ALL.to_vec()));
    }
    s.split(',').map(|t| parse_variant(t.trim())).collect::<Result<_, _>>().map(VariantList)
}

#[derive(Args, Debug)]
struct RingArgs {
    /// general, modified or extra (aliases alg2, alg3, alg4).
    #[arg(long, value_parser = parse_variant)]
    variant: Variant,
    /// Ring size.
    #[arg(short = 'n')]
    n: usize,
    /// Comma-separated permutation of 0..n-1; identity when neither this nor --uid-seed is given.
    #[arg(long, value_parser = parse_uids, conflicts_with = "uid_seed")]
    uids: Option<UidList>,
    /// Seed of a random uid permutation.
    #[arg(long)]
    uid_seed: Option<u64>,
    /// Keep id2/id3 values across phases instead of resetting them.
    #[arg(long)]
    keep_temps: bool,
}

impl RingArgs {
    fn protocol(&self) -> Protocol {
        Protocol::new(self.variant).with_dead_temp_clearing(!self.keep_temps)
    }

    fn uids(&self) -> Result<Vec<Uid>, CliError> {
        if self.n == 0 {
            return Err(CliError::Usage("-n must be at least 1: `0`".into()));
        }
        let uids = match (&self.uids, self.uid_seed) {
            (Some(UidList(u)), _) => {
                if u.len() != self.n {
                    return Err(CliError::Usage(format!(
                        "--uids lists {} values but -n is {}: `{}`",
                        u.len(),
                        self.n,
                        join(u)
                    )));
                }
                u.clone()
            }
            (None, Some(seed)) => simulate::random_permutation(self.n, seed),
            (None, None) => identity_uids(self.n),
        };
        validate_uids(&uids).map_err(|e| CliError::Usage(format!("{e}: `{}`", join(&uids))))?;
        Ok(uids)
    }
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Debug)]
struct ExploreLimitArgs {
    #[arg(long, default_value_t = 10_000_000)]
    max_states: usize,
    /// Worker threads for successor generation; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    ring: RingArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    limits: ExploreLimitArgs,
    /// `builtin` or a JSON file of properties.
    #[arg(long, default_value = "builtin")]
    props: String,
    /// Fairness for liveness properties.
    #[arg(long, value_enum, default_value = "running")]
    fairness: FairnessArg,
    /// Fairness for the builtin safety properties.
    #[arg(long, value_enum, default_value = "off")]
    safety_fairness: FairnessArg,
}

#[derive(Args, Debug)]
struct ExploreArgs {
    #[command(flatten)]
    ring: RingArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    limits: ExploreLimitArgs,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    ring: RingArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    runs: usize,
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: u64,
    #[arg(long, value_enum, default_value = "uniform")]
    scheduler: SchedulerArg,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Comma-separated variants, or `all`.
    #[arg(long, value_parser = parse_variants, default_value = "all")]
    variant: VariantList,
    /// Inclusive ring-size range, e.g. 2..12.
    #[arg(long, value_parser = parse_range)]
    n_range: (usize, usize),
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[command(flatten)]
    ring: RingArgs,
    /// Directory for `{variant}_{n}.smv`, or a file path ending in `.smv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Limit(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Limit(_) => 3,
        }
    }
}

fn join(uids: &[Uid]) -> String {
    uids.iter().map(|u| u.to_string()).collect::<Vec<_>>().join(",")
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn to_csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn explore_ring(ring: &RingArgs, uids: &[Uid], limits: &ExploreLimitArgs) -> Result<(StateGraph, ringcheck::statespace::ExploreStats), CliError> {
    if limits.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1: `0`".into()));
    }
    match explore_with_jobs(
        ring.protocol(),
        uids,
        ExploreLimits::with_max_states(limits.max_states),
        limits.jobs,
    ) {
        Ok(e) => Ok((e.graph, e.stats)),
        Err(ExploreError::StateLimitExceeded { limit, .. }) => {
            Err(CliError::Limit(format!("state limit of {limit} exceeded; raise --max-states")))
        }
        Err(e) => Err(CliError::Usage(e.to_string())),
    }
}

/// A property from a `--props` file.
#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct PropertySpec {
    name: String,
    formula: String,
    #[serde(default = "default_expected")]
    expected: bool,
    fairness: Option<Fairness>,
}

fn default_expected() -> bool {
    true
}

fn load_properties(args: &CheckArgs, uids: &[Uid]) -> Result<Vec<ctl::Property>, CliError> {
    let n = uids.len();
    if args.props == "builtin" {
        let mut props = builtin_properties(n, MaxUid::of(uids).expect("ring is nonempty"));
        for p in &mut props {
            p.fairness = if p.fairness == Fairness::RunningAll {
                args.fairness.into()
            } else {
                args.safety_fairness.into()
            };
        }
        return Ok(props);
    }
    let text = std::fs::read_to_string(&args.props)
        .map_err(|e| CliError::Usage(format!("cannot read --props file: {e}: `{}`", args.props)))?;
    let specs: Vec<PropertySpec> = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid --props file {}: {e}", args.props)))?;
    specs
        .into_iter()
        .map(|s| {
            let formula = parse_formula(&s.formula, n)
                .map_err(|e| CliError::Usage(format!("property {}: {e}: `{}`", s.name, s.formula)))?;
            Ok(ctl::Property {
                description: String::new(),
                fairness: s.fairness.unwrap_or(args.fairness.into()),
                name: s.name,
                formula,
                expected: s.expected,
            })
        })
        .collect()
}

fn cmd_check(args: &CheckArgs, started: Instant) -> Result<u8, CliError> {
    let uids = args.ring.uids()?;
    let props = load_properties(args, &uids)?;
    let (graph, stats) = explore_ring(&args.ring, &uids, &args.limits)?;
    let checker = ctl::Checker::new(&graph).map_err(|e| CliError::Usage(e.to_string()))?;
    let results: Vec<PropertyReport> = props
        .iter()
        .map(|p| {
            let r = checker.check(&p.formula, p.fairness);
            PropertyReport {
                name: p.name.clone(),
                formula: p.formula.to_string(),
                fairness: p.fairness,
                expected: p.expected,
                holds: r.holds,
                matches: r.holds == p.expected,
                evidence: r.evidence.map(|t| Evidence::from_trace(&graph, &t)),
            }
        })
        .collect();
    let all_match = results.iter().all(|r| r.matches);
    let code = if all_match { 0 } else { 1 };
    let doc = ReportDocument::new("check", &args.ring, &uids, Some(results), stats, started);
    let text = match args.output.format {
        Format::Json => to_json(&doc),
        Format::Csv => to_csv(doc.properties.iter().flatten().map(report::PropertyRow::from))?,
    };
    write_output(args.output.out.as_deref(), &text)?;
    Ok(code)
}

fn cmd_explore(args: &ExploreArgs, started: Instant) -> Result<u8, CliError> {
    let uids = args.ring.uids()?;
    let (_, stats) = explore_ring(&args.ring, &uids, &args.limits)?;
    let doc = ReportDocument::new("explore", &args.ring, &uids, None, stats, started);
    let text = match args.output.format {
        Format::Json => to_json(&doc),
        Format::Csv => to_csv([report::StatsRow::new(&doc)])?,
    };
    write_output(args.output.out.as_deref(), &text)?;
    Ok(0)
}

fn cmd_simulate(args: &SimulateArgs, started: Instant) -> Result<u8, CliError> {
    let uids = args.ring.uids()?;
    let n = uids.len();
    if args.max_steps == 0 {
        return Err(CliError::Usage("--max-steps must be at least 1: `0`".into()));
    }
    let oracle = simulate::sync_oracle(&uids).map_err(|e| CliError::Usage(e.to_string()))?;
    let max = *uids.iter().max().expect("ring is nonempty");
    let mut runs = Vec::with_capacity(args.runs);
    let mut code = 0;
    for run in 0..args.runs {
        let seed = run_seed(args.seed, n, run);
        let sched = match args.scheduler {
            SchedulerArg::Uniform => Scheduler::UniformEnabled(seed),
            SchedulerArg::RoundRobin => Scheduler::RoundRobin,
        };
        let (report, error) = match run_async(args.ring.protocol(), &uids, sched, args.max_steps) {
            Ok(r) => (r, None),
            Err(SimError::StepBudgetExhausted { report, .. }) => {
                return Err(CliError::Limit(format!(
                    "run {run} used the whole step budget of {} after {} steps; raise --max-steps",
                    args.max_steps, report.steps
                )))
            }
            Err(
                e @ (SimError::OverflowEncountered { .. }
                | SimError::Deadlock { .. }
                | SimError::MultipleLeaders { .. }),
            ) => {
                let report = match &e {
                    SimError::OverflowEncountered { report }
                    | SimError::Deadlock { report }
                    | SimError::MultipleLeaders { report, .. } => report.clone(),
                    _ => unreachable!(),
                };
                (report, Some(e.to_string()))
            }
            Err(e) => return Err(CliError::Usage(e.to_string())),
        };
        let correct = error.is_none() && report.elected == Some(oracle.winner) && report.elected_vid == Some(max);
        if !correct {
            code = 1;
        }
        runs.push(SimulateRun {
            run,
            seed,
            report,
            matches_oracle: correct,
            error,
        });
    }
    let doc = SimulateDocument::new(&args.ring, &uids, oracle, runs, started);
    let text = match args.output.format {
        Format::Json => to_json(&doc),
        Format::Csv => to_csv(doc.runs.iter().map(|r| report::SimulateRow::new(&doc, r)))?,
    };
    write_output(args.output.out.as_deref(), &text)?;
    Ok(code)
}

fn cmd_sweep(args: &SweepArgs) -> Result<u8, CliError> {
    let (lo, hi) = args.n_range;
    if lo == 0 {
        return Err(CliError::Usage("--n-range must start at 1 or more: `0`".into()));
    }
    if hi > ringcheck::protocol::MAX_RING_SIZE {
        return Err(CliError::Usage(format!("--n-range exceeds the largest ring size: `{hi}`")));
    }
    if args.runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1: `0`".into()));
    }
    let variants: Vec<Variant> = args.variant.0.iter().copied().fold(Vec::new(), |mut v, x| {
        if !v.contains(&x) {
            v.push(x);
        }
        v
    });
    let sizes: Vec<usize> = (lo..=hi).collect();
    let rows = match simulate::sweep(&variants, &sizes, args.runs, args.seed, args.max_steps) {
        Ok(rows) => rows,
        Err(SimError::StepBudgetExhausted { budget, .. }) => {
            return Err(CliError::Limit(format!("a run used the whole step budget of {budget}; raise --max-steps")))
        }
        Err(e) => {
            eprintln!("ringcheck: {e}");
            return Ok(1);
        }
    };
    let code = if rows.iter().all(|r| r.elected == r.oracle_winner && r.elected_vid as usize == r.n - 1) {
        0
    } else {
        1
    };
    let text = match args.format {
        Format::Csv => to_csv(&rows)?,
        Format::Json => to_json(&rows),
    };
    write_output(args.out.as_deref(), &text)?;
    Ok(code)
}

fn cmd_export(args: &ExportArgs) -> Result<u8, CliError> {
    let uids = args.ring.uids()?;
    let model = emit_smv(args.ring.protocol(), &uids).map_err(|e| CliError::Usage(e.to_string()))?;
    match &args.out {
        None => write_output(None, &model.text)?,
        Some(path) => {
            let target = if path.extension().is_some_and(|e| e == "smv") {
                path.clone()
            } else {
                std::fs::create_dir_all(path)
                    .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", path.display())))?;
                path.join(model.file_name())
            };
            write_output(Some(&target), &model.text)?;
            println!("{}", target.display());
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let result = match &cli.command {
        Command::Check(a) => cmd_check(a, started),
        Command::Explore(a) => cmd_explore(a, started),
        Command::Simulate(a) => cmd_simulate(a, started),
        Command::Sweep(a) => cmd_sweep(a),
        Command::ExportSmv(a) => cmd_export(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            match &e {
                CliError::Usage(m) | CliError::Limit(m) => eprintln!("ringcheck: {m}"),
            }
            ExitCode::from(e.code())
        }
    }
}
