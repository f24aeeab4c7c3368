use std::fs;
use std::io::{self, Write};
use std::ops::Range;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use marathon_deficit::de::{self, merge_archives, RunReport, SolverConfig, TerminatedBy};
use marathon_deficit::duration::{format_duration, parse_duration, Deciseconds};
use marathon_deficit::report::{
    build_problem, emit_plot_data, render_report, BoundsSource, OutputFormat, RunRequest,
    TargetSpec,
};
use marathon_deficit::track::parse_splits_csv;
use marathon_deficit::FeasibleArchive;

const EXIT_INPUT: u8 = 1;
const EXIT_NO_QUOTA: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    author,
    version,
    about = "Plan where a marathon deficit could have been made up"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Search for savings plans that close the deficit and print a report
    Run(RunArgs),
    /// Validate inputs and report whether the deficit can be closed at all
    Check(ProblemArgs),
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("bounds_source").required(true).args(["bounds", "derive_bounds"])))]
#[command(group(clap::ArgGroup::new("target").required(true).args(["deficit_ds", "actual"])))]
struct ProblemArgs {
    /// Splits CSV (`index,length_m,pace,alt_delta_m`)
    #[arg(long)]
    splits: PathBuf,

    /// Bounds CSV (`index,capacity_ds`)
    #[arg(long)]
    bounds: Option<PathBuf>,

    /// Derive capacities from each split's altitude change
    #[arg(long)]
    derive_bounds: bool,

    /// Deficit to make up, in deciseconds
    #[arg(long)]
    deficit_ds: Option<u64>,

    /// Achieved finishing time, `[H:]MM:SS.d`
    #[arg(long, value_parser = parse_dur, requires = "goal")]
    actual: Option<Deciseconds>,

    /// Goal finishing time, `[H:]MM:SS.d`
    #[arg(long, value_parser = parse_dur, requires = "actual")]
    goal: Option<Deciseconds>,

    /// Round the actual-minus-goal deficit up to whole seconds
    #[arg(long, requires = "actual")]
    paper_rounding: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Table,
    Json,
    Csv,
}

impl From<FormatArg> for OutputFormat {
    fn from(value: FormatArg) -> Self {
        match value {
            FormatArg::Table => OutputFormat::Table,
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    problem: ProblemArgs,

    /// Population size
    #[arg(long, default_value_t = 100)]
    np: usize,

    /// Scale factor
    #[arg(long, default_value_t = 0.5)]
    f: f64,

    /// Crossover rate
    #[arg(long, default_value_t = 0.9)]
    cr: f64,

    /// Feasible evaluations that end the run
    #[arg(long, default_value_t = 100)]
    quota: u64,

    /// Maximum fitness evaluations
    #[arg(long, default_value_t = 80_000)]
    budget: u64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Run every seed in `a..b` (end exclusive) and merge the archives
    #[arg(long, value_parser = parse_seed_range, conflicts_with = "seed")]
    seeds: Option<Range<u64>>,

    #[arg(long, value_enum, default_value = "table")]
    format: FormatArg,

    /// Also write per-segment plot data CSV here
    #[arg(long)]
    plot_data: Option<PathBuf>,

    /// Which archived plan to report
    #[arg(long, default_value_t = 0, conflicts_with = "all_plans")]
    plan_index: usize,

    /// Print the run report JSON with every archived plan
    #[arg(long)]
    all_plans: bool,
}

fn parse_dur(s: &str) -> Result<Deciseconds, String> {
    parse_duration(s).map_err(|e| e.to_string())
}

fn parse_seed_range(s: &str) -> Result<Range<u64>, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected a..b, got {s:?}"))?;
    let a: u64 = a
        .trim()
        .parse()
        .map_err(|_| format!("bad range start {a:?}"))?;
    let b: u64 = b
        .trim()
        .parse()
        .map_err(|_| format!("bad range end {b:?}"))?;
    if a >= b {
        return Err(format!("empty seed range {s}"));
    }
    Ok(a..b)
}

impl ProblemArgs {
    fn request(&self, solver: SolverConfig, output_format: OutputFormat) -> RunRequest {
        let bounds_source = match &self.bounds {
            Some(path) => BoundsSource::FromFile(path.clone()),
            None => BoundsSource::DeriveFromAltitude,
        };
        let target = match (self.deficit_ds, self.actual, self.goal) {
            (Some(d), _, _) => TargetSpec::Deficit(Deciseconds(d)),
            (None, Some(actual), Some(goal)) => TargetSpec::Totals {
                actual,
                goal,
                round_up: self.paper_rounding,
            },
            _ => unreachable!("clap enforces a target"),
        };
        RunRequest {
            splits_path: self.splits.clone(),
            bounds_source,
            target,
            solver,
            output_format,
        }
    }
}

fn check(args: &ProblemArgs) -> Result<u8> {
    let request = args.request(SolverConfig::default(), OutputFormat::Table);
    let problem = build_problem(&request)?;
    println!(
        "solvable: capacity {} ds ({}) covers deficit {} ds ({}) over {} segments",
        problem.total_capacity().get(),
        format_duration(problem.total_capacity()),
        problem.target().get(),
        format_duration(problem.target()),
        problem.dimension(),
    );
    Ok(0)
}

fn run(args: &RunArgs) -> Result<u8> {
    let config = SolverConfig {
        population_size: args.np,
        scale_factor: args.f,
        crossover_rate: args.cr,
        max_evaluations: args.budget,
        feasible_hits_to_stop: args.quota,
        seed: args.seed,
    };
    config.validate()?;
    let request = args.problem.request(config.clone(), args.format.into());
    let problem = build_problem(&request)?;
    let splits = parse_splits_csv(
        &fs::read(&request.splits_path)
            .with_context(|| format!("reading {}", request.splits_path.display()))?,
    )?;

    let (archive, all_quota, report_json) = match args.seeds.clone() {
        None => {
            let result = de::run(&config, &problem)?;
            eprintln!(
                "{} seed={} evaluations={} feasible_hits={} plans={} terminated_by={:?}",
                de::strategy_name(),
                config.seed,
                result.evaluations_used,
                result.feasible_hits,
                result.archive.len(),
                result.terminated_by,
            );
            let report = RunReport::new(&config, &problem, &result);
            let json = serde_json::to_string_pretty(&report)?;
            let quota = result.terminated_by == TerminatedBy::FeasibleQuota;
            (result.archive, quota, json)
        }
        Some(seeds) => {
            let results = de::run_batch(&config, &problem, seeds)?;
            let reports: Vec<RunReport> = results
                .iter()
                .map(|(seed, r)| {
                    eprintln!(
                        "{} seed={} evaluations={} feasible_hits={} plans={} terminated_by={:?}",
                        de::strategy_name(),
                        seed,
                        r.evaluations_used,
                        r.feasible_hits,
                        r.archive.len(),
                        r.terminated_by,
                    );
                    RunReport::new(&config.clone().with_seed(*seed), &problem, r)
                })
                .collect();
            let merged: FeasibleArchive = merge_archives(results.iter().map(|(_, r)| r));
            let quota = results
                .iter()
                .all(|(_, r)| r.terminated_by == TerminatedBy::FeasibleQuota);
            (merged, quota, serde_json::to_string_pretty(&reports)?)
        }
    };

    let mut stdout = io::stdout().lock();
    if args.all_plans {
        writeln!(stdout, "{report_json}")?;
    } else if let Some(plan) = archive.get(args.plan_index) {
        stdout.write_all(&render_report(
            &splits,
            plan,
            &problem,
            request.output_format,
        )?)?;
    } else if !archive.is_empty() {
        bail!(
            "plan index {} out of range, {} plans archived",
            args.plan_index,
            archive.len()
        );
    }

    if let Some(path) = &args.plot_data {
        let plan = archive
            .get(args.plan_index)
            .ok_or_else(|| anyhow!("no feasible plan to write plot data for"))?;
        fs::write(path, emit_plot_data(&splits, plan)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }

    if archive.is_empty() {
        eprintln!("evaluation budget exhausted without a feasible plan");
    }
    Ok(if all_quota { 0 } else { EXIT_NO_QUOTA })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => run(args),
        Command::Check(args) => check(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
