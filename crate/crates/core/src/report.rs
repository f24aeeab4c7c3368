//! Problem assembly from input files and rendering of per-kilometer reports.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::de::SolverConfig;
use crate::duration::{format_seconds, format_table_duration, Deciseconds};
use crate::problem::{
    apply_plan, capacities_from_classes, parse_bounds_csv, DeficitProblem, PlanRecord,
    ProblemError, SavingsPlan,
};
use crate::track::{classify_segment, parse_splits_csv, KmSplit, TrackError};

pub const REPORT_CSV_HEADER: &str =
    "km,actual_pace_ds,predicted_pace_ds,difference_ds,lower_bound_ds,upper_bound_ds";
pub const PLOT_CSV_HEADER: &str = "km,actual_pace_ds,predicted_pace_ds,alt_delta_m,saving_ds";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Track(#[from] TrackError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("no deficit to make up: goal {goal} is not faster than actual {actual}")]
    NoDeficit {
        actual: Deciseconds,
        goal: Deciseconds,
    },
    #[error("splits file has no data rows")]
    NoSplits,
    #[error("bounds cover {bounds} segments but splits cover {splits}")]
    BoundsMismatch { splits: usize, bounds: usize },
    #[error("final partial segment must have capacity 0, bounds give {} ds", .0.get())]
    PartialSegmentCapacity(Deciseconds),
    #[error(
        "plan closes {} ds of a {} ds deficit; only feasible plans are reported",
        saved.get(),
        target.get()
    )]
    InfeasiblePlan {
        saved: Deciseconds,
        target: Deciseconds,
    },
    #[error("{what} has {found} entries, expected {expected}")]
    Length {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundsSource {
    DeriveFromAltitude,
    FromFile(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetSpec {
    Deficit(Deciseconds),
    /// Achieved and goal finishing times; `round_up` takes the deficit up to
    /// whole seconds (1:09.4 becomes 70 s).
    Totals {
        actual: Deciseconds,
        goal: Deciseconds,
        round_up: bool,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Table,
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRequest {
    pub splits_path: PathBuf,
    pub bounds_source: BoundsSource,
    pub target: TargetSpec,
    pub solver: SolverConfig,
    pub output_format: OutputFormat,
}

/// One line of a report, mirroring the published results table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub distance_km: f64,
    pub actual_pace: Deciseconds,
    pub predicted_pace: Deciseconds,
    pub difference: Deciseconds,
    pub capacity: Deciseconds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportTotals {
    pub actual_ds: u64,
    pub predicted_ds: u64,
    pub difference_ds: u64,
    pub capacity_ds: u64,
}

/// JSON body of a rendered report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub target_ds: u64,
    pub plan: PlanRecord,
    pub rows: Vec<ReportRow>,
    pub totals: ReportTotals,
}

fn read_file(path: &Path) -> Result<Vec<u8>, ReportError> {
    fs::read(path).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn resolve_target(target: TargetSpec) -> Result<Deciseconds, ReportError> {
    match target {
        TargetSpec::Deficit(d) => Ok(d),
        TargetSpec::Totals {
            actual,
            goal,
            round_up,
        } => {
            let deficit = actual
                .checked_sub(goal)
                .filter(|d| *d > Deciseconds::ZERO)
                .ok_or(ReportError::NoDeficit { actual, goal })?;
            Ok(if round_up {
                Deciseconds(deficit.get().div_ceil(10) * 10)
            } else {
                deficit
            })
        }
    }
}

/// Capacities derived from each split's gradient class.
pub fn derive_capacities(splits: &[KmSplit]) -> Result<Vec<Deciseconds>, ReportError> {
    let last = splits.last().ok_or(ReportError::NoSplits)?;
    let classes = splits
        .iter()
        .map(|s| classify_segment(s.alt_delta_m))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(capacities_from_classes(&classes, last.is_partial())?)
}

/// Assembles and checks a problem from already-parsed inputs. `bounds` of
/// `None` derives capacities from altitude.
pub fn assemble_problem(
    splits: &[KmSplit],
    bounds: Option<Vec<Deciseconds>>,
    target: TargetSpec,
) -> Result<DeficitProblem, ReportError> {
    let last = splits.last().ok_or(ReportError::NoSplits)?;
    let target = resolve_target(target)?;
    let capacities = match bounds {
        None => derive_capacities(splits)?,
        Some(caps) => {
            if caps.len() != splits.len() {
                return Err(ReportError::BoundsMismatch {
                    splits: splits.len(),
                    bounds: caps.len(),
                });
            }
            let final_cap = *caps.last().expect("non-empty");
            if last.is_partial() && final_cap != Deciseconds::ZERO {
                return Err(ReportError::PartialSegmentCapacity(final_cap));
            }
            caps
        }
    };
    let problem = DeficitProblem::new(target, capacities)?;
    problem.ensure_solvable()?;
    Ok(problem)
}

/// Reads the request's files and builds a solvable problem.
pub fn build_problem(request: &RunRequest) -> Result<DeficitProblem, ReportError> {
    let splits = parse_splits_csv(&read_file(&request.splits_path)?)?;
    let bounds = match &request.bounds_source {
        BoundsSource::DeriveFromAltitude => None,
        BoundsSource::FromFile(path) => Some(parse_bounds_csv(&read_file(path)?)?),
    };
    assemble_problem(&splits, bounds, request.target)
}

fn format_km(km: f64) -> String {
    let s = format!("{km:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn build_rows(
    splits: &[KmSplit],
    plan: &SavingsPlan,
    problem: &DeficitProblem,
) -> Result<Vec<ReportRow>, ReportError> {
    if splits.len() != problem.dimension() {
        return Err(ReportError::Length {
            what: "splits",
            expected: problem.dimension(),
            found: splits.len(),
        });
    }
    problem.validate_plan(plan)?;
    let fitness = problem.fitness(plan);
    if !fitness.feasible {
        return Err(ReportError::InfeasiblePlan {
            saved: plan.total(),
            target: problem.target(),
        });
    }
    let predicted = apply_plan(splits, plan)?;
    let mut distance_m = 0.0;
    Ok(splits
        .iter()
        .zip(&predicted)
        .zip(plan.savings.iter().zip(problem.capacities()))
        .map(|((actual, pred), (&difference, &capacity))| {
            distance_m += actual.length_m;
            ReportRow {
                distance_km: distance_m / 1000.0,
                actual_pace: actual.pace,
                predicted_pace: pred.pace,
                difference,
                capacity,
            }
        })
        .collect())
}

fn totals(rows: &[ReportRow]) -> ReportTotals {
    ReportTotals {
        actual_ds: rows.iter().map(|r| r.actual_pace.get()).sum(),
        predicted_ds: rows.iter().map(|r| r.predicted_pace.get()).sum(),
        difference_ds: rows.iter().map(|r| r.difference.get()).sum(),
        capacity_ds: rows.iter().map(|r| r.capacity.get()).sum(),
    }
}

fn render_table(rows: &[ReportRow]) -> String {
    let mut out = String::new();
    out.push_str(
        "Distance [km] | Actual pace [min/km] | Predicted pace [min/km] | Difference [sec] | Lower bounds [sec] | Upper bounds [sec]\n",
    );
    for row in rows {
        let _ = writeln!(
            out,
            "{} | {} | {} | {} | {} | 0",
            format_km(row.distance_km),
            format_table_duration(row.actual_pace),
            format_table_duration(row.predicted_pace),
            format_seconds(row.difference),
            format_seconds(row.capacity),
        );
    }
    let t = totals(rows);
    let _ = writeln!(
        out,
        "Total: | {} | {} | {} | {} | 0",
        format_table_duration(Deciseconds(t.actual_ds)),
        format_table_duration(Deciseconds(t.predicted_ds)),
        format_seconds(Deciseconds(t.difference_ds)),
        format_seconds(Deciseconds(t.capacity_ds)),
    );
    out
}

fn render_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},0",
            format_km(row.distance_km),
            row.actual_pace.get(),
            row.predicted_pace.get(),
            row.difference.get(),
            row.capacity.get(),
        );
    }
    out
}

/// Renders a feasible plan against its splits in the requested format.
pub fn render_report(
    splits: &[KmSplit],
    plan: &SavingsPlan,
    problem: &DeficitProblem,
    format: OutputFormat,
) -> Result<Vec<u8>, ReportError> {
    let rows = build_rows(splits, plan, problem)?;
    let text = match format {
        OutputFormat::Table => render_table(&rows),
        OutputFormat::Csv => render_csv(&rows),
        OutputFormat::Json => {
            let doc = ReportDocument {
                target_ds: problem.target().get(),
                plan: PlanRecord::new(plan, problem),
                totals: totals(&rows),
                rows,
            };
            let mut s = serde_json::to_string_pretty(&doc)?;
            s.push('\n');
            s
        }
    };
    Ok(text.into_bytes())
}

/// Per-segment series for external plotting: paces, altitude change and savings.
pub fn emit_plot_data(splits: &[KmSplit], plan: &SavingsPlan) -> Result<Vec<u8>, ReportError> {
    if splits.len() != plan.len() {
        return Err(ReportError::Length {
            what: "plan",
            expected: splits.len(),
            found: plan.len(),
        });
    }
    let predicted = apply_plan(splits, plan)?;
    let mut out = String::from(PLOT_CSV_HEADER);
    out.push('\n');
    let mut distance_m = 0.0;
    for ((actual, pred), saving) in splits.iter().zip(&predicted).zip(&plan.savings) {
        distance_m += actual.length_m;
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            format_km(distance_m / 1000.0),
            actual.pace.get(),
            pred.pace.get(),
            actual.alt_delta_m,
            saving.get(),
        );
    }
    Ok(out.into_bytes())
}
