//! Plans where a marathon runner could have recovered a finishing-time deficit.
//!
//! Recorded per-kilometer splits are turned into a box-constrained problem:
//! every segment may give up to a fixed number of deciseconds depending on its
//! gradient, and the savings must add up to the deficit exactly. A seeded
//! `DE/rand/1/bin` Differential Evolution search collects distinct feasible
//! plans, which are then rendered as per-kilometer reports.

pub mod de;
pub mod duration;
pub mod fixture;
pub mod problem;
pub mod report;
pub mod track;

pub use de::{
    run, run_batch, strategy_name, CandidateVector, DeError, DifferentialEvolution,
    FeasibleArchive, RunReport, RunResult, SolverConfig, TerminatedBy,
};
pub use duration::{format_duration, parse_duration, Deciseconds};
pub use problem::{
    apply_plan, capacities_from_classes, total_time, DeficitProblem, FitnessValue, PlanRecord,
    ProblemError, SavingsPlan,
};
pub use report::{build_problem, emit_plot_data, render_report, OutputFormat, ReportError};
pub use track::{
    aggregate_track, classify_segment, parse_splits_csv, parse_track_points, KmSplit, SegmentClass,
    TrackError, TrackPoint,
};
