//! Three Hearts marathon 2012 (Radenci) case-study data.
//!
//! Paces and savings capacities are transcribed from the published results
//! table. No raw altitude series was published, so the `alt_delta_m` column
//! holds placeholder values chosen to reproduce the published capacities
//! when bounds are derived from altitude (+2 m uphill, 0 m flat, −2 m downhill).

use crate::duration::Deciseconds;
use crate::problem::{parse_bounds_csv, DeficitProblem, PlanRecord};
use crate::track::{parse_splits_csv, KmSplit};

pub const SPLITS_CSV: &str = include_str!("../data/three_hearts_2012_splits.csv");
pub const BOUNDS_CSV: &str = include_str!("../data/three_hearts_2012_bounds.csv");
/// The published per-kilometer differences, as plan JSON.
pub const TABLE_PLAN_JSON: &str = include_str!("../data/three_hearts_2012_table_plan.json");

/// Deficit of 3:01:09.4 against 3:00:00.0, rounded up to whole seconds.
pub const TARGET: Deciseconds = Deciseconds(700);

pub fn splits() -> Vec<KmSplit> {
    parse_splits_csv(SPLITS_CSV.as_bytes()).expect("bundled splits parse")
}

pub fn capacities() -> Vec<Deciseconds> {
    parse_bounds_csv(BOUNDS_CSV.as_bytes()).expect("bundled bounds parse")
}

pub fn problem() -> DeficitProblem {
    DeficitProblem::new(TARGET, capacities()).expect("bundled bounds are non-empty")
}

pub fn table_plan() -> PlanRecord {
    serde_json::from_str(TABLE_PLAN_JSON).expect("bundled plan parses")
}
