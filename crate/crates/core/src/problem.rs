//! The deficit problem: per-segment savings capacities, a target deficit, the
//! mapping from decision vectors to savings plans, and plan evaluation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::de::CandidateVector;
use crate::duration::Deciseconds;
use crate::track::{KmSplit, SegmentClass};

/// Capacity of a flat segment (2 s).
pub const FLAT_CAPACITY: Deciseconds = Deciseconds(20);
/// Capacity of a downhill segment (4 s).
pub const DOWNHILL_CAPACITY: Deciseconds = Deciseconds(40);
/// Uphill segments keep their pace.
pub const UPHILL_CAPACITY: Deciseconds = Deciseconds(0);

/// Multiplier applied to every decisecond saved beyond the target.
pub const OVERSHOOT_PENALTY: u64 = 100;

pub const BOUNDS_HEADER: [&str; 2] = ["index", "capacity_ds"];

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("a problem needs at least one segment")]
    Empty,
    #[error(
        "problem is unsolvable: summed savings capacity {} ds is below the deficit {} ds \
         (short by {} ds); the capacities must add up to at least the deficit",
        capacity.get(),
        target.get(),
        target.get() - capacity.get()
    )]
    Unsolvable {
        capacity: Deciseconds,
        target: Deciseconds,
    },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("decision coordinate {index} = {value} lies outside [0, 1]")]
    OutOfUnitRange { index: usize, value: f64 },
    #[error("segment {index}: saving {} ds exceeds capacity {} ds", saving.get(), capacity.get())]
    OverCapacity {
        index: usize,
        saving: Deciseconds,
        capacity: Deciseconds,
    },
    #[error("segment {index}: saving {} ds is not shorter than its pace {} ds", saving.get(), pace.get())]
    SavingExceedsPace {
        index: u32,
        saving: Deciseconds,
        pace: Deciseconds,
    },
    #[error("cannot total an empty list of splits")]
    NoSplits,
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("unexpected bounds header {0:?}, expected index,capacity_ds")]
    Header(Vec<String>),
    #[error("bounds row {row}: {message}")]
    BoundsRow { row: usize, message: String },
}

/// Closing `target` deciseconds by distributing savings over segments,
/// each bounded by its capacity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeficitProblem {
    target: Deciseconds,
    capacities: Vec<Deciseconds>,
}

impl DeficitProblem {
    pub fn new(target: Deciseconds, capacities: Vec<Deciseconds>) -> Result<Self, ProblemError> {
        if capacities.is_empty() {
            return Err(ProblemError::Empty);
        }
        Ok(Self { target, capacities })
    }

    pub fn target(&self) -> Deciseconds {
        self.target
    }

    pub fn capacities(&self) -> &[Deciseconds] {
        &self.capacities
    }

    pub fn dimension(&self) -> usize {
        self.capacities.len()
    }

    pub fn total_capacity(&self) -> Deciseconds {
        self.capacities.iter().sum()
    }

    pub fn check_solvable(&self) -> bool {
        self.total_capacity() >= self.target
    }

    pub fn ensure_solvable(&self) -> Result<(), ProblemError> {
        if self.check_solvable() {
            Ok(())
        } else {
            Err(ProblemError::Unsolvable {
                capacity: self.total_capacity(),
                target: self.target,
            })
        }
    }

    /// Maps a point of the unit hypercube onto integer decisecond savings:
    /// `ceil(capacity · x)` per coordinate.
    pub fn map_decision(&self, x: &CandidateVector) -> Result<SavingsPlan, ProblemError> {
        let coords = x.coords();
        if coords.len() != self.dimension() {
            return Err(ProblemError::Dimension {
                expected: self.dimension(),
                found: coords.len(),
            });
        }
        if let Some((index, &value)) = coords
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(ProblemError::OutOfUnitRange { index, value });
        }
        Ok(self.map_unchecked(coords))
    }

    pub(crate) fn map_unchecked(&self, coords: &[f64]) -> SavingsPlan {
        let savings = coords
            .iter()
            .zip(&self.capacities)
            .map(|(&x, &cap)| {
                let raw = (cap.get() as f64 * x).ceil() as u64;
                Deciseconds(raw.min(cap.get()))
            })
            .collect();
        SavingsPlan { savings }
    }

    /// Gap to the target: `target − S` when short, `100·(S − target)` when over.
    pub fn fitness(&self, plan: &SavingsPlan) -> FitnessValue {
        let saved = plan.total().get();
        let target = self.target.get();
        let value = if saved <= target {
            target - saved
        } else {
            OVERSHOOT_PENALTY * (saved - target)
        };
        FitnessValue::new(Deciseconds(value))
    }

    /// Checks that `plan` has the right length and respects every capacity.
    pub fn validate_plan(&self, plan: &SavingsPlan) -> Result<(), ProblemError> {
        if plan.savings.len() != self.dimension() {
            return Err(ProblemError::Dimension {
                expected: self.dimension(),
                found: plan.savings.len(),
            });
        }
        for (index, (&saving, &capacity)) in plan.savings.iter().zip(&self.capacities).enumerate() {
            if saving > capacity {
                return Err(ProblemError::OverCapacity {
                    index,
                    saving,
                    capacity,
                });
            }
        }
        Ok(())
    }
}

/// Per-segment savings, in deciseconds shaved off each recorded pace.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SavingsPlan {
    pub savings: Vec<Deciseconds>,
}

impl SavingsPlan {
    pub fn new(savings: Vec<Deciseconds>) -> Self {
        Self { savings }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            savings: vec![Deciseconds::ZERO; n],
        }
    }

    pub fn total(&self) -> Deciseconds {
        self.savings.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.savings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.savings.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitnessValue {
    pub value: Deciseconds,
    pub feasible: bool,
}

impl FitnessValue {
    pub fn new(value: Deciseconds) -> Self {
        Self {
            value,
            feasible: value == Deciseconds::ZERO,
        }
    }
}

/// Serialized form of a plan: `{ "savings_ds": [...], "total_ds": n, "feasible": b }`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub savings_ds: Vec<u64>,
    pub total_ds: u64,
    pub feasible: bool,
}

impl PlanRecord {
    pub fn new(plan: &SavingsPlan, problem: &DeficitProblem) -> Self {
        Self {
            savings_ds: plan.savings.iter().map(|d| d.get()).collect(),
            total_ds: plan.total().get(),
            feasible: problem.fitness(plan).feasible,
        }
    }

    pub fn plan(&self) -> SavingsPlan {
        SavingsPlan::new(self.savings_ds.iter().copied().map(Deciseconds).collect())
    }
}

pub fn capacity_for(class: SegmentClass) -> Deciseconds {
    match class {
        SegmentClass::Flat => FLAT_CAPACITY,
        SegmentClass::Downhill => DOWNHILL_CAPACITY,
        SegmentClass::Uphill => UPHILL_CAPACITY,
    }
}

/// Per-segment capacities from gradient classes. A final partial segment is
/// treated as uphill whatever its class.
pub fn capacities_from_classes(
    classes: &[SegmentClass],
    final_is_partial: bool,
) -> Result<Vec<Deciseconds>, ProblemError> {
    if classes.is_empty() {
        return Err(ProblemError::Empty);
    }
    let mut caps: Vec<Deciseconds> = classes.iter().copied().map(capacity_for).collect();
    if final_is_partial {
        if let Some(last) = caps.last_mut() {
            *last = UPHILL_CAPACITY;
        }
    }
    Ok(caps)
}

/// Predicted paces after taking each segment's saving off its recorded pace.
pub fn apply_plan(splits: &[KmSplit], plan: &SavingsPlan) -> Result<Vec<KmSplit>, ProblemError> {
    if splits.len() != plan.len() {
        return Err(ProblemError::Dimension {
            expected: splits.len(),
            found: plan.len(),
        });
    }
    splits
        .iter()
        .zip(&plan.savings)
        .map(|(split, &saving)| {
            if saving >= split.pace {
                return Err(ProblemError::SavingExceedsPace {
                    index: split.index,
                    saving,
                    pace: split.pace,
                });
            }
            Ok(KmSplit {
                pace: split.pace - saving,
                ..split.clone()
            })
        })
        .collect()
}

pub fn total_time(splits: &[KmSplit]) -> Result<Deciseconds, ProblemError> {
    if splits.is_empty() {
        return Err(ProblemError::NoSplits);
    }
    Ok(splits.iter().map(|s| s.pace).sum())
}

/// Reads a bounds CSV (`index,capacity_ds`) with indices 1..n in order.
pub fn parse_bounds_csv(bytes: &[u8]) -> Result<Vec<Deciseconds>, ProblemError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let header = reader.headers()?.clone();
    if header.iter().ne(BOUNDS_HEADER.iter().copied()) {
        return Err(ProblemError::Header(
            header.iter().map(str::to_string).collect(),
        ));
    }
    let mut caps = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record?;
        let bad = |message: String| ProblemError::BoundsRow { row, message };
        let index: usize = record[0]
            .parse()
            .map_err(|_| bad(format!("invalid index {:?}", &record[0])))?;
        if index != row {
            return Err(bad(format!(
                "index {index} out of sequence, expected {row}"
            )));
        }
        let capacity: u64 = record[1]
            .parse()
            .map_err(|_| bad(format!("invalid capacity {:?}", &record[1])))?;
        caps.push(Deciseconds(capacity));
    }
    Ok(caps)
}
