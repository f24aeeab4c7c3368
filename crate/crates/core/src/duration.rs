//! Decisecond time values and the `[H:]MM:SS.d` text format used by split files and reports.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const DS_PER_MINUTE: u64 = 600;
const DS_PER_HOUR: u64 = 36_000;

/// A time span in tenths of a second.
///
/// All race arithmetic happens on this integer unit so sums and feasibility
/// checks are exact.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Deciseconds(pub u64);

impl Deciseconds {
    pub const ZERO: Deciseconds = Deciseconds(0);

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn checked_sub(self, rhs: Deciseconds) -> Option<Deciseconds> {
        self.0.checked_sub(rhs.0).map(Deciseconds)
    }

    pub fn as_seconds(self) -> f64 {
        self.0 as f64 / 10.0
    }
}

impl Add for Deciseconds {
    type Output = Deciseconds;

    fn add(self, rhs: Deciseconds) -> Deciseconds {
        Deciseconds(self.0 + rhs.0)
    }
}

impl AddAssign for Deciseconds {
    fn add_assign(&mut self, rhs: Deciseconds) {
        self.0 += rhs.0;
    }
}

impl Sub for Deciseconds {
    type Output = Deciseconds;

    fn sub(self, rhs: Deciseconds) -> Deciseconds {
        Deciseconds(self.0 - rhs.0)
    }
}

impl Sum for Deciseconds {
    fn sum<I: Iterator<Item = Deciseconds>>(iter: I) -> Deciseconds {
        Deciseconds(iter.map(|d| d.0).sum())
    }
}

impl<'a> Sum<&'a Deciseconds> for Deciseconds {
    fn sum<I: Iterator<Item = &'a Deciseconds>>(iter: I) -> Deciseconds {
        iter.copied().sum()
    }
}

impl From<u64> for Deciseconds {
    fn from(value: u64) -> Self {
        Deciseconds(value)
    }
}

impl fmt::Display for Deciseconds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_duration(*self))
    }
}

impl FromStr for Deciseconds {
    type Err = DurationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_duration(s)
    }
}

/// Which component of a duration string was rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DurationField {
    Layout,
    Hours,
    Minutes,
    Seconds,
    Fraction,
}

impl fmt::Display for DurationField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            DurationField::Layout => "layout",
            DurationField::Hours => "hours",
            DurationField::Minutes => "minutes",
            DurationField::Seconds => "seconds",
            DurationField::Fraction => "fraction",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid duration {text:?}: bad {field} ({reason})")]
pub struct DurationError {
    pub text: String,
    pub field: DurationField,
    pub reason: &'static str,
}

/// Parses `M:SS.d`, `MM:SS.d` or `H:MM:SS.d` into deciseconds.
///
/// The fraction is optional. A second fractional digit is tolerated only when
/// it is `0`, so the two-decimal values of printed split tables (`04:03.80`)
/// parse without losing precision.
pub fn parse_duration(text: &str) -> Result<Deciseconds, DurationError> {
    let err = |field, reason| DurationError {
        text: text.to_string(),
        field,
        reason,
    };

    let trimmed = text.trim();
    let parts: Vec<&str> = trimmed.split(':').collect();
    let (hours_text, minutes_text, seconds_text) = match parts.as_slice() {
        [m, s] => (None, *m, *s),
        [h, m, s] => (Some(*h), *m, *s),
        _ => return Err(err(DurationField::Layout, "expected [H:]MM:SS.d")),
    };

    let hours = match hours_text {
        Some(h) => {
            if h.is_empty() || !h.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err(DurationField::Hours, "not a number"));
            }
            h.parse::<u64>()
                .map_err(|_| err(DurationField::Hours, "out of range"))?
        }
        None => 0,
    };

    let minutes_width_ok = match hours_text {
        Some(_) => minutes_text.len() == 2,
        None => (1..=2).contains(&minutes_text.len()),
    };
    if !minutes_width_ok || !minutes_text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err(DurationField::Minutes, "expected two digits"));
    }
    let minutes: u64 = minutes_text
        .parse()
        .map_err(|_| err(DurationField::Minutes, "not a number"))?;
    if minutes >= 60 {
        return Err(err(DurationField::Minutes, "must be below 60"));
    }

    let (whole_text, fraction_text) = match seconds_text.split_once('.') {
        Some((w, f)) => (w, Some(f)),
        None => (seconds_text, None),
    };
    if whole_text.len() != 2 || !whole_text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err(DurationField::Seconds, "expected two digits"));
    }
    let seconds: u64 = whole_text
        .parse()
        .map_err(|_| err(DurationField::Seconds, "not a number"))?;
    if seconds >= 60 {
        return Err(err(DurationField::Seconds, "must be below 60"));
    }

    let tenths = match fraction_text {
        None => 0,
        Some(f) => {
            let bytes = f.as_bytes();
            match bytes {
                [d] if d.is_ascii_digit() => u64::from(d - b'0'),
                [d, b'0'] if d.is_ascii_digit() => u64::from(d - b'0'),
                [_, d] if d.is_ascii_digit() => {
                    return Err(err(
                        DurationField::Fraction,
                        "finer than a tenth of a second",
                    ))
                }
                _ => return Err(err(DurationField::Fraction, "expected one digit")),
            }
        }
    };

    hours
        .checked_mul(DS_PER_HOUR)
        .and_then(|h| h.checked_add(minutes * DS_PER_MINUTE + seconds * 10 + tenths))
        .map(Deciseconds)
        .ok_or_else(|| err(DurationField::Hours, "out of range"))
}

fn split_components(ds: Deciseconds) -> (u64, u64, u64, u64) {
    let total = ds.0;
    (
        total / DS_PER_HOUR,
        (total % DS_PER_HOUR) / DS_PER_MINUTE,
        (total % DS_PER_MINUTE) / 10,
        total % 10,
    )
}

/// Canonical text form: `MM:SS.d` below one hour, `H:MM:SS.d` otherwise.
pub fn format_duration(ds: Deciseconds) -> String {
    let (h, m, s, t) = split_components(ds);
    if h == 0 {
        format!("{m:02}:{s:02}.{t}")
    } else {
        format!("{h}:{m:02}:{s:02}.{t}")
    }
}

/// Two-decimal form used in the printed results table (`04:03.80`, `03:01:09.40`).
pub fn format_table_duration(ds: Deciseconds) -> String {
    let (h, m, s, t) = split_components(ds);
    if h == 0 {
        format!("{m:02}:{s:02}.{t}0")
    } else {
        format!("{h:02}:{m:02}:{s:02}.{t}0")
    }
}

/// Seconds with one decimal, dropping the decimal for whole seconds (`1.8`, `70`).
pub fn format_seconds(ds: Deciseconds) -> String {
    if ds.0.is_multiple_of(10) {
        format!("{}", ds.0 / 10)
    } else {
        format!("{}.{}", ds.0 / 10, ds.0 % 10)
    }
}
