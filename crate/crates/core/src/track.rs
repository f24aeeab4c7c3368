//! Race data ingestion: split files, raw track points, per-kilometer aggregation
//! and gradient classification.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::duration::{parse_duration, Deciseconds, DurationError};

/// Mean Earth radius used for great-circle distances, in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

/// Nominal segment length of a split, in meters.
pub const SEGMENT_LENGTH_M: f64 = 1000.0;

/// Net altitude change (meters) beyond which a segment counts as uphill or downhill.
pub const GRADIENT_THRESHOLD_M: f64 = 1.0;

/// Distances within this many meters of a segment boundary close the segment.
const BOUNDARY_TOLERANCE_M: f64 = 1e-3;

pub const SPLITS_HEADER: [&str; 4] = ["index", "length_m", "pace", "alt_delta_m"];
pub const TRACK_HEADER: [&str; 4] = ["lat", "lon", "ele_m", "t_s"];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackPoint {
    pub latitude: f64,
    pub longitude: f64,
    pub elevation: f64,
    /// Seconds since the epoch.
    pub timestamp: f64,
}

/// One segment of a race: usually a full kilometer, the last one may be shorter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KmSplit {
    /// 1-based ordinal.
    pub index: u32,
    pub length_m: f64,
    pub pace: Deciseconds,
    /// Signed net altitude change over the segment.
    pub alt_delta_m: f64,
}

impl KmSplit {
    pub fn is_partial(&self) -> bool {
        self.length_m < SEGMENT_LENGTH_M
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SegmentClass {
    Flat,
    Uphill,
    Downhill,
}

#[derive(Debug, Error)]
pub enum TrackError {
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("unexpected header {found:?}, expected {expected:?}")]
    Header {
        found: Vec<String>,
        expected: Vec<String>,
    },
    #[error("row {row}: expected {expected} fields, found {found}")]
    FieldCount {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}: invalid {column} value {value:?}")]
    InvalidNumber {
        row: usize,
        column: &'static str,
        value: String,
    },
    #[error("row {row}: {source}")]
    Pace { row: usize, source: DurationError },
    #[error("row {row}: pace must be positive")]
    ZeroPace { row: usize },
    #[error("row {row}: duplicate segment index {index}")]
    DuplicateIndex { row: usize, index: u32 },
    #[error("row {row}: segment index {found} out of sequence, expected {expected}")]
    MissingIndex {
        row: usize,
        expected: u32,
        found: u32,
    },
    #[error("row {row}: segment length {length} m outside (0, 1000]")]
    SegmentLength { row: usize, length: f64 },
    #[error("row {row}: partial segment of {length} m is not the final segment")]
    NonFinalPartial { row: usize, length: f64 },
    #[error("row {row}: altitude delta must be finite")]
    NonFiniteAltitude { row: usize },
    #[error("row {row}: coordinate ({lat}, {lon}) out of range")]
    Coordinate { row: usize, lat: f64, lon: f64 },
    #[error("row {row}: timestamp {timestamp} does not increase past {previous}")]
    NonMonotonic {
        row: usize,
        previous: f64,
        timestamp: f64,
    },
    #[error("aggregation needs at least 2 track points, got {0}")]
    TooFewPoints(usize),
    #[error("track covers zero distance")]
    ZeroDistance,
    #[error("segment length must be positive and finite, got {0}")]
    InvalidSegmentLength(f64),
    #[error("altitude delta must be finite, got {0}")]
    NonFinite(f64),
}

fn read_rows(bytes: &[u8], header: &[&str]) -> Result<Vec<(usize, csv::StringRecord)>, TrackError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let found = reader.headers()?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(TrackError::Header {
            found: found.iter().map(str::to_string).collect(),
            expected: header.iter().map(|s| s.to_string()).collect(),
        });
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        // data rows are numbered from 1
        let row = i + 1;
        if record.len() != header.len() {
            return Err(TrackError::FieldCount {
                row,
                expected: header.len(),
                found: record.len(),
            });
        }
        rows.push((row, record));
    }
    Ok(rows)
}

fn parse_number<T: std::str::FromStr>(
    record: &csv::StringRecord,
    idx: usize,
    row: usize,
    column: &'static str,
) -> Result<T, TrackError> {
    let value = &record[idx];
    value.parse().map_err(|_| TrackError::InvalidNumber {
        row,
        column,
        value: value.to_string(),
    })
}

/// Reads a splits CSV (`index,length_m,pace,alt_delta_m`).
///
/// Indices must run 1, 2, 3, ... in file order and only the last row may be
/// shorter than a full kilometer.
pub fn parse_splits_csv(bytes: &[u8]) -> Result<Vec<KmSplit>, TrackError> {
    let rows = read_rows(bytes, &SPLITS_HEADER)?;
    let mut splits: Vec<KmSplit> = Vec::with_capacity(rows.len());
    for (row, record) in rows {
        let index: u32 = parse_number(&record, 0, row, "index")?;
        let length_m: f64 = parse_number(&record, 1, row, "length_m")?;
        let pace = parse_duration(&record[2]).map_err(|source| TrackError::Pace { row, source })?;
        let alt_delta_m: f64 = parse_number(&record, 3, row, "alt_delta_m")?;

        let expected = splits.len() as u32 + 1;
        if index != expected {
            if index >= 1 && index < expected {
                return Err(TrackError::DuplicateIndex { row, index });
            }
            return Err(TrackError::MissingIndex {
                row,
                expected,
                found: index,
            });
        }
        if !(length_m > 0.0 && length_m <= SEGMENT_LENGTH_M) {
            return Err(TrackError::SegmentLength {
                row,
                length: length_m,
            });
        }
        if let Some(prev) = splits.last() {
            if prev.is_partial() {
                return Err(TrackError::NonFinalPartial {
                    row: row - 1,
                    length: prev.length_m,
                });
            }
        }
        if pace == Deciseconds::ZERO {
            return Err(TrackError::ZeroPace { row });
        }
        if !alt_delta_m.is_finite() {
            return Err(TrackError::NonFiniteAltitude { row });
        }
        splits.push(KmSplit {
            index,
            length_m,
            pace,
            alt_delta_m,
        });
    }
    Ok(splits)
}

/// Reads a track CSV (`lat,lon,ele_m,t_s`).
pub fn parse_track_points(bytes: &[u8]) -> Result<Vec<TrackPoint>, TrackError> {
    let rows = read_rows(bytes, &TRACK_HEADER)?;
    let mut points: Vec<TrackPoint> = Vec::with_capacity(rows.len());
    for (row, record) in rows {
        let latitude: f64 = parse_number(&record, 0, row, "lat")?;
        let longitude: f64 = parse_number(&record, 1, row, "lon")?;
        let elevation: f64 = parse_number(&record, 2, row, "ele_m")?;
        let timestamp: f64 = parse_number(&record, 3, row, "t_s")?;
        if !(-90.0..=90.0).contains(&latitude) || !(-180.0..=180.0).contains(&longitude) {
            return Err(TrackError::Coordinate {
                row,
                lat: latitude,
                lon: longitude,
            });
        }
        if !elevation.is_finite() {
            return Err(TrackError::InvalidNumber {
                row,
                column: "ele_m",
                value: record[2].to_string(),
            });
        }
        if !timestamp.is_finite() {
            return Err(TrackError::InvalidNumber {
                row,
                column: "t_s",
                value: record[3].to_string(),
            });
        }
        if let Some(prev) = points.last() {
            if timestamp <= prev.timestamp {
                return Err(TrackError::NonMonotonic {
                    row,
                    previous: prev.timestamp,
                    timestamp,
                });
            }
        }
        points.push(TrackPoint {
            latitude,
            longitude,
            elevation,
            timestamp,
        });
    }
    Ok(points)
}

/// Great-circle distance in meters; elevation is ignored.
pub fn haversine_m(a: &TrackPoint, b: &TrackPoint) -> f64 {
    let (lat1, lat2) = (a.latitude.to_radians(), b.latitude.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.longitude - a.longitude).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

fn round_to_ds(seconds: f64) -> Deciseconds {
    Deciseconds((seconds * 10.0).round().max(0.0) as u64)
}

struct OpenSegment {
    start_time: f64,
    start_elevation: f64,
    covered_m: f64,
}

/// Cuts a track into consecutive segments of `segment_length_m`.
///
/// Boundary times and elevations are linearly interpolated along each leg.
/// The last split carries the remainder. Points that do not move still add
/// their elapsed time to the open segment.
pub fn aggregate_track(
    points: &[TrackPoint],
    segment_length_m: f64,
) -> Result<Vec<KmSplit>, TrackError> {
    if !(segment_length_m.is_finite() && segment_length_m > 0.0) {
        return Err(TrackError::InvalidSegmentLength(segment_length_m));
    }
    if points.len() < 2 {
        return Err(TrackError::TooFewPoints(points.len()));
    }

    let mut splits = Vec::new();
    let mut open = OpenSegment {
        start_time: points[0].timestamp,
        start_elevation: points[0].elevation,
        covered_m: 0.0,
    };
    let mut total_m = 0.0;

    let close = |splits: &mut Vec<KmSplit>, open: &OpenSegment, length: f64, t: f64, ele: f64| {
        splits.push(KmSplit {
            index: splits.len() as u32 + 1,
            length_m: length,
            pace: round_to_ds(t - open.start_time),
            alt_delta_m: ele - open.start_elevation,
        });
    };

    for leg in points.windows(2) {
        let (a, b) = (&leg[0], &leg[1]);
        let leg_m = haversine_m(a, b);
        total_m += leg_m;
        let mut consumed = 0.0;
        loop {
            let needed = segment_length_m - open.covered_m;
            let available = leg_m - consumed;
            if available + BOUNDARY_TOLERANCE_M < needed || leg_m == 0.0 {
                open.covered_m += available;
                break;
            }
            // segment boundary falls inside this leg
            consumed += needed.min(available);
            let frac = (consumed / leg_m).clamp(0.0, 1.0);
            let t = a.timestamp + frac * (b.timestamp - a.timestamp);
            let ele = a.elevation + frac * (b.elevation - a.elevation);
            close(&mut splits, &open, segment_length_m, t, ele);
            open = OpenSegment {
                start_time: t,
                start_elevation: ele,
                covered_m: 0.0,
            };
        }
    }

    if total_m <= 0.0 {
        return Err(TrackError::ZeroDistance);
    }

    let last = points.last().expect("at least two points");
    if open.covered_m > BOUNDARY_TOLERANCE_M {
        close(
            &mut splits,
            &open,
            open.covered_m,
            last.timestamp,
            last.elevation,
        );
    } else if let Some(prev) = splits.last_mut() {
        // trailing time after the final boundary without any distance
        let extra = round_to_ds(last.timestamp - open.start_time);
        prev.pace += extra;
        prev.alt_delta_m += last.elevation - open.start_elevation;
    }
    Ok(splits)
}

/// Labels a segment by its net altitude change; exactly ±1 m stays flat.
pub fn classify_segment(alt_delta_m: f64) -> Result<SegmentClass, TrackError> {
    if !alt_delta_m.is_finite() {
        return Err(TrackError::NonFinite(alt_delta_m));
    }
    Ok(if alt_delta_m > GRADIENT_THRESHOLD_M {
        SegmentClass::Uphill
    } else if alt_delta_m < -GRADIENT_THRESHOLD_M {
        SegmentClass::Downhill
    } else {
        SegmentClass::Flat
    })
}
