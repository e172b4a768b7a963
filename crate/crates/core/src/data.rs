//! Right-censored survival data, the interval grid, and the reduction of a
//! dataset to per-interval event counts and exposures.
//!
//! All internal times live on `[0, 1]`. The loader rescales raw times by a
//! horizon (user supplied, or the largest observed time) and keeps the
//! horizon so results can be mapped back to the original scale.
//!
//! Ties between an event and a censoring at the same recorded time are not
//! reordered: each row keeps the status it was given.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One observed pair: follow-up time and event indicator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub time: f64,
    pub event: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalDataset {
    records: Vec<Observation>,
    horizon: f64,
}

impl SurvivalDataset {
    /// Builds a dataset from times already on the unit scale.
    ///
    /// Times above 1 are truncated to 1 and marked censored.
    pub fn new(records: Vec<Observation>) -> Result<Self> {
        Self::with_horizon(records, 1.0)
    }

    /// Builds a dataset from unit-scale records, remembering the original horizon.
    pub fn with_horizon(mut records: Vec<Observation>, horizon: f64) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyData);
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
        }
        for (i, r) in records.iter_mut().enumerate() {
            if !(r.time.is_finite() && r.time > 0.0) {
                return Err(Error::MalformedRow(i, format!("time {} is not a positive number", r.time)));
            }
            if r.time > 1.0 {
                r.time = 1.0;
                r.event = false;
            }
        }
        Ok(Self { records, horizon })
    }

    /// Convenience constructor from `(time, status)` pairs on the unit scale.
    pub fn from_pairs(pairs: &[(f64, u8)]) -> Result<Self> {
        let mut records = Vec::with_capacity(pairs.len());
        for (i, &(time, status)) in pairs.iter().enumerate() {
            records.push(Observation { time, event: parse_status_value(i, status as f64)? });
        }
        Self::new(records)
    }

    /// Rescales raw times by `horizon` (default: the largest observed time).
    pub fn from_raw(times: &[f64], status: &[u8], horizon: Option<f64>) -> Result<Self> {
        if times.len() != status.len() {
            return Err(Error::ShapeMismatch(format!("{} times but {} status values", times.len(), status.len())));
        }
        if times.is_empty() {
            return Err(Error::EmptyData);
        }
        for (i, &t) in times.iter().enumerate() {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::MalformedRow(i, format!("time {t} is not a positive number")));
            }
        }
        let horizon = match horizon {
            Some(h) => h,
            None => times.iter().cloned().fold(f64::MIN, f64::max),
        };
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
        }
        let records = times
            .iter()
            .zip(status)
            .enumerate()
            .map(|(i, (&t, &s))| Ok(Observation { time: t / horizon, event: parse_status_value(i, s as f64)? }))
            .collect::<Result<Vec<_>>>()?;
        Self::with_horizon(records, horizon)
    }

    pub fn records(&self) -> &[Observation] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// The original-scale time that maps to 1.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_events(&self) -> usize {
        self.records.iter().filter(|r| r.event).count()
    }

    pub fn total_time(&self) -> f64 {
        self.records.iter().map(|r| r.time).sum()
    }
}

fn parse_status_value(index: usize, s: f64) -> Result<bool> {
    if s == 0.0 {
        Ok(false)
    } else if s == 1.0 {
        Ok(true)
    } else {
        Err(Error::MalformedRow(index, format!("status {s} is not 0 or 1")))
    }
}

/// Column names and horizon used when reading a CSV table.
#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub time_col: String,
    pub status_col: String,
    pub horizon: Option<f64>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self { time_col: "time".into(), status_col: "status".into(), horizon: None }
    }
}

/// Reads a headed CSV table with a time column and a 0/1 status column.
///
/// Row indices in errors count data rows from 0 (the header is not counted).
pub fn load_dataset<R: Read>(reader: R, opts: &LoadOptions) -> Result<SurvivalDataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidParameter(format!("column `{name}` not found in header")))
    };
    let time_idx = find(&opts.time_col)?;
    let status_idx = find(&opts.status_col)?;

    let mut times = Vec::new();
    let mut status = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let field = |j: usize| row.get(j).unwrap_or("");
        let t: f64 = field(time_idx)
            .parse()
            .map_err(|_| Error::MalformedRow(i, format!("unparseable time `{}`", field(time_idx))))?;
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::MalformedRow(i, format!("time {t} is not a positive number")));
        }
        let s: f64 = field(status_idx)
            .parse()
            .map_err(|_| Error::MalformedRow(i, format!("unparseable status `{}`", field(status_idx))))?;
        status.push(if parse_status_value(i, s)? { 1 } else { 0 });
        times.push(t);
    }
    SurvivalDataset::from_raw(&times, &status, opts.horizon)
}

/// `K = ceil((n / ln n)^(1 / (1 + 2 gamma)))`.
pub fn select_interval_count(n: usize, gamma: f64) -> Result<usize> {
    if n < 2 {
        return Err(Error::DegenerateSample(n));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    let n = n as f64;
    let k = (n / n.ln()).powf(1.0 / (1.0 + 2.0 * gamma)).ceil();
    Ok((k as usize).max(1))
}

/// `K` equal-width intervals partitioning `[0, 1]`.
///
/// Interval `k` (0-based) is `(k/K, (k+1)/K]`; the first interval also
/// contains 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalGrid {
    k: usize,
}

impl IntervalGrid {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("interval count must be positive".into()));
        }
        Ok(Self { k })
    }

    pub fn len(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn width(&self) -> f64 {
        1.0 / self.k as f64
    }

    /// Breakpoint `j` in `0..=K`.
    #[inline]
    pub fn breakpoint(&self, j: usize) -> f64 {
        if j >= self.k {
            1.0
        } else {
            j as f64 / self.k as f64
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        (0..=self.k).map(|j| self.breakpoint(j)).collect()
    }

    /// Index of the interval containing `t`, for `t` in `[0, 1]`.
    #[inline]
    pub fn index_of(&self, t: f64) -> usize {
        let mut idx = ((t * self.k as f64).ceil() as isize - 1).clamp(0, self.k as isize - 1) as usize;
        while idx > 0 && t <= self.breakpoint(idx) {
            idx -= 1;
        }
        while idx + 1 < self.k && t > self.breakpoint(idx + 1) {
            idx += 1;
        }
        idx
    }
}

/// Per-interval sufficient statistics of the piecewise-exponential likelihood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSummary {
    /// Events per interval.
    pub events: Vec<u64>,
    /// Person-time spent in each interval.
    pub exposure: Vec<f64>,
}

impl IntervalSummary {
    pub fn new(events: Vec<u64>, exposure: Vec<f64>) -> Result<Self> {
        if events.len() != exposure.len() || events.is_empty() {
            return Err(Error::ShapeMismatch(format!("{} event counts vs {} exposures", events.len(), exposure.len())));
        }
        if exposure.iter().any(|&t| !(t.is_finite() && t >= 0.0)) {
            return Err(Error::InvalidParameter("exposures must be finite and nonnegative".into()));
        }
        Ok(Self { events, exposure })
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Merges adjacent pairs of intervals (`K` must be even).
    pub fn coarsen(&self) -> Result<Self> {
        if !self.len().is_multiple_of(2) {
            return Err(Error::ShapeMismatch(format!("cannot halve {} intervals", self.len())));
        }
        let events = self.events.chunks(2).map(|c| c[0] + c[1]).collect();
        let exposure = self.exposure.chunks(2).map(|c| c[0] + c[1]).collect();
        Ok(Self { events, exposure })
    }
}

/// Splits each subject's follow-up over the grid.
pub fn augment(dataset: &SurvivalDataset, grid: &IntervalGrid) -> IntervalSummary {
    let k = grid.len();
    let width = grid.width();
    let mut events = vec![0u64; k];
    let mut exposure = vec![0.0; k];
    // passing[j]: subjects whose interval index is j; they fully cover every interval before j.
    let mut passing = vec![0u64; k];
    for r in dataset.records() {
        let idx = grid.index_of(r.time);
        exposure[idx] += r.time - grid.breakpoint(idx);
        passing[idx] += 1;
        if r.event {
            events[idx] += 1;
        }
    }
    let mut beyond = 0u64;
    for j in (0..k).rev() {
        exposure[j] += beyond as f64 * width;
        beyond += passing[j];
    }
    IntervalSummary { events, exposure }
}
