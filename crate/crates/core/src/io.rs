//! CSV and JSON serialization of bands, curves, chains and study reports.
//!
//! Internally every time lies in `[0, 1]`. Writers take the dataset horizon
//! and report times on the original scale; hazard values are divided by the
//! horizon so they are rates per original time unit. Cumulative hazards and
//! survival probabilities are scale free.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bands::{band_area, Band, BandMethod, Target};
use crate::error::Result;
use crate::sampler::PosteriorChain;
use crate::sim::CoverageReport;

fn value_scale(target: Target, horizon: f64) -> f64 {
    match target {
        Target::Hazard => 1.0 / horizon,
        Target::CumHaz | Target::Survival => 1.0,
    }
}

/// `t,center,lower,upper`.
pub fn write_band_csv<W: Write>(out: W, band: &Band, horizon: f64) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "center", "lower", "upper"])?;
    let v = value_scale(band.target, horizon);
    for i in 0..band.len() {
        w.serialize((band.grid[i] * horizon, band.center[i] * v, band.lower[i] * v, band.upper[i] * v))?;
    }
    w.flush()?;
    Ok(())
}

/// `t,value`.
pub fn write_curve_csv<W: Write>(out: W, target: Target, grid: &[f64], values: &[f64], horizon: f64) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "value"])?;
    let v = value_scale(target, horizon);
    for (t, y) in grid.iter().zip(values) {
        w.serialize((t * horizon, y * v))?;
    }
    w.flush()?;
    Ok(())
}

/// One row per kept draw, columns `lambda_1..lambda_K`.
pub fn write_draws_csv<W: Write>(out: W, chain: &PosteriorChain, horizon: f64) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let k = chain.n_intervals();
    w.write_record((1..=k).map(|i| format!("lambda_{i}")))?;
    for d in &chain.draws {
        w.write_record(d.heights().iter().map(|h| (h / horizon).to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Metadata accompanying a band CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandEnvelope {
    pub target: Target,
    pub method: BandMethod,
    pub level: f64,
    /// Sup-norm radius for credible bands; 0 for bands of varying width.
    pub radius: f64,
    /// Area between the envelopes on the original time scale.
    pub area: f64,
}

impl BandEnvelope {
    pub fn of(band: &Band, horizon: f64) -> Self {
        let v = value_scale(band.target, horizon);
        Self {
            target: band.target,
            method: band.method,
            level: band.level,
            radius: band.radius * v,
            area: band_area(band) * horizon * v,
        }
    }
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(out, value)?;
    Ok(())
}

/// Coverage reports as a table with one row per scenario.
pub fn write_coverage_table<W: Write>(mut out: W, reports: &[CoverageReport]) -> Result<()> {
    writeln!(out, "{}", CoverageReport::TABLE_HEADER)?;
    for r in reports {
        writeln!(out, "{}", r.table_row())?;
    }
    Ok(())
}
