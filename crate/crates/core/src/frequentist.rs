//! Classical estimators and confidence bands for right-censored data.
//!
//! Nelson-Aalen and Kaplan-Meier step estimates, pointwise intervals, the
//! Hall-Wellner band and the log-transformed equal-precision band. The
//! simultaneous bands use
//!
//! ```text
//! sigma2(t) = sum_{t_i <= t} d_i / (Y_i (Y_i - d_i)),   a(t) = n sigma2 / (1 + n sigma2)
//! HW:      S(t) +/- c n^{-1/2} (1 + n sigma2(t)) S(t)
//! log-EP:  [S^{1/theta}, S^theta],   theta = exp(e sigma(t) / ln S(t))
//! ```
//!
//! where `c` is a quantile of `sup_{0 <= u <= a_U} |B(u)|` and `e` of
//! `sup_{a_L <= u <= a_U} |B(u)| / sqrt(u (1 - u))` for a Brownian bridge
//! `B`. Both critical values come from seeded simulation tables
//! ([`CriticalTables`]). Bands are computed up to the last event time at
//! which the variance is finite and held flat beyond it.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::bands::{Band, BandMethod, Target};
use crate::data::SurvivalDataset;
use crate::error::{Error, Result};
use crate::numeric::upper_order_statistic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    NelsonAalen,
    KaplanMeier,
}

/// A right-continuous step function with a pointwise variance estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepEstimate {
    pub kind: Estimator,
    pub jump_times: Vec<f64>,
    /// Value on `[jump_times[i], jump_times[i + 1])`.
    pub values: Vec<f64>,
    pub variance: Vec<f64>,
}

impl StepEstimate {
    fn initial(&self) -> f64 {
        match self.kind {
            Estimator::NelsonAalen => 0.0,
            Estimator::KaplanMeier => 1.0,
        }
    }

    /// Number of jumps at or before `t`.
    fn jumps_through(&self, t: f64) -> usize {
        self.jump_times.partition_point(|&s| s <= t)
    }

    pub fn value_at(&self, t: f64) -> f64 {
        match self.jumps_through(t) {
            0 => self.initial(),
            j => self.values[j - 1],
        }
    }

    pub fn variance_at(&self, t: f64) -> f64 {
        match self.jumps_through(t) {
            0 => 0.0,
            j => self.variance[j - 1],
        }
    }
}

/// Distinct event times with at-risk and event counts.
#[derive(Debug, Clone)]
struct RiskTable {
    n: usize,
    times: Vec<f64>,
    at_risk: Vec<f64>,
    events: Vec<f64>,
}

impl RiskTable {
    fn new(dataset: &SurvivalDataset) -> Self {
        let mut recs = dataset.records().to_vec();
        recs.sort_by(|a, b| a.time.total_cmp(&b.time));
        let n = recs.len();
        let mut table = RiskTable { n, times: vec![], at_risk: vec![], events: vec![] };
        let mut i = 0;
        while i < n {
            let t = recs[i].time;
            let mut j = i;
            let mut d = 0usize;
            while j < n && recs[j].time == t {
                d += recs[j].event as usize;
                j += 1;
            }
            if d > 0 {
                table.times.push(t);
                table.at_risk.push((n - i) as f64);
                table.events.push(d as f64);
            }
            i = j;
        }
        table
    }
}

pub fn nelson_aalen(dataset: &SurvivalDataset) -> StepEstimate {
    let rt = RiskTable::new(dataset);
    let (mut cum, mut var) = (0.0, 0.0);
    let mut values = Vec::with_capacity(rt.times.len());
    let mut variance = Vec::with_capacity(rt.times.len());
    for (&y, &d) in rt.at_risk.iter().zip(&rt.events) {
        cum += d / y;
        var += d / (y * y);
        values.push(cum);
        variance.push(var);
    }
    StepEstimate { kind: Estimator::NelsonAalen, jump_times: rt.times, values, variance }
}

/// Kaplan-Meier with the Greenwood variance.
pub fn kaplan_meier(dataset: &SurvivalDataset) -> StepEstimate {
    let rt = RiskTable::new(dataset);
    let (mut s, mut gw) = (1.0, 0.0);
    let mut values = Vec::with_capacity(rt.times.len());
    let mut variance = Vec::with_capacity(rt.times.len());
    for (&y, &d) in rt.at_risk.iter().zip(&rt.events) {
        s *= 1.0 - d / y;
        if y > d {
            gw += d / (y * (y - d));
        }
        values.push(s);
        variance.push(s * s * gw);
    }
    StepEstimate { kind: Estimator::KaplanMeier, jump_times: rt.times, values, variance }
}

/// The step estimate itself on `grid`, as a zero-width band.
pub fn estimate_band(estimate: &StepEstimate, grid: &[f64]) -> Band {
    let center: Vec<f64> = grid.iter().map(|&t| estimate.value_at(t)).collect();
    let (target, method) = match estimate.kind {
        Estimator::NelsonAalen => (Target::CumHaz, BandMethod::NelsonAalen),
        Estimator::KaplanMeier => (Target::Survival, BandMethod::KaplanMeier),
    };
    Band {
        target,
        method,
        grid: grid.to_vec(),
        lower: center.clone(),
        upper: center.clone(),
        center,
        level: 0.0,
        radius: 0.0,
    }
}

/// Two-sided standard normal quantile for a central `level` interval.
pub fn normal_two_sided(level: f64) -> f64 {
    Normal::standard().inverse_cdf(0.5 + level / 2.0)
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("level must lie in (0, 1), got {level}")))
    }
}

/// Pointwise normal intervals collated into a band: log-transformed for
/// Kaplan-Meier, plain for Nelson-Aalen.
///
/// The band lives on the grid points between the first and last jump of the
/// estimate; outside that range the intervals have zero width and carry no
/// information. If no grid point falls inside, the first jump time is used.
pub fn pointwise_intervals(estimate: &StepEstimate, level: f64, grid: &[f64]) -> Result<Band> {
    check_level(level)?;
    let (first, last) = match (estimate.jump_times.first(), estimate.jump_times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::NoEvents),
    };
    let mut grid: Vec<f64> = grid.iter().copied().filter(|&t| first <= t && t <= last).collect();
    if grid.is_empty() {
        grid.push(first);
    }
    let z = normal_two_sided(level);
    let mut center = Vec::with_capacity(grid.len());
    let mut lower = Vec::with_capacity(grid.len());
    let mut upper = Vec::with_capacity(grid.len());
    for &t in &grid {
        let v = estimate.value_at(t);
        let var = estimate.variance_at(t);
        let (lo, hi) = match estimate.kind {
            Estimator::NelsonAalen => {
                let h = z * var.sqrt();
                (v - h, v + h)
            }
            Estimator::KaplanMeier => {
                if v > 0.0 {
                    // se(log S) = sqrt(Greenwood) / S
                    let f = (z * var.sqrt() / v).exp();
                    (v / f, v * f)
                } else {
                    (0.0, 0.0)
                }
            }
        };
        center.push(v);
        lower.push(lo);
        upper.push(hi);
    }
    let target = match estimate.kind {
        Estimator::NelsonAalen => Target::CumHaz,
        Estimator::KaplanMeier => Target::Survival,
    };
    let mut band = Band { target, method: BandMethod::Pointwise, grid, center, lower, upper, level, radius: 0.0 };
    band.clamp();
    Ok(band)
}

/// Simulated quantile tables for the Hall-Wellner and equal-precision functionals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalTables {
    pub level: f64,
    /// `a_U` abscissae and `c(a_U)` quantiles of `sup_{u <= a_U} |B(u)|`.
    pub hw_range: Vec<f64>,
    pub hw_quantile: Vec<f64>,
    /// OU-time lengths and quantiles of the sup of the standardised bridge.
    pub ep_length: Vec<f64>,
    pub ep_quantile: Vec<f64>,
}

/// Broadie-Glasserman-Kou shift for a discretely monitored maximum.
const DISCRETE_MAX_SHIFT: f64 = 0.5826;

impl CriticalTables {
    pub const DEFAULT_PATHS: usize = 100_000;
    pub const DEFAULT_SEED: u64 = 0x5eed_b0b5;

    pub fn simulate(level: f64, n_paths: usize, seed: u64) -> Result<Self> {
        check_level(level)?;
        if n_paths == 0 {
            return Err(Error::InvalidParameter("need at least one path".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        // Hall-Wellner: bridge on [0, 1] with running maxima at 100 checkpoints.
        let steps = 2000usize;
        let checkpoints = 100usize;
        let dt = 1.0 / steps as f64;
        let hw_range: Vec<f64> = (1..=checkpoints).map(|j| j as f64 / checkpoints as f64).collect();
        let mut hw_sups: Vec<Vec<f64>> = (0..checkpoints).map(|_| Vec::with_capacity(n_paths)).collect();
        let mut walk = vec![0.0; steps + 1];
        let shift = DISCRETE_MAX_SHIFT * dt.sqrt();
        for _ in 0..n_paths {
            let mut w = 0.0;
            for x in walk.iter_mut().skip(1) {
                let z: f64 = StandardNormal.sample(&mut rng);
                w += dt.sqrt() * z;
                *x = w;
            }
            let end = walk[steps];
            let mut running: f64 = 0.0;
            let per = steps / checkpoints;
            for (c, sups) in hw_sups.iter_mut().enumerate() {
                for (i, w) in walk.iter().enumerate().take((c + 1) * per + 1).skip(c * per + 1) {
                    let u = i as f64 * dt;
                    running = running.max((w - u * end).abs());
                }
                sups.push(running + shift);
            }
        }
        let hw_quantile = hw_sups
            .into_iter()
            .map(|mut v| {
                v.sort_by(f64::total_cmp);
                upper_order_statistic(&v, level)
            })
            .collect();

        // Equal precision: stationary OU with unit variance, exact AR(1) steps.
        let ds = 0.002f64;
        let max_len = 8.0f64;
        let ou_steps = (max_len / ds).round() as usize;
        let ep_points = 160usize;
        let ep_length: Vec<f64> = (1..=ep_points).map(|j| max_len * j as f64 / ep_points as f64).collect();
        let per = ou_steps / ep_points;
        let rho = (-ds).exp();
        let innov = (1.0 - rho * rho).sqrt();
        let ou_shift = DISCRETE_MAX_SHIFT * (2.0 * ds).sqrt();
        let mut ep_sups: Vec<Vec<f64>> = (0..ep_points).map(|_| Vec::with_capacity(n_paths)).collect();
        for _ in 0..n_paths {
            let mut x: f64 = StandardNormal.sample(&mut rng);
            let mut running = x.abs();
            for sups in ep_sups.iter_mut() {
                for _ in 0..per {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    x = rho * x + innov * z;
                    running = running.max(x.abs());
                }
                sups.push(running + ou_shift);
            }
        }
        let ep_quantile = ep_sups
            .into_iter()
            .map(|mut v| {
                v.sort_by(f64::total_cmp);
                upper_order_statistic(&v, level)
            })
            .collect();

        Ok(Self { level, hw_range, hw_quantile, ep_length, ep_quantile })
    }

    /// Shared tables for `level` with the default seed and path count.
    pub fn cached(level: f64) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<CriticalTables>>>> = OnceLock::new();
        check_level(level)?;
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("critical table cache poisoned");
        if let Some(t) = guard.get(&level.to_bits()) {
            return Ok(t.clone());
        }
        let t = Arc::new(Self::simulate(level, Self::DEFAULT_PATHS, Self::DEFAULT_SEED)?);
        guard.insert(level.to_bits(), t.clone());
        Ok(t)
    }

    /// `c` with `P(sup_{u <= a_U} |B(u)| <= c) = level`.
    pub fn hall_wellner(&self, a_upper: f64) -> f64 {
        if a_upper <= 0.0 {
            return 0.0;
        }
        // sup over [0, a] scales like sqrt(a) for small a.
        let first = self.hw_range[0];
        if a_upper < first {
            return self.hw_quantile[0] * (a_upper / first).sqrt();
        }
        interpolate(&self.hw_range, &self.hw_quantile, a_upper.min(1.0))
    }

    /// `e` with `P(sup_{a_L <= u <= a_U} |B(u)| / sqrt(u (1 - u)) <= e) = level`.
    pub fn equal_precision(&self, a_lower: f64, a_upper: f64) -> f64 {
        let (lo, hi) = (a_lower.clamp(1e-12, 1.0 - 1e-12), a_upper.clamp(1e-12, 1.0 - 1e-12));
        let len = 0.5 * ((hi * (1.0 - lo)) / (lo * (1.0 - hi))).ln();
        if len <= 0.0 {
            // A single point: |N(0, 1)|.
            return normal_two_sided(self.level);
        }
        let first = self.ep_length[0];
        if len < first {
            let at0 = normal_two_sided(self.level);
            return at0 + (self.ep_quantile[0] - at0) * len / first;
        }
        interpolate(&self.ep_length, &self.ep_quantile, len.min(*self.ep_length.last().unwrap()))
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let j = xs.partition_point(|&v| v < x).clamp(1, xs.len() - 1);
    let (x0, x1) = (xs[j - 1], xs[j]);
    let w = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
    ys[j - 1] + w * (ys[j] - ys[j - 1])
}

/// Kaplan-Meier with the unscaled Greenwood sum, restricted to event times with finite variance.
struct BandInputs {
    n: f64,
    km: StepEstimate,
    /// Greenwood sum `sigma2` at each KM jump.
    sigma2: Vec<f64>,
    /// Index of the last jump with finite variance.
    last: usize,
}

fn band_inputs(dataset: &SurvivalDataset) -> Result<BandInputs> {
    let rt = RiskTable::new(dataset);
    if rt.times.is_empty() {
        return Err(Error::NoEvents);
    }
    let km = kaplan_meier(dataset);
    let mut sigma2 = Vec::with_capacity(rt.times.len());
    let mut acc = 0.0;
    let mut last = None;
    for (i, (&y, &d)) in rt.at_risk.iter().zip(&rt.events).enumerate() {
        if y > d {
            acc += d / (y * (y - d));
            last = Some(i);
        } else {
            acc = f64::INFINITY;
        }
        sigma2.push(acc);
    }
    Ok(BandInputs { n: rt.n as f64, km, sigma2, last: last.unwrap_or(0) })
}

impl BandInputs {
    /// Jump index in effect at `t` (clamped to the last finite one), or `None` before the first jump.
    fn index_at(&self, t: f64) -> Option<usize> {
        match self.km.jump_times.partition_point(|&s| s <= t) {
            0 => None,
            j => Some((j - 1).min(self.last)),
        }
    }

    fn has_finite_variance(&self) -> bool {
        self.sigma2[self.last].is_finite()
    }
}

pub fn hall_wellner_band(dataset: &SurvivalDataset, level: f64, grid: &[f64]) -> Result<Band> {
    hall_wellner_band_with(dataset, grid, &*CriticalTables::cached(level)?)
}

pub fn hall_wellner_band_with(dataset: &SurvivalDataset, grid: &[f64], tables: &CriticalTables) -> Result<Band> {
    let inp = band_inputs(dataset)?;
    let n = inp.n;
    let a_upper = if inp.has_finite_variance() {
        let s2 = inp.sigma2[inp.last];
        n * s2 / (1.0 + n * s2)
    } else {
        0.0
    };
    let c = tables.hall_wellner(a_upper);
    let mut center = Vec::with_capacity(grid.len());
    let mut lower = Vec::with_capacity(grid.len());
    let mut upper = Vec::with_capacity(grid.len());
    for &t in grid {
        let (s, s2) = match inp.index_at(t) {
            None => (1.0, 0.0),
            Some(i) => (inp.km.values[i], if inp.sigma2[i].is_finite() { inp.sigma2[i] } else { 0.0 }),
        };
        let half = c / n.sqrt() * (1.0 + n * s2) * s;
        center.push(s);
        lower.push(s - half);
        upper.push(s + half);
    }
    let mut band = Band {
        target: Target::Survival,
        method: BandMethod::HallWellner,
        grid: grid.to_vec(),
        center,
        lower,
        upper,
        level: tables.level,
        radius: 0.0,
    };
    band.clamp();
    Ok(band)
}

pub fn log_ep_band(dataset: &SurvivalDataset, level: f64, grid: &[f64]) -> Result<Band> {
    log_ep_band_with(dataset, grid, &*CriticalTables::cached(level)?)
}

/// Log-minus-log equal-precision band. Before the first event the band is
/// `[lower(t_L), 1]`, the smallest interval containing every nonincreasing
/// curve that passes through the band at the first event time `t_L`.
pub fn log_ep_band_with(dataset: &SurvivalDataset, grid: &[f64], tables: &CriticalTables) -> Result<Band> {
    let inp = band_inputs(dataset)?;
    let n = inp.n;
    let a = |s2: f64| n * s2 / (1.0 + n * s2);
    let e = if inp.has_finite_variance() && inp.sigma2[0] > 0.0 {
        tables.equal_precision(a(inp.sigma2[0]), a(inp.sigma2[inp.last]))
    } else {
        0.0
    };
    let envelope = |i: usize| -> (f64, f64, f64) {
        let s = inp.km.values[i];
        let s2 = inp.sigma2[i];
        if !(s > 0.0 && s < 1.0) || !s2.is_finite() || e == 0.0 {
            return (s, s, s);
        }
        let theta = (e * s2.sqrt() / s.ln()).exp();
        (s, s.powf(1.0 / theta), s.powf(theta))
    };
    let (_, first_lower, _) = envelope(0);
    let mut center = Vec::with_capacity(grid.len());
    let mut lower = Vec::with_capacity(grid.len());
    let mut upper = Vec::with_capacity(grid.len());
    for &t in grid {
        let (c, lo, hi) = match inp.index_at(t) {
            None if e == 0.0 => (1.0, 1.0, 1.0),
            None => (1.0, first_lower, 1.0),
            Some(i) => envelope(i),
        };
        center.push(c);
        lower.push(lo);
        upper.push(hi);
    }
    let mut band = Band {
        target: Target::Survival,
        method: BandMethod::LogEp,
        grid: grid.to_vec(),
        center,
        lower,
        upper,
        level: tables.level,
        radius: 0.0,
    };
    band.clamp();
    Ok(band)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(pairs: &[(f64, u8)]) -> SurvivalDataset {
        SurvivalDataset::from_pairs(pairs).unwrap()
    }

    #[test]
    fn nelson_aalen_examples() {
        let e = nelson_aalen(&ds(&[(0.5, 1)]));
        assert_eq!(e.jump_times, vec![0.5]);
        assert_eq!(e.values, vec![1.0]);
        assert_eq!(e.value_at(0.49), 0.0);

        let e = nelson_aalen(&ds(&[(0.3, 1), (0.6, 1)]));
        assert_eq!(e.values, vec![0.5, 1.5]);
        assert_eq!(e.variance, vec![0.25, 1.25]);

        let e = nelson_aalen(&ds(&[(0.3, 0), (0.6, 0)]));
        assert!(e.jump_times.is_empty());
        assert_eq!(e.value_at(1.0), 0.0);
    }

    #[test]
    fn kaplan_meier_examples() {
        let e = kaplan_meier(&ds(&[(0.5, 1)]));
        assert_eq!(e.value_at(0.4), 1.0);
        assert_eq!(e.value_at(0.5), 0.0);

        let e = kaplan_meier(&ds(&[(0.3, 1), (0.6, 0)]));
        assert_eq!(e.jump_times, vec![0.3]);
        assert_eq!(e.value_at(0.3), 0.5);
        assert_eq!(e.value_at(0.9), 0.5);
        // Greenwood: 0.25 * 1 / (2 * 1)
        assert_eq!(e.variance_at(0.5), 0.125);
    }

    #[test]
    fn ties_share_a_jump() {
        let e = nelson_aalen(&ds(&[(0.4, 1), (0.4, 1), (0.4, 0), (0.8, 1)]));
        assert_eq!(e.jump_times, vec![0.4, 0.8]);
        assert_eq!(e.values, vec![0.5, 1.5]);
    }

    #[test]
    fn z_value() {
        assert!((normal_two_sided(0.95) - 1.959964).abs() < 1e-6);
    }

    #[test]
    fn zero_variance_pointwise() {
        let e = StepEstimate {
            kind: Estimator::KaplanMeier,
            jump_times: vec![0.5],
            values: vec![0.5],
            variance: vec![0.0],
        };
        let b = pointwise_intervals(&e, 0.95, &[0.0, 0.6, 1.0]).unwrap();
        assert_eq!(b.grid, vec![0.5]);
        assert_eq!(b.lower, b.upper);
    }

    #[test]
    fn pointwise_band_is_restricted_to_observed_range() {
        let e = nelson_aalen(&ds(&[(0.3, 1), (0.6, 1), (0.9, 0)]));
        let b = pointwise_intervals(&e, 0.95, &[0.0, 0.2, 0.3, 0.5, 0.6, 0.8, 1.0]).unwrap();
        assert_eq!(b.grid, vec![0.3, 0.5, 0.6]);
        assert_eq!(b.center, vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0 + 0.5]);
        let none = nelson_aalen(&ds(&[(0.3, 0)]));
        assert!(matches!(pointwise_intervals(&none, 0.95, &[0.5]), Err(Error::NoEvents)));
    }

    #[test]
    fn no_events_is_an_error() {
        let d = ds(&[(0.3, 0), (0.6, 0)]);
        let tables = CriticalTables::simulate(0.95, 200, 1).unwrap();
        assert!(matches!(hall_wellner_band_with(&d, &[0.0, 1.0], &tables), Err(Error::NoEvents)));
        assert!(matches!(log_ep_band_with(&d, &[0.0, 1.0], &tables), Err(Error::NoEvents)));
    }

    #[test]
    fn degenerate_variance_collapses() {
        // The only event removes the whole risk set, so no finite variance is available.
        let d = ds(&[(0.5, 1)]);
        let tables = CriticalTables::simulate(0.95, 200, 1).unwrap();
        let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
        let hw = hall_wellner_band_with(&d, &grid, &tables).unwrap();
        assert_eq!(hw.lower, hw.upper);
        assert_eq!(hw.center, hw.upper);
        let ep = log_ep_band_with(&d, &grid, &tables).unwrap();
        assert_eq!(ep.lower, ep.upper);
    }

    #[test]
    fn interpolation_is_piecewise_linear() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [0.0, 10.0, 30.0];
        assert_eq!(interpolate(&xs, &ys, 0.5), 5.0);
        assert_eq!(interpolate(&xs, &ys, 1.5), 20.0);
        assert_eq!(interpolate(&xs, &ys, 2.0), 30.0);
    }
}
