//! Fixed-radius simultaneous credible bands from posterior draws.
//!
//! For a target functional (hazard, cumulative hazard or survival) every
//! draw is evaluated on a common grid. The band is centred at the pointwise
//! posterior mean; its radius is the smallest `r` such that a fraction
//! `level` of the draws lie within sup-distance `r` of the centre, taken as
//! the `ceil(level * N)`-th smallest sup-distance. The band is finally
//! clamped below by 0 and, for survival, above by 1.

use serde::{Deserialize, Serialize};

use crate::data::IntervalGrid;
use crate::error::{Error, Result};
use crate::hazard::{median_survival, Hazard, HazardHistogram, Median};
use crate::numeric::{trapezoid, upper_order_statistic};
use crate::sampler::PosteriorChain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Hazard,
    CumHaz,
    Survival,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Hazard => "hazard",
            Target::CumHaz => "cumhaz",
            Target::Survival => "survival",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandMethod {
    Credible,
    NelsonAalen,
    KaplanMeier,
    HallWellner,
    LogEp,
    Pointwise,
}

impl BandMethod {
    pub fn name(self) -> &'static str {
        match self {
            BandMethod::Credible => "credible",
            BandMethod::NelsonAalen => "nelson_aalen",
            BandMethod::KaplanMeier => "kaplan_meier",
            BandMethod::HallWellner => "hall_wellner",
            BandMethod::LogEp => "log_ep",
            BandMethod::Pointwise => "pointwise",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub target: Target,
    pub method: BandMethod,
    pub grid: Vec<f64>,
    pub center: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub level: f64,
    /// Half-width before clamping; 0 for bands without a common radius.
    pub radius: f64,
}

impl Band {
    /// Clamps below at 0 and, for survival, above at 1.
    pub fn clamp(&mut self) {
        let cap = if self.target == Target::Survival { 1.0 } else { f64::INFINITY };
        for v in self.lower.iter_mut().chain(self.upper.iter_mut()).chain(self.center.iter_mut()) {
            *v = v.clamp(0.0, cap);
        }
    }

    /// Scales the distance of each envelope from the centre by `factor`, then clamps.
    pub fn widened(&self, factor: f64) -> Band {
        let mut b = self.clone();
        for i in 0..b.grid.len() {
            b.lower[i] = b.center[i] - factor * (self.center[i] - self.lower[i]);
            b.upper[i] = b.center[i] + factor * (self.upper[i] - self.center[i]);
        }
        b.radius *= factor;
        b.clamp();
        b
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

/// 401 equispaced points on `[0, 1]` merged with the breakpoints of `grid`.
pub fn evaluation_grid(grid: &IntervalGrid) -> Vec<f64> {
    evaluation_grid_with(401, &grid.breakpoints())
}

pub fn evaluation_grid_with(points: usize, extra: &[f64]) -> Vec<f64> {
    let m = points.max(2);
    let mut g: Vec<f64> = (0..m).map(|i| i as f64 / (m - 1) as f64).collect();
    g.extend(extra.iter().copied().filter(|t| (0.0..=1.0).contains(t)));
    g.sort_by(f64::total_cmp);
    g.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    g
}

/// Evaluates the target functional of `h` on `grid` (assumed within `[0, 1]`).
pub fn curve_of<H: Hazard + ?Sized>(h: &H, target: Target, grid: &[f64]) -> Vec<f64> {
    grid.iter()
        .map(|&t| match target {
            Target::Hazard => h.hazard_at(t),
            Target::CumHaz => h.cumulative_at(t),
            Target::Survival => (-h.cumulative_at(t)).exp(),
        })
        .collect()
}

pub fn curve_of_draw(draw: &HazardHistogram, target: Target, grid: &[f64]) -> Result<Vec<f64>> {
    if let Some(t) = grid.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::OutOfDomain(*t));
    }
    Ok(curve_of(draw, target, grid))
}

/// The fixed-radius order statistic: `ceil(level * N)`-th smallest distance.
pub fn radius_from_distances(distances: &[f64], level: f64) -> f64 {
    let mut d = distances.to_vec();
    d.sort_by(f64::total_cmp);
    upper_order_statistic(&d, level)
}

pub const MIN_BAND_DRAWS: usize = 100;

pub fn credible_band(chain: &PosteriorChain, target: Target, grid: &[f64], level: f64) -> Result<Band> {
    credible_band_from_draws(&chain.draws, target, grid, level)
}

pub fn credible_band_from_draws(draws: &[HazardHistogram], target: Target, grid: &[f64], level: f64) -> Result<Band> {
    if draws.len() < MIN_BAND_DRAWS {
        return Err(Error::InsufficientDraws { needed: MIN_BAND_DRAWS, got: draws.len() });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!("level must lie in (0, 1), got {level}")));
    }
    let mut center = vec![0.0; grid.len()];
    let mut curve = Vec::with_capacity(grid.len());
    for d in draws {
        curve.clear();
        curve.extend(curve_of_draw(d, target, grid)?);
        for (c, v) in center.iter_mut().zip(&curve) {
            *c += v;
        }
    }
    let n = draws.len() as f64;
    center.iter_mut().for_each(|c| *c /= n);

    let distances: Vec<f64> = draws
        .iter()
        .map(|d| curve_of(d, target, grid).iter().zip(&center).fold(0.0f64, |m, (v, c)| m.max((v - c).abs())))
        .collect();
    let radius = radius_from_distances(&distances, level);

    let mut band = Band {
        target,
        method: BandMethod::Credible,
        grid: grid.to_vec(),
        lower: center.iter().map(|c| c - radius).collect(),
        upper: center.iter().map(|c| c + radius).collect(),
        center,
        level,
        radius,
    };
    band.clamp();
    Ok(band)
}

/// Posterior draws of the median survival time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianDraws {
    /// Finite medians in draw order.
    pub times: Vec<f64>,
    /// Draws whose median lies past the horizon.
    pub beyond_horizon: usize,
}

impl MedianDraws {
    pub fn mean(&self) -> Option<f64> {
        (!self.times.is_empty()).then(|| self.times.iter().sum::<f64>() / self.times.len() as f64)
    }

    pub fn variance(&self) -> Option<f64> {
        let n = self.times.len();
        if n < 2 {
            return None;
        }
        let m = self.mean()?;
        Some(self.times.iter().map(|t| (t - m).powi(2)).sum::<f64>() / (n - 1) as f64)
    }

    /// Empirical quantile by the `ceil(p n)` order statistic.
    pub fn quantile(&self, p: f64) -> Option<f64> {
        if self.times.is_empty() {
            return None;
        }
        let mut s = self.times.clone();
        s.sort_by(f64::total_cmp);
        Some(upper_order_statistic(&s, p))
    }
}

pub fn median_draws(chain: &PosteriorChain) -> MedianDraws {
    let mut out = MedianDraws { times: Vec::with_capacity(chain.len()), beyond_horizon: 0 };
    for d in &chain.draws {
        match median_survival(d) {
            Median::At(t) => out.times.push(t),
            Median::BeyondHorizon => out.beyond_horizon += 1,
        }
    }
    out
}

/// Whether `truth` lies inside the band at every grid point.
pub fn band_covers(band: &Band, truth: &[f64]) -> Result<bool> {
    if truth.len() != band.len() {
        return Err(Error::ShapeMismatch(format!("truth has {} points, band has {}", truth.len(), band.len())));
    }
    Ok(truth.iter().zip(band.lower.iter().zip(&band.upper)).all(|(v, (lo, hi))| lo <= v && v <= hi))
}

/// Trapezoidal area between the envelopes.
pub fn band_area(band: &Band) -> f64 {
    let width: Vec<f64> = band.upper.iter().zip(&band.lower).map(|(u, l)| u - l).collect();
    trapezoid(&band.grid, &width)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hazard::TruthHazard;

    fn flat_draws(level: f64, n: usize) -> Vec<HazardHistogram> {
        (0..n).map(|_| HazardHistogram::constant(level, 1).unwrap()).collect()
    }

    #[test]
    fn curve_examples() {
        let c1 = HazardHistogram::constant(1.0, 1).unwrap();
        assert_eq!(curve_of_draw(&c1, Target::CumHaz, &[0.0, 0.5, 1.0]).unwrap(), vec![0.0, 0.5, 1.0]);
        let s = curve_of_draw(&c1, Target::Survival, &[0.0, 1.0]).unwrap();
        assert_eq!(s[0], 1.0);
        assert!((s[1] - (-1f64).exp()).abs() < 1e-15);
        let pl = curve_of(&TruthHazard::PiecewiseLinear, Target::CumHaz, &[1.0]);
        assert!((pl[0] - 2.25).abs() < 1e-12);
        assert!(curve_of_draw(&c1, Target::CumHaz, &[1.5]).is_err());
    }

    #[test]
    fn identical_draws_give_zero_radius() {
        let grid = evaluation_grid(&IntervalGrid::new(1).unwrap());
        let b = credible_band_from_draws(&flat_draws(0.8, 200), Target::Survival, &grid, 0.95).unwrap();
        assert!(b.radius < 1e-12);
        assert!(b.center.iter().zip(&b.lower).all(|(c, l)| c - l < 1e-12));
        assert!(b.center.iter().zip(&b.upper).all(|(c, u)| u - c < 1e-12));
        assert!(band_area(&b) < 1e-12);
        assert!(band_covers(&b, &b.center.clone()).unwrap());
    }

    #[test]
    fn order_statistic_radius() {
        let d: Vec<f64> = (1..=10).rev().map(f64::from).collect();
        assert_eq!(radius_from_distances(&d, 0.9), 9.0);
    }

    #[test]
    fn too_few_draws() {
        let grid = [0.0, 1.0];
        assert!(matches!(
            credible_band_from_draws(&flat_draws(1.0, 99), Target::CumHaz, &grid, 0.95),
            Err(Error::InsufficientDraws { needed: 100, got: 99 })
        ));
    }

    #[test]
    fn coverage_and_area() {
        let grid = vec![0.0, 0.5, 1.0];
        let b = Band {
            target: Target::CumHaz,
            method: BandMethod::Credible,
            grid: grid.clone(),
            center: vec![1.0; 3],
            lower: vec![0.75; 3],
            upper: vec![1.25; 3],
            level: 0.95,
            radius: 0.25,
        };
        assert!((band_area(&b) - 0.5).abs() < 1e-15);
        assert!(band_covers(&b, &[1.0, 1.2, 0.8]).unwrap());
        assert!(!band_covers(&b, &[1.0, 1.3, 0.8]).unwrap());
        assert!(band_covers(&b, &[1.0]).is_err());
    }

    #[test]
    fn medians_of_unit_hazard() {
        use crate::data::IntervalSummary;
        use crate::priors::PriorSpec;
        use crate::sampler::ChainConfig;
        let chain = PosteriorChain {
            draws: flat_draws(1.0, 5),
            acceptance_rates: vec![1.0],
            config: ChainConfig::default(),
            prior: PriorSpec::default_dep_gamma(),
            summary: IntervalSummary::new(vec![0], vec![0.0]).unwrap(),
        };
        let m = median_draws(&chain);
        assert_eq!(m.beyond_horizon, 0);
        assert!(m.times.iter().all(|t| (t - std::f64::consts::LN_2).abs() < 1e-12));
    }

    #[test]
    fn grid_contains_breakpoints() {
        let g = evaluation_grid(&IntervalGrid::new(7).unwrap());
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 1.0);
        for j in 0..=7 {
            let b = j as f64 / 7.0;
            assert!(g.iter().any(|t| (t - b).abs() < 1e-12));
        }
        assert_eq!(g.len(), 401 + 6);
    }
}
