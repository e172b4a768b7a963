//! Hazard functions on `[0, 1]` and the curves derived from them.
//!
//! [`HazardHistogram`] is the piecewise-constant hazard used for posterior
//! draws; [`TruthHazard`] adds the two closed-form hazards of the simulation
//! study. Both implement [`Hazard`], which exposes exact cumulative hazards.
//!
//! The second half of the module computes the quantities that govern the
//! limiting behaviour of the posterior: the at-risk function
//! `M0(u) = Gbar(u) exp(-Lambda0(u))`, the time change `U0(t) = int_0^t lambda0/M0`,
//! the asymptotic variance of the median survival time, and quantiles of
//! `sup_t |W(U0(t))|` for a standard Brownian motion `W`.

use std::f64::consts::LN_2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::IntervalGrid;
use crate::error::{Error, Result};
use crate::numeric::{adaptive_simpson, bisect_increasing, upper_order_statistic};

/// A positive hazard rate on `[0, 1]` with an exact cumulative hazard.
pub trait Hazard {
    fn hazard_at(&self, t: f64) -> f64;

    /// `Lambda(t)` for `t` in `[0, 1]`; callers validate the domain.
    fn cumulative_at(&self, t: f64) -> f64;

    /// Points in `(0, 1)` where the hazard is not smooth.
    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Smallest `t` with `Lambda(t) = e`. Past the horizon the hazard is
    /// continued at its value at 1, so the result can exceed 1.
    fn inverse_cumulative(&self, e: f64) -> f64 {
        let total = self.cumulative_at(1.0);
        if e > total {
            return 1.0 + (e - total) / self.hazard_at(1.0);
        }
        bisect_increasing(|t| self.cumulative_at(t), e, 0.0, 1.0, 1e-13)
    }
}

fn check_domain(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::OutOfDomain(t))
    }
}

pub fn cumulative_hazard<H: Hazard + ?Sized>(h: &H, t: f64) -> Result<f64> {
    check_domain(t)?;
    Ok(h.cumulative_at(t))
}

pub fn survival<H: Hazard + ?Sized>(h: &H, t: f64) -> Result<f64> {
    Ok((-cumulative_hazard(h, t)?).exp())
}

/// Median survival time, or a marker that `Lambda(1) < ln 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Median {
    At(f64),
    BeyondHorizon,
}

impl Median {
    pub fn time(self) -> Option<f64> {
        match self {
            Median::At(t) => Some(t),
            Median::BeyondHorizon => None,
        }
    }
}

pub fn median_survival<H: Hazard + ?Sized>(h: &H) -> Median {
    if h.cumulative_at(1.0) < LN_2 {
        Median::BeyondHorizon
    } else {
        Median::At(h.inverse_cumulative(LN_2))
    }
}

/// Piecewise-constant hazard on an equispaced grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HazardHistogram {
    grid: IntervalGrid,
    heights: Vec<f64>,
}

impl HazardHistogram {
    pub fn new(heights: Vec<f64>) -> Result<Self> {
        let grid = IntervalGrid::new(heights.len())?;
        if let Some(h) = heights.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
            return Err(Error::DomainError(format!("histogram height {h} is not positive")));
        }
        Ok(Self { grid, heights })
    }

    pub fn constant(level: f64, k: usize) -> Result<Self> {
        Self::new(vec![level; k])
    }

    pub fn grid(&self) -> IntervalGrid {
        self.grid
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn into_heights(self) -> Vec<f64> {
        self.heights
    }

    /// Cumulative hazard at each breakpoint (`K + 1` values starting at 0).
    pub fn cumulative_at_breakpoints(&self) -> Vec<f64> {
        cumulative_at_breakpoints(&self.heights)
    }
}

pub(crate) fn cumulative_at_breakpoints(heights: &[f64]) -> Vec<f64> {
    let w = 1.0 / heights.len() as f64;
    let mut out = Vec::with_capacity(heights.len() + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for h in heights {
        acc += h * w;
        out.push(acc);
    }
    out
}

impl Hazard for HazardHistogram {
    fn hazard_at(&self, t: f64) -> f64 {
        self.heights[self.grid.index_of(t.clamp(0.0, 1.0))]
    }

    fn cumulative_at(&self, t: f64) -> f64 {
        let idx = self.grid.index_of(t);
        let w = self.grid.width();
        let full: f64 = self.heights[..idx].iter().map(|h| h * w).sum();
        full + self.heights[idx] * (t - self.grid.breakpoint(idx))
    }

    fn kinks(&self) -> Vec<f64> {
        (1..self.grid.len()).map(|j| self.grid.breakpoint(j)).collect()
    }

    fn inverse_cumulative(&self, e: f64) -> f64 {
        let w = self.grid.width();
        let mut acc = 0.0;
        for (k, h) in self.heights.iter().enumerate() {
            let next = acc + h * w;
            if e <= next {
                return self.grid.breakpoint(k) + (e - acc) / h;
            }
            acc = next;
        }
        1.0 + (e - acc) / self.heights[self.heights.len() - 1]
    }
}

/// The hazards used to generate synthetic data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TruthHazard {
    /// `6((t+0.05)^3 - 2(t+0.05)^2 + t + 0.05) + 0.7`.
    Smooth,
    /// 3 on `[0, 0.4]`, 1.5 on `[0.6, 1]`, linear in between.
    PiecewiseLinear,
    Histogram(HazardHistogram),
    Constant(f64),
}

const SMOOTH_SHIFT: f64 = 0.05;

fn smooth_poly_antiderivative(u: f64) -> f64 {
    // antiderivative of 6(u^3 - 2u^2 + u)
    6.0 * (u.powi(4) / 4.0 - 2.0 * u.powi(3) / 3.0 + u * u / 2.0)
}

impl Hazard for TruthHazard {
    fn hazard_at(&self, t: f64) -> f64 {
        match self {
            TruthHazard::Smooth => {
                let u = t + SMOOTH_SHIFT;
                6.0 * (u.powi(3) - 2.0 * u * u + u) + 0.7
            }
            TruthHazard::PiecewiseLinear => {
                if t <= 0.4 {
                    3.0
                } else if t >= 0.6 {
                    1.5
                } else {
                    3.0 - 7.5 * (t - 0.4)
                }
            }
            TruthHazard::Histogram(h) => h.hazard_at(t),
            TruthHazard::Constant(c) => *c,
        }
    }

    fn cumulative_at(&self, t: f64) -> f64 {
        match self {
            TruthHazard::Smooth => {
                smooth_poly_antiderivative(t + SMOOTH_SHIFT) - smooth_poly_antiderivative(SMOOTH_SHIFT) + 0.7 * t
            }
            TruthHazard::PiecewiseLinear => {
                if t <= 0.4 {
                    3.0 * t
                } else if t <= 0.6 {
                    let s = t - 0.4;
                    1.2 + 3.0 * s - 3.75 * s * s
                } else {
                    1.65 + 1.5 * (t - 0.6)
                }
            }
            TruthHazard::Histogram(h) => h.cumulative_at(t),
            TruthHazard::Constant(c) => c * t,
        }
    }

    fn kinks(&self) -> Vec<f64> {
        match self {
            TruthHazard::PiecewiseLinear => vec![0.4, 0.6],
            TruthHazard::Histogram(h) => h.kinks(),
            _ => Vec::new(),
        }
    }

    fn inverse_cumulative(&self, e: f64) -> f64 {
        match self {
            TruthHazard::Histogram(h) => h.inverse_cumulative(e),
            TruthHazard::Constant(c) => e / c,
            _ => {
                let total = self.cumulative_at(1.0);
                if e > total {
                    1.0 + (e - total) / self.hazard_at(1.0)
                } else {
                    bisect_increasing(|t| self.cumulative_at(t), e, 0.0, 1.0, 1e-13)
                }
            }
        }
    }
}

/// Exact evaluation of a truth hazard on `[0, 1]`.
pub fn true_hazard_eval(kind: &TruthHazard, t: f64) -> Result<f64> {
    check_domain(t)?;
    Ok(kind.hazard_at(t))
}

/// Censoring laws of the simulation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CensoringModel {
    /// Everyone still at risk at `t = 1` is censored.
    AdminOnly,
    /// `C ~ Uniform(0, 1)` plus administrative censoring at 1.
    AdminPlusUniform,
}

impl CensoringModel {
    /// `P(C > u)` for `u` in `[0, 1)`.
    pub fn survivor(self, u: f64) -> f64 {
        match self {
            CensoringModel::AdminOnly => 1.0,
            CensoringModel::AdminPlusUniform => (1.0 - u).max(0.0),
        }
    }
}

/// Cutoff below 1 used whenever `U0` would diverge under uniform censoring.
pub const UNIFORM_CENSORING_CUTOFF: f64 = 1.0 - 1e-6;

/// `M0(u) = Gbar(u) exp(-Lambda0(u))`, the probability of being at risk at `u`.
///
/// At `u = 1` the left limit is returned; under uniform censoring that is 0.
pub fn m0<H: Hazard + ?Sized>(truth: &H, cens: CensoringModel, u: f64) -> Result<f64> {
    check_domain(u)?;
    Ok(cens.survivor(u) * (-truth.cumulative_at(u)).exp())
}

/// `U0(t) = int_0^t lambda0(u) / M0(u) du`, by adaptive Simpson split at kinks.
pub fn u0<H: Hazard + ?Sized>(truth: &H, cens: CensoringModel, t: f64) -> Result<f64> {
    check_domain(t)?;
    if cens == CensoringModel::AdminPlusUniform && t > UNIFORM_CENSORING_CUTOFF {
        return Err(Error::IntegrandSingular(t));
    }
    let integrand = |u: f64| truth.hazard_at(u) / (cens.survivor(u) * (-truth.cumulative_at(u)).exp());
    let mut cuts = vec![0.0];
    cuts.extend(truth.kinks().into_iter().filter(|&k| k > 0.0 && k < t));
    cuts.push(t);
    let tol = 1e-8 / (cuts.len() - 1) as f64;
    Ok(cuts.windows(2).map(|w| adaptive_simpson(&integrand, w[0], w[1], tol)).sum())
}

/// Asymptotic variance of `sqrt(n)` times the posterior median survival error:
/// `U0(m0) / (4 f0(m0)^2)` with `f0 = lambda0 * S0`.
pub fn median_bvm_variance<H: Hazard + ?Sized>(truth: &H, cens: CensoringModel) -> Result<f64> {
    let m = median_survival(truth).time().ok_or(Error::NoFiniteMedian)?;
    let density = truth.hazard_at(m) * (-truth.cumulative_at(m)).exp();
    if density <= 0.0 {
        return Err(Error::DomainError("density vanishes at the median".into()));
    }
    Ok(u0(truth, cens, m)? / (4.0 * density * density))
}

/// Settings for simulating the limiting process `t -> W(U0(t))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitConfig {
    pub level: f64,
    pub n_paths: usize,
    pub grid_size: usize,
    pub seed: u64,
}

impl Default for LimitConfig {
    fn default() -> Self {
        Self { level: 0.95, n_paths: 10_000, grid_size: 2048, seed: 0 }
    }
}

/// `U0` on `grid_size` equispaced points of `[0, t_max]`, where `t_max` is 1
/// or the uniform-censoring cutoff.
pub fn u0_on_grid<H: Hazard + ?Sized>(truth: &H, cens: CensoringModel, grid_size: usize) -> Result<Vec<f64>> {
    let t_max = match cens {
        CensoringModel::AdminOnly => 1.0,
        CensoringModel::AdminPlusUniform => UNIFORM_CENSORING_CUTOFF,
    };
    let m = grid_size.max(2);
    let mut out = Vec::with_capacity(m);
    let mut acc = 0.0;
    out.push(0.0);
    let integrand = |u: f64| truth.hazard_at(u) / (cens.survivor(u) * (-truth.cumulative_at(u)).exp());
    let kinks = truth.kinks();
    for j in 1..m {
        let a = t_max * (j - 1) as f64 / (m - 1) as f64;
        let b = t_max * j as f64 / (m - 1) as f64;
        let mut cuts = vec![a];
        cuts.extend(kinks.iter().cloned().filter(|&k| k > a && k < b));
        cuts.push(b);
        for w in cuts.windows(2) {
            acc += adaptive_simpson(&integrand, w[0], w[1], 1e-8 / m as f64);
        }
        out.push(acc);
    }
    Ok(out)
}

/// One path of `W(U0(t_j))` given `U0` on a grid.
pub fn sample_time_changed_bm<R: rand::Rng + ?Sized>(u0_grid: &[f64], rng: &mut R, out: &mut Vec<f64>) {
    out.clear();
    let mut w = 0.0;
    let mut prev = 0.0;
    for &u in u0_grid {
        let var = (u - prev).max(0.0);
        if var > 0.0 {
            let z: f64 = StandardNormal.sample(rng);
            w += var.sqrt() * z;
        }
        prev = u;
        out.push(w);
    }
}

/// Empirical `level`-quantile of `max_j |W(U0(t_j))|`.
pub fn sup_abs_quantile_from_u0(u0_grid: &[f64], level: f64, n_paths: usize, seed: u64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!("level must lie in (0, 1), got {level}")));
    }
    if n_paths == 0 {
        return Err(Error::InvalidParameter("need at least one path".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut path = Vec::with_capacity(u0_grid.len());
    let mut sups: Vec<f64> = (0..n_paths)
        .map(|_| {
            sample_time_changed_bm(u0_grid, &mut rng, &mut path);
            path.iter().fold(0.0f64, |m, v| m.max(v.abs()))
        })
        .collect();
    sups.sort_by(f64::total_cmp);
    Ok(upper_order_statistic(&sups, level))
}

/// Quantile of `sup |G_{Lambda0}|` for the limiting process of the
/// centred cumulative hazard.
pub fn simulate_limit_sup_quantile<H: Hazard + ?Sized>(
    truth: &H,
    cens: CensoringModel,
    cfg: &LimitConfig,
) -> Result<f64> {
    if cfg.n_paths < 1000 {
        return Err(Error::InvalidParameter(format!("need at least 1000 paths, got {}", cfg.n_paths)));
    }
    let grid = u0_on_grid(truth, cens, cfg.grid_size)?;
    sup_abs_quantile_from_u0(&grid, cfg.level, cfg.n_paths, cfg.seed)
}
