use std::f64::consts::LN_2;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hazbands::hazard::{
    cumulative_hazard, m0, median_bvm_variance, median_survival, sample_time_changed_bm, simulate_limit_sup_quantile,
    sup_abs_quantile_from_u0, survival, true_hazard_eval, u0, u0_on_grid, CensoringModel, Hazard, HazardHistogram,
    LimitConfig, Median, TruthHazard, UNIFORM_CENSORING_CUTOFF,
};
use hazbands::Error;

const ADM: CensoringModel = CensoringModel::AdminOnly;
const UNIF: CensoringModel = CensoringModel::AdminPlusUniform;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn truth_curve_values() {
    assert!(close(survival(&TruthHazard::PiecewiseLinear, 1.0).unwrap(), 0.1054, 1e-4));
    assert!(close(survival(&TruthHazard::Smooth, 1.0).unwrap(), 0.3033, 1e-4));
    assert_eq!(survival(&TruthHazard::Smooth, 0.0).unwrap(), 1.0);
    assert_eq!(true_hazard_eval(&TruthHazard::PiecewiseLinear, 0.2).unwrap(), 3.0);
    assert!(close(true_hazard_eval(&TruthHazard::PiecewiseLinear, 0.5).unwrap(), 2.25, 1e-15));
    assert!(close(true_hazard_eval(&TruthHazard::Smooth, 0.0).unwrap(), 0.97075, 1e-12));
    assert!(matches!(true_hazard_eval(&TruthHazard::Smooth, 1.01), Err(Error::OutOfDomain(_))));
}

#[test]
fn smooth_cumulative_matches_quadrature() {
    // Composite Simpson with many panels as an independent check on the closed form.
    let n = 20_000;
    let h = 1.0 / n as f64;
    let f = |t: f64| TruthHazard::Smooth.hazard_at(t);
    let s: f64 = (0..n)
        .map(|i| {
            let a = i as f64 * h;
            h / 6.0 * (f(a) + 4.0 * f(a + h / 2.0) + f(a + h))
        })
        .sum();
    assert!(close(s, cumulative_hazard(&TruthHazard::Smooth, 1.0).unwrap(), 1e-12));
    assert!(close(s, 1.19325, 1e-5));
}

#[test]
fn median_examples() {
    assert!(close(median_survival(&TruthHazard::Constant(1.0)).time().unwrap(), LN_2, 1e-12));
    assert_eq!(median_survival(&TruthHazard::Constant(0.5)), Median::BeyondHorizon);
    assert!(close(median_survival(&TruthHazard::PiecewiseLinear).time().unwrap(), LN_2 / 3.0, 1e-12));
    let m = median_survival(&TruthHazard::Smooth).time().unwrap();
    assert!(close(TruthHazard::Smooth.cumulative_at(m), LN_2, 1e-12));
}

#[test]
fn at_risk_probability_examples() {
    assert!(close(m0(&TruthHazard::Constant(1.0), ADM, 0.5).unwrap(), (-0.5f64).exp(), 1e-15));
    assert!(close(m0(&TruthHazard::Constant(1.0), UNIF, 0.5).unwrap(), 0.5 * (-0.5f64).exp(), 1e-15));
    assert!(close(m0(&TruthHazard::Smooth, UNIF, 0.5).unwrap(), 0.2428, 1e-4));
    assert_eq!(m0(&TruthHazard::Smooth, UNIF, 1.0).unwrap(), 0.0);
    assert!(m0(&TruthHazard::Smooth, ADM, 1.5).is_err());
}

#[test]
fn u0_examples() {
    let c = TruthHazard::Constant(1.0);
    assert!(close(u0(&c, ADM, LN_2).unwrap(), 1.0, 1e-9));
    assert_eq!(u0(&TruthHazard::Smooth, UNIF, 0.0).unwrap(), 0.0);
    assert!(matches!(u0(&TruthHazard::Smooth, UNIF, 1.0), Err(Error::IntegrandSingular(_))));
    assert!(u0(&TruthHazard::Smooth, UNIF, UNIFORM_CENSORING_CUTOFF).unwrap().is_finite());
}

#[test]
fn u0_matches_independent_oracles() {
    // Under administrative censoring only, lambda / M0 = d/dt exp(Lambda).
    for truth in [TruthHazard::Smooth, TruthHazard::PiecewiseLinear] {
        let closed = truth.cumulative_at(1.0).exp() - 1.0;
        assert!(close(u0(&truth, ADM, 1.0).unwrap(), closed, 1e-8));
    }
    // Stratified Monte Carlo: one uniform point per stratum.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let strata = 1_000_000;
    let est: f64 = (0..strata)
        .map(|i| {
            let u = (i as f64 + rand::Rng::random::<f64>(&mut rng)) / strata as f64;
            TruthHazard::Smooth.hazard_at(u) / m0(&TruthHazard::Smooth, ADM, u).unwrap()
        })
        .sum::<f64>()
        / strata as f64;
    assert!(close(est, u0(&TruthHazard::Smooth, ADM, 1.0).unwrap(), 1e-4));
}

#[test]
fn median_bvm_variance_values() {
    assert!(close(median_bvm_variance(&TruthHazard::Constant(1.0), ADM).unwrap(), 1.0, 1e-8));
    // Under administrative censoring U0(m) = e^{ln 2} - 1 = 1 and f(m) = lambda(m) / 2.
    assert!(close(median_bvm_variance(&TruthHazard::PiecewiseLinear, ADM).unwrap(), 1.0 / 9.0, 1e-8));
    let m = median_survival(&TruthHazard::Smooth).time().unwrap();
    let expected = 1.0 / TruthHazard::Smooth.hazard_at(m).powi(2);
    assert!(close(median_bvm_variance(&TruthHazard::Smooth, ADM).unwrap(), expected, 1e-8));
    assert!(median_bvm_variance(&TruthHazard::Smooth, UNIF).unwrap() > expected);
    assert!(matches!(median_bvm_variance(&TruthHazard::Constant(0.5), ADM), Err(Error::NoFiniteMedian)));
}

#[test]
fn limit_process_variance_and_quantiles() {
    let grid = u0_on_grid(&TruthHazard::Constant(1.0), ADM, 64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let paths = 20_000;
    let mut path = Vec::new();
    let mut sum2 = 0.0;
    for _ in 0..paths {
        sample_time_changed_bm(&grid, &mut rng, &mut path);
        sum2 += path.last().unwrap().powi(2);
    }
    let var = sum2 / paths as f64;
    let target = std::f64::consts::E - 1.0;
    assert!((var - target).abs() < 3.0 * target * (2.0 / paths as f64).sqrt(), "var {var}");

    assert_eq!(sup_abs_quantile_from_u0(&[0.0; 16], 0.95, 1000, 1).unwrap(), 0.0);
    let cfg = LimitConfig { n_paths: 2000, grid_size: 256, ..LimitConfig::default() };
    let q50 = simulate_limit_sup_quantile(&TruthHazard::Smooth, ADM, &LimitConfig { level: 0.5, ..cfg }).unwrap();
    let q95 = simulate_limit_sup_quantile(&TruthHazard::Smooth, ADM, &cfg).unwrap();
    assert!(0.0 < q50 && q50 <= q95);
    assert!(simulate_limit_sup_quantile(&TruthHazard::Smooth, ADM, &LimitConfig { n_paths: 999, ..cfg }).is_err());
}

fn heights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..10.0, 1..30)
}

proptest! {
    #[test]
    fn cumulative_monotone_and_survival_decreasing(h in heights(), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let hist = HazardHistogram::new(h).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(cumulative_hazard(&hist, lo).unwrap() <= cumulative_hazard(&hist, hi).unwrap());
        prop_assert!(survival(&hist, lo).unwrap() >= survival(&hist, hi).unwrap());
        prop_assert_eq!(survival(&hist, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn cumulative_matches_riemann_sum(h in heights(), t in 0.0f64..=1.0) {
        let hist = HazardHistogram::new(h).unwrap();
        // 1e5 panels on [0, 1] refining the interval grid, plus the partial panel ending at t.
        let per = 100_000 / hist.heights().len();
        let dx = 1.0 / (per * hist.heights().len()) as f64;
        let full = (t / dx).floor() as usize;
        let mut riemann: f64 = (0..full).map(|i| hist.hazard_at((i as f64 + 0.5) * dx) * dx).sum();
        let rest = t - full as f64 * dx;
        if rest > 0.0 {
            riemann += hist.hazard_at(full as f64 * dx + rest / 2.0) * rest;
        }
        prop_assert!((riemann - cumulative_hazard(&hist, t).unwrap()).abs() <= 1e-6 * (1.0 + riemann));
    }

    #[test]
    fn histogram_median_is_exact(h in heights()) {
        let hist = HazardHistogram::new(h).unwrap();
        match median_survival(&hist) {
            Median::At(m) => {
                prop_assert!(m > 0.0 && m <= 1.0);
                prop_assert!((hist.cumulative_at(m) - LN_2).abs() <= 1e-12);
            }
            Median::BeyondHorizon => prop_assert!(hist.cumulative_at(1.0) < LN_2),
        }
    }

    #[test]
    fn m0_nonincreasing(a in 0.0f64..0.999, b in 0.0f64..0.999) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for cens in [ADM, UNIF] {
            for truth in [TruthHazard::Smooth, TruthHazard::PiecewiseLinear] {
                let (x, y) = (m0(&truth, cens, lo).unwrap(), m0(&truth, cens, hi).unwrap());
                prop_assert!(y <= x && x <= 1.0 && y > 0.0);
            }
        }
    }
}
