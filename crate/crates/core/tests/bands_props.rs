use hazbands::bands::{
    band_area, band_covers, credible_band_from_draws, curve_of, evaluation_grid, evaluation_grid_with,
    radius_from_distances, Band, BandMethod, Target, MIN_BAND_DRAWS,
};
use hazbands::data::IntervalGrid;
use hazbands::hazard::HazardHistogram;
use hazbands::Error;
use proptest::prelude::*;

fn draws_strategy() -> impl Strategy<Value = Vec<HazardHistogram>> {
    (1usize..5).prop_flat_map(|k| {
        prop::collection::vec(prop::collection::vec(0.05f64..4.0, k), MIN_BAND_DRAWS..160)
            .prop_map(|hs| hs.into_iter().map(|h| HazardHistogram::new(h).unwrap()).collect())
    })
}

fn sup_distance(curve: &[f64], center: &[f64]) -> f64 {
    curve.iter().zip(center).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
}

fn flat_band(width: f64) -> Band {
    let grid = evaluation_grid_with(101, &[]);
    Band {
        target: Target::CumHaz,
        method: BandMethod::Credible,
        center: vec![1.0; grid.len()],
        lower: vec![1.0 - width / 2.0; grid.len()],
        upper: vec![1.0 + width / 2.0; grid.len()],
        grid,
        level: 0.95,
        radius: width / 2.0,
    }
}

#[test]
fn radius_is_the_ceiling_order_statistic() {
    let d: Vec<f64> = (1..=10).rev().map(f64::from).collect();
    assert_eq!(radius_from_distances(&d, 0.9), 9.0);
    assert_eq!(radius_from_distances(&d, 0.91), 10.0);
    assert_eq!(radius_from_distances(&d, 0.05), 1.0);
}

#[test]
fn evaluation_grid_contains_breakpoints() {
    let g = evaluation_grid(&IntervalGrid::new(7).unwrap());
    assert_eq!(g.len(), 401 + 6);
    for j in 1..7 {
        assert!(g.iter().any(|t| (t - j as f64 / 7.0).abs() < 1e-15));
    }
    assert!(g.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn too_few_draws_is_an_error() {
    let draws: Vec<_> = (0..99).map(|_| HazardHistogram::constant(1.0, 2).unwrap()).collect();
    let grid = evaluation_grid_with(11, &[]);
    assert!(matches!(
        credible_band_from_draws(&draws, Target::Survival, &grid, 0.95),
        Err(Error::InsufficientDraws { needed: 100, got: 99 })
    ));
}

#[test]
fn coverage_and_area_examples() {
    let b = flat_band(0.4);
    assert!((band_area(&b) - 0.4).abs() < 1e-12);
    assert!(band_covers(&b, &b.center).unwrap());
    let mut above = b.center.clone();
    above[37] = b.upper[37] + 1e-9;
    assert!(!band_covers(&b, &above).unwrap());
    assert!(band_covers(&b, &b.upper).unwrap());
    assert!(band_covers(&b, &[1.0; 3]).is_err());
    assert_eq!(band_area(&flat_band(0.0)), 0.0);
}

#[test]
fn widening_scales_the_half_widths() {
    let b = flat_band(0.4).widened(1.5);
    assert!((band_area(&b) - 0.6).abs() < 1e-12);
    assert!((b.radius - 0.3).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn radius_is_minimal(draws in draws_strategy(), level in 0.5f64..0.99) {
        let grid = evaluation_grid_with(41, &[]);
        let band = credible_band_from_draws(&draws, Target::CumHaz, &grid, level).unwrap();
        let d: Vec<f64> = draws.iter().map(|h| sup_distance(&curve_of(h, Target::CumHaz, &grid), &band.center)).collect();
        let needed = (level * draws.len() as f64).ceil() as usize;
        let inside = d.iter().filter(|&&x| x <= band.radius).count();
        prop_assert!(inside >= needed);
        let smaller = d.iter().copied().filter(|&x| x < band.radius).fold(f64::NEG_INFINITY, f64::max);
        if smaller.is_finite() {
            prop_assert!(d.iter().filter(|&&x| x <= smaller).count() < needed);
        }
    }

    #[test]
    fn clamping_respects_bounds_and_never_adds_area(draws in draws_strategy(), level in 0.5f64..0.99) {
        let grid = evaluation_grid_with(41, &[]);
        for target in [Target::Survival, Target::CumHaz] {
            let band = credible_band_from_draws(&draws, target, &grid, level).unwrap();
            let raw_area = 2.0 * band.radius;
            prop_assert!(band_area(&band) <= raw_area + 1e-12);
            prop_assert!(band.lower.iter().all(|&v| v >= 0.0));
            for i in 0..band.len() {
                prop_assert!(band.lower[i] <= band.center[i] && band.center[i] <= band.upper[i]);
            }
            if target == Target::Survival {
                prop_assert!(band.upper.iter().all(|&v| v <= 1.0));
                prop_assert!(band.center.windows(2).all(|w| w[1] <= w[0] + 1e-15));
            } else {
                prop_assert!(band.center.windows(2).all(|w| w[1] + 1e-15 >= w[0]));
            }
        }
    }

    #[test]
    fn unclamped_width_is_twice_the_radius(draws in draws_strategy()) {
        let grid = evaluation_grid_with(41, &[]);
        let band = credible_band_from_draws(&draws, Target::CumHaz, &grid, 0.9).unwrap();
        for i in 0..band.len() {
            if band.center[i] - band.radius >= 0.0 {
                prop_assert!((band.upper[i] - band.lower[i] - 2.0 * band.radius).abs() < 1e-12);
            }
        }
    }
}
