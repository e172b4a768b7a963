use hazbands::haar::{
    detail_index, ell_infty_distance, fast_to_heights, fast_to_wavelet, level_of, to_heights, to_wavelet,
    HaarTransform, MAX_LOG2_BINS,
};
use hazbands::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn heights(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, len)
}

fn dyadic_heights() -> impl Strategy<Value = Vec<f64>> {
    (0u32..7).prop_flat_map(|b| heights(1 << (b + 1)))
}

/// Levelwise distance by explicit enumeration of `(l, k)`.
fn brute_force_distance(f: &[f64], g: &[f64]) -> f64 {
    let levels = f.len().trailing_zeros();
    let mut total = (f[0] - g[0]).abs();
    for l in 0..levels {
        let mut m = 0.0f64;
        for k in 0..(1usize << l) {
            m = m.max((f[detail_index(l, k)] - g[detail_index(l, k)]).abs());
        }
        total += (2f64).sqrt().powi(l as i32) * m;
    }
    total
}

#[test]
fn matrix_is_scaled_orthogonal() {
    for level in 0..=3 {
        let w = HaarTransform::build(level).unwrap();
        let n = w.size();
        let scale = 1.0 / n as f64;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|c| w.entry(i, c) * w.entry(j, c)).sum();
                let want = if i == j { scale } else { 0.0 };
                assert!((dot - want).abs() < 1e-12, "L={level} ({i},{j}): {dot}");
            }
        }
    }
}

#[test]
fn worked_examples() {
    let w = HaarTransform::build(0).unwrap();
    assert_eq!([w.entry(0, 0), w.entry(0, 1), w.entry(1, 0), w.entry(1, 1)], [0.5, 0.5, 0.5, -0.5]);
    assert_eq!(to_wavelet(&[1.0, -1.0]).unwrap(), vec![0.0, 1.0]);
    let c = to_wavelet(&[2.5; 8]).unwrap();
    assert!((c[0] - 2.5).abs() < 1e-14);
    assert!(c[1..].iter().all(|x| x.abs() < 1e-14));
    assert_eq!(level_of(0), None);
    assert_eq!(level_of(detail_index(3, 5)), Some(3));
}

#[test]
fn bad_shapes_and_sizes_are_rejected() {
    assert!(matches!(to_wavelet(&[1.0, 2.0, 3.0]), Err(Error::BadShape(3))));
    assert!(matches!(to_heights(&[]), Err(Error::BadShape(0))));
    assert!(matches!(HaarTransform::build(MAX_LOG2_BINS), Err(Error::TooLarge(_))));
    assert!(matches!(ell_infty_distance(&[1.0, 2.0], &[1.0; 4]), Err(Error::ShapeMismatch(_))));
}

#[test]
fn single_coefficient_difference_is_weighted_by_level() {
    let f = vec![0.0; 32];
    for l in 0..5u32 {
        let mut g = f.clone();
        g[detail_index(l, (1 << l) - 1)] = 0.3;
        let d = ell_infty_distance(&f, &g).unwrap();
        assert!((d - 2f64.powf(l as f64 / 2.0) * 0.3).abs() < 1e-14);
    }
}

#[test]
fn fast_and_dense_paths_agree_at_two_to_the_eleven() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let h: Vec<f64> = (0..1 << 11).map(|_| rng.random_range(-3.0..3.0)).collect();
    let dense = HaarTransform::build(10).unwrap();
    let a = dense.apply(&h).unwrap();
    let b = fast_to_wavelet(&h).unwrap();
    let c = to_wavelet(&h).unwrap();
    for i in 0..h.len() {
        assert!((a[i] - b[i]).abs() < 1e-12);
        assert!((a[i] - c[i]).abs() < 1e-12);
    }
    let back = dense.invert(&a).unwrap();
    let fast_back = fast_to_heights(&a).unwrap();
    for i in 0..h.len() {
        assert!((back[i] - h[i]).abs() < 1e-12);
        assert!((fast_back[i] - h[i]).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn round_trip_is_identity(h in dyadic_heights()) {
        let back = to_heights(&to_wavelet(&h).unwrap()).unwrap();
        for (a, b) in h.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn parseval(h in dyadic_heights()) {
        let c = to_wavelet(&h).unwrap();
        let lhs = c.iter().map(|x| x * x).sum::<f64>() * h.len() as f64;
        let rhs = h.iter().map(|x| x * x).sum::<f64>();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1.0));
    }

    #[test]
    fn distance_matches_brute_force(f in heights(16), g in heights(16)) {
        let d = ell_infty_distance(&f, &g).unwrap();
        prop_assert!((d - brute_force_distance(&f, &g)).abs() < 1e-12);
    }

    #[test]
    fn distance_dominates_sup_norm((f, g) in (0u32..6).prop_flat_map(|b| (heights(2 << b), heights(2 << b)))) {
        let d = ell_infty_distance(&to_wavelet(&f).unwrap(), &to_wavelet(&g).unwrap()).unwrap();
        let sup = f.iter().zip(&g).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        prop_assert!(sup <= d + 1e-10);
        prop_assert_eq!(ell_infty_distance(&f, &f).unwrap(), 0.0);
    }
}
