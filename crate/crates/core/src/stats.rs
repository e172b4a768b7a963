//! Goodness-of-fit statistics used by the diagnostics.

use statrs::distribution::{ContinuousCDF, Normal};

/// One-sample Kolmogorov-Smirnov statistic `sup |F_n - F|`.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// Asymptotic KS critical value `c(alpha) / sqrt(n)` with `c = sqrt(-ln(alpha/2) / 2)`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Anderson-Darling normality test with mean and variance estimated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AndersonDarling {
    /// `A^2`.
    pub statistic: f64,
    /// Small-sample adjusted `A^2 (1 + 0.75/n + 2.25/n^2)`.
    pub adjusted: f64,
}

impl AndersonDarling {
    /// Critical value of the adjusted statistic at level 0.01.
    pub const CRITICAL_1PCT: f64 = 1.035;

    pub fn passes_at_1pct(&self) -> bool {
        self.adjusted < Self::CRITICAL_1PCT
    }
}

pub fn anderson_darling_normal(sample: &[f64]) -> AndersonDarling {
    let n = sample.len();
    assert!(n >= 8, "Anderson-Darling needs at least 8 observations");
    let nf = n as f64;
    let mean = sample.iter().sum::<f64>() / nf;
    let sd = (sample.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt();
    let mut z: Vec<f64> = sample.iter().map(|x| (x - mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    let phi = Normal::standard();
    let clamp = |p: f64| p.clamp(1e-300, 1.0 - 1e-16);
    let s: f64 = (0..n)
        .map(|i| {
            let a = clamp(phi.cdf(z[i])).ln();
            let b = clamp(1.0 - phi.cdf(z[n - 1 - i])).ln();
            (2 * i + 1) as f64 * (a + b)
        })
        .sum();
    let statistic = -nf - s / nf;
    AndersonDarling { statistic, adjusted: statistic * (1.0 + 0.75 / nf + 2.25 / (nf * nf)) }
}

/// Sample mean and unbiased variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v)
}
