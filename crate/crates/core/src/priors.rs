//! Histogram priors on hazard heights.
//!
//! Independent variants draw every height from the same law. Dependent
//! variants are autoregressive: the first height has its own law and each
//! later height is drawn conditionally on its left neighbour so that
//!
//! ```text
//! E[l_k | l_{k-1}]   = l_{k-1}
//! Var[l_k | l_{k-1}] = (s * l_{k-1})^2
//! ```
//!
//! with `s = 1/sqrt(alpha)` for the Gamma chain and `s = sigma` otherwise.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::hazard::HazardHistogram;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum PriorSpec {
    /// Heights i.i.d. `Gamma(shape, rate)`.
    IndepGamma { shape: f64, rate: f64 },
    /// `l_1 ~ Gamma(shape0, rate0)`, `l_k | l_{k-1} ~ Gamma(alpha, alpha / l_{k-1})`.
    DepGamma { shape0: f64, rate0: f64, alpha: f64 },
    /// Heights i.i.d. `LN(mu0, sigma0^2)`.
    IndepLogNormal { mu0: f64, sigma0: f64 },
    /// `l_1 ~ LN(mu0, sigma0^2)`, `l_k | l_{k-1} ~ LN(log(l_{k-1}/sqrt(1+sigma^2)), log(1+sigma^2))`.
    DepLogNormal { mu0: f64, sigma0: f64, sigma: f64 },
    /// Heights i.i.d. `LL(mu0, theta0)`: `exp` of a Laplace with location `mu0` and rate `theta0`.
    IndepLogLaplace { mu0: f64, theta0: f64 },
    /// `l_1 ~ LL(mu0, theta0)`, `l_k | l_{k-1} ~ LL(log(l_{k-1} (g - sigma^2)/g), sqrt(g)/sigma)`.
    DepLogLaplace { mu0: f64, theta0: f64, sigma: f64 },
}

impl PriorSpec {
    pub const fn default_dep_gamma() -> Self {
        PriorSpec::DepGamma { shape0: 1.5, rate0: 1.0, alpha: 1.0 }
    }

    pub const fn default_indep_gamma() -> Self {
        PriorSpec::IndepGamma { shape: 1.5, rate: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")))
            }
        };
        match *self {
            PriorSpec::IndepGamma { shape, rate } => {
                positive("shape", shape)?;
                positive("rate", rate)
            }
            PriorSpec::DepGamma { shape0, rate0, alpha } => {
                positive("shape0", shape0)?;
                positive("rate0", rate0)?;
                positive("alpha", alpha)
            }
            PriorSpec::IndepLogNormal { mu0, sigma0 } => {
                finite("mu0", mu0)?;
                positive("sigma0", sigma0)
            }
            PriorSpec::DepLogNormal { mu0, sigma0, sigma } => {
                finite("mu0", mu0)?;
                positive("sigma0", sigma0)?;
                positive("sigma", sigma)
            }
            PriorSpec::IndepLogLaplace { mu0, theta0 } => {
                finite("mu0", mu0)?;
                log_laplace_theta(theta0)
            }
            PriorSpec::DepLogLaplace { mu0, theta0, sigma } => {
                finite("mu0", mu0)?;
                log_laplace_theta(theta0)?;
                positive("sigma", sigma)
            }
        }
    }

    pub fn is_dependent(&self) -> bool {
        matches!(self, PriorSpec::DepGamma { .. } | PriorSpec::DepLogNormal { .. } | PriorSpec::DepLogLaplace { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            PriorSpec::IndepGamma { .. } => "indep-gamma",
            PriorSpec::DepGamma { .. } => "dep-gamma",
            PriorSpec::IndepLogNormal { .. } => "indep-lognormal",
            PriorSpec::DepLogNormal { .. } => "dep-lognormal",
            PriorSpec::IndepLogLaplace { .. } => "indep-loglaplace",
            PriorSpec::DepLogLaplace { .. } => "dep-loglaplace",
        }
    }
}

fn log_laplace_theta(theta0: f64) -> Result<()> {
    if theta0.is_finite() && theta0 > 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("theta0 must exceed 2, got {theta0}")))
    }
}

/// For the dependent log-Laplace chain with conditional SD `sigma * l_{k-1}`:
/// returns `((g - sigma^2) / g, sqrt(g / sigma^2))` where
/// `g = 2 sigma^2 + 1 + sqrt(4 sigma^4 + 5 sigma^2 + 1)`.
pub fn log_laplace_link(sigma: f64) -> Result<(f64, f64)> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    let s2 = sigma * sigma;
    let g = 2.0 * s2 + 1.0 + (4.0 * s2 * s2 + 5.0 * s2 + 1.0).sqrt();
    Ok(((g - s2) / g, (g / s2).sqrt()))
}

/// A single law on `(0, inf)` used as a marginal or conditional factor.
#[derive(Debug, Clone, Copy)]
enum Law {
    Gamma { shape: f64, rate: f64 },
    LogNormal { mu: f64, sigma: f64 },
    LogLaplace { mu: f64, theta: f64 },
}

impl Law {
    fn ln_pdf(self, x: f64) -> f64 {
        match self {
            Law::Gamma { shape, rate } => shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x,
            Law::LogNormal { mu, sigma } => {
                let lx = x.ln();
                let z = (lx - mu) / sigma;
                -0.5 * z * z - lx - sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
            }
            Law::LogLaplace { mu, theta } => {
                let lx = x.ln();
                (theta / 2.0).ln() - theta * (lx - mu).abs() - lx
            }
        }
    }

    fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        let x = match self {
            Law::Gamma { shape, rate } => {
                Gamma::new(shape, 1.0 / rate).expect("gamma parameters validated").sample(rng)
            }
            Law::LogNormal { mu, sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                (mu + sigma * z).exp()
            }
            Law::LogLaplace { mu, theta } => {
                let e: f64 = Exp1.sample(rng);
                let y = if rng.random::<bool>() { mu + e / theta } else { mu - e / theta };
                y.exp()
            }
        };
        // Gamma draws with tiny shape can underflow to zero.
        x.max(f64::MIN_POSITIVE)
    }
}

/// Law of the first height (and of every height for independent priors).
fn initial_law(spec: &PriorSpec) -> Law {
    match *spec {
        PriorSpec::IndepGamma { shape, rate } => Law::Gamma { shape, rate },
        PriorSpec::DepGamma { shape0, rate0, .. } => Law::Gamma { shape: shape0, rate: rate0 },
        PriorSpec::IndepLogNormal { mu0, sigma0 } | PriorSpec::DepLogNormal { mu0, sigma0, .. } => {
            Law::LogNormal { mu: mu0, sigma: sigma0 }
        }
        PriorSpec::IndepLogLaplace { mu0, theta0 } | PriorSpec::DepLogLaplace { mu0, theta0, .. } => {
            Law::LogLaplace { mu: mu0, theta: theta0 }
        }
    }
}

/// Law of height `k >= 1` given its left neighbour.
fn conditional_law(spec: &PriorSpec, prev: f64) -> Law {
    match *spec {
        PriorSpec::DepGamma { alpha, .. } => Law::Gamma { shape: alpha, rate: alpha / prev },
        PriorSpec::DepLogNormal { sigma, .. } => {
            let v = (1.0 + sigma * sigma).ln();
            Law::LogNormal { mu: prev.ln() - 0.5 * v, sigma: v.sqrt() }
        }
        PriorSpec::DepLogLaplace { sigma, .. } => {
            let (shift, theta) = log_laplace_link(sigma).expect("sigma validated");
            Law::LogLaplace { mu: (prev * shift).ln(), theta }
        }
        _ => initial_law(spec),
    }
}

fn law_at(spec: &PriorSpec, heights: &[f64], k: usize) -> Law {
    if k == 0 || !spec.is_dependent() {
        initial_law(spec)
    } else {
        conditional_law(spec, heights[k - 1])
    }
}

/// Draws heights left to right.
pub fn sample_prior_with<R: Rng + ?Sized>(spec: &PriorSpec, k: usize, rng: &mut R) -> Result<HazardHistogram> {
    spec.validate()?;
    let mut heights = Vec::with_capacity(k);
    for j in 0..k {
        let law = law_at(spec, &heights, j);
        heights.push(law.sample(rng));
    }
    HazardHistogram::new(heights)
}

pub fn sample_prior(spec: &PriorSpec, k: usize, seed: u64) -> Result<HazardHistogram> {
    sample_prior_with(spec, k, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// One draw of `l_k` given `l_{k-1} = prev` under a dependent prior.
pub fn sample_conditional<R: Rng + ?Sized>(spec: &PriorSpec, prev: f64, rng: &mut R) -> f64 {
    conditional_law(spec, prev).sample(rng)
}

fn check_heights(heights: &[f64]) -> Result<()> {
    match heights.iter().position(|h| !(h.is_finite() && *h > 0.0)) {
        Some(i) => Err(Error::DomainError(format!("height {i} = {} is not positive", heights[i]))),
        None => Ok(()),
    }
}

/// Normalised log density of the height vector.
pub fn log_prior_density(spec: &PriorSpec, heights: &[f64]) -> Result<f64> {
    spec.validate()?;
    check_heights(heights)?;
    Ok((0..heights.len()).map(|k| law_at(spec, heights, k).ln_pdf(heights[k])).sum())
}

/// The terms of the log prior density that involve height `k`.
pub(crate) fn log_prior_local(spec: &PriorSpec, heights: &[f64], k: usize) -> f64 {
    let mut lp = law_at(spec, heights, k).ln_pdf(heights[k]);
    if spec.is_dependent() && k + 1 < heights.len() {
        lp += conditional_law(spec, heights[k]).ln_pdf(heights[k + 1]);
    }
    lp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::adaptive_simpson;

    #[test]
    fn exponential_density_at_one() {
        let spec = PriorSpec::IndepGamma { shape: 1.0, rate: 1.0 };
        let lp = log_prior_density(&spec, &[1.0, 1.0, 1.0]).unwrap();
        assert!((lp + 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_heights() {
        let spec = PriorSpec::default_dep_gamma();
        assert!(matches!(log_prior_density(&spec, &[1.0, 0.0]), Err(Error::DomainError(_))));
        assert!(matches!(log_prior_density(&spec, &[1.0, -2.0]), Err(Error::DomainError(_))));
    }

    #[test]
    fn link_values() {
        let (shift, rate) = log_laplace_link(1.0).unwrap();
        let g = 3.0 + 10f64.sqrt();
        assert!((g - 6.16228).abs() < 1e-5);
        assert!((rate - 2.48239).abs() < 1e-5);
        assert!((shift - 0.83772).abs() < 1e-5);
        assert!(log_laplace_link(0.0).is_err());
        assert!(log_laplace_link(-1.0).is_err());
    }

    #[test]
    fn dep_gamma_is_markov() {
        // Changing l_1 must not change the terms that involve only l_3 and l_4.
        let spec = PriorSpec::default_dep_gamma();
        let a = [1.0, 2.0, 0.7, 1.3];
        let b = [3.5, 2.0, 0.7, 1.3];
        let la = log_prior_density(&spec, &a).unwrap();
        let lb = log_prior_density(&spec, &b).unwrap();
        let head = |h: &[f64]| log_prior_density(&spec, &h[..2]).unwrap();
        assert!(((la - head(&a)) - (lb - head(&b))).abs() < 1e-12);
    }

    #[test]
    fn local_terms_capture_full_change() {
        let specs = [
            PriorSpec::default_dep_gamma(),
            PriorSpec::DepLogNormal { mu0: 0.0, sigma0: 1.0, sigma: 0.5 },
            PriorSpec::DepLogLaplace { mu0: 0.0, theta0: 3.0, sigma: 1.0 },
            PriorSpec::IndepLogNormal { mu0: 0.2, sigma0: 0.7 },
        ];
        let base = vec![1.0, 2.0, 0.7, 1.3];
        for spec in specs {
            for k in 0..base.len() {
                let mut alt = base.clone();
                alt[k] *= 1.7;
                let full = log_prior_density(&spec, &alt).unwrap() - log_prior_density(&spec, &base).unwrap();
                let local = log_prior_local(&spec, &alt, k) - log_prior_local(&spec, &base, k);
                assert!((full - local).abs() < 1e-12, "{spec:?} k={k}");
            }
        }
    }

    #[test]
    fn single_height_densities_normalise() {
        let specs = [
            PriorSpec::IndepGamma { shape: 1.5, rate: 1.0 },
            PriorSpec::default_dep_gamma(),
            PriorSpec::IndepLogNormal { mu0: 0.0, sigma0: 1.0 },
            PriorSpec::IndepLogLaplace { mu0: 0.0, theta0: 3.0 },
        ];
        for spec in specs {
            // Integrate on the log scale: int f(e^y) e^y dy over a wide range, split at y = 0
            // to respect the log-Laplace cusp.
            let g = |y: f64| (log_prior_density(&spec, &[y.exp()]).unwrap() + y).exp();
            let total = adaptive_simpson(&g, -40.0, 0.0, 1e-10) + adaptive_simpson(&g, 0.0, 40.0, 1e-10);
            assert!((total - 1.0).abs() < 1e-6, "{spec:?}: {total}");
        }
    }

    #[test]
    fn validation() {
        assert!(PriorSpec::IndepLogLaplace { mu0: 0.0, theta0: 2.0 }.validate().is_err());
        assert!(PriorSpec::IndepGamma { shape: 0.0, rate: 1.0 }.validate().is_err());
        assert!(PriorSpec::DepLogNormal { mu0: 0.0, sigma0: 1.0, sigma: -1.0 }.validate().is_err());
        assert!(PriorSpec::default_dep_gamma().validate().is_ok());
    }

    #[test]
    fn sampling_is_seeded() {
        let spec = PriorSpec::DepLogLaplace { mu0: 0.0, theta0: 3.0, sigma: 1.0 };
        let a = sample_prior(&spec, 8, 42).unwrap();
        let b = sample_prior(&spec, 8, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.heights().len(), 8);
    }
}
