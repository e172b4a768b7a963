#![allow(dead_code)]

use hazbands::data::IntervalSummary;
use hazbands::priors::{log_prior_density, PriorSpec};
use hazbands::sampler::log_likelihood;

pub fn summary(events: &[u64], exposure: &[f64]) -> IntervalSummary {
    IntervalSummary::new(events.to_vec(), exposure.to_vec()).unwrap()
}

/// Posterior means of the heights by tensor-product quadrature on the log scale.
/// Cost is `nodes^K`; intended for `K <= 3`.
pub fn quadrature_means(prior: &PriorSpec, s: &IntervalSummary, nodes: usize, lo: f64, hi: f64) -> Vec<f64> {
    quadrature_moments(prior, s, nodes, lo, hi).0
}

/// Posterior means and variances of the heights; see [`quadrature_means`].
pub fn quadrature_moments(
    prior: &PriorSpec,
    s: &IntervalSummary,
    nodes: usize,
    lo: f64,
    hi: f64,
) -> (Vec<f64>, Vec<f64>) {
    let k = s.len();
    let (ylo, yhi) = (lo.ln(), hi.ln());
    let step = (yhi - ylo) / (nodes - 1) as f64;
    let ys: Vec<f64> = (0..nodes).map(|i| ylo + step * i as f64).collect();
    let total = nodes.pow(k as u32);
    let mut logs = Vec::with_capacity(total);
    let mut h = vec![0.0; k];
    for idx in 0..total {
        let mut r = idx;
        let mut jac = 0.0;
        for slot in h.iter_mut() {
            let y = ys[r % nodes];
            r /= nodes;
            *slot = y.exp();
            jac += y;
        }
        logs.push(log_likelihood(&h, s).unwrap() + log_prior_density(prior, &h).unwrap() + jac);
    }
    let mx = logs.iter().cloned().fold(f64::MIN, f64::max);
    let mut z = 0.0;
    let mut means = vec![0.0; k];
    let mut squares = vec![0.0; k];
    for (idx, l) in logs.iter().enumerate() {
        let w = (l - mx).exp();
        z += w;
        let mut r = idx;
        for (m, sq) in means.iter_mut().zip(squares.iter_mut()) {
            let x = ys[r % nodes].exp();
            *m += w * x;
            *sq += w * x * x;
            r /= nodes;
        }
    }
    let means: Vec<f64> = means.into_iter().map(|m| m / z).collect();
    let vars = squares.into_iter().zip(&means).map(|(sq, m)| sq / z - m * m).collect();
    (means, vars)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
