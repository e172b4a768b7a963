//! Haar coefficients of dyadic histograms and the multiscale sup-type metric.
//!
//! A histogram with `2^(L+1)` bins maps to `2^(L+1)` coefficients: the
//! scaling coefficient (index 0, the mean height) followed by the detail
//! coefficients `(l, k)` for `l = 0..=L`, `k = 0..2^l`, in lexicographic
//! order. The transform matrix `W` has rows
//!
//! ```text
//! W[scaling, j] = 2^-(L+1)
//! W[(l,k), j]   = 2^(-(L+1) + l/2) * (1{bin j in left half of I_lk} - 1{bin j in right half})
//! ```
//!
//! so `2^((L+1)/2) W` is orthogonal and `heights = 2^(L+1) W^T coeffs`.

use crate::error::{Error, Result};

/// Largest supported histogram is `2^MAX_LOG2_BINS` bins.
pub const MAX_LOG2_BINS: u32 = 20;
/// Above this many bins [`to_wavelet`] uses the fast pyramid instead of the matrix.
pub const DENSE_LIMIT: usize = 1 << 10;

#[derive(Debug, Clone, PartialEq)]
pub struct HaarTransform {
    level: u32,
    n: usize,
    /// Row-major `n x n`.
    matrix: Vec<f64>,
}

fn log2_exact(n: usize) -> Result<u32> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::BadShape(n));
    }
    Ok(n.trailing_zeros())
}

/// Coefficient index of detail `(l, k)`.
#[inline]
pub fn detail_index(l: u32, k: usize) -> usize {
    (1usize << l) + k
}

/// Level of coefficient `i` (`None` for the scaling coefficient).
#[inline]
pub fn level_of(i: usize) -> Option<u32> {
    (i > 0).then(|| usize::BITS - 1 - i.leading_zeros())
}

impl HaarTransform {
    /// Dense matrix for `2^(L+1)` bins.
    pub fn build(level: u32) -> Result<Self> {
        if level + 1 > MAX_LOG2_BINS {
            return Err(Error::TooLarge(level + 1));
        }
        let bins_log2 = level + 1;
        let n = 1usize << bins_log2;
        let mut matrix = vec![0.0; n * n];
        let base = 2f64.powi(-(bins_log2 as i32));
        matrix[..n].iter_mut().for_each(|w| *w = base);
        for l in 0..=level {
            let scale = base * 2f64.powf(l as f64 / 2.0);
            // I_lk covers 2^(L+1-l) bins; each half covers 2^(L-l).
            let half = 1usize << (level - l);
            for k in 0..(1usize << l) {
                let row = detail_index(l, k);
                let start = 2 * k * half;
                for j in start..start + half {
                    matrix[row * n + j] = scale;
                }
                for j in start + half..start + 2 * half {
                    matrix[row * n + j] = -scale;
                }
            }
        }
        Ok(Self { level, n, matrix })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.matrix[row * self.n + col]
    }

    pub fn apply(&self, heights: &[f64]) -> Result<Vec<f64>> {
        self.check_len(heights.len())?;
        Ok(self.matrix.chunks(self.n).map(|row| row.iter().zip(heights).map(|(w, h)| w * h).sum()).collect())
    }

    /// `heights = 2^(L+1) W^T coeffs`.
    pub fn invert(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        self.check_len(coeffs.len())?;
        let mut out = vec![0.0; self.n];
        for (row, c) in self.matrix.chunks(self.n).zip(coeffs) {
            for (o, w) in out.iter_mut().zip(row) {
                *o += w * c;
            }
        }
        let scale = self.n as f64;
        out.iter_mut().for_each(|o| *o *= scale);
        Ok(out)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::ShapeMismatch(format!("expected {} values, got {len}", self.n)));
        }
        Ok(())
    }
}

/// Level `L` of a histogram with `len` bins (`len = 2^(L+1)`, `len >= 2`).
fn level_for_len(len: usize) -> Result<u32> {
    let b = log2_exact(len)?;
    if b == 0 {
        return Err(Error::BadShape(len));
    }
    if b > MAX_LOG2_BINS {
        return Err(Error::TooLarge(b));
    }
    Ok(b - 1)
}

/// `O(n)` pyramid equivalent to [`HaarTransform::apply`].
pub fn fast_to_wavelet(heights: &[f64]) -> Result<Vec<f64>> {
    let level = level_for_len(heights.len())?;
    let n = heights.len();
    let base = 1.0 / n as f64;
    let mut out = vec![0.0; n];
    // sums[j] holds the total height over dyadic blocks at the current resolution.
    let mut sums = heights.to_vec();
    for l in (0..=level).rev() {
        let scale = base * 2f64.powf(l as f64 / 2.0);
        let blocks = 1usize << l;
        for k in 0..blocks {
            out[detail_index(l, k)] = scale * (sums[2 * k] - sums[2 * k + 1]);
        }
        for k in 0..blocks {
            sums[k] = sums[2 * k] + sums[2 * k + 1];
        }
        sums.truncate(blocks);
    }
    out[0] = base * sums[0];
    Ok(out)
}

/// Inverse of [`fast_to_wavelet`].
pub fn fast_to_heights(coeffs: &[f64]) -> Result<Vec<f64>> {
    let level = level_for_len(coeffs.len())?;
    let mut vals = vec![coeffs[0]];
    for l in 0..=level {
        let amp = 2f64.powf(l as f64 / 2.0);
        let mut next = Vec::with_capacity(vals.len() * 2);
        for (k, v) in vals.iter().enumerate() {
            let d = amp * coeffs[detail_index(l, k)];
            next.push(v + d);
            next.push(v - d);
        }
        vals = next;
    }
    Ok(vals)
}

/// Heights to coefficients; dense matrix up to [`DENSE_LIMIT`] bins, pyramid above.
pub fn to_wavelet(heights: &[f64]) -> Result<Vec<f64>> {
    let level = level_for_len(heights.len())?;
    if heights.len() > DENSE_LIMIT {
        fast_to_wavelet(heights)
    } else {
        HaarTransform::build(level)?.apply(heights)
    }
}

pub fn to_heights(coeffs: &[f64]) -> Result<Vec<f64>> {
    let level = level_for_len(coeffs.len())?;
    if coeffs.len() > DENSE_LIMIT {
        fast_to_heights(coeffs)
    } else {
        HaarTransform::build(level)?.invert(coeffs)
    }
}

/// `|f_s - g_s| + sum_l 2^(l/2) max_k |f_lk - g_lk|` (scaling coefficient weighted 1).
pub fn ell_infty_distance(f: &[f64], g: &[f64]) -> Result<f64> {
    if f.len() != g.len() {
        return Err(Error::ShapeMismatch(format!("{} vs {} coefficients", f.len(), g.len())));
    }
    let level = level_for_len(f.len())?;
    let mut total = (f[0] - g[0]).abs();
    for l in 0..=level {
        let start = 1usize << l;
        let m = f[start..2 * start].iter().zip(&g[start..2 * start]).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        total += 2f64.powf(l as f64 / 2.0) * m;
    }
    Ok(total)
}
