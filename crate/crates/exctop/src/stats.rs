//! Order-independent moment accumulation.
//!
//! Per-replicate functionals are integers (configuration counts, flip
//! counts, pixel counts) times a scale shared by all replicates, so sums
//! and sums of squares are kept as exact integers. Aggregates are then
//! bit-identical regardless of replicate order or thread count.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IntMoments {
    pub n: u64,
    pub sum: i128,
    pub sum_sq: i128,
}

impl IntMoments {
    pub fn push(&mut self, x: i64) {
        self.n += 1;
        self.sum += x as i128;
        self.sum_sq += (x as i128) * (x as i128);
    }

    pub fn merge(&mut self, other: &Self) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    /// Mean, sample standard deviation and standard error of `scale * x`.
    pub fn summarize(&self, scale: f64) -> Moments {
        let n = self.n;
        if n == 0 {
            return Moments::default();
        }
        let mean = self.sum as f64 / n as f64 * scale;
        let sd = if n < 2 {
            0.0
        } else {
            // exact: n * sum_sq - sum^2 >= 0
            let num = n as i128 * self.sum_sq - self.sum * self.sum;
            (num as f64 / (n as f64 * (n - 1) as f64)).sqrt() * scale.abs()
        };
        Moments {
            n,
            mean,
            sd,
            se: sd / (n as f64).sqrt(),
        }
    }
}

impl FromIterator<i64> for IntMoments {
    fn from_iter<I: IntoIterator<Item = i64>>(iter: I) -> Self {
        let mut m = Self::default();
        for x in iter {
            m.push(x);
        }
        m
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    pub sd: f64,
    pub se: f64,
}

/// Sentinel for a deviation measured against a zero standard error.
pub const Z_UNBOUNDED: f64 = f64::MAX;

/// `(mean - predicted) / se`. With `se == 0` the score is 0 when the
/// deviation is below `1e-9` (relative to `max(1, |predicted|)`) and
/// `±Z_UNBOUNDED` otherwise, so scores stay finite.
pub fn z_score(mean: f64, predicted: f64, se: f64) -> f64 {
    let diff = mean - predicted;
    if se > 0.0 {
        diff / se
    } else if diff.abs() <= 1e-9 * predicted.abs().max(1.0) {
        0.0
    } else {
        Z_UNBOUNDED.copysign(diff)
    }
}

/// Least-squares slope of `y` against `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_match_two_pass_formula() {
        let xs = [3i64, -1, 4, 1, -5, 9, 2, 6];
        let m: IntMoments = xs.iter().copied().collect();
        let s = m.summarize(0.5);
        let vals: Vec<f64> = xs.iter().map(|&x| x as f64 * 0.5).collect();
        let mean = vals.iter().sum::<f64>() / 8.0;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 7.0;
        assert!((s.mean - mean).abs() < 1e-15);
        assert!((s.sd - var.sqrt()).abs() < 1e-14);
        assert!((s.se - var.sqrt() / 8f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn order_independent() {
        let xs: Vec<i64> = (0..1000).map(|i| (i * 7919 % 101) - 50).collect();
        let a: IntMoments = xs.iter().copied().collect();
        let b: IntMoments = xs.iter().rev().copied().collect();
        let mut c: IntMoments = xs[..300].iter().copied().collect();
        c.merge(&xs[300..].iter().copied().collect());
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(a.summarize(0.1), c.summarize(0.1));
    }

    #[test]
    fn z_scores() {
        assert_eq!(z_score(1.0, 0.0, 0.5), 2.0);
        assert_eq!(z_score(0.0, 1e-20, 0.0), 0.0);
        assert_eq!(z_score(1.0, 0.0, 0.0), Z_UNBOUNDED);
        assert_eq!(z_score(-1.0, 0.0, 0.0), -Z_UNBOUNDED);
    }

    #[test]
    fn slope() {
        assert!((ols_slope(&[0.0, 1.0, 2.0, 3.0], &[1.0, 3.0, 5.0, 7.0]) - 2.0).abs() < 1e-12);
    }
}
