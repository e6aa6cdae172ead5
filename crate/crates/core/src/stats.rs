//! Order-fixed reductions and sample moments.
//!
//! All reductions here have a summation schedule that depends only on the
//! input length, never on how the inputs were produced, so results are
//! bit-identical regardless of the number of worker threads.

use num_complex::Complex64;
use std::ops::Add;

/// Pairwise (cascade) summation.
pub fn pairwise_sum<T>(values: &[T]) -> T
where
    T: Copy + Add<Output = T> + Default,
{
    const LEAF: usize = 16;
    if values.len() <= LEAF {
        return values.iter().fold(T::default(), |acc, &v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Sample statistics of a set of complex Monte Carlo estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMoments {
    pub count: usize,
    pub mean: Complex64,
    /// Unbiased (`R - 1`) estimate of `E|X - EX|^2`.
    pub variance: f64,
    pub se_mean: f64,
    /// Delta-method standard error from the fourth central moment.
    pub se_variance: f64,
}

impl SampleMoments {
    /// Two-pass moments; requires at least two values.
    pub fn from_values(values: &[Complex64]) -> Option<Self> {
        let r = values.len();
        if r < 2 {
            return None;
        }
        let rf = r as f64;
        let mean = pairwise_sum(values) / rf;
        let sq: Vec<f64> = values.iter().map(|v| (v - mean).norm_sqr()).collect();
        let m2 = pairwise_sum(&sq) / rf;
        let quad: Vec<f64> = sq.iter().map(|s| s * s).collect();
        let m4 = pairwise_sum(&quad) / rf;
        let variance = m2 * rf / (rf - 1.0);
        let var_of_var = (m4 - variance * variance * (rf - 3.0) / (rf - 1.0)) / rf;
        Some(Self {
            count: r,
            mean,
            variance,
            se_mean: (variance / rf).sqrt(),
            se_variance: var_of_var.max(0.0).sqrt(),
        })
    }
}

/// Mean and standard error of a real sample.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Standardized difference. Differences at or below `abs_tol` count as zero,
/// and a zero standard error with a larger difference saturates to `f64::MAX`
/// so the score stays finite.
pub fn z_score(predicted: f64, observed: f64, se: f64, abs_tol: f64) -> f64 {
    let diff = (predicted - observed).abs();
    if diff <= abs_tol {
        0.0
    } else if se > 0.0 {
        (diff / se).min(f64::MAX)
    } else {
        f64::MAX
    }
}

/// Least-squares slope of `y` on `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
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
    fn pairwise_matches_naive_on_small_integers() {
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 500_500.0);
    }

    #[test]
    fn moments_of_constant_sample() {
        let v = vec![Complex64::new(2.5, -1.0); 10];
        let m = SampleMoments::from_values(&v).unwrap();
        assert_eq!(m.mean, Complex64::new(2.5, -1.0));
        assert_eq!(m.variance, 0.0);
        assert_eq!(m.se_variance, 0.0);
    }

    #[test]
    fn moments_need_two_values() {
        assert!(SampleMoments::from_values(&[Complex64::new(1.0, 0.0)]).is_none());
    }

    #[test]
    fn unbiased_variance_of_two_points() {
        let v = [Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0)];
        let m = SampleMoments::from_values(&v).unwrap();
        assert_eq!(m.variance, 2.0);
    }

    #[test]
    fn z_score_edge_cases() {
        assert_eq!(z_score(0.0, 1e-25, 0.0, 1e-20), 0.0);
        assert_eq!(z_score(1.0, 0.0, 0.0, 1e-20), f64::MAX);
        assert_eq!(z_score(1.0, 0.5, 0.25, 0.0), 2.0);
    }

    #[test]
    fn slope_of_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 2.0 * v).collect();
        assert!((fit_slope(&x, &y) + 2.0).abs() < 1e-12);
    }
}
