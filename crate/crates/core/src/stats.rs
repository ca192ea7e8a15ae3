//! Small sample statistics used by the ensemble diagnostics and tests.

use crate::quantum_state::normal_cdf;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation with the `n − 1` denominator.
pub fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    (ss / (xs.len() as f64 - 1.0)).sqrt()
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `xs` and an
/// arbitrary continuous CDF.
pub fn ks_statistic(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max)
}

pub fn ks_standard_normal(xs: &[f64]) -> f64 {
    ks_statistic(xs, normal_cdf)
}

/// Asymptotic one-sample KS critical value at `p = 0.01`.
pub fn ks_critical_p01(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

pub fn standard_normal_cdf(z: f64) -> f64 {
    normal_cdf(z)
}
