//! Small order-independent summaries used by the estimators.

use alloc::vec::Vec;

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Summary {
    pub mean: f64,
    pub std_error: f64,
    pub n: u64,
}

impl Summary {
    pub fn of(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Self { mean: f64::NAN, std_error: f64::NAN, n: 0 };
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
            libm::sqrt(ss / (n as f64 - 1.0) / n as f64)
        } else {
            f64::NAN
        };
        Self { mean, std_error, n: n as u64 }
    }

    pub fn variance(&self) -> f64 {
        self.std_error * self.std_error * self.n as f64
    }
}

/// Ratio estimate `sum(num) / sum(den)` over clusters (replications), with a
/// linearised cluster standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ratio {
    pub estimate: f64,
    pub std_error: f64,
    pub clusters: u64,
}

impl Ratio {
    pub fn of(pairs: &[(f64, f64)]) -> Self {
        let k = pairs.len();
        let num: f64 = pairs.iter().map(|p| p.0).sum();
        let den: f64 = pairs.iter().map(|p| p.1).sum();
        let estimate = num / den;
        let std_error = if k > 1 {
            let mean_den = den / k as f64;
            let ss: f64 = pairs
                .iter()
                .map(|&(y, x)| {
                    let r = y - estimate * x;
                    r * r
                })
                .sum();
            libm::sqrt(ss / ((k as f64 - 1.0) * k as f64)) / mean_den
        } else {
            f64::NAN
        };
        Self { estimate, std_error, clusters: k as u64 }
    }

    /// Per-cluster linearised contributions (influence values) scaled so that
    /// their sample mean's standard error matches `std_error`.
    pub fn influence(pairs: &[(f64, f64)]) -> Vec<f64> {
        let k = pairs.len() as f64;
        let num: f64 = pairs.iter().map(|p| p.0).sum();
        let den: f64 = pairs.iter().map(|p| p.1).sum();
        let r = num / den;
        let mean_den = den / k;
        pairs.iter().map(|&(y, x)| (y - r * x) / mean_den).collect()
    }
}

/// Standard error of `a - b` for independent estimates.
pub fn combined_se(a: f64, b: f64) -> f64 {
    libm::sqrt(a * a + b * b)
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a - F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a: Vec<f64> = a.to_vec();
    let mut b: Vec<f64> = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max(libm::fabs(i as f64 / na - j as f64 / nb));
    }
    d
}
