use serde::{Deserialize, Serialize};

use crate::sqrt_n_log_n;

/// Sample statistics of one ratio column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioStats {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (`N - 1` denominator; 0 for a single value).
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub q05: f64,
    pub q95: f64,
}

impl RatioStats {
    /// `None` for an empty slice.
    pub fn from_values(values: &[f64]) -> Option<RatioStats> {
        if values.is_empty() {
            return None;
        }
        let count = values.len();
        let mean = values.iter().sum::<f64>() / count as f64;
        let std = if count > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Some(RatioStats {
            count,
            mean,
            std,
            min: sorted[0],
            max: sorted[count - 1],
            q05: quantile(&sorted, 0.05),
            q95: quantile(&sorted, 0.95),
        })
    }
}

/// Linear-interpolation quantile of sorted data (the usual "type 7" rule).
pub(crate) fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Least-squares `c` minimising `Σ (y_i - c √(n_i ln n_i))²` over points with `n > 1`.
pub fn fit_constant(points: &[(usize, f64)]) -> Option<f64> {
    let (num, den) = points
        .iter()
        .filter_map(|&(n, y)| sqrt_n_log_n(n).map(|s| (y * s, s * s)))
        .fold((0.0, 0.0), |acc, (a, b)| (acc.0 + a, acc.1 + b));
    (den > 0.0).then(|| num / den)
}

/// Least-squares slope of `ln y` against `ln n` over points with `y > 0`.
pub fn fit_exponent(points: &[(usize, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(_, y)| y > 0.0)
        .map(|&(n, y)| ((n as f64).ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_of_small_sample() {
        let s = RatioStats::from_values(&[4.0, 1.0, 3.0, 2.0, 5.0]).unwrap();
        assert_eq!(s.mean, 3.0);
        assert!((s.std - 2.5f64.sqrt()).abs() < 1e-15);
        assert_eq!((s.min, s.max), (1.0, 5.0));
        assert!((s.q05 - 1.2).abs() < 1e-12);
        assert!((s.q95 - 4.8).abs() < 1e-12);
        assert!(RatioStats::from_values(&[]).is_none());
        let one = RatioStats::from_values(&[2.0]).unwrap();
        assert_eq!((one.std, one.q05, one.q95), (0.0, 2.0, 2.0));
    }

    #[test]
    fn fits_recover_exact_laws() {
        let pts: Vec<(usize, f64)> = [10usize, 100, 1000].iter().map(|&n| (n, 1.7 * sqrt_n_log_n(n).unwrap())).collect();
        assert!((fit_constant(&pts).unwrap() - 1.7).abs() < 1e-12);
        let pts: Vec<(usize, f64)> = [10usize, 100, 1000].iter().map(|&n| (n, 3.0 * (n as f64).powf(0.55))).collect();
        assert!((fit_exponent(&pts).unwrap() - 0.55).abs() < 1e-12);
        assert!(fit_exponent(&pts[..1]).is_none());
        assert!(fit_constant(&[(1, 2.0)]).is_none());
    }
}
