//! Growth-curve statistics: least-squares line, MSE against it, population
//! standard deviation, the 40-bin size histogram and the epoch ↔ week scale.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Epochs in a standard 22-week crop.
pub const REFERENCE_EPOCHS: f64 = 287.5;
pub const REFERENCE_WEEKS: f64 = 22.0;
pub const HISTOGRAM_BINS: usize = 40;
pub const HISTOGRAM_MAX: f64 = 40.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionLine {
    /// Grams per epoch (or per week for field data).
    pub slope: f64,
    pub intercept: f64,
}

impl RegressionLine {
    pub fn at(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Ordinary least squares over (x, y) points.
pub fn linear_regression(points: &[(f64, f64)]) -> Result<RegressionLine> {
    if points.len() < 2 {
        return Err(Error::InsufficientPoints);
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientPoints);
    }
    let slope = sxy / sxx;
    Ok(RegressionLine { slope, intercept: my - slope * mx })
}

/// Mean squared residual of the points against their own least-squares line.
pub fn mse_vs_regression(points: &[(f64, f64)]) -> Result<f64> {
    let line = linear_regression(points)?;
    Ok(points.iter().map(|&(x, y)| (y - line.at(x)).powi(2)).sum::<f64>() / points.len() as f64)
}

/// Population standard deviation (divides by N).
pub fn std_dev(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    Ok((values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt())
}

/// 40 unit-width bins over [0, 40] g; bin `i` covers `[i, i + 1)`, the last
/// bin is closed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub bins: Vec<u32>,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.bins.iter().map(|&b| b as u64).sum()
    }

    /// Number of non-empty bins.
    pub fn group_count(&self) -> usize {
        self.bins.iter().filter(|&&b| b > 0).count()
    }

    /// Inclusive lower edge of bin `i` in grams.
    pub fn lower_edge(i: usize) -> f64 {
        i as f64 * HISTOGRAM_MAX / HISTOGRAM_BINS as f64
    }
}

pub fn histogram40(sizes: &[f64]) -> Result<Histogram> {
    let mut bins = vec![0u32; HISTOGRAM_BINS];
    for &s in sizes {
        if !(0.0..=HISTOGRAM_MAX).contains(&s) {
            return Err(Error::SizeOutOfRange(s));
        }
        let i = ((s / HISTOGRAM_MAX * HISTOGRAM_BINS as f64).floor() as usize).min(HISTOGRAM_BINS - 1);
        bins[i] += 1;
    }
    Ok(Histogram { bins })
}

pub fn epochs_to_weeks(epochs: f64) -> f64 {
    epochs * REFERENCE_WEEKS / REFERENCE_EPOCHS
}

pub fn weeks_to_epochs(weeks: f64) -> f64 {
    weeks * REFERENCE_EPOCHS / REFERENCE_WEEKS
}

/// A crop-length estimate of one configuration against a baseline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductionEstimate {
    pub baseline_epochs: f64,
    pub baseline_weeks: f64,
    pub epochs: f64,
    pub weeks: f64,
    pub weeks_saved: f64,
    /// `100 * weeks_saved / baseline_weeks`.
    pub percent_time_reduction: f64,
}

pub fn production_estimate(epochs: f64, baseline_epochs: f64) -> ProductionEstimate {
    let weeks = epochs_to_weeks(epochs);
    let baseline_weeks = epochs_to_weeks(baseline_epochs);
    let weeks_saved = baseline_weeks - weeks;
    ProductionEstimate {
        baseline_epochs,
        baseline_weeks,
        epochs,
        weeks,
        weeks_saved,
        percent_time_reduction: if baseline_weeks > 0.0 {
            100.0 * weeks_saved / baseline_weeks
        } else {
            0.0
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_lines() {
        let pts: Vec<(f64, f64)> = (0..10).map(|x| (x as f64, 2.0 * x as f64 + 1.0)).collect();
        let l = linear_regression(&pts).unwrap();
        assert!((l.slope - 2.0).abs() < 1e-12 && (l.intercept - 1.0).abs() < 1e-12);
        assert!(mse_vs_regression(&pts).unwrap() < 1e-24);

        let l = linear_regression(&[(0.0, 1.0), (2.0, 1.0)]).unwrap();
        assert_eq!((l.slope, l.intercept), (0.0, 1.0));
    }

    #[test]
    fn degenerate_regression() {
        assert!(matches!(linear_regression(&[(1.0, 2.0)]), Err(Error::InsufficientPoints)));
        assert!(matches!(
            linear_regression(&[(1.0, 2.0), (1.0, 3.0)]),
            Err(Error::InsufficientPoints)
        ));
    }

    #[test]
    fn mse_three_points() {
        // best fit is y = 1/3; residuals -1/3, 2/3, -1/3
        let m = mse_vs_regression(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]).unwrap();
        assert!((m - 2.0 / 9.0).abs() < 1e-15, "{m}");
    }

    #[test]
    fn std_examples() {
        assert_eq!(std_dev(&[4.0; 7]).unwrap(), 0.0);
        assert_eq!(std_dev(&[1.0, 3.0]).unwrap(), 1.0);
        assert!(matches!(std_dev(&[]), Err(Error::EmptySample)));
        let a = std_dev(&[3.0, 9.0, 1.0, 4.0]).unwrap();
        let b = std_dev(&[4.0, 1.0, 9.0, 3.0]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn histogram_examples() {
        let sizes: Vec<f64> = (0..500).map(|i| 1.0 + (i % 38) as f64).collect();
        let h = histogram40(&sizes).unwrap();
        assert_eq!(h.bins.len(), 40);
        assert_eq!(h.total(), 500);
        let h = histogram40(&[24.0; 50]).unwrap();
        assert_eq!(h.group_count(), 1);
        assert_eq!(h.bins[24], 50);
        let h = histogram40(&[40.0, 0.0, 39.5]).unwrap();
        assert_eq!((h.bins[39], h.bins[0]), (2, 1));
        assert!(histogram40(&[41.0]).is_err());
        assert!(histogram40(&[-0.5]).is_err());
        // integer sizes 15..=39 can fill at most 25 bins
        let spread: Vec<f64> = (15..=39).map(f64::from).collect();
        assert!(histogram40(&spread).unwrap().group_count() <= 25);
        assert_eq!(Histogram::lower_edge(24), 24.0);
    }

    #[test]
    fn week_scale() {
        assert_eq!(epochs_to_weeks(287.5), 22.0);
        assert!((epochs_to_weeks(183.0) - 14.0034).abs() < 1e-4);
        assert_eq!(epochs_to_weeks(0.0), 0.0);
        assert!((weeks_to_epochs(21.0) - 274.43181818).abs() < 1e-6);
        let e = production_estimate(183.0, 287.5);
        assert!((e.weeks_saved - 7.9966).abs() < 1e-4);
        assert!((e.percent_time_reduction - 36.348).abs() < 1e-3);
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::collection::vec;
    use proptest::prelude::*;

    fn points() -> impl Strategy<Value = Vec<(f64, f64)>> {
        vec((-100.0f64..100.0, -100.0f64..100.0), 3..60)
            .prop_filter("distinct x", |p| p.iter().any(|q| (q.0 - p[0].0).abs() > 1e-3))
    }

    proptest! {
        #[test]
        fn residuals_sum_to_zero(p in points()) {
            let l = linear_regression(&p).unwrap();
            let s: f64 = p.iter().map(|&(x, y)| y - l.at(x)).sum();
            let scale: f64 = p.iter().map(|q| q.1.abs()).sum::<f64>() + 1.0;
            prop_assert!(s.abs() <= 1e-9 * scale);
        }

        #[test]
        fn mse_non_negative_and_scales(p in points(), c in -5.0f64..5.0) {
            let m = mse_vs_regression(&p).unwrap();
            prop_assert!(m >= 0.0);
            let q: Vec<(f64, f64)> = p.iter().map(|&(x, y)| (x, c * y)).collect();
            let mq = mse_vs_regression(&q).unwrap();
            prop_assert!((mq - c * c * m).abs() <= 1e-9 * (c * c * m).max(1e-9));
        }

        #[test]
        fn histogram_conserves(s in vec(0.0f64..=40.0, 0..300)) {
            prop_assert_eq!(histogram40(&s).unwrap().total(), s.len() as u64);
        }

        #[test]
        fn weeks_linear(a in 0.0f64..1e4, b in 0.0f64..1e4) {
            let lhs = epochs_to_weeks(a + b);
            let rhs = epochs_to_weeks(a) + epochs_to_weeks(b);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1.0));
        }
    }
}
