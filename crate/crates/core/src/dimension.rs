//! Log-log slope fitting with automatic range selection.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Paired box lengths (descending, Å) and box counts.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxCountSeries {
    pub lengths: Vec<f64>,
    pub counts: Vec<u64>,
}

impl BoxCountSeries {
    pub fn new(lengths: Vec<f64>, counts: Vec<u64>) -> Result<Self> {
        let s = BoxCountSeries { lengths, counts };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lengths.len() != self.counts.len() {
            return Err(Error::param(format!(
                "{} lengths but {} counts",
                self.lengths.len(),
                self.counts.len()
            )));
        }
        if self.lengths.len() < 2 {
            return Err(Error::Numeric("a slope needs at least 2 points".into()));
        }
        if self.lengths.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::param("box lengths must be positive and finite"));
        }
        if self.lengths.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::param("box lengths must be strictly descending"));
        }
        if self.counts.contains(&0) {
            return Err(Error::Numeric("box count of zero cannot be log-transformed".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    /// `log(1/ε)` values.
    pub fn x(&self) -> Vec<f64> {
        self.lengths.iter().map(|l| -l.ln()).collect()
    }

    /// `log N` values.
    pub fn y(&self) -> Vec<f64> {
        self.counts.iter().map(|&n| (n as f64).ln()).collect()
    }
}

/// Ordinary least-squares fit of `log N` on `log(1/ε)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub ci: (f64, f64),
    pub n: usize,
}

impl OlsFit {
    pub fn ci_width(&self) -> f64 {
        self.ci.1 - self.ci.0
    }
}

fn check_conf(conf_lvl: f64) -> Result<()> {
    if conf_lvl > 0.0 && conf_lvl < 100.0 {
        Ok(())
    } else {
        Err(Error::param(format!("confLvl must lie in (0, 100), got {conf_lvl}")))
    }
}

/// OLS on raw `(x, y)` pairs with a Student-t interval on the slope.
pub fn ols(x: &[f64], y: &[f64], conf_lvl: f64) -> Result<OlsFit> {
    check_conf(conf_lvl)?;
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::Numeric("a slope needs at least 2 points".into()));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Numeric("zero variance in log box length".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - (intercept + slope * a)).powi(2))
        .sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();

    // Residuals at the level of rounding noise are an exact fit.
    let ymax = y.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let noise = 4.0 * f64::EPSILON * ymax;
    if ss_res <= nf * noise * noise {
        ss_res = 0.0;
    }
    let r2 = if ss_res == 0.0 {
        1.0
    } else if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        0.0
    };

    let ci = if ss_res == 0.0 {
        (slope, slope)
    } else if n < 3 {
        (f64::NEG_INFINITY, f64::INFINITY)
    } else {
        let dof = (n - 2) as f64;
        let stderr = (ss_res / dof / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, dof)
            .map_err(|e| Error::Numeric(e.to_string()))?
            .inverse_cdf(1.0 - (1.0 - conf_lvl / 100.0) / 2.0);
        (slope - t * stderr, slope + t * stderr)
    };
    Ok(OlsFit {
        slope,
        intercept,
        r2,
        ci,
        n,
    })
}

/// OLS on the log-log transform of a series.
pub fn ols_log_log(series: &BoxCountSeries, conf_lvl: f64) -> Result<OlsFit> {
    series.validate()?;
    ols(&series.x(), &series.y(), conf_lvl)
}

/// Result of the range-selecting fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub d_box: f64,
    pub intercept: f64,
    pub ci: (f64, f64),
    pub r2: f64,
    /// Smallest and largest box length in the retained window.
    pub l_min: f64,
    pub l_max: f64,
    pub points_used: usize,
    /// Retained window as a half-open index range into the input series.
    pub window: (usize, usize),
}

/// Drop saturated large-box points and flattening small-box points.
///
/// Leading points are removed while the count equals the next count. Trailing
/// points are removed while the growth in count per halving of the box length
/// is below 2. At least `min_sample` points always remain.
pub fn trim_extremes(series: &BoxCountSeries, min_sample: usize) -> (usize, usize) {
    let (mut lo, mut hi) = (0, series.len());
    while hi - lo > min_sample && series.counts[lo] == series.counts[lo + 1] {
        lo += 1;
    }
    while hi - lo > min_sample {
        let (l0, l1) = (series.lengths[hi - 2], series.lengths[hi - 1]);
        let (n0, n1) = (series.counts[hi - 2] as f64, series.counts[hi - 1] as f64);
        let per_halving = (n1 / n0).powf(std::f64::consts::LN_2 / (l0 / l1).ln());
        if per_halving < 2.0 {
            hi -= 1;
        } else {
            break;
        }
    }
    (lo, hi)
}

/// Fit the dimension with greedy endpoint removal.
///
/// The whole window is fitted first. Points are then removed from the
/// small-length end while each removal strictly raises R²; after the first
/// removal that fails to do so, the same is done from the large-length end.
/// The window never shrinks below `min_sample`.
pub fn fit_slope(series: &BoxCountSeries, min_sample: usize, conf_lvl: f64, trim_len: bool) -> Result<FitResult> {
    series.validate()?;
    check_conf(conf_lvl)?;
    if min_sample < 2 {
        return Err(Error::param(format!("minSample must be at least 2, got {min_sample}")));
    }
    if series.len() < min_sample {
        return Err(Error::Numeric(format!(
            "series has {} points, fewer than minSample = {min_sample}",
            series.len()
        )));
    }
    let x = series.x();
    let y = series.y();
    let (mut lo, mut hi) = if trim_len {
        trim_extremes(series, min_sample)
    } else {
        (0, series.len())
    };
    let fit = |lo: usize, hi: usize| ols(&x[lo..hi], &y[lo..hi], conf_lvl);

    let mut cur = fit(lo, hi)?;
    while hi - lo > min_sample {
        let cand = fit(lo, hi - 1)?;
        if cand.r2 > cur.r2 {
            cur = cand;
            hi -= 1;
        } else {
            break;
        }
    }
    while hi - lo > min_sample {
        let cand = fit(lo + 1, hi)?;
        if cand.r2 > cur.r2 {
            cur = cand;
            lo += 1;
        } else {
            break;
        }
    }
    Ok(FitResult {
        d_box: cur.slope,
        intercept: cur.intercept,
        ci: cur.ci,
        r2: cur.r2,
        l_min: series.lengths[hi - 1],
        l_max: series.lengths[lo],
        points_used: hi - lo,
        window: (lo, hi),
    })
}

/// Single entry point used by both counting pipelines.
pub fn dimension_from_counts(
    series: &BoxCountSeries,
    min_sample: usize,
    conf_lvl: f64,
    trim_len: bool,
) -> Result<FitResult> {
    fit_slope(series, min_sample, conf_lvl, trim_len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn series(lengths: &[f64], counts: &[u64]) -> BoxCountSeries {
        BoxCountSeries::new(lengths.to_vec(), counts.to_vec()).unwrap()
    }

    #[test]
    fn cube_scaling() {
        let f = ols_log_log(&series(&[8.0, 4.0, 2.0, 1.0], &[1, 8, 64, 512]), 95.0).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-12);
        assert_eq!(f.r2, 1.0);
        assert_eq!(f.ci_width(), 0.0);
    }

    #[test]
    fn menger_scaling() {
        let s = series(&[1.0, 1.0 / 3.0, 1.0 / 9.0, 1.0 / 27.0], &[20, 400, 8000, 160_000]);
        let f = ols_log_log(&s, 95.0).unwrap();
        assert!((f.slope - 20f64.ln() / 3f64.ln()).abs() < 1e-12);
        assert_eq!(f.r2, 1.0);
    }

    #[test]
    fn constant_counts_have_zero_slope() {
        let f = ols_log_log(&series(&[4.0, 2.0, 1.0], &[1, 1, 1]), 95.0).unwrap();
        assert_eq!(f.slope, 0.0);
        assert_eq!(f.r2, 1.0);
    }

    #[test]
    fn rejects_bad_series() {
        assert!(BoxCountSeries::new(vec![1.0], vec![1]).is_err());
        assert!(BoxCountSeries::new(vec![1.0, 2.0], vec![1, 2]).is_err());
        assert!(BoxCountSeries::new(vec![2.0, 1.0], vec![1, 0]).is_err());
        assert!(ols(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0], 95.0).is_err());
    }

    #[test]
    fn two_points_have_unbounded_interval_unless_exact() {
        let f = ols(&[0.0, 1.0], &[0.0, 2.0], 95.0).unwrap();
        assert_eq!(f.ci_width(), 0.0);
    }

    #[test]
    fn linear_series_keeps_full_window() {
        let lengths: Vec<f64> = (0..10).map(|i| 0.5f64.powi(i)).collect();
        let counts: Vec<u64> = (0..10).map(|i| 4u64.pow(i)).collect();
        let f = fit_slope(&series(&lengths, &counts), 6, 95.0, false).unwrap();
        assert_eq!(f.window, (0, 10));
        assert_eq!(f.r2, 1.0);
        assert!((f.d_box - 2.0).abs() < 1e-12);
    }

    #[test]
    fn upward_tail_is_removed() {
        // First six points on slope 2, last two deviate upward.
        let lengths: Vec<f64> = (0..8).map(|i| 0.5f64.powi(i)).collect();
        let mut counts: Vec<u64> = (0..8).map(|i| 4u64.pow(i)).collect();
        counts[6] *= 3;
        counts[7] *= 20;
        let f = fit_slope(&series(&lengths, &counts), 6, 95.0, false).unwrap();
        assert_eq!(f.window, (0, 6));
        assert_eq!(f.r2, 1.0);
        assert!((f.d_box - 2.0).abs() < 1e-12);
        assert_eq!(f.l_max, 1.0);
        assert_eq!(f.l_min, lengths[5]);
    }

    #[test]
    fn min_sample_window_is_input() {
        let s = series(&[8.0, 4.0, 2.0, 1.0], &[1, 9, 60, 700]);
        let f = fit_slope(&s, 4, 95.0, false).unwrap();
        assert_eq!(f.window, (0, 4));
        assert!(fit_slope(&s, 5, 95.0, false).is_err());
    }

    #[test]
    fn trim_handles_saturation() {
        let single = series(&[8.0, 4.0, 2.0, 1.0, 0.5, 0.25, 0.125], &[1; 7]);
        let f = fit_slope(&single, 3, 95.0, true).unwrap();
        assert_eq!(f.d_box, 0.0);
        assert_eq!(f.r2, 1.0);

        let full = series(&[8.0, 4.0, 2.0, 1.0], &[1, 8, 64, 512]);
        assert_eq!(trim_extremes(&full, 3), (0, 4));

        let flat_tail = series(&[8.0, 4.0, 2.0, 1.0, 0.5, 0.25], &[2, 2, 8, 32, 100, 120]);
        assert_eq!(trim_extremes(&flat_tail, 3), (1, 5));
    }

    #[test]
    fn interval_coverage_is_calibrated() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.3).collect();
        let mut hits = 0;
        for _ in 0..1000 {
            let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 0.01 * normal(&mut rng)).collect();
            let f = ols(&x, &y, 95.0).unwrap();
            if f.ci.0 <= 2.0 && 2.0 <= f.ci.1 {
                hits += 1;
            }
        }
        assert!(hits >= 900, "coverage {hits}/1000");
    }

    /// Box-Muller standard normal.
    fn normal(rng: &mut impl rand::Rng) -> f64 {
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    proptest! {
        #[test]
        fn rescaling_lengths_keeps_slope(
            counts in prop::collection::vec(1u64..1_000_000, 6..12),
            c in 0.01f64..100.0,
        ) {
            let n = counts.len();
            let lengths: Vec<f64> = (0..n).map(|i| 0.7f64.powi(i as i32)).collect();
            let a = fit_slope(&BoxCountSeries::new(lengths.clone(), counts.clone()).unwrap(), 4, 95.0, false).unwrap();
            let scaled: Vec<f64> = lengths.iter().map(|l| l * c).collect();
            let b = fit_slope(&BoxCountSeries::new(scaled, counts).unwrap(), 4, 95.0, false).unwrap();
            prop_assert!((a.d_box - b.d_box).abs() < 1e-9);
        }

        #[test]
        fn window_is_contiguous_and_bounded(
            counts in prop::collection::vec(1u64..1_000_000, 6..15),
            min_sample in 3usize..6,
            trim in any::<bool>(),
        ) {
            let n = counts.len();
            let lengths: Vec<f64> = (0..n).map(|i| 0.5f64.powi(i as i32)).collect();
            let f = fit_slope(&BoxCountSeries::new(lengths.clone(), counts).unwrap(), min_sample, 95.0, trim).unwrap();
            prop_assert!(f.points_used >= min_sample);
            prop_assert_eq!(f.window.1 - f.window.0, f.points_used);
            prop_assert!(f.ci.0 <= f.d_box && f.d_box <= f.ci.1);
            prop_assert!((0.0..=1.0).contains(&f.r2));
            prop_assert_eq!(f.l_max, lengths[f.window.0]);
        }
    }
}
