//! Descriptive statistics for score and skewness distributions.

mod shapiro;

pub use shapiro::{shapiro_wilk, ShapiroWilk};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("{0} needs a non-empty sample")]
    Empty(&'static str),
    #[error("{what} needs at least {needed} values, got {given}")]
    TooFew {
        what: &'static str,
        needed: usize,
        given: usize,
    },
    #[error("Shapiro-Wilk supports 3..=5000 values, got {0}")]
    SampleSizeOutOfRange(usize),
    #[error("{0}: sample is constant")]
    Constant(&'static str),
    #[error("coefficient of variation is undefined for a zero mean")]
    ZeroMean,
    #[error("pearson: x has {0} values but y has {1}")]
    LengthMismatch(usize, usize),
    #[error("{0}: non-finite value in sample")]
    NonFinite(&'static str),
    #[error("histogram bin width must be positive, got {0}")]
    BadBinWidth(f64),
}

fn check(values: &[f64], what: &'static str) -> Result<(), StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty(what));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite(what));
    }
    Ok(())
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Quantile of an ascending slice by linear interpolation between closest
/// ranks: the value at 1-based rank `(n - 1) p + 1`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    if frac == 0.0 || lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

pub fn quantile(values: &[f64], p: f64) -> Result<f64, StatsError> {
    check(values, "quantile")?;
    Ok(quantile_sorted(&sorted(values), p))
}

pub fn median(values: &[f64]) -> Result<f64, StatsError> {
    quantile(values, 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SkewnessResult {
    pub gm: f64,
    pub mean: f64,
    pub median: f64,
    pub mean_abs_dev_from_median: f64,
    pub n: usize,
    /// Every value equals the median, so the index is 0 by convention.
    pub degenerate: bool,
}

/// Groeneveld-Meeden skewness: `(mean - median) / mean|x - median|`.
///
/// Bounded in `[-1, 1]`. On non-negative data with a zero median and a
/// positive mean the numerator and denominator are the same sum, so the index
/// is exactly 1.
pub fn gm_index(values: &[f64]) -> Result<SkewnessResult, StatsError> {
    check(values, "gm_index")?;
    let s = sorted(values);
    let n = s.len();
    let med = quantile_sorted(&s, 0.5);
    let mean = mean(values);
    let mad = values.iter().map(|v| (v - med).abs()).sum::<f64>() / n as f64;
    let (gm, degenerate) = if mad > 0.0 {
        (((mean - med) / mad).clamp(-1.0, 1.0), false)
    } else {
        (0.0, true)
    };
    Ok(SkewnessResult {
        gm,
        mean,
        median: med,
        mean_abs_dev_from_median: mad,
        n,
        degenerate,
    })
}

/// Sample standard deviation (n - 1 denominator).
pub fn std_dev(values: &[f64]) -> Result<f64, StatsError> {
    check(values, "std_dev")?;
    if values.len() < 2 {
        return Err(StatsError::TooFew {
            what: "std_dev",
            needed: 2,
            given: values.len(),
        });
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    Ok((ss / (values.len() - 1) as f64).sqrt())
}

/// Sample standard deviation over the absolute mean.
pub fn coefficient_of_variation(values: &[f64]) -> Result<f64, StatsError> {
    let sd = std_dev(values)?;
    let m = mean(values);
    if m == 0.0 {
        return Err(StatsError::ZeroMean);
    }
    Ok(sd / m.abs())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxplotSummary {
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub iqr: f64,
    pub lower_fence: f64,
    pub upper_fence: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    /// Values beyond a fence, ascending.
    pub outliers: Vec<f64>,
}

impl BoxplotSummary {
    pub fn is_outlier(&self, v: f64) -> bool {
        v < self.lower_fence || v > self.upper_fence
    }

    pub fn whisker_range(&self) -> f64 {
        self.whisker_high - self.whisker_low
    }
}

/// Tukey boxplot: fences 1.5 IQR beyond the quartiles, whiskers at the most
/// extreme values inside the fences.
pub fn boxplot_summary(values: &[f64]) -> Result<BoxplotSummary, StatsError> {
    check(values, "boxplot_summary")?;
    let s = sorted(values);
    let q1 = quantile_sorted(&s, 0.25);
    let q2 = quantile_sorted(&s, 0.5);
    let q3 = quantile_sorted(&s, 0.75);
    let iqr = q3 - q1;
    let lower_fence = q1 - 1.5 * iqr;
    let upper_fence = q3 + 1.5 * iqr;
    let mut inside = s.iter().copied().filter(|&v| v >= lower_fence && v <= upper_fence);
    let whisker_low = inside.clone().next().unwrap_or(q1);
    let whisker_high = inside.next_back().unwrap_or(q3);
    let outliers = s
        .iter()
        .copied()
        .filter(|&v| v < lower_fence || v > upper_fence)
        .collect();
    Ok(BoxplotSummary {
        q1,
        q2,
        q3,
        iqr,
        lower_fence,
        upper_fence,
        whisker_low,
        whisker_high,
        outliers,
    })
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    check(x, "pearson")?;
    check(y, "pearson")?;
    if x.len() < 2 {
        return Err(StatsError::TooFew {
            what: "pearson",
            needed: 2,
            given: x.len(),
        });
    }
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::Constant("pearson"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramSummary {
    pub bin_width: f64,
    /// Left edge of the first bin, a multiple of `bin_width`.
    pub start: f64,
    pub counts: Vec<usize>,
}

impl HistogramSummary {
    /// `[left, right)` edges of bin `i`.
    pub fn edges(&self, i: usize) -> (f64, f64) {
        let k = (self.start / self.bin_width).round() + i as f64;
        (k * self.bin_width, (k + 1.0) * self.bin_width)
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Index of the bin holding `v`. Values within 1e-9 bin widths of an edge
/// are snapped onto it, so decimal edges like 0.6 with width 0.1 behave.
fn bin_index(v: f64, width: f64) -> i64 {
    let k = v / width;
    let r = k.round();
    if (k - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r as i64
    } else {
        k.floor() as i64
    }
}

/// Left-closed right-open bins of fixed width anchored at a multiple of the
/// width at or below the minimum. An empty sample gives no bins.
pub fn histogram(values: &[f64], bin_width: f64) -> Result<HistogramSummary, StatsError> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(StatsError::BadBinWidth(bin_width));
    }
    if values.is_empty() {
        return Ok(HistogramSummary {
            bin_width,
            start: 0.0,
            counts: Vec::new(),
        });
    }
    check(values, "histogram")?;
    let idx: Vec<i64> = values.iter().map(|&v| bin_index(v, bin_width)).collect();
    let lo = *idx.iter().min().unwrap();
    let hi = *idx.iter().max().unwrap();
    let mut counts = vec![0usize; (hi - lo + 1) as usize];
    for i in idx {
        counts[(i - lo) as usize] += 1;
    }
    Ok(HistogramSummary {
        bin_width,
        start: lo as f64 * bin_width,
        counts,
    })
}
