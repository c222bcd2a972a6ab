//! Moment statistics, the Jarque-Bera normality test, histograms and the
//! two-sigma alarming-level rule.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::output::{fixed6, fixed6_opt};

/// Default significance level for the normality test.
pub const DEFAULT_SIGNIFICANCE: f64 = 0.05;

/// Fewest observations accepted by the normality test and the alarm rule.
pub const MIN_JB_SAMPLES: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("sample has zero variance")]
    DegenerateSample,
    #[error("sample contains a non-finite value")]
    NonFinite,
    #[error("histogram needs at least one bin")]
    NoBins,
}

fn require(samples: &[f64], needed: usize) -> Result<(), StatsError> {
    if samples.len() < needed {
        return Err(StatsError::TooFewSamples {
            needed,
            got: samples.len(),
        });
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryStats {
    pub n: usize,
    #[serde(serialize_with = "fixed6")]
    pub mean: f64,
    /// Bessel-corrected sample standard deviation.
    #[serde(serialize_with = "fixed6")]
    pub std_dev: f64,
    /// `m3 / m2^1.5` with biased central moments; `None` for zero variance.
    #[serde(serialize_with = "fixed6_opt")]
    pub skewness: Option<f64>,
    /// `m4 / m2^2` (normal = 3); `None` for zero variance.
    #[serde(serialize_with = "fixed6_opt")]
    pub kurtosis: Option<f64>,
    #[serde(serialize_with = "fixed6")]
    pub min: f64,
    #[serde(serialize_with = "fixed6")]
    pub max: f64,
}

struct Moments {
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

fn central_moments(samples: &[f64]) -> Moments {
    let n = samples.len() as f64;
    // shifted by the first value so constant samples have an exact mean
    let origin = samples[0];
    let mean = origin + samples.iter().map(|&x| x - origin).sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in samples {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    Moments {
        mean,
        m2: m2 / n,
        m3: m3 / n,
        m4: m4 / n,
    }
}

pub fn summary(samples: &[f64]) -> Result<SummaryStats, StatsError> {
    require(samples, 2)?;
    let n = samples.len();
    let m = central_moments(samples);
    let std_dev = (m.m2 * n as f64 / (n as f64 - 1.0)).sqrt();
    let (skewness, kurtosis) = if m.m2 > 0.0 {
        (Some(m.m3 / m.m2.powf(1.5)), Some(m.m4 / (m.m2 * m.m2)))
    } else {
        (None, None)
    };
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(SummaryStats {
        n,
        mean: m.mean.clamp(min, max),
        std_dev,
        skewness,
        kurtosis,
        min,
        max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JbResult {
    #[serde(serialize_with = "fixed6")]
    pub statistic: f64,
    #[serde(serialize_with = "fixed6")]
    pub p_value: f64,
    pub reject_at_5pct: bool,
}

impl JbResult {
    pub fn rejects_at(&self, significance: f64) -> bool {
        self.p_value < significance
    }
}

/// Survival function of the chi-squared law with two degrees of freedom.
pub fn chi2_2df_survival(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        (-0.5 * x).exp()
    }
}

/// `JB = n/6 (S^2 + (K - 3)^2 / 4)` with a chi-squared(2) p-value.
pub fn jarque_bera(samples: &[f64]) -> Result<JbResult, StatsError> {
    require(samples, MIN_JB_SAMPLES)?;
    let m = central_moments(samples);
    if !(m.m2 > 0.0) {
        return Err(StatsError::DegenerateSample);
    }
    let skew = m.m3 / m.m2.powf(1.5);
    let kurt = m.m4 / (m.m2 * m.m2);
    let n = samples.len() as f64;
    let statistic = n / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0));
    let p_value = chi2_2df_survival(statistic);
    Ok(JbResult {
        statistic,
        p_value,
        reject_at_5pct: p_value < DEFAULT_SIGNIFICANCE,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlarmResult {
    #[serde(serialize_with = "fixed6")]
    pub mean: f64,
    #[serde(serialize_with = "fixed6")]
    pub std_dev: f64,
    /// `mean + 2 * std_dev`.
    #[serde(serialize_with = "fixed6")]
    pub alarm_level: f64,
    /// `None` when the sample has zero variance.
    pub normality: Option<JbResult>,
    #[serde(serialize_with = "fixed6")]
    pub significance: f64,
    /// Normality was testable and not rejected at `significance`.
    pub valid: bool,
}

pub fn alarm_level(samples: &[f64]) -> Result<AlarmResult, StatsError> {
    alarm_level_at(samples, DEFAULT_SIGNIFICANCE)
}

/// Two-sigma alarm level with the normality check at a chosen level.
pub fn alarm_level_at(samples: &[f64], significance: f64) -> Result<AlarmResult, StatsError> {
    require(samples, MIN_JB_SAMPLES)?;
    let s = summary(samples)?;
    let normality = match jarque_bera(samples) {
        Ok(jb) => Some(jb),
        Err(StatsError::DegenerateSample) => None,
        Err(e) => return Err(e),
    };
    let valid = normality.is_some_and(|jb| !jb.rejects_at(significance));
    Ok(AlarmResult {
        mean: s.mean,
        std_dev: s.std_dev,
        alarm_level: s.mean + 2.0 * s.std_dev,
        normality,
        significance,
        valid,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bin {
    #[serde(serialize_with = "fixed6")]
    pub start: f64,
    #[serde(serialize_with = "fixed6")]
    pub end: f64,
    pub count: usize,
}

/// Equal-width bins over `[min, max]`; the last bin is closed on the right.
/// A zero-width range puts every sample in the first bin.
pub fn histogram(samples: &[f64], bins: usize) -> Result<Vec<Bin>, StatsError> {
    if bins == 0 {
        return Err(StatsError::NoBins);
    }
    require(samples, 1)?;
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (max - min) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in samples {
        let i = if width > 0.0 {
            (((x - min) / width).floor() as usize).min(bins - 1)
        } else {
            0
        };
        counts[i] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| Bin {
            start: min + width * i as f64,
            end: if i + 1 == bins { max } else { min + width * (i + 1) as f64 },
            count,
        })
        .collect())
}

pub fn write_histogram_csv<W: Write>(bins: &[Bin], mut out: W) -> std::io::Result<()> {
    writeln!(out, "bin_start,bin_end,count")?;
    for b in bins {
        writeln!(out, "{:.6},{:.6},{}", b.start, b.end, b.count)?;
    }
    Ok(())
}

/// One line per bin, bar length proportional to the count.
pub fn render_ascii_histogram(bins: &[Bin], width: usize) -> String {
    let peak = bins.iter().map(|b| b.count).max().unwrap_or(0).max(1);
    let mut s = String::new();
    for b in bins {
        let bar = b.count * width / peak;
        s.push_str(&format!(
            "[{:>9.6}, {:>9.6}) {:>5} {}\n",
            b.start,
            b.end,
            b.count,
            "#".repeat(bar)
        ));
    }
    s
}
