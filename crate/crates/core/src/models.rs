//! Continuous income densities and their Gini coefficients.
//!
//! The exponential law `f(x) = beta * exp(-beta * (x + alpha / beta))` on
//! `x >= -alpha / beta` has Gini `1 / (2 (1 - alpha))`; the Pareto law
//! `f(x) = gamma a^gamma x^(-gamma - 1)` on `x >= a` has Gini
//! `1 / (2 gamma - 1)`. [`gini_numeric`] evaluates the generic integral
//! `G = (2 / mu) * int x (F(x) - 1/2) f(x) dx` by adaptive quadrature and
//! serves as the independent check on both closed forms.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::quadrature::{gauss_kronrod21, integrate, integrate_adaptive, AdaptiveOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("alpha must be finite and <= 0, got {0}")]
    InvalidAlpha(f64),
    #[error("beta must be finite and > 0, got {0}")]
    InvalidBeta(f64),
    #[error("gamma must be finite and >= 1, got {0}")]
    InvalidGamma(f64),
    #[error("Pareto scale must be finite and > 0, got {0}")]
    InvalidScale(f64),
    #[error("invalid support [{0}, {1}]")]
    InvalidSupport(f64, f64),
    #[error("probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("density integrates to {mass}, not 1")]
    NotNormalized { mass: f64 },
    #[error("mean income is not finite; the Gini integral diverges")]
    NonFiniteMean,
    #[error("mean income must be positive, got {0}")]
    NonPositiveMean(f64),
    #[error("a Lorenz curve needs at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("sample is empty")]
    EmptySample,
    #[error("sample contains a negative or non-finite value {0}")]
    InvalidSample(f64),
    #[error("sample total is zero")]
    ZeroTotal,
}

/// A continuous income density with closed-form cdf, quantile and Lorenz
/// curve.
pub trait IncomeDensity {
    fn pdf(&self, x: f64) -> f64;
    fn cdf(&self, x: f64) -> f64;
    fn mean(&self) -> f64;
    fn quantile(&self, p: f64) -> Result<f64, ModelError>;
    fn support_start(&self) -> f64;
    /// Upper truncation point used for numerical integration.
    fn default_truncation(&self) -> f64;
    /// Share of total income held by the poorest fraction `p`.
    fn lorenz(&self, p: f64) -> f64;
    /// Closed-form Gini coefficient.
    fn gini(&self) -> f64;

    /// `count` draws by inversion, reproducible per seed.
    fn sample(&self, seed: u64, count: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let u: f64 = rng.random();
                self.quantile(u).expect("u lies in [0, 1)")
            })
            .collect()
    }
}

fn check_probability(p: f64) -> Result<(), ModelError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(ModelError::InvalidProbability(p))
    }
}

/// Exponential (Boltzmann-Gibbs) income density with support starting at
/// `-alpha / beta`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ExponentialModel {
    alpha: f64,
    beta: f64,
}

/// Tail mass left beyond the exponential truncation point.
const EXPONENTIAL_TAIL_MASS: f64 = 1e-15;

impl ExponentialModel {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, ModelError> {
        if !(alpha.is_finite() && alpha <= 0.0) {
            return Err(ModelError::InvalidAlpha(alpha));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(ModelError::InvalidBeta(beta));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

impl IncomeDensity for ExponentialModel {
    fn pdf(&self, x: f64) -> f64 {
        if x < self.support_start() {
            0.0
        } else {
            self.beta * (-self.beta * (x + self.alpha / self.beta)).exp()
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= self.support_start() {
            0.0
        } else {
            -(-self.beta * (x - self.support_start())).exp_m1()
        }
    }

    fn mean(&self) -> f64 {
        (1.0 - self.alpha) / self.beta
    }

    fn quantile(&self, p: f64) -> Result<f64, ModelError> {
        check_probability(p)?;
        Ok(self.support_start() - (-p).ln_1p() / self.beta)
    }

    fn support_start(&self) -> f64 {
        -self.alpha / self.beta
    }

    fn default_truncation(&self) -> f64 {
        self.support_start() - EXPONENTIAL_TAIL_MASS.ln() / self.beta
    }

    fn lorenz(&self, p: f64) -> f64 {
        let q = 1.0 - p;
        let tail = if q > 0.0 { q * q.ln() } else { 0.0 };
        (self.support_start() * p + (p + tail) / self.beta) / self.mean()
    }

    fn gini(&self) -> f64 {
        gini_exponential(self.alpha).expect("alpha validated on construction")
    }
}

/// Pareto income density on `[scale_a, inf)` with tail exponent `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ParetoModel {
    gamma: f64,
    scale_a: f64,
}

impl ParetoModel {
    pub fn new(gamma: f64, scale_a: f64) -> Result<Self, ModelError> {
        if !(gamma.is_finite() && gamma >= 1.0) {
            return Err(ModelError::InvalidGamma(gamma));
        }
        if !(scale_a.is_finite() && scale_a > 0.0) {
            return Err(ModelError::InvalidScale(scale_a));
        }
        Ok(Self { gamma, scale_a })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn scale(&self) -> f64 {
        self.scale_a
    }
}

impl IncomeDensity for ParetoModel {
    fn pdf(&self, x: f64) -> f64 {
        if x < self.scale_a {
            0.0
        } else {
            self.gamma / self.scale_a * (self.scale_a / x).powf(self.gamma + 1.0)
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= self.scale_a {
            0.0
        } else {
            1.0 - (self.scale_a / x).powf(self.gamma)
        }
    }

    fn mean(&self) -> f64 {
        if self.gamma > 1.0 {
            self.gamma * self.scale_a / (self.gamma - 1.0)
        } else {
            f64::INFINITY
        }
    }

    fn quantile(&self, p: f64) -> Result<f64, ModelError> {
        check_probability(p)?;
        Ok(self.scale_a * (1.0 - p).powf(-1.0 / self.gamma))
    }

    fn support_start(&self) -> f64 {
        self.scale_a
    }

    /// Far enough that the neglected tail holds less than `1e-16` of the
    /// population and less than `1e-8` of the income.
    fn default_truncation(&self) -> f64 {
        if self.gamma <= 1.0 {
            return f64::INFINITY;
        }
        let decades = (8.0 / (self.gamma - 1.0)).max(16.0 / self.gamma).min(300.0);
        self.scale_a * 10f64.powf(decades)
    }

    fn lorenz(&self, p: f64) -> f64 {
        if p >= 1.0 {
            return 1.0;
        }
        1.0 - (1.0 - p).powf(1.0 - 1.0 / self.gamma)
    }

    fn gini(&self) -> f64 {
        gini_pareto(self.gamma).expect("gamma validated on construction")
    }
}

/// Uniform income density on `[low, high]`; Gini `(high - low) / (3 (high + low))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformModel {
    low: f64,
    high: f64,
}

impl UniformModel {
    pub fn new(low: f64, high: f64) -> Result<Self, ModelError> {
        if !(low.is_finite() && high.is_finite() && low >= 0.0 && high > low) {
            return Err(ModelError::InvalidSupport(low, high));
        }
        Ok(Self { low, high })
    }
}

impl IncomeDensity for UniformModel {
    fn pdf(&self, x: f64) -> f64 {
        if x < self.low || x > self.high {
            0.0
        } else {
            1.0 / (self.high - self.low)
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        ((x - self.low) / (self.high - self.low)).clamp(0.0, 1.0)
    }

    fn mean(&self) -> f64 {
        0.5 * (self.low + self.high)
    }

    fn quantile(&self, p: f64) -> Result<f64, ModelError> {
        check_probability(p)?;
        Ok(self.low + p * (self.high - self.low))
    }

    fn support_start(&self) -> f64 {
        self.low
    }

    fn default_truncation(&self) -> f64 {
        self.high
    }

    fn lorenz(&self, p: f64) -> f64 {
        (self.low * p + 0.5 * (self.high - self.low) * p * p) / self.mean()
    }

    fn gini(&self) -> f64 {
        (self.high - self.low) / (3.0 * (self.high + self.low))
    }
}

/// `1 / (2 (1 - alpha))`, in `[0, 0.5]` for `alpha <= 0`.
pub fn gini_exponential(alpha: f64) -> Result<f64, ModelError> {
    if !(alpha <= 0.0) {
        return Err(ModelError::InvalidAlpha(alpha));
    }
    Ok(0.5 / (1.0 - alpha))
}

/// `1 / (2 gamma - 1)`, in `(0, 1]` for `gamma >= 1`.
pub fn gini_pareto(gamma: f64) -> Result<f64, ModelError> {
    if !(gamma >= 1.0) {
        return Err(ModelError::InvalidGamma(gamma));
    }
    Ok(1.0 / (2.0 * gamma - 1.0))
}

/// Quadrature estimate of a Gini coefficient with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GiniEstimate {
    pub value: f64,
    pub abs_error: f64,
    /// Integrated density mass over the support.
    pub mass: f64,
    pub mean: f64,
}

/// Mass tolerance for the normalization precondition.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

/// Evaluates `G = (2 / mu) * int_start^end x (F(x) - 1/2) f(x) dx`.
///
/// `F` is accumulated from the density itself: a first adaptive pass over
/// `f` fixes a partition and the cdf at its breakpoints; inside a segment
/// `F(x)` is the breakpoint value plus one Kronrod rule on `[left, x]`.
pub fn gini_numeric<F: Fn(f64) -> f64>(
    pdf: F,
    support_start: f64,
    support_end: f64,
    mean_hint: Option<f64>,
) -> Result<GiniEstimate, ModelError> {
    if !(support_start.is_finite() && support_end.is_finite() && support_end > support_start) {
        return Err(ModelError::InvalidSupport(support_start, support_end));
    }
    if let Some(m) = mean_hint {
        if !m.is_finite() {
            return Err(ModelError::NonFiniteMean);
        }
    }
    let tight = AdaptiveOptions {
        abs_tol: 1e-14,
        rel_tol: 1e-14,
        max_segments: 20_000,
    };
    let mass_pass = integrate(&pdf, support_start, support_end, tight);
    let mass = mass_pass.estimate.value;
    if !((mass - 1.0).abs() <= NORMALIZATION_TOLERANCE) {
        return Err(ModelError::NotNormalized { mass });
    }

    let (mean, mean_err) = match mean_hint {
        Some(m) => (m, 0.0),
        None => {
            let first = |x: f64| x * pdf(x);
            let breaks: Vec<f64> = mass_pass
                .partition
                .iter()
                .map(|s| s.0)
                .chain(std::iter::once(support_end))
                .collect();
            let r = integrate_adaptive(&first, &breaks, tight);
            (r.estimate.value, r.estimate.error)
        }
    };
    if !mean.is_finite() {
        return Err(ModelError::NonFiniteMean);
    }
    if mean <= 0.0 {
        return Err(ModelError::NonPositiveMean(mean));
    }

    let starts: Vec<f64> = mass_pass.partition.iter().map(|s| s.0).collect();
    let mut cumulative = Vec::with_capacity(starts.len());
    let mut acc = 0.0;
    for seg in &mass_pass.partition {
        cumulative.push(acc);
        acc += seg.2.value;
    }
    let cdf_error = mass_pass.estimate.error;
    let cdf = |x: f64| {
        let i = starts.partition_point(|&s| s <= x).saturating_sub(1);
        if x <= starts[i] {
            cumulative[i]
        } else {
            cumulative[i] + gauss_kronrod21(&pdf, starts[i], x).value
        }
    };
    let integrand = |x: f64| x * (cdf(x) - 0.5) * pdf(x);
    let breaks: Vec<f64> = starts.iter().copied().chain(std::iter::once(support_end)).collect();
    let gini_pass = integrate_adaptive(
        &integrand,
        &breaks,
        AdaptiveOptions {
            abs_tol: 1e-12 * mean,
            rel_tol: 1e-13,
            max_segments: 20_000,
        },
    );
    let value = 2.0 / mean * gini_pass.estimate.value;
    let abs_error =
        2.0 / mean * gini_pass.estimate.error + value.abs() * mean_err / mean + 2.0 * cdf_error;
    Ok(GiniEstimate {
        value,
        abs_error,
        mass,
        mean,
    })
}

/// [`gini_numeric`] on a model's density, truncated at `upper` or at the
/// model's default truncation point.
pub fn gini_numeric_model<M: IncomeDensity + ?Sized>(
    model: &M,
    upper: Option<f64>,
) -> Result<GiniEstimate, ModelError> {
    if !model.mean().is_finite() {
        return Err(ModelError::NonFiniteMean);
    }
    let end = upper.unwrap_or_else(|| model.default_truncation());
    gini_numeric(|x| model.pdf(x), model.support_start(), end, None)
}

/// Gini of a finite sample, `sum (2i - n - 1) x_(i) / (n sum x)` over the
/// ascending order statistics. Equals one minus twice the trapezoidal area
/// under the sample Lorenz curve.
pub fn empirical_gini(samples: &[f64]) -> Result<f64, ModelError> {
    let sorted = sorted_income(samples)?;
    let n = sorted.len() as f64;
    let total: f64 = sorted.iter().sum();
    if total <= 0.0 {
        return Err(ModelError::ZeroTotal);
    }
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| (2.0 * (i as f64 + 1.0) - n - 1.0) * x)
        .sum();
    Ok(weighted / (n * total))
}

fn sorted_income(samples: &[f64]) -> Result<Vec<f64>, ModelError> {
    if samples.is_empty() {
        return Err(ModelError::EmptySample);
    }
    if let Some(&bad) = samples.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(ModelError::InvalidSample(bad));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted)
}

pub enum LorenzSource<'a> {
    Model(&'a dyn IncomeDensity),
    Samples(&'a [f64]),
}

/// Lorenz curve at `points` equally spaced population shares from 0 to 1.
pub fn lorenz_curve(source: LorenzSource<'_>, points: usize) -> Result<Vec<(f64, f64)>, ModelError> {
    if points < 2 {
        return Err(ModelError::TooFewPoints(points));
    }
    let shares = (0..points).map(|i| i as f64 / (points - 1) as f64);
    match source {
        LorenzSource::Model(model) => Ok(shares
            .map(|p| {
                let l = if p == 0.0 {
                    0.0
                } else if p == 1.0 {
                    1.0
                } else {
                    model.lorenz(p)
                };
                (p, l)
            })
            .collect()),
        LorenzSource::Samples(samples) => {
            let sorted = sorted_income(samples)?;
            let total: f64 = sorted.iter().sum();
            if total <= 0.0 {
                return Err(ModelError::ZeroTotal);
            }
            let n = sorted.len();
            let mut cumulative = Vec::with_capacity(n + 1);
            cumulative.push(0.0);
            let mut acc = 0.0;
            for x in &sorted {
                acc += x;
                cumulative.push(acc / total);
            }
            cumulative[n] = 1.0;
            Ok(shares
                .map(|p| {
                    let t = p * n as f64;
                    let i = (t.floor() as usize).min(n);
                    let l = if i == n {
                        1.0
                    } else {
                        let frac = t - i as f64;
                        cumulative[i] + frac * (cumulative[i + 1] - cumulative[i])
                    };
                    (p, l)
                })
                .collect())
        }
    }
}

/// `1 - 2 * area` under a Lorenz polygon, by the trapezoid rule.
pub fn gini_from_lorenz(curve: &[(f64, f64)]) -> f64 {
    let area: f64 = curve
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum();
    1.0 - 2.0 * area
}

/// Two-column CSV `population_share,income_share`.
pub fn write_lorenz_csv<W: Write>(curve: &[(f64, f64)], mut out: W) -> std::io::Result<()> {
    writeln!(out, "population_share,income_share")?;
    for (p, l) in curve {
        writeln!(out, "{p:.6},{l:.6}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    #[test]
    fn exponential_fixtures() {
        let m = ExponentialModel::new(0.0, 1.0).unwrap();
        assert!((m.cdf(2f64.ln()) - 0.5).abs() < 1e-15);
        let m = ExponentialModel::new(-1.0, 1.0).unwrap();
        assert_eq!(m.mean(), 2.0);
        assert_eq!(m.support_start(), 1.0);
        assert_eq!(m.pdf(0.5), 0.0);
        assert_eq!(m.pdf(1.0), 1.0);
    }

    #[test]
    fn pareto_fixtures() {
        let m = ParetoModel::new(2.0, 1.0).unwrap();
        assert!((m.cdf(2.0) - 0.75).abs() < 1e-15);
        assert_eq!(m.pdf(0.5), 0.0);
        assert_eq!(m.mean(), 2.0);
        assert!(ParetoModel::new(1.0, 1.0).unwrap().mean().is_infinite());
    }

    #[test]
    fn densities_integrate_to_one_and_match_means() {
        let e = ExponentialModel::new(-2.5, 0.7).unwrap();
        let p = ParetoModel::new(3.0, 2.0).unwrap();
        let models: [&dyn IncomeDensity; 2] = [&e, &p];
        for m in models {
            let opts = AdaptiveOptions::default();
            let end = m.default_truncation();
            let mass = integrate(&|x| m.pdf(x), m.support_start(), end, opts).estimate.value;
            assert!((mass - 1.0).abs() < 1e-8, "mass {mass}");
            let mean = integrate(&|x| x * m.pdf(x), m.support_start(), end, opts).estimate.value;
            assert!(((mean - m.mean()) / m.mean()).abs() < 1e-8, "mean {mean}");
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        let e = ExponentialModel::new(-0.5, 2.0).unwrap();
        let p = ParetoModel::new(1.7, 3.0).unwrap();
        for u in [0.0, 0.1, 0.5, 0.9, 0.999] {
            assert!((e.cdf(e.quantile(u).unwrap()) - u).abs() < 1e-12);
            assert!((p.cdf(p.quantile(u).unwrap()) - u).abs() < 1e-12);
        }
        assert!(e.quantile(1.5).is_err());
    }

    #[test]
    fn closed_form_ginis() {
        assert_eq!(gini_exponential(0.0).unwrap(), 0.5);
        assert_eq!(gini_exponential(-1.0).unwrap(), 0.25);
        assert!((gini_exponential(-4.0).unwrap() - 0.1).abs() < 1e-15);
        assert!(matches!(gini_exponential(0.1), Err(ModelError::InvalidAlpha(_))));
        assert_eq!(gini_pareto(1.0).unwrap(), 1.0);
        assert_eq!(gini_pareto(1.5).unwrap(), 0.5);
        assert!((gini_pareto(3.0).unwrap() - 0.2).abs() < 1e-15);
        assert!(matches!(gini_pareto(0.9), Err(ModelError::InvalidGamma(_))));
    }

    #[test]
    fn numeric_gini_of_uniform() {
        let g = gini_numeric(|x| if (0.0..=1.0).contains(&x) { 1.0 } else { 0.0 }, 0.0, 1.0, None)
            .unwrap();
        assert!((g.value - 1.0 / 3.0).abs() < 1e-7);
        assert!(g.abs_error <= 1e-7);
    }

    #[test]
    fn numeric_gini_of_narrow_uniform_vanishes() {
        let mut last = f64::INFINITY;
        for delta in [0.5, 0.05, 0.005] {
            let m = UniformModel::new(1.0 - delta, 1.0 + delta).unwrap();
            let g = gini_numeric_model(&m, None).unwrap().value;
            assert!(g < last);
            assert!((g - delta / 3.0).abs() < 1e-9);
            last = g;
        }
        assert!(last < 2e-3);
    }

    #[test]
    fn numeric_gini_matches_closed_forms() {
        let e = ExponentialModel::new(0.0, 1.0).unwrap();
        assert!((gini_numeric_model(&e, None).unwrap().value - 0.5).abs() < 1e-6);
        let e = ExponentialModel::new(-4.0, 1.3).unwrap();
        assert!((gini_numeric_model(&e, None).unwrap().value - 0.1).abs() < 1e-6);
        let p = ParetoModel::new(3.0, 1.0).unwrap();
        let g = gini_numeric_model(&p, Some(1e6)).unwrap();
        assert!((g.value - 0.2).abs() < 1e-4);
    }

    #[test]
    fn pareto_gamma_one_refuses_numeric_check() {
        let p = ParetoModel::new(1.0, 1.0).unwrap();
        assert_eq!(p.gini(), 1.0);
        assert_eq!(gini_numeric_model(&p, None), Err(ModelError::NonFiniteMean));
    }

    #[test]
    fn non_normalized_density_is_rejected() {
        let r = gini_numeric(|_| 2.0, 0.0, 1.0, None);
        assert!(matches!(r, Err(ModelError::NotNormalized { .. })));
        let r = gini_numeric(|_| 1.0, 0.0, 1.0, Some(f64::INFINITY));
        assert_eq!(r, Err(ModelError::NonFiniteMean));
    }

    #[test]
    fn lorenz_curves_reproduce_ginis() {
        let e = ExponentialModel::new(0.0, 1.0).unwrap();
        let c = lorenz_curve(LorenzSource::Model(&e), 10_000).unwrap();
        assert_eq!(c[0], (0.0, 0.0));
        assert_eq!(*c.last().unwrap(), (1.0, 1.0));
        assert!((gini_from_lorenz(&c) - 0.5).abs() < 1e-3);
        let p = ParetoModel::new(2.0, 1.0).unwrap();
        let c = lorenz_curve(LorenzSource::Model(&p), 10_000).unwrap();
        assert!((gini_from_lorenz(&c) - 1.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn lorenz_curve_of_equal_incomes_is_diagonal() {
        let c = lorenz_curve(LorenzSource::Samples(&[3.0; 7]), 11).unwrap();
        for (p, l) in c {
            assert!((p - l).abs() < 1e-12);
        }
    }

    #[test]
    fn lorenz_curve_is_convex_and_monotone() {
        let e = ExponentialModel::new(-0.3, 0.5).unwrap();
        let c = lorenz_curve(LorenzSource::Model(&e), 200).unwrap();
        for w in c.windows(3) {
            let s1 = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            let s2 = (w[2].1 - w[1].1) / (w[2].0 - w[1].0);
            assert!(w[1].1 >= w[0].1 && s2 >= s1 - 1e-12);
        }
    }

    #[test]
    fn empirical_gini_matches_lorenz_trapezoid() {
        let x = [1.0, 5.0, 2.0, 9.0, 0.0, 3.0];
        let c = lorenz_curve(LorenzSource::Samples(&x), x.len() + 1).unwrap();
        assert!((empirical_gini(&x).unwrap() - gini_from_lorenz(&c)).abs() < 1e-12);
        assert_eq!(empirical_gini(&[2.0, 2.0]).unwrap(), 0.0);
        assert!((empirical_gini(&[6.0, 0.0, 0.0]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn sampling_is_reproducible() {
        let e = ExponentialModel::new(0.0, 1.0).unwrap();
        assert_eq!(e.sample(7, 100), e.sample(7, 100));
        assert_ne!(e.sample(7, 100), e.sample(8, 100));
    }

    #[test]
    fn lorenz_csv_layout() {
        let mut buf = Vec::new();
        write_lorenz_csv(&[(0.0, 0.0), (1.0, 1.0)], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "population_share,income_share\n0.000000,0.000000\n1.000000,1.000000\n"
        );
    }
}
