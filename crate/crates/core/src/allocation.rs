//! Income allocations, level-histogram distributions and multiplicity counting.
//!
//! An [`IncomeAllocation`] assigns a non-negative income to each of `N`
//! consumers with a fixed total. Grouping allocations by how many consumers
//! sit at each income level gives a [`DiscreteIncomeDistribution`]; the number
//! of allocations that share one distribution is the multinomial coefficient
//! `N! / (a_1! a_2! ... a_n!)`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

/// Relative tolerance used when checking that incomes add up to the total.
pub const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AllocationError {
    #[error("allocation has no consumers")]
    EmptyAllocation,
    #[error("consumer {index} has negative income {value}")]
    NegativeIncome { index: usize, value: f64 },
    #[error("incomes sum to {sum}, expected total {total}")]
    SumMismatch { sum: f64, total: f64 },
    #[error("non-finite value in allocation")]
    NonFinite,
    #[error("income levels must be strictly increasing (violated at index {0})")]
    LevelsNotIncreasing(usize),
    #[error("levels and counts differ in length ({levels} vs {counts})")]
    LengthMismatch { levels: usize, counts: usize },
    #[error("distribution has no income levels")]
    NoLevels,
    #[error("distribution population is zero")]
    EmptyPopulation,
}

/// A realized assignment of incomes to consumers.
#[derive(Debug, Clone, PartialEq)]
pub struct IncomeAllocation {
    incomes: Vec<f64>,
    total: f64,
}

impl IncomeAllocation {
    pub fn incomes(&self) -> &[f64] {
        &self.incomes
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn consumers(&self) -> usize {
        self.incomes.len()
    }

    pub fn into_incomes(self) -> Vec<f64> {
        self.incomes
    }

    /// Builds an allocation whose total is taken to be the (compensated) sum
    /// of its incomes. Used by simulators that track the total themselves.
    pub(crate) fn from_parts_unchecked(incomes: Vec<f64>, total: f64) -> Self {
        Self { incomes, total }
    }
}

/// Checks non-negativity and the budget identity `sum(incomes) == total`.
pub fn validate_allocation(
    incomes: &[f64],
    total: f64,
) -> Result<IncomeAllocation, AllocationError> {
    if incomes.is_empty() {
        return Err(AllocationError::EmptyAllocation);
    }
    if !total.is_finite() {
        return Err(AllocationError::NonFinite);
    }
    for (index, &value) in incomes.iter().enumerate() {
        if !value.is_finite() {
            return Err(AllocationError::NonFinite);
        }
        if value < 0.0 {
            return Err(AllocationError::NegativeIncome { index, value });
        }
    }
    let sum = kahan_sum(incomes.iter().copied());
    if (sum - total).abs() > SUM_TOLERANCE * total.abs() {
        return Err(AllocationError::SumMismatch { sum, total });
    }
    Ok(IncomeAllocation {
        incomes: incomes.to_vec(),
        total,
    })
}

/// Occupation counts over a strictly increasing grid of income levels.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteIncomeDistribution {
    levels: Vec<f64>,
    counts: Vec<u64>,
}

impl DiscreteIncomeDistribution {
    pub fn new(levels: Vec<f64>, counts: Vec<u64>) -> Result<Self, AllocationError> {
        check_levels(&levels)?;
        if levels.len() != counts.len() {
            return Err(AllocationError::LengthMismatch {
                levels: levels.len(),
                counts: counts.len(),
            });
        }
        Ok(Self { levels, counts })
    }

    /// Distribution over the unit grid `1, 2, ..., n`. Handy when only the
    /// counts matter (multiplicity does not depend on the levels).
    pub fn from_counts(counts: Vec<u64>) -> Result<Self, AllocationError> {
        let levels = (1..=counts.len()).map(|k| k as f64).collect();
        Self::new(levels, counts)
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn population(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn total_income(&self) -> f64 {
        kahan_sum(
            self.counts
                .iter()
                .zip(&self.levels)
                .map(|(&c, &e)| c as f64 * e),
        )
    }

    /// Expands the histogram into one allocation (consumers sorted by level).
    pub fn to_allocation(&self) -> IncomeAllocation {
        let incomes: Vec<f64> = self
            .counts
            .iter()
            .zip(&self.levels)
            .flat_map(|(&c, &e)| std::iter::repeat_n(e, c as usize))
            .collect();
        let total = self.total_income();
        IncomeAllocation { incomes, total }
    }
}

pub(crate) fn check_levels(levels: &[f64]) -> Result<(), AllocationError> {
    if levels.is_empty() {
        return Err(AllocationError::NoLevels);
    }
    if levels.iter().any(|x| !x.is_finite()) {
        return Err(AllocationError::NonFinite);
    }
    for (i, w) in levels.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(AllocationError::LevelsNotIncreasing(i + 1));
        }
    }
    Ok(())
}

/// Number of allocations realizing a distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicityResult {
    /// Exact count, when it was computed.
    pub exact: Option<BigUint>,
    /// Natural logarithm of the count.
    pub log_value: f64,
}

/// Exact multinomial coefficient `N! / prod(a_k!)`.
pub fn multiplicity(dist: &DiscreteIncomeDistribution) -> Result<MultiplicityResult, AllocationError> {
    if dist.population() == 0 {
        return Err(AllocationError::EmptyPopulation);
    }
    let exact = multinomial(dist.counts());
    let log_value = ln_biguint(&exact);
    Ok(MultiplicityResult {
        exact: Some(exact),
        log_value,
    })
}

/// `ln Omega` from log-factorials, without the exact integer. Suitable for
/// populations where the exact coefficient would be enormous.
pub fn log_multiplicity(dist: &DiscreteIncomeDistribution) -> Result<MultiplicityResult, AllocationError> {
    let n = dist.population();
    if n == 0 {
        return Err(AllocationError::EmptyPopulation);
    }
    let log_value = ln_factorial(n) - dist.counts().iter().map(|&a| ln_factorial(a)).sum::<f64>();
    Ok(MultiplicityResult {
        exact: None,
        log_value,
    })
}

/// Stirling form `N(ln N - 1) - sum a_k (ln a_k - 1)`, with empty levels
/// contributing nothing.
pub fn log_multiplicity_stirling(dist: &DiscreteIncomeDistribution) -> Result<f64, AllocationError> {
    let n = dist.population();
    if n == 0 {
        return Err(AllocationError::EmptyPopulation);
    }
    let term = |m: u64| {
        if m == 0 {
            0.0
        } else {
            let m = m as f64;
            m * (m.ln() - 1.0)
        }
    };
    Ok(term(n) - dist.counts().iter().map(|&a| term(a)).sum::<f64>())
}

/// Exact multinomial coefficient of a count sequence. Builds the product of
/// binomials `C(a_1 + .. + a_k, a_k)` so every intermediate is an integer.
pub fn multinomial(counts: &[u64]) -> BigUint {
    let mut acc = BigUint::one();
    let mut filled: u64 = 0;
    for &a in counts {
        for j in 1..=a {
            filled += 1;
            acc *= filled;
            acc /= j;
        }
    }
    acc
}

/// Natural log of an arbitrary-precision integer, accurate to about one ulp.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().map(f64::ln).unwrap_or(f64::NAN);
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::NAN);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `ln(m!)`; exact summation for small `m`, Stirling series beyond.
pub fn ln_factorial(m: u64) -> f64 {
    if m < 2 {
        return 0.0;
    }
    if m <= 256 {
        return (2..=m).map(|k| (k as f64).ln()).sum();
    }
    let x = m as f64 + 1.0;
    // ln Gamma(x) asymptotic series
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

pub(crate) fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
