//! Maximum-multiplicity distributions over a level grid.
//!
//! Two regimes: exhaustive enumeration of every integer count sequence that
//! meets the population and income constraints (exact, small `N`), and the
//! continuous Lagrange solution `a_k = exp(-(alpha + beta * e_k))` found by a
//! safeguarded Newton iteration (any `N`).

use num_bigint::BigUint;
use num_traits::Zero;
use thiserror::Error;

use crate::allocation::{
    check_levels, ln_biguint, multinomial, AllocationError, DiscreteIncomeDistribution,
    MultiplicityResult,
};

/// Default cap on the number of count sequences an enumeration may visit.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaxentError {
    #[error(transparent)]
    Allocation(#[from] AllocationError),
    #[error("population must be at least one")]
    EmptyPopulation,
    #[error("tolerance must be non-negative")]
    NegativeTolerance,
    #[error("no count sequence satisfies the constraints")]
    Infeasible,
    #[error("enumeration would visit {projected} count sequences (cap {cap})")]
    TooLarge { projected: f64, cap: u64 },
    #[error("mean income {mean} lies outside the level range [{min}, {max}]")]
    InfeasibleMean { mean: f64, min: f64, max: f64 },
    #[error("Newton iteration did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

/// How the income constraint `sum a_k e_k = total` is matched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IncomeConstraint {
    /// `1e-9 * |total|` absolute, or exact integer matching when all levels
    /// and the total are integers.
    Default,
    /// Absolute tolerance on the income sum. `f64::INFINITY` drops the
    /// constraint entirely.
    Tolerance(f64),
    /// Population constraint only.
    Unconstrained,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnumerationOptions {
    pub income: IncomeConstraint,
    pub cap: u64,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        Self {
            income: IncomeConstraint::Default,
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnumerationResult {
    pub candidates: Vec<(DiscreteIncomeDistribution, MultiplicityResult)>,
    pub argmax_index: usize,
    /// All indices attaining the maximal multiplicity, ascending.
    pub ties: Vec<usize>,
}

impl EnumerationResult {
    pub fn argmax(&self) -> &DiscreteIncomeDistribution {
        &self.candidates[self.argmax_index].0
    }

    pub fn max_multiplicity(&self) -> &BigUint {
        exact(&self.candidates[self.argmax_index].1)
    }

    /// Sum of multiplicities over all candidates: the number of allocations.
    pub fn total_allocations(&self) -> BigUint {
        self.candidates.iter().map(|(_, m)| exact(m)).sum()
    }

    /// `Omega(argmax) / sum Omega`, the probability of the most likely
    /// distribution when every allocation is equally likely.
    pub fn argmax_probability(&self) -> f64 {
        (ln_biguint(self.max_multiplicity()) - ln_biguint(&self.total_allocations())).exp()
    }
}

fn exact(m: &MultiplicityResult) -> &BigUint {
    m.exact.as_ref().expect("enumeration always stores exact counts")
}

enum Matcher {
    Any,
    Integer { levels: Vec<i128>, total: i128 },
    Float { tolerance: f64 },
}

fn is_integral(x: f64) -> bool {
    x.fract() == 0.0 && x.abs() < 9.0e15
}

fn build_matcher(levels: &[f64], total: f64, income: IncomeConstraint) -> Result<Matcher, MaxentError> {
    match income {
        IncomeConstraint::Unconstrained => Ok(Matcher::Any),
        IncomeConstraint::Tolerance(t) if t.is_infinite() && t > 0.0 => Ok(Matcher::Any),
        IncomeConstraint::Tolerance(t) if t.is_nan() || t < 0.0 => Err(MaxentError::NegativeTolerance),
        IncomeConstraint::Tolerance(t) => Ok(Matcher::Float { tolerance: t }),
        IncomeConstraint::Default => {
            if levels.iter().all(|&e| is_integral(e)) && is_integral(total) {
                Ok(Matcher::Integer {
                    levels: levels.iter().map(|&e| e as i128).collect(),
                    total: total as i128,
                })
            } else {
                Ok(Matcher::Float {
                    tolerance: 1e-9 * total.abs(),
                })
            }
        }
    }
}

/// Number of non-negative integer sequences of length `n` summing to `agents`.
fn composition_count(agents: u64, n: usize) -> f64 {
    // C(agents + n - 1, n - 1) in floating point; only compared to a cap.
    let mut acc = 1.0;
    for i in 1..n {
        acc *= (agents as f64 + i as f64) / i as f64;
        if !acc.is_finite() {
            return f64::INFINITY;
        }
    }
    acc
}

/// Every count sequence with `sum a_k = agents` and income matching `total`,
/// in lexicographic order, with exact multiplicities.
pub fn enumerate_distributions(
    levels: &[f64],
    agents: u64,
    total: f64,
    options: EnumerationOptions,
) -> Result<EnumerationResult, MaxentError> {
    check_levels(levels)?;
    if agents == 0 {
        return Err(MaxentError::EmptyPopulation);
    }
    let matcher = build_matcher(levels, total, options.income)?;
    let projected = composition_count(agents, levels.len());
    if projected > options.cap as f64 {
        return Err(MaxentError::TooLarge {
            projected,
            cap: options.cap,
        });
    }

    let mut out = Vec::new();
    let mut counts = vec![0u64; levels.len()];
    search(levels, &matcher, total, 0, agents, &mut counts, &mut out);
    if out.is_empty() {
        return Err(MaxentError::Infeasible);
    }

    let candidates: Vec<_> = out
        .into_iter()
        .map(|counts| {
            let omega = multinomial(&counts);
            let log_value = ln_biguint(&omega);
            let dist = DiscreteIncomeDistribution::new(levels.to_vec(), counts)
                .expect("levels already validated");
            (
                dist,
                MultiplicityResult {
                    exact: Some(omega),
                    log_value,
                },
            )
        })
        .collect();

    let mut best = BigUint::zero();
    let mut ties = Vec::new();
    for (i, (_, m)) in candidates.iter().enumerate() {
        let omega = exact(m);
        match omega.cmp(&best) {
            std::cmp::Ordering::Greater => {
                best = omega.clone();
                ties.clear();
                ties.push(i);
            }
            std::cmp::Ordering::Equal => ties.push(i),
            std::cmp::Ordering::Less => {}
        }
    }
    Ok(EnumerationResult {
        candidates,
        argmax_index: ties[0],
        ties,
    })
}

fn search(
    levels: &[f64],
    matcher: &Matcher,
    total: f64,
    pos: usize,
    remaining: u64,
    counts: &mut Vec<u64>,
    out: &mut Vec<Vec<u64>>,
) {
    let last = levels.len() - 1;
    if pos == last {
        counts[pos] = remaining;
        if accepts(levels, matcher, total, counts) {
            out.push(counts.clone());
        }
        counts[pos] = 0;
        return;
    }
    for a in 0..=remaining {
        counts[pos] = a;
        if feasible_prefix(levels, matcher, total, pos, remaining - a, counts) {
            search(levels, matcher, total, pos + 1, remaining - a, counts, out);
        }
    }
    counts[pos] = 0;
}

/// Can the agents left after filling `counts[..=pos]` still hit the total?
fn feasible_prefix(
    levels: &[f64],
    matcher: &Matcher,
    total: f64,
    pos: usize,
    left: u64,
    counts: &[u64],
) -> bool {
    match matcher {
        Matcher::Any => true,
        Matcher::Integer { levels: il, total } => {
            let used: i128 = counts[..=pos].iter().zip(il).map(|(&c, &e)| c as i128 * e).sum();
            let lo = used + left as i128 * il[pos + 1];
            let hi = used + left as i128 * il[il.len() - 1];
            lo <= *total && *total <= hi
        }
        Matcher::Float { tolerance } => {
            let used: f64 = counts[..=pos].iter().zip(levels).map(|(&c, &e)| c as f64 * e).sum();
            let lo = used + left as f64 * levels[pos + 1];
            let hi = used + left as f64 * levels[levels.len() - 1];
            lo - tolerance <= total && total <= hi + tolerance
        }
    }
}

fn accepts(levels: &[f64], matcher: &Matcher, total: f64, counts: &[u64]) -> bool {
    match matcher {
        Matcher::Any => true,
        Matcher::Integer { levels: il, total } => {
            counts.iter().zip(il).map(|(&c, &e)| c as i128 * e).sum::<i128>() == *total
        }
        Matcher::Float { tolerance } => {
            let income: f64 = counts.iter().zip(levels).map(|(&c, &e)| c as f64 * e).sum();
            (income - total).abs() <= *tolerance
        }
    }
}

/// Count sequence with the largest exact multiplicity. Ties go to the
/// lexicographically smallest sequence.
pub fn argmax_multiplicity(
    levels: &[f64],
    agents: u64,
    total: f64,
) -> Result<DiscreteIncomeDistribution, MaxentError> {
    let result = enumerate_distributions(levels, agents, total, EnumerationOptions::default())?;
    Ok(result.argmax().clone())
}

/// Lagrange multipliers of the continuous problem.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BoltzmannParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BoltzmannParams {
    /// `alpha <= 0` and `beta >= 0`, up to `tol`.
    pub fn satisfies_sign_convention(&self, tol: f64) -> bool {
        self.alpha <= tol && self.beta >= -tol
    }

    /// Real-valued occupancy `exp(-(alpha + beta * level))`.
    pub fn occupancy(&self, level: f64) -> f64 {
        (-(self.alpha + self.beta * level)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Relative residual target for both constraints.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoltzmannSolution {
    pub params: BoltzmannParams,
    /// Continuous counts, one per level.
    pub counts: Vec<f64>,
    pub iterations: usize,
    /// `|sum a_k - N| / N`
    pub population_residual: f64,
    /// `|sum a_k e_k - total| / |total|`
    pub income_residual: f64,
}

impl BoltzmannSolution {
    /// Whether the multipliers follow `alpha <= 0, beta >= 0`. Violations are
    /// reported rather than clamped.
    pub fn sign_violation(&self) -> bool {
        !self.params.satisfies_sign_convention(1e-12)
    }
}

/// Weighted moments of the levels under weights `exp(-beta * e)`.
struct Moments {
    log_partition: f64,
    mean: f64,
    variance: f64,
}

fn moments(levels: &[f64], beta: f64) -> Moments {
    let reference = if beta >= 0.0 {
        levels[0]
    } else {
        levels[levels.len() - 1]
    };
    let mut z = 0.0;
    let mut first = 0.0;
    for &e in levels {
        let w = (-beta * (e - reference)).exp();
        z += w;
        first += w * e;
    }
    let mean = first / z;
    let variance = levels
        .iter()
        .map(|&e| {
            let w = (-beta * (e - reference)).exp();
            w * (e - mean) * (e - mean)
        })
        .sum::<f64>()
        / z;
    Moments {
        log_partition: -beta * reference + z.ln(),
        mean,
        variance,
    }
}

/// Solves `sum exp(-(alpha + beta e_k)) = N` and
/// `sum e_k exp(-(alpha + beta e_k)) = total` for `(alpha, beta)`.
///
/// The population equation is solved in closed form for `alpha` given
/// `beta`, leaving a scalar equation in `beta` that is monotone; it is
/// solved by Newton steps from `beta = 0` (the uniform occupancy
/// `alpha = -ln(N / n)`), falling back to bisection whenever a step leaves
/// the current bracket.
pub fn solve_boltzmann(
    levels: &[f64],
    agents: u64,
    total: f64,
    options: NewtonOptions,
) -> Result<BoltzmannSolution, MaxentError> {
    check_levels(levels)?;
    if agents == 0 {
        return Err(MaxentError::EmptyPopulation);
    }
    let n_agents = agents as f64;
    let target = total / n_agents;
    let (min, max) = (levels[0], levels[levels.len() - 1]);
    let scale = if total != 0.0 { total.abs() } else { 1.0 };

    if levels.len() == 1 {
        if (target - min).abs() * n_agents > options.tolerance * scale {
            return Err(MaxentError::InfeasibleMean { mean: target, min, max });
        }
        return Ok(finish(levels, n_agents, total, 0.0, 0));
    }
    if !(target > min && target < max) {
        return Err(MaxentError::InfeasibleMean { mean: target, min, max });
    }

    let spread = max - min;
    let income_residual = |m: &Moments| (m.mean - target).abs() * n_agents / scale;

    let mut beta = 0.0;
    let mut lo = f64::NEG_INFINITY; // mean(lo) > target
    let mut hi = f64::INFINITY; // mean(hi) < target
    let mut last_residual = f64::INFINITY;
    for iteration in 0..options.max_iterations {
        let m = moments(levels, beta);
        let residual = income_residual(&m);
        last_residual = residual;
        if residual <= options.tolerance {
            let sol = finish(levels, n_agents, total, beta, iteration);
            if sol.income_residual <= options.tolerance
                && sol.population_residual <= options.tolerance
            {
                return Ok(sol);
            }
        }
        if m.mean > target {
            lo = lo.max(beta);
        } else {
            hi = hi.min(beta);
        }
        let mut next = if m.variance > 0.0 {
            beta + (m.mean - target) / m.variance
        } else {
            f64::NAN
        };
        if !(next.is_finite() && next > lo && next < hi) || next == beta {
            next = match (lo.is_finite(), hi.is_finite()) {
                (true, true) => 0.5 * (lo + hi),
                (true, false) => lo + (lo.abs() + 1.0 / spread) * 2.0,
                (false, true) => hi - (hi.abs() + 1.0 / spread) * 2.0,
                (false, false) => unreachable!("one side is always bracketed"),
            };
        }
        beta = next;
    }
    Err(MaxentError::NoConvergence {
        iterations: options.max_iterations,
        residual: last_residual,
    })
}

fn finish(levels: &[f64], n_agents: f64, total: f64, beta: f64, iterations: usize) -> BoltzmannSolution {
    let m = moments(levels, beta);
    let alpha = m.log_partition - n_agents.ln();
    let params = BoltzmannParams { alpha, beta };
    let counts: Vec<f64> = levels.iter().map(|&e| params.occupancy(e)).collect();
    let population: f64 = counts.iter().sum();
    let income: f64 = counts.iter().zip(levels).map(|(a, e)| a * e).sum();
    let scale = if total != 0.0 { total.abs() } else { 1.0 };
    BoltzmannSolution {
        params,
        counts,
        iterations,
        population_residual: (population - n_agents).abs() / n_agents,
        income_residual: (income - total).abs() / scale,
    }
}

/// Rounds continuous counts to integers, returning `None` when the rounded
/// sequence does not preserve the population.
pub fn round_counts(counts: &[f64], agents: u64) -> Option<Vec<u64>> {
    let rounded: Vec<u64> = counts.iter().map(|&a| a.round().max(0.0) as u64).collect();
    (rounded.iter().sum::<u64>() == agents).then_some(rounded)
}

/// Rank (0 = best) of `counts` among the distinct multiplicity values of an
/// enumeration, or `None` if `counts` is not a candidate.
pub fn multiplicity_rank(result: &EnumerationResult, counts: &[u64]) -> Option<usize> {
    let target = result
        .candidates
        .iter()
        .find(|(d, _)| d.counts() == counts)
        .map(|(_, m)| exact(m).clone())?;
    let mut distinct: Vec<&BigUint> = result.candidates.iter().map(|(_, m)| exact(m)).collect();
    distinct.sort_unstable_by(|a, b| b.cmp(a));
    distinct.dedup();
    distinct.iter().position(|&v| *v == target)
}
