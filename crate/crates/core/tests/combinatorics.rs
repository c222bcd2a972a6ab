use fairgini_core::allocation::{ln_biguint, multinomial};
use fairgini_core::{
    argmax_multiplicity, enumerate_distributions, log_multiplicity, log_multiplicity_stirling, multiplicity,
    solve_boltzmann, DiscreteIncomeDistribution, EnumerationOptions, IncomeConstraint, NewtonOptions,
};
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn factorial(m: u64) -> u128 {
    (1..=m as u128).product()
}

/// Omega by direct factorials, valid while N! fits in u128 (N <= 34).
fn omega_u128(counts: &[u64]) -> u128 {
    let n: u64 = counts.iter().sum();
    counts.iter().fold(factorial(n), |acc, &a| acc / factorial(a))
}

/// All length-`n` count vectors summing to `agents`, by odometer over
/// `[0, agents]^n`.
fn odometer(n: usize, agents: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut digits = vec![0u64; n];
    loop {
        if digits.iter().sum::<u64>() == agents {
            out.push(digits.clone());
        }
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            digits[i] += 1;
            if digits[i] <= agents {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// Brute-force maximum of Omega under exact integer income matching:
/// returns every maximizing count vector.
fn brute_force_argmax(levels: &[i64], agents: u64, total: i64) -> Option<(u128, Vec<Vec<u64>>)> {
    let mut best: Option<(u128, Vec<Vec<u64>>)> = None;
    for c in odometer(levels.len(), agents) {
        let income: i64 = c.iter().zip(levels).map(|(&a, &e)| a as i64 * e).sum();
        if income != total {
            continue;
        }
        let w = omega_u128(&c);
        match &mut best {
            Some((bw, list)) if w == *bw => list.push(c),
            Some((bw, _)) if w < *bw => {}
            _ => best = Some((w, vec![c])),
        }
    }
    best
}

fn dist(counts: &[u64]) -> DiscreteIncomeDistribution {
    DiscreteIncomeDistribution::from_counts(counts.to_vec()).unwrap()
}

#[test]
fn two_consumer_fixtures() {
    for (counts, expected) in [([0u64, 2], 1u32), ([1, 1], 2), ([2, 0], 1)] {
        let m = multiplicity(&dist(&counts)).unwrap();
        assert_eq!(m.exact, Some(BigUint::from(expected)));
    }
}

#[test]
fn multinomial_theorem_exhaustive() {
    for n in 1..=4usize {
        for agents in 1..=6u64 {
            let total: BigUint = odometer(n, agents)
                .iter()
                .map(|c| multiplicity(&dist(c)).unwrap().exact.unwrap())
                .sum();
            assert_eq!(total, BigUint::from(n as u64).pow(agents as u32), "n={n} N={agents}");
        }
    }
}

#[test]
fn exact_multiplicity_matches_factorials() {
    for counts in [vec![3u64, 4, 5], vec![10, 0, 7, 1], vec![20, 14], vec![1; 12]] {
        let big = multinomial(&counts);
        assert_eq!(big, BigUint::from(omega_u128(&counts)));
    }
}

#[test]
fn large_multiplicity_does_not_overflow() {
    // C(2000, 1000) is about 2.05e600.
    let m = multiplicity(&dist(&[1000, 1000])).unwrap();
    let digits = m.exact.as_ref().unwrap().to_string().len();
    assert_eq!(digits, 601);
    let lg = log_multiplicity(&dist(&[1000, 1000])).unwrap();
    assert!((lg.log_value - m.log_value).abs() < 1e-9 * m.log_value);
}

#[test]
fn stirling_converges() {
    let mut last = f64::INFINITY;
    for a in [10u64, 100, 1000, 10_000] {
        let d = dist(&[a, a, a]);
        let exact = ln_biguint(&multiplicity(&d).unwrap().exact.unwrap());
        let rel = (log_multiplicity_stirling(&d).unwrap() - exact).abs() / exact;
        assert!(rel < last, "a={a}");
        last = rel;
    }
    assert!(last < 5e-4);
}

proptest! {
    #[test]
    fn multiplicity_is_permutation_invariant(counts in prop::collection::vec(1u64..30, 1..6), seed in any::<u64>()) {
        let mut shuffled = counts.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.random_range(0..=i));
        }
        prop_assert_eq!(
            multiplicity(&dist(&counts)).unwrap().exact,
            multiplicity(&dist(&shuffled)).unwrap().exact
        );
    }

    #[test]
    fn log_value_agrees_with_exact(counts in prop::collection::vec(0u64..9, 1..5)) {
        prop_assume!(counts.iter().sum::<u64>() > 0);
        let d = dist(&counts);
        let m = multiplicity(&d).unwrap();
        let exact = (omega_u128(&counts) as f64).ln();
        prop_assert!((m.log_value - exact).abs() <= 1e-9 * exact.max(1.0));
        let lg = log_multiplicity(&d).unwrap();
        prop_assert!((lg.log_value - exact).abs() <= 1e-9 * exact.max(1.0));
    }

    #[test]
    fn stirling_is_within_half_percent_for_large_counts(counts in prop::collection::vec(1000u64..5000, 2..5)) {
        let d = dist(&counts);
        let exact = log_multiplicity(&d).unwrap().log_value;
        let rel = (log_multiplicity_stirling(&d).unwrap() - exact).abs() / exact;
        prop_assert!(rel <= 5e-3, "rel {}", rel);
    }
}

/// Random feasible instance: distinct integer levels in [0, 8], N <= 12,
/// and a total realized by some random allocation.
fn random_instance(rng: &mut ChaCha8Rng) -> (Vec<i64>, u64, i64) {
    let n = rng.random_range(1..=4usize);
    let mut levels: Vec<i64> = sample(rng, 9, n).into_iter().map(|x| x as i64).collect();
    levels.sort_unstable();
    let agents = rng.random_range(1..=12u64);
    let total = (0..agents).map(|_| levels[rng.random_range(0..n)]).sum();
    (levels, agents, total)
}

#[test]
fn argmax_matches_brute_force_on_generated_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(20260101);
    let mut checked = 0;
    while checked < 250 {
        let (levels, agents, total) = random_instance(&mut rng);
        let levels_f: Vec<f64> = levels.iter().map(|&e| e as f64).collect();
        let (best, argmaxes) = brute_force_argmax(&levels, agents, total).expect("instance is feasible");
        let got = argmax_multiplicity(&levels_f, agents, total as f64).unwrap();
        assert_eq!(
            multiplicity(&got).unwrap().exact,
            Some(BigUint::from(best)),
            "levels {levels:?} N={agents} total={total}"
        );
        // lexicographically smallest maximizer
        let smallest = argmaxes.iter().min().unwrap();
        assert_eq!(got.counts(), smallest.as_slice());
        checked += 1;
    }
}

#[test]
fn enumeration_candidates_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..60 {
        let (levels, agents, total) = random_instance(&mut rng);
        let levels_f: Vec<f64> = levels.iter().map(|&e| e as f64).collect();
        let r = enumerate_distributions(&levels_f, agents, total as f64, EnumerationOptions::default()).unwrap();
        let mut expected: Vec<Vec<u64>> = odometer(levels.len(), agents)
            .into_iter()
            .filter(|c| c.iter().zip(&levels).map(|(&a, &e)| a as i64 * e).sum::<i64>() == total)
            .collect();
        expected.sort();
        let got: Vec<Vec<u64>> = r.candidates.iter().map(|(d, _)| d.counts().to_vec()).collect();
        assert_eq!(got, expected);
    }
}

#[test]
fn three_level_reference_instance() {
    let r = enumerate_distributions(&[1.0, 2.0, 3.0], 4, 8.0, EnumerationOptions::default()).unwrap();
    assert_eq!(r.argmax().counts(), &[1, 2, 1]);
    assert_eq!(r.max_multiplicity(), &BigUint::from(12u32));
}

#[test]
fn unconstrained_enumeration_counts_all_allocations() {
    let opts = EnumerationOptions {
        income: IncomeConstraint::Unconstrained,
        ..Default::default()
    };
    let r = enumerate_distributions(&[1.0, 2.0, 3.0, 4.0], 6, 0.0, opts).unwrap();
    assert_eq!(r.total_allocations(), BigUint::from(4096u32));
}

/// Rank (0 = best) of the rounded continuous counts among distinct Omega
/// values of all feasible sequences, when the counts are near integers and
/// the rounding stays feasible.
fn rank_of_rounded(counts: &[f64], levels: &[i64], agents: u64, total: i64) -> Option<usize> {
    if counts.iter().any(|c| (c - c.round()).abs() > 0.05) {
        return None;
    }
    let rounded: Vec<u64> = counts.iter().map(|c| c.round() as u64).collect();
    let income: i64 = rounded.iter().zip(levels).map(|(&a, &e)| a as i64 * e).sum();
    if rounded.iter().sum::<u64>() != agents || income != total {
        return None;
    }
    let mut omegas: Vec<u128> = odometer(levels.len(), agents)
        .iter()
        .filter(|c| c.iter().zip(levels).map(|(&a, &e)| a as i64 * e).sum::<i64>() == total)
        .map(|c| omega_u128(c))
        .collect();
    omegas.sort_unstable_by(|a, b| b.cmp(a));
    omegas.dedup();
    let target = omega_u128(&rounded);
    omegas.iter().position(|&w| w == target)
}

#[test]
fn near_integer_continuous_counts_round_into_top_two() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut checked = 0;
    for _ in 0..3000 {
        let (levels, agents, total) = random_instance(&mut rng);
        if levels.len() < 2 || total <= agents as i64 * levels[0] || total >= agents as i64 * levels[levels.len() - 1] {
            continue;
        }
        let levels_f: Vec<f64> = levels.iter().map(|&e| e as f64).collect();
        let sol = solve_boltzmann(&levels_f, agents, total as f64, NewtonOptions::default()).unwrap();
        if let Some(rank) = rank_of_rounded(&sol.counts, &levels, agents, total) {
            assert!(rank < 2, "levels {levels:?} N={agents} total={total} rank {rank}");
            checked += 1;
        }
    }
    assert!(checked >= 20, "only {checked} near-integer solutions");
}
