//! Coin configurations and the composition space Omega_N(L): ordered
//! tuples of N nonnegative integers summing to L.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::One;
use rand::Rng;
use thiserror::Error;

/// Enumeration refuses state spaces larger than this by default.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("|Omega_{n}({l})| = {size} exceeds the enumeration cap {cap}")]
    CapExceeded { n: usize, l: u64, size: BigUint, cap: u64 },
}

/// Coin counts over the agents, with the conserved total cached.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    counts: Vec<u64>,
    total: u64,
}

impl Configuration {
    pub fn new(counts: Vec<u64>) -> Self {
        let total = counts.iter().sum();
        Configuration { counts, total }
    }

    /// The near-constant start: everyone gets floor(total/n), and the
    /// first `total mod n` agents one extra coin.
    pub fn near_constant(n: usize, total: u64) -> Self {
        assert!(n > 0);
        let base = total / n as u64;
        let rem = (total % n as u64) as usize;
        let counts = (0..n).map(|i| base + u64::from(i < rem)).collect();
        Configuration { counts, total }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Replaces the counts at `members` (parallel to `values`), keeping the
    /// running total consistent. Panics in debug builds if conservation is
    /// violated.
    pub(crate) fn splice(&mut self, members: &[usize], values: &[u64]) {
        debug_assert_eq!(members.len(), values.len());
        let mut before: u64 = 0;
        let mut after: u64 = 0;
        for (&x, &v) in members.iter().zip(values) {
            before += self.counts[x];
            after += v;
            self.counts[x] = v;
        }
        debug_assert_eq!(before, after, "coin conservation violated in splice");
    }
}

/// |Omega_N(L)| = C(L+N-1, N-1), exactly.
pub fn omega_count(n: usize, l: u64) -> BigUint {
    assert!(n >= 1);
    let mut acc = BigUint::one();
    // C(l + n - 1, n - 1) by the multiplicative formula.
    for i in 1..n as u64 {
        acc = acc * BigUint::from(l + i) / BigUint::from(i);
    }
    acc
}

/// Iterator over Omega_N(L) in lexicographic order of the count vectors.
pub struct OmegaIter {
    next: Option<Vec<u64>>,
}

impl Iterator for OmegaIter {
    type Item = Configuration;

    fn next(&mut self) -> Option<Configuration> {
        let current = self.next.take()?;
        self.next = successor(&current);
        Some(Configuration::new(current))
    }
}

fn successor(counts: &[u64]) -> Option<Vec<u64>> {
    let n = counts.len();
    let last_nonzero = counts.iter().rposition(|&c| c > 0)?;
    if last_nonzero == 0 {
        return None; // (L, 0, ..., 0) is the lexicographic maximum
    }
    let mut next = counts.to_vec();
    next[last_nonzero - 1] += 1;
    let carry = next[last_nonzero] - 1;
    next[last_nonzero] = 0;
    next[n - 1] = carry;
    Some(next)
}

pub fn enumerate_omega(n: usize, l: u64) -> Result<OmegaIter, ConfigError> {
    enumerate_omega_capped(n, l, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_omega_capped(n: usize, l: u64, cap: u64) -> Result<OmegaIter, ConfigError> {
    assert!(n >= 1);
    let size = omega_count(n, l);
    if size > BigUint::from(cap) {
        return Err(ConfigError::CapExceeded { n, l, size, cap });
    }
    let mut first = vec![0u64; n];
    first[n - 1] = l;
    Ok(OmegaIter { next: Some(first) })
}

/// Uniform sample from Omega(parts, total) by the divider method: a
/// uniform (parts-1)-subset of the total+parts-1 slots marks the bars,
/// the gaps are the counts. Exactly uniform, no rejection.
pub fn sample_uniform_composition<R: Rng + ?Sized>(
    parts: usize,
    total: u64,
    rng: &mut R,
) -> Vec<u64> {
    assert!(parts >= 1);
    if parts == 1 {
        return vec![total];
    }
    let slots = total + parts as u64 - 1;
    let bars = parts as u64 - 1;
    // Floyd's algorithm: uniform subset of `bars` values from 0..slots.
    let mut chosen: HashSet<u64> = HashSet::with_capacity(bars as usize);
    for j in (slots - bars)..slots {
        let t = rng.random_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    let mut dividers: Vec<u64> = chosen.into_iter().collect();
    dividers.sort_unstable();

    let mut counts = Vec::with_capacity(parts);
    let mut prev = -1i64;
    for &d in &dividers {
        counts.push((d as i64 - prev - 1) as u64);
        prev = d as i64;
    }
    counts.push((slots as i64 - 1 - prev) as u64);
    debug_assert_eq!(counts.iter().sum::<u64>(), total);
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn omega_count_small_cases() {
        assert_eq!(omega_count(2, 2), BigUint::from(3u32));
        assert_eq!(omega_count(3, 4), BigUint::from(15u32));
        for n in 1..6 {
            assert_eq!(omega_count(n, 0), BigUint::one());
        }
    }

    #[test]
    fn enumeration_is_lexicographic_and_complete() {
        let configs: Vec<_> = enumerate_omega(2, 2).unwrap().collect();
        let counts: Vec<_> = configs.iter().map(|c| c.counts().to_vec()).collect();
        assert_eq!(counts, vec![vec![0, 2], vec![1, 1], vec![2, 0]]);

        let single: Vec<_> = enumerate_omega(1, 5).unwrap().collect();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].counts(), &[5]);

        assert_eq!(enumerate_omega(3, 2).unwrap().count(), 6);

        // Stream length equals the exact count on a grid.
        for n in 1..=5usize {
            for l in 0..=12u64 {
                let streamed = enumerate_omega(n, l).unwrap().count();
                assert_eq!(BigUint::from(streamed as u64), omega_count(n, l), "n={n} l={l}");
            }
        }
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        assert!(matches!(
            enumerate_omega_capped(4, 100, 1000),
            Err(ConfigError::CapExceeded { .. })
        ));
    }

    #[test]
    fn composition_sampler_degenerate_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            assert_eq!(sample_uniform_composition(1, 7, &mut rng), vec![7]);
            assert_eq!(sample_uniform_composition(3, 0, &mut rng), vec![0, 0, 0]);
        }
    }

    #[test]
    fn composition_sampler_is_uniform_chi_square() {
        // parts=2, total=2: three outcomes, each with p = 1/3.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let trials = 100_000;
        let mut freq = [0u64; 3];
        for _ in 0..trials {
            let c = sample_uniform_composition(2, 2, &mut rng);
            freq[c[0] as usize] += 1;
        }
        let expected = trials as f64 / 3.0;
        let chi2: f64 = freq.iter().map(|&f| (f as f64 - expected).powi(2) / expected).sum();
        // df = 2, critical value at the 1% level.
        assert!(chi2 < 9.21, "chi2 = {chi2}, freq = {freq:?}");
    }

    #[test]
    fn composition_sampler_tv_distance_to_uniform() {
        // parts=3, total=5: 21 compositions.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let trials = 1_000_000u64;
        let mut freq: std::collections::HashMap<Vec<u64>, u64> = Default::default();
        for _ in 0..trials {
            *freq.entry(sample_uniform_composition(3, 5, &mut rng)).or_default() += 1;
        }
        assert_eq!(freq.len(), 21);
        let uniform = 1.0 / 21.0;
        let tv: f64 = 0.5
            * freq
                .values()
                .map(|&f| (f as f64 / trials as f64 - uniform).abs())
                .sum::<f64>();
        assert!(tv < 0.01, "tv = {tv}");
    }

    #[test]
    fn near_constant_spreads_remainder_to_first_agents() {
        let config = Configuration::near_constant(4, 10);
        assert_eq!(config.counts(), &[3, 3, 2, 2]);
        assert_eq!(config.total(), 10);
        assert_eq!(Configuration::near_constant(3, 9).counts(), &[3, 3, 3]);
    }

    proptest! {
        #[test]
        fn sampled_compositions_conserve_total(
            parts in 1usize..8,
            total in 0u64..200,
            seed in 0u64..1000,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let counts = sample_uniform_composition(parts, total, &mut rng);
            prop_assert_eq!(counts.len(), parts);
            prop_assert_eq!(counts.iter().sum::<u64>(), total);
        }

        #[test]
        fn enumerated_configurations_conserve_total(n in 1usize..5, l in 0u64..10) {
            for config in enumerate_omega(n, l).unwrap() {
                prop_assert_eq!(config.counts().iter().sum::<u64>(), l);
                prop_assert_eq!(config.total(), l);
            }
        }
    }
}
