//! Single-step transitions and multi-step runs of the exchange models.
//!
//! One "step" is one group interaction: draw A ~ rho, then update the
//! coins of the agents in A by the model rule. Everything outside A is
//! untouched and the total is conserved.
//!
//! Randomness: ChaCha8 seeded per chain. Identical (seed, parameters)
//! reproduce the trajectory bit for bit on the same build.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::configspace::{sample_uniform_composition, Configuration};
use crate::groups::GroupDistribution;
use crate::weights::WeightSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Each agent in A passes a g-weighted number of coins along a uniform
    /// random permutation of A (identity included: the lazy chain).
    ImmediateExchange,
    /// Each agent saves a g-weighted number of coins; the rest are pooled
    /// and redistributed uniformly over compositions.
    RandomSaving,
    /// Saving with the roles flipped: the g-weighted draw is the offer,
    /// and only the offered pool is redistributed.
    RandomSavingOffer,
    /// Everything is pooled and redistributed; ignores the weight spec.
    UniformReshuffling,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::ImmediateExchange,
        ModelKind::RandomSaving,
        ModelKind::RandomSavingOffer,
        ModelKind::UniformReshuffling,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::ImmediateExchange => "immediate",
            ModelKind::RandomSaving => "saving",
            ModelKind::RandomSavingOffer => "saving_offer",
            ModelKind::UniformReshuffling => "reshuffle",
        }
    }
}

/// A chain position: configuration, step counter, and the RNG stream.
#[derive(Debug, Clone)]
pub struct ChainState {
    config: Configuration,
    step_count: u64,
    rng: ChaCha8Rng,
}

impl ChainState {
    pub fn new(config: Configuration, seed: u64) -> Self {
        ChainState { config, step_count: 0, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Builds a chain on an explicit ChaCha8 stream, for callers that
    /// carve several independent streams out of one seed.
    pub fn with_rng(config: Configuration, rng: ChaCha8Rng) -> Self {
        ChainState { config, step_count: 0, rng }
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// Resets the configuration while keeping the RNG stream; used for
    /// repeated one-step experiments from a fixed state.
    pub fn reset_config(&mut self, config: Configuration) {
        debug_assert_eq!(config.total(), self.config.total());
        self.config = config;
    }
}

/// Draws k in {0..holdings} with probability g(k)/G(holdings).
pub fn sample_coin_count<R: Rng + ?Sized>(spec: &WeightSpec, holdings: u64, rng: &mut R) -> u64 {
    spec.inv_cdf(holdings, rng.random())
}

/// One immediate-exchange interaction.
pub fn step_immediate(state: &mut ChainState, rho: &GroupDistribution, spec: &WeightSpec) {
    let members = rho.sample(&mut state.rng);
    let m = members.len();
    let coins: Vec<u64> = members
        .iter()
        .map(|&x| sample_coin_count(spec, state.config.counts()[x], &mut state.rng))
        .collect();
    // receive_from[i] = sigma^{-1}(i): a uniform permutation of A.
    let mut receive_from: Vec<usize> = (0..m).collect();
    receive_from.shuffle(&mut state.rng);
    let values: Vec<u64> = (0..m)
        .map(|i| state.config.counts()[members[i]] - coins[i] + coins[receive_from[i]])
        .collect();
    state.config.splice(&members, &values);
    state.step_count += 1;
}

/// One saving interaction. With `offer_variant = false` the draw c is the
/// saved amount and xi - c enters the pool; with `true` the draw is the
/// offer and enters the pool itself.
pub fn step_saving(
    state: &mut ChainState,
    rho: &GroupDistribution,
    spec: &WeightSpec,
    offer_variant: bool,
) {
    let members = rho.sample(&mut state.rng);
    let m = members.len();
    let coins: Vec<u64> = members
        .iter()
        .map(|&x| sample_coin_count(spec, state.config.counts()[x], &mut state.rng))
        .collect();
    let drawn: u64 = coins.iter().sum();
    let pool = if offer_variant {
        drawn
    } else {
        members.iter().map(|&x| state.config.counts()[x]).sum::<u64>() - drawn
    };
    let redistribution = sample_uniform_composition(m, pool, &mut state.rng);
    let values: Vec<u64> = (0..m)
        .map(|i| {
            if offer_variant {
                state.config.counts()[members[i]] - coins[i] + redistribution[i]
            } else {
                coins[i] + redistribution[i]
            }
        })
        .collect();
    state.config.splice(&members, &values);
    state.step_count += 1;
}

/// One uniform-reshuffling interaction: the saving step with g = delta_0,
/// skipping the trivial coin draws.
pub fn step_reshuffle(state: &mut ChainState, rho: &GroupDistribution) {
    let members = rho.sample(&mut state.rng);
    let pool: u64 = members.iter().map(|&x| state.config.counts()[x]).sum();
    let values = sample_uniform_composition(members.len(), pool, &mut state.rng);
    state.config.splice(&members, &values);
    state.step_count += 1;
}

/// One step of the given model.
pub fn step(
    model: ModelKind,
    state: &mut ChainState,
    rho: &GroupDistribution,
    spec: &WeightSpec,
) {
    match model {
        ModelKind::ImmediateExchange => step_immediate(state, rho, spec),
        ModelKind::RandomSaving => step_saving(state, rho, spec, false),
        ModelKind::RandomSavingOffer => step_saving(state, rho, spec, true),
        ModelKind::UniformReshuffling => step_reshuffle(state, rho),
    }
}

/// Applies `n_steps` transitions, calling `hook` every `snapshot_every`
/// steps (default: n_steps/100) and once more after the final step.
pub fn run<F>(
    model: ModelKind,
    state: &mut ChainState,
    rho: &GroupDistribution,
    spec: &WeightSpec,
    n_steps: u64,
    snapshot_every: Option<u64>,
    mut hook: F,
) where
    F: FnMut(u64, &Configuration),
{
    let cadence = snapshot_every.unwrap_or_else(|| (n_steps / 100).max(1)).max(1);
    // Warm the prefix-sum cache so steps never take the write lock.
    if model != ModelKind::UniformReshuffling {
        spec.ensure_cached(state.config.total());
    }
    for i in 0..n_steps {
        step(model, state, rho, spec);
        if (i + 1) % cadence == 0 && i + 1 < n_steps {
            hook(state.step_count, &state.config);
        }
    }
    hook(state.step_count, &state.config);
}

/// Conditions under which the chain is provably ergodic on Omega_N(L):
/// a connected hypergraph, g(0) > 0, and (immediate exchange only)
/// g(1) > 0. A non-empty result flags a chain whose convergence is not
/// guaranteed; constructing and running it is still allowed.
pub fn ergodicity_warnings(
    model: ModelKind,
    spec: &WeightSpec,
    rho: &GroupDistribution,
) -> Vec<String> {
    let mut warnings = Vec::new();
    if !rho.is_connected() {
        warnings.push("interaction hypergraph is not connected".to_string());
    }
    if model == ModelKind::ImmediateExchange && spec.g(1) == 0.0 {
        warnings.push("immediate exchange with g(1) = 0 is not provably ergodic".to_string());
    }
    warnings
}
