//! Desk-scale reproduction of the published simulation protocol: large
//! population, linear weight, pair interactions, near-constant start.

use coinflow_core::configspace::Configuration;
use coinflow_core::dynamics::{run, ChainState, ModelKind};
use coinflow_core::groups::GroupDistribution;
use coinflow_core::limits::LimitLaw;
use coinflow_core::stats::{histogram, ks_distance, moments};
use coinflow_core::weights::WeightSpec;

#[test]
fn large_population_run_approaches_the_gamma_law() {
    // N = 1e4 agents, L = 1e6 coins, g(k) = k+1, 1e5 pair updates: the
    // wealth histogram approaches Gamma(shape 3, mean 100).
    let n = 10_000usize;
    let l = 1_000_000u64;
    let spec = WeightSpec::power_alpha(1.0);
    let rho = GroupDistribution::pair_complete(n).unwrap();
    let mut state = ChainState::new(Configuration::near_constant(n, l), 31);
    run(ModelKind::ImmediateExchange, &mut state, &rho, &spec, 100_000, None, |_, _| {});

    let law = LimitLaw::from_spec(&spec, 100.0).unwrap();
    let hist = histogram(state.config(), 1.0, 1.0);
    let ks = ks_distance(&hist, &law);
    assert!(ks <= 0.1, "ks = {ks}");
}

#[test]
fn equilibrated_run_matches_gamma_moment_ratio() {
    // Gamma(shape 3): E[X^2]/E[X]^2 = 4/3. A smaller population with many
    // updates per agent is close to stationarity.
    let n = 1000usize;
    let l = 100_000u64;
    let spec = WeightSpec::power_alpha(1.0);
    let rho = GroupDistribution::pair_complete(n).unwrap();
    let mut state = ChainState::new(Configuration::near_constant(n, l), 32);
    run(ModelKind::ImmediateExchange, &mut state, &rho, &spec, 500_000, None, |_, _| {});

    let m = moments(state.config(), 1.0, 2);
    let ratio = m[1] / (m[0] * m[0]);
    assert!((ratio - 4.0 / 3.0).abs() <= 0.1, "m2/m1^2 = {ratio}");
}
