//! Exact one-step transition kernels on enumerable state spaces, built by
//! summing the model rule over every group, coin draw, and permutation or
//! redistribution target.

use std::collections::HashMap;

use num_traits::ToPrimitive;

use crate::configspace::{enumerate_omega, enumerate_omega_capped, omega_count, Configuration};
use crate::dynamics::ModelKind;
use crate::exact::ExactError;
use crate::groups::GroupDistribution;
use crate::weights::WeightSpec;

/// Default bound on the number of enumerated states.
pub const DEFAULT_KERNEL_CAP: u64 = 5000;

/// Largest interaction group the kernel builder accepts.
const MAX_GROUP: usize = 4;

/// A stochastic matrix over the lexicographically ordered states of
/// Omega_N(L).
#[derive(Debug, Clone)]
pub struct Kernel {
    states: Vec<Configuration>,
    index: HashMap<Vec<u64>, usize>,
    rows: Vec<Vec<f64>>,
}

impl Kernel {
    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[Configuration] {
        &self.states
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn index_of(&self, config: &Configuration) -> Option<usize> {
        self.index.get(config.counts()).copied()
    }

    /// max_i |sum_j P(i,j) - 1|.
    pub fn row_sum_error(&self) -> f64 {
        self.rows
            .iter()
            .map(|row| (row.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// ||mu^T P - mu^T||_inf.
    pub fn stationary_residual(&self, mu: &[f64]) -> f64 {
        assert_eq!(mu.len(), self.n_states());
        let mut residual: f64 = 0.0;
        for j in 0..self.n_states() {
            let mass: f64 = (0..self.n_states()).map(|i| mu[i] * self.rows[i][j]).sum();
            residual = residual.max((mass - mu[j]).abs());
        }
        residual
    }

    /// max_{i,j} |P(i,j) - P(j,i)|; zero for a doubly stochastic kernel.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n_states() {
            for j in 0..i {
                worst = worst.max((self.rows[i][j] - self.rows[j][i]).abs());
            }
        }
        worst
    }
}

/// max over state pairs of |mu(xi) P(xi,eta) - mu(eta) P(eta,xi)|.
pub fn check_detailed_balance(kernel: &Kernel, mu: &[f64]) -> f64 {
    assert_eq!(mu.len(), kernel.n_states());
    let mut worst: f64 = 0.0;
    for i in 0..kernel.n_states() {
        for j in 0..i {
            worst = worst.max((mu[i] * kernel.rows[i][j] - mu[j] * kernel.rows[j][i]).abs());
        }
    }
    worst
}

pub fn build_kernel(
    model: ModelKind,
    spec: &WeightSpec,
    rho: &GroupDistribution,
    n: usize,
    l: u64,
) -> Result<Kernel, ExactError> {
    build_kernel_capped(model, spec, rho, n, l, DEFAULT_KERNEL_CAP)
}

pub fn build_kernel_capped(
    model: ModelKind,
    spec: &WeightSpec,
    rho: &GroupDistribution,
    n: usize,
    l: u64,
    cap: u64,
) -> Result<Kernel, ExactError> {
    let states: Vec<Configuration> = enumerate_omega_capped(n, l, cap)?.collect();
    let index: HashMap<Vec<u64>, usize> =
        states.iter().enumerate().map(|(i, s)| (s.counts().to_vec(), i)).collect();

    let support = rho.support();
    if let Some((big, _)) = support.iter().find(|(a, _)| a.len() > MAX_GROUP) {
        return Err(ExactError::GroupTooLarge(big.len()));
    }

    let mut rows = vec![vec![0.0f64; states.len()]; states.len()];
    for (si, state) in states.iter().enumerate() {
        let row = &mut rows[si];
        for (members, p_a) in &support {
            let holdings: Vec<u64> = members.iter().map(|&x| state.counts()[x]).collect();
            match model {
                ModelKind::ImmediateExchange => {
                    let perms = permutations(members.len());
                    let perm_weight = p_a / perms.len() as f64;
                    for receive_from in &perms {
                        for_each_coin_vector(spec, &holdings, &mut |coins, weight| {
                            let mut next = state.counts().to_vec();
                            for (i, &x) in members.iter().enumerate() {
                                next[x] = holdings[i] - coins[i] + coins[receive_from[i]];
                            }
                            row[index[&next]] += perm_weight * weight;
                        });
                    }
                }
                ModelKind::RandomSaving | ModelKind::RandomSavingOffer => {
                    let offer = model == ModelKind::RandomSavingOffer;
                    let on_group: u64 = holdings.iter().sum();
                    for_each_coin_vector(spec, &holdings, &mut |coins, weight| {
                        let drawn: u64 = coins.iter().sum();
                        let pool = if offer { drawn } else { on_group - drawn };
                        let n_comps =
                            omega_count(members.len(), pool).to_f64().expect("small pool");
                        let q = p_a * weight / n_comps;
                        for d in enumerate_omega(members.len(), pool).expect("small pool") {
                            let mut next = state.counts().to_vec();
                            for (i, &x) in members.iter().enumerate() {
                                next[x] = if offer {
                                    holdings[i] - coins[i] + d.counts()[i]
                                } else {
                                    coins[i] + d.counts()[i]
                                };
                            }
                            row[index[&next]] += q;
                        }
                    });
                }
                ModelKind::UniformReshuffling => {
                    let pool: u64 = holdings.iter().sum();
                    let n_comps = omega_count(members.len(), pool).to_f64().expect("small pool");
                    let q = p_a / n_comps;
                    for d in enumerate_omega(members.len(), pool).expect("small pool") {
                        let mut next = state.counts().to_vec();
                        for (i, &x) in members.iter().enumerate() {
                            next[x] = d.counts()[i];
                        }
                        row[index[&next]] += q;
                    }
                }
            }
        }
    }

    Ok(Kernel { states, index, rows })
}

/// Enumerates coin vectors t with 0 <= t_i <= holdings[i], calling `f`
/// with prod_i g(t_i)/G(holdings[i]); zero-weight branches are pruned.
fn for_each_coin_vector(
    spec: &WeightSpec,
    holdings: &[u64],
    f: &mut impl FnMut(&[u64], f64),
) {
    let norm: f64 = holdings.iter().map(|&h| spec.cum_g(h)).product();
    let mut coins = vec![0u64; holdings.len()];
    recurse(spec, holdings, 0, 1.0 / norm, &mut coins, f);

    fn recurse(
        spec: &WeightSpec,
        holdings: &[u64],
        depth: usize,
        weight: f64,
        coins: &mut Vec<u64>,
        f: &mut impl FnMut(&[u64], f64),
    ) {
        if depth == holdings.len() {
            f(coins, weight);
            return;
        }
        for t in 0..=holdings[depth] {
            let w = weight * spec.g(t);
            if w == 0.0 {
                continue;
            }
            coins[depth] = t;
            recurse(spec, holdings, depth + 1, w, coins, f);
        }
    }
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..m).collect();
    heap(&mut items, m, &mut out);
    return out;

    fn heap(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(items.clone());
            return;
        }
        for i in 0..k {
            heap(items, k - 1, out);
            if k % 2 == 0 {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::partition_table;

    fn stationary_vector(kernel: &Kernel, spec: &WeightSpec) -> Vec<f64> {
        let n = kernel.states()[0].len();
        let l = kernel.states()[0].total();
        let table = partition_table(spec, n, l).unwrap();
        kernel.states().iter().map(|s| table.stationary_prob(s).unwrap()).collect()
    }

    #[test]
    fn permutations_cover_the_symmetric_group() {
        assert_eq!(permutations(1).len(), 1);
        assert_eq!(permutations(3).len(), 6);
        let mut perms = permutations(4);
        perms.sort();
        perms.dedup();
        assert_eq!(perms.len(), 24);
    }

    #[test]
    fn rows_are_stochastic() {
        let spec = WeightSpec::constant(1.0).unwrap();
        let rho = GroupDistribution::pair_complete(3).unwrap();
        for model in ModelKind::ALL {
            let kernel = build_kernel(model, &spec, &rho, 3, 3).unwrap();
            assert!(kernel.row_sum_error() <= 1e-12, "{model:?}");
        }
    }

    #[test]
    fn reshuffle_pair_row_is_uniform() {
        let spec = WeightSpec::delta_zero();
        let rho = GroupDistribution::pair_complete(2).unwrap();
        let kernel =
            build_kernel(ModelKind::UniformReshuffling, &spec, &rho, 2, 2).unwrap();
        let from = kernel.index_of(&Configuration::new(vec![2, 0])).unwrap();
        for &p in kernel.row(from) {
            assert!((p - 1.0 / 3.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn detailed_balance_immediate_exchange() {
        let spec = WeightSpec::constant(1.0).unwrap();
        let rho = GroupDistribution::pair_complete(3).unwrap();
        let kernel = build_kernel(ModelKind::ImmediateExchange, &spec, &rho, 3, 4).unwrap();
        let mu = stationary_vector(&kernel, &spec);
        assert!(check_detailed_balance(&kernel, &mu) <= 1e-10);
        assert!(kernel.stationary_residual(&mu) <= 1e-10);
    }

    #[test]
    fn detailed_balance_random_saving() {
        let spec = WeightSpec::power_alpha(1.0);
        let rho = GroupDistribution::pair_complete(3).unwrap();
        let kernel = build_kernel(ModelKind::RandomSaving, &spec, &rho, 3, 4).unwrap();
        let mu = stationary_vector(&kernel, &spec);
        assert!(check_detailed_balance(&kernel, &mu) <= 1e-10);
    }

    #[test]
    fn offer_variant_reverses_the_product_form_only_for_constant_weights() {
        // For constant g the offered amount has the same law as the saved
        // amount, so the offer rule coincides with the saving rule and the
        // product form is reversible. For non-constant g it is not: from
        // xi_A=(1,3) to eta_A=(0,4) under g(k)=k+1 the mu-weighted flows
        // are 5.433/Z vs 4/Z.
        let rho = GroupDistribution::pair_complete(3).unwrap();

        let flat = WeightSpec::constant(1.0).unwrap();
        let kernel = build_kernel(ModelKind::RandomSavingOffer, &flat, &rho, 3, 4).unwrap();
        let mu = stationary_vector(&kernel, &flat);
        assert!(check_detailed_balance(&kernel, &mu) <= 1e-10);

        let linear = WeightSpec::power_alpha(1.0);
        let kernel = build_kernel(ModelKind::RandomSavingOffer, &linear, &rho, 3, 4).unwrap();
        let mu = stationary_vector(&kernel, &linear);
        assert!(check_detailed_balance(&kernel, &mu) > 1e-3);
        assert!(kernel.stationary_residual(&mu) > 1e-3);
    }

    #[test]
    fn reshuffle_kernel_is_doubly_stochastic() {
        let spec = WeightSpec::delta_zero();
        let rho = GroupDistribution::pair_complete(2).unwrap();
        let kernel =
            build_kernel(ModelKind::UniformReshuffling, &spec, &rho, 2, 3).unwrap();
        assert!(kernel.max_asymmetry() <= 1e-12);
        let uniform = vec![1.0 / kernel.n_states() as f64; kernel.n_states()];
        assert!(check_detailed_balance(&kernel, &uniform) <= 1e-10);
        assert!(kernel.stationary_residual(&uniform) <= 1e-10);
    }

    #[test]
    fn hyperedge_groups_preserve_detailed_balance() {
        // Size-3 groups exercise the cyclic-permutation paths.
        let spec = WeightSpec::power_alpha(1.0);
        let rho = GroupDistribution::k_subsets(3, 3).unwrap();
        for model in [ModelKind::ImmediateExchange, ModelKind::RandomSaving] {
            let kernel = build_kernel(model, &spec, &rho, 3, 4).unwrap();
            assert!(kernel.row_sum_error() <= 1e-12);
            let mu = stationary_vector(&kernel, &spec);
            assert!(check_detailed_balance(&kernel, &mu) <= 1e-10, "{model:?}");
        }
    }

    #[test]
    fn stationary_vector_does_not_depend_on_rho() {
        let spec = WeightSpec::power_alpha(1.0);
        let complete = GroupDistribution::pair_complete(3).unwrap();
        let path = GroupDistribution::pair_edges(3, vec![[0, 1], [1, 2]]).unwrap();
        let kernel_a =
            build_kernel(ModelKind::ImmediateExchange, &spec, &complete, 3, 5).unwrap();
        let kernel_b = build_kernel(ModelKind::ImmediateExchange, &spec, &path, 3, 5).unwrap();
        let mu = stationary_vector(&kernel_a, &spec);
        assert!(kernel_a.stationary_residual(&mu) <= 1e-10);
        assert!(kernel_b.stationary_residual(&mu) <= 1e-10);
    }

    #[test]
    fn caps_are_enforced() {
        let spec = WeightSpec::constant(1.0).unwrap();
        let rho = GroupDistribution::pair_complete(4).unwrap();
        assert!(matches!(
            build_kernel_capped(ModelKind::RandomSaving, &spec, &rho, 4, 100, 100),
            Err(ExactError::StateSpaceTooLarge(_))
        ));
        let big_group = GroupDistribution::k_subsets(5, 5).unwrap();
        assert!(matches!(
            build_kernel(ModelKind::RandomSaving, &spec, &big_group, 5, 2),
            Err(ExactError::GroupTooLarge(5))
        ));
    }
}
