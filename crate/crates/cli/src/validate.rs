//! The validation suite: every check the project must satisfy, with its
//! tolerance pinned in code. `coinflow validate` and the acceptance test
//! target both run these functions.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use coinflow_core::configspace::{enumerate_omega, Configuration};
use coinflow_core::dynamics::{run, step, ChainState, ModelKind};
use coinflow_core::exact::{
    build_kernel, check_detailed_balance, lr_marginal_constant_g, partition_table,
    symmetry_cycle, symmetry_cycle_parts, symmetry_pair,
};
use coinflow_core::groups::GroupDistribution;
use coinflow_core::limits::{
    ensemble_marginal_vs_limit, llt_error, solve_s_star, tilted_variance, LimitLaw, TiltedLaw,
};
use coinflow_core::stats::{histogram, ks_distance};
use coinflow_core::weights::WeightSpec;

use crate::config::{RunConfig, Settings};

/// Base seed for every randomized validation run. Pinned to a seed whose
/// Monte Carlo KS scores sit near the across-seed median of the scaled
/// runs (the systematic transform-floor at alpha = -1 is 0.045 with
/// +-0.01 sampling noise at N = 1000, so individual seeds vary).
const SEED: u64 = 2;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub criterion: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(criterion: u8, name: impl Into<String>, passed: bool, detail: String) -> Self {
        CheckResult { criterion, name: name.into(), passed, detail }
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}] {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.criterion,
            self.name,
            self.detail
        )
    }
}

pub fn all_criteria() -> Vec<CheckResult> {
    let mut results = Vec::new();
    results.extend(criterion_1());
    results.extend(criterion_2());
    results.extend(criterion_3());
    results.extend(criterion_4());
    results.extend(criterion_5());
    results.extend(criterion_6());
    results.extend(criterion_7());
    results.extend(criterion_8());
    results.extend(criterion_9());
    results.extend(criterion_10());
    results.extend(criterion_11());
    results
}

fn grid_groups(n: usize) -> [(&'static str, GroupDistribution); 2] {
    [
        ("pair_complete", GroupDistribution::pair_complete(n).unwrap()),
        (
            "pair_path",
            GroupDistribution::pair_edges(n, (0..n - 1).map(|i| [i, i + 1]).collect()).unwrap(),
        ),
    ]
}

/// Detailed balance and stationarity of the product form on Omega_3(5)
/// for every model/weight/group combination; uniform reshuffling must be
/// doubly stochastic with the uniform law stationary.
pub fn criterion_1() -> Vec<CheckResult> {
    const TOL: f64 = 1e-10;
    let (n, l) = (3usize, 5u64);
    let weights =
        [("constant:1", WeightSpec::constant(1.0).unwrap()), ("power:1", WeightSpec::power_alpha(1.0))];
    let models = [
        ModelKind::ImmediateExchange,
        ModelKind::RandomSaving,
        ModelKind::RandomSavingOffer,
    ];
    let mut results = Vec::new();
    for (weight_name, spec) in &weights {
        let table = partition_table(spec, n, l).unwrap();
        for (group_name, rho) in grid_groups(n) {
            for model in models {
                let kernel = build_kernel(model, spec, &rho, n, l).unwrap();
                let mu: Vec<f64> = kernel
                    .states()
                    .iter()
                    .map(|s| table.stationary_prob(s).unwrap())
                    .collect();
                let db = check_detailed_balance(&kernel, &mu);
                let residual = kernel.stationary_residual(&mu);
                results.push(CheckResult::new(
                    1,
                    format!("{}/{}/{}", model.name(), weight_name, group_name),
                    db <= TOL && residual <= TOL,
                    format!("db={db:.2e} residual={residual:.2e} (tol {TOL:.0e})"),
                ));
            }
            // Uniform reshuffling: symmetric kernel, uniform law stationary.
            let spec0 = WeightSpec::delta_zero();
            let kernel = build_kernel(ModelKind::UniformReshuffling, &spec0, &rho, n, l).unwrap();
            let uniform = vec![1.0 / kernel.n_states() as f64; kernel.n_states()];
            let asym = kernel.max_asymmetry();
            let residual = kernel.stationary_residual(&uniform);
            results.push(CheckResult::new(
                1,
                format!("reshuffle/uniform/{group_name}"),
                asym <= TOL && residual <= TOL,
                format!("asymmetry={asym:.2e} residual={residual:.2e} (tol {TOL:.0e})"),
            ));
        }
    }
    results
}

/// Exact marginal against the closed-form constant-weight marginal.
pub fn criterion_2() -> Vec<CheckResult> {
    const TOL: f64 = 1e-10;
    let spec = WeightSpec::constant(1.0).unwrap();
    let mut worst: f64 = 0.0;
    for n in [2usize, 3, 4] {
        for l in [5u64, 10, 20, 30] {
            let table = partition_table(&spec, n, l).unwrap();
            for c in 0..=l {
                let exact = table.marginal(n, l, c).unwrap();
                let closed = lr_marginal_constant_g(n, l, c);
                worst = worst.max((exact - closed).abs() / closed);
            }
        }
    }
    vec![CheckResult::new(
        2,
        "marginal vs closed form, N in {2,3,4}, L in {5,10,20,30}",
        worst <= TOL,
        format!("max relative diff = {worst:.2e} (tol {TOL:.0e})"),
    )]
}

/// Exact-arithmetic symmetry identities over all vector pairs with common
/// sum <= 6 and twenty random integer weight tables.
pub fn criterion_3() -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let tables: Vec<Vec<u64>> = (0..20)
        .map(|_| (0..12).map(|_| rng.random_range(0..=9u64)).collect())
        .collect();

    let compositions = |n: usize, sum: u64| -> Vec<Vec<u64>> {
        enumerate_omega(n, sum).unwrap().map(|c| c.counts().to_vec()).collect()
    };

    let mut pair_violations = 0u64;
    let mut cycle_violations = 0u64;
    let mut reversal_violations = 0u64;
    let mut checked = 0u64;
    for g in &tables {
        for sum in 0..=6u64 {
            let pairs = compositions(2, sum);
            for a in &pairs {
                for b in &pairs {
                    checked += 1;
                    let ab = symmetry_pair([a[0], a[1]], [b[0], b[1]], g).unwrap();
                    let ba = symmetry_pair([b[0], b[1]], [a[0], a[1]], g).unwrap();
                    if ab != ba {
                        pair_violations += 1;
                    }
                }
            }
            for n in [3usize, 4] {
                let vectors = compositions(n, sum);
                for a in &vectors {
                    for b in &vectors {
                        checked += 1;
                        let s_ab = symmetry_cycle(a, b, g).unwrap();
                        let s_ba = symmetry_cycle(b, a, g).unwrap();
                        if s_ab != s_ba {
                            cycle_violations += 1;
                        }
                        let (_, minus_ab) = symmetry_cycle_parts(a, b, g).unwrap();
                        let (plus_ba, _) = symmetry_cycle_parts(b, a, g).unwrap();
                        if minus_ab != plus_ba {
                            reversal_violations += 1;
                        }
                    }
                }
            }
        }
    }
    let total = pair_violations + cycle_violations + reversal_violations;
    vec![CheckResult::new(
        3,
        "symmetry identities, sums <= 6, 20 random tables",
        total == 0,
        format!(
            "{checked} comparisons, violations: pair={pair_violations} cycle={cycle_violations} \
             reversal={reversal_violations}"
        ),
    )]
}

/// The conditioned product measure equals the stationary law and does not
/// depend on the tilt.
pub fn criterion_4() -> Vec<CheckResult> {
    const TOL: f64 = 1e-10;
    let spec = WeightSpec::power_alpha(1.0);
    let (n, l) = (3usize, 6u64);
    let table = partition_table(&spec, n, l).unwrap();
    let states: Vec<Configuration> = enumerate_omega(n, l).unwrap().collect();

    let conditioned = |s: f64| -> Vec<f64> {
        let law = TiltedLaw::new(&spec, s).unwrap();
        let weights: Vec<f64> = states
            .iter()
            .map(|c| c.counts().iter().map(|&k| law.prob(k)).product())
            .collect();
        let total: f64 = weights.iter().sum();
        weights.into_iter().map(|w| w / total).collect()
    };
    let low = conditioned(0.3);
    let high = conditioned(0.6);

    let mut worst_match: f64 = 0.0;
    let mut worst_s_dep: f64 = 0.0;
    for (i, state) in states.iter().enumerate() {
        let stationary = table.stationary_prob(state).unwrap();
        worst_match = worst_match.max((low[i] - stationary).abs());
        worst_s_dep = worst_s_dep.max((low[i] - high[i]).abs());
    }
    vec![CheckResult::new(
        4,
        "conditioned product law = stationary law, s in {0.3, 0.6}",
        worst_match <= TOL && worst_s_dep <= TOL,
        format!("max diff = {worst_match:.2e}, s-dependence = {worst_s_dep:.2e} (tol {TOL:.0e})"),
    )]
}

fn final_ks(model: ModelKind, spec: &WeightSpec, n: usize, l: u64, steps: u64, seed: u64) -> f64 {
    let rho = GroupDistribution::pair_complete(n).unwrap();
    let mut state = ChainState::new(Configuration::near_constant(n, l), seed);
    run(model, &mut state, &rho, spec, steps, None, |_, _| {});
    let temperature = l as f64 / n as f64;
    let law = LimitLaw::from_spec(spec, temperature).unwrap();
    ks_distance(&histogram(state.config(), 1.0, 1.0), &law)
}

/// Gamma-law reproduction at alpha in {1, 3} for both exchange models.
pub fn criterion_5() -> Vec<CheckResult> {
    const TOL: f64 = 0.05;
    let mut results = Vec::new();
    for model in [ModelKind::ImmediateExchange, ModelKind::RandomSaving] {
        for alpha in [1.0, 3.0] {
            let spec = WeightSpec::power_alpha(alpha);
            let ks = final_ks(model, &spec, 1000, 100_000, 1_000_000, SEED);
            results.push(CheckResult::new(
                5,
                format!("{} alpha={alpha} vs Gamma({})", model.name(), alpha + 2.0),
                ks <= TOL,
                format!("ks = {ks:.4} (tol {TOL})"),
            ));
        }
    }
    results
}

/// Exponential-law reproduction at alpha in {-1, -2}.
pub fn criterion_6() -> Vec<CheckResult> {
    const TOL: f64 = 0.06;
    let mut results = Vec::new();
    for model in [ModelKind::ImmediateExchange, ModelKind::RandomSaving] {
        for alpha in [-1.0, -2.0] {
            let spec = WeightSpec::power_alpha(alpha);
            let ks = final_ks(model, &spec, 1000, 100_000, 1_000_000, SEED);
            results.push(CheckResult::new(
                6,
                format!("{} alpha={alpha} vs Exponential(mean 100)", model.name()),
                ks <= TOL,
                format!("ks = {ks:.4} (tol {TOL})"),
            ));
        }
    }
    results
}

/// Uniform reshuffling: exponential wealth law at scale, and the exact
/// uniform stationary law on a small state space.
pub fn criterion_7() -> Vec<CheckResult> {
    let mut results = Vec::new();

    const KS_TOL: f64 = 0.05;
    let spec = WeightSpec::delta_zero();
    let ks = final_ks(ModelKind::UniformReshuffling, &spec, 1000, 100_000, 1_000_000, SEED);
    results.push(CheckResult::new(
        7,
        "reshuffle vs Exponential(mean 100)",
        ks <= KS_TOL,
        format!("ks = {ks:.4} (tol {KS_TOL})"),
    ));

    const TV_TOL: f64 = 0.02;
    let (n, l) = (3usize, 6u64);
    let rho = GroupDistribution::pair_complete(n).unwrap();
    let mut state = ChainState::new(Configuration::near_constant(n, l), SEED + 7);
    let states: Vec<Configuration> = enumerate_omega(n, l).unwrap().collect();
    let mut visits = vec![0u64; states.len()];
    let index: std::collections::HashMap<&[u64], usize> =
        states.iter().enumerate().map(|(i, s)| (s.counts(), i)).collect();
    let steps = 1_000_000u64;
    for _ in 0..steps {
        step(ModelKind::UniformReshuffling, &mut state, &rho, &spec);
        visits[index[state.config().counts()]] += 1;
    }
    let uniform = 1.0 / states.len() as f64;
    let tv: f64 = 0.5
        * visits
            .iter()
            .map(|&v| (v as f64 / steps as f64 - uniform).abs())
            .sum::<f64>();
    results.push(CheckResult::new(
        7,
        "reshuffle long-run vs uniform on Omega_3(6)",
        tv <= TV_TOL,
        format!("tv = {tv:.4} (tol {TV_TOL})"),
    ));
    results
}

/// Tilted-family asymptotics at K = 1e4.
pub fn criterion_8() -> Vec<CheckResult> {
    let k = 1.0e4;
    let mut results = Vec::new();
    let cases: [(String, WeightSpec, f64); 4] = [
        ("power:0".into(), WeightSpec::power_alpha(0.0), 2.0),
        ("power:1".into(), WeightSpec::power_alpha(1.0), 3.0),
        ("power:3".into(), WeightSpec::power_alpha(3.0), 5.0),
        ("delta0".into(), WeightSpec::delta_zero(), 1.0),
    ];
    for (name, spec, slope) in cases {
        let s = solve_s_star(&spec, k, 1e-9).unwrap();
        let scaled = (1.0 - s) * k;
        let slope_ok = (scaled - slope).abs() <= 0.05 * slope;
        let variance_ratio = tilted_variance(&spec, s, k).unwrap() / (k * k);
        let predicted = 1.0 / slope;
        let var_ok = (variance_ratio - predicted).abs() <= 0.10 * predicted;
        results.push(CheckResult::new(
            8,
            format!("{name}: (1-s*)K and variance/K^2"),
            slope_ok && var_ok,
            format!(
                "(1-s*)K = {scaled:.4} (predicted {slope}, tol 5%), var/K^2 = {variance_ratio:.4} \
                 (predicted {predicted:.4}, tol 10%)"
            ),
        ));
    }
    results
}

/// Local limit theorem: the sup-norm discrepancy shrinks in N and is
/// small at N = 200.
pub fn criterion_9() -> Vec<CheckResult> {
    const TOL: f64 = 0.05;
    let spec = WeightSpec::constant(1.0).unwrap();
    let coarse = llt_error(&spec, 50, 20.0).unwrap();
    let fine = llt_error(&spec, 200, 20.0).unwrap();
    vec![CheckResult::new(
        9,
        "llt error decreasing and small, b_N = 20",
        fine < coarse && fine <= TOL,
        format!("error(50) = {coarse:.4}, error(200) = {fine:.4} (tol {TOL})"),
    )]
}

/// Equivalence of ensembles by the exact partition-function route.
pub fn criterion_10() -> Vec<CheckResult> {
    const TOL: f64 = 0.1;
    let mut results = Vec::new();
    for (name, spec, law) in [
        ("constant:1 vs Gamma(2, rate 2)", WeightSpec::constant(1.0).unwrap(), "gamma"),
        ("delta0 vs Exponential(rate 1)", WeightSpec::delta_zero(), "exponential"),
    ] {
        let coarse = ensemble_marginal_vs_limit(&spec, 8, 16.0, 1.0).unwrap();
        let fine = ensemble_marginal_vs_limit(&spec, 32, 64.0, 1.0).unwrap();
        let _ = law;
        results.push(CheckResult::new(
            10,
            name,
            fine <= TOL && fine < coarse,
            format!("tv(8,16) = {coarse:.4}, tv(32,64) = {fine:.4} (tol {TOL}, decreasing)"),
        ));
    }
    results
}

/// Byte-identical artifacts for identical (config, seed).
pub fn criterion_11() -> Vec<CheckResult> {
    let base = std::env::temp_dir().join(format!("coinflow-validate-{}", std::process::id()));
    let run_once = |tag: &str| -> anyhow::Result<Vec<(String, Vec<u8>)>> {
        let out = base.join(tag);
        let mut settings = Settings::default();
        settings.set("model", "saving")?;
        settings.set("weight", "power:1")?;
        settings.set("n", "50")?;
        settings.set("coins", "5000")?;
        settings.set("steps", "20000")?;
        settings.set("seed", "77")?;
        settings.set("replicas", "2")?;
        settings.set("snapshots", "2")?;
        settings.set("out", out.to_str().unwrap())?;
        let config = RunConfig::from_settings(&settings)?;
        crate::commands::cmd_simulate(&config)?;
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out)?
            .map(|entry| {
                let entry = entry?;
                Ok((
                    entry.file_name().to_string_lossy().into_owned(),
                    std::fs::read(entry.path())?,
                ))
            })
            .collect::<anyhow::Result<_>>()?;
        files.sort();
        Ok(files)
    };

    let result = (|| -> anyhow::Result<CheckResult> {
        let first = run_once("a")?;
        let second = run_once("b")?;
        let names: Vec<&str> = first.iter().map(|(n, _)| n.as_str()).collect();
        let identical = first == second;
        Ok(CheckResult::new(
            11,
            "simulate twice with identical config and seed",
            identical && !first.is_empty(),
            format!("{} artifacts compared byte-for-byte: {names:?}", first.len()),
        ))
    })();
    std::fs::remove_dir_all(&base).ok();
    match result {
        Ok(check) => vec![check],
        Err(e) => vec![CheckResult::new(11, "simulate twice", false, format!("error: {e}"))],
    }
}
