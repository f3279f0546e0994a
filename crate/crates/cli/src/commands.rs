//! The simulate / exact / limits pipelines: run, analyze, write CSV and
//! JSON artifacts. Every artifact embeds the resolved config; identical
//! (config, seed) pairs produce byte-identical files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use coinflow_core::configspace::{sample_uniform_composition, Configuration};
use coinflow_core::dynamics::{ergodicity_warnings, run, ChainState, ModelKind};
use coinflow_core::exact::{build_kernel, check_detailed_balance, partition_table};
use coinflow_core::limits::{
    ensemble_marginal_vs_limit, llt_error, solve_s_star, tilted_variance, LimitLaw,
};
use coinflow_core::stats::{
    histogram, ks_distance, moments, write_histogram_csv, RunSummary, WealthHistogram,
};
use coinflow_core::weights::WeightKind;

use crate::config::RunConfig;

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("COINFLOW_THREADS") {
        let threads: usize = raw.parse().context("COINFLOW_THREADS must be an integer")?;
        builder = builder.num_threads(threads.max(1));
    }
    Ok(builder.build()?)
}

fn artifact(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn write_hist_artifact(
    path: &Path,
    config: &RunConfig,
    replica: usize,
    replica_seed: u64,
    hist: &WealthHistogram,
    law: Option<&LimitLaw>,
) -> Result<()> {
    let mut out = artifact(path)?;
    writeln!(out, "# config: {}", config.resolved)?;
    writeln!(out, "# replica={replica} replica_seed={replica_seed}")?;
    write_histogram_csv(&mut out, hist, law)?;
    Ok(())
}

/// Runs the configured chain (all replicas), writing snapshot and final
/// histograms plus a JSON summary per replica.
pub fn cmd_simulate(config: &RunConfig) -> Result<()> {
    for warning in ergodicity_warnings(config.model, &config.weight, &config.groups) {
        eprintln!("warning: {warning}");
    }
    fs::create_dir_all(&config.out)?;
    let law = LimitLaw::from_spec(&config.weight, config.temp).ok();

    let pool = thread_pool()?;
    pool.install(|| {
        (0..config.replicas)
            .into_par_iter()
            .try_for_each(|replica| simulate_replica(config, replica, law.as_ref()))
    })
}

fn simulate_replica(config: &RunConfig, replica: usize, law: Option<&LimitLaw>) -> Result<()> {
    let replica_seed = config.seed + replica as u64;
    let rng = ChaCha8Rng::seed_from_u64(replica_seed);
    let start = if config.random_init {
        // The initial draw uses its own ChaCha stream so it cannot overlap
        // the chain's randomness.
        let mut init_rng = rng.clone();
        init_rng.set_stream(1);
        Configuration::new(sample_uniform_composition(config.n, config.l, &mut init_rng))
    } else {
        Configuration::near_constant(config.n, config.l)
    };
    let mut state = ChainState::with_rng(start, rng);

    let plot_width = 0.1 * config.temp;
    let snapshot_every = (config.snapshots > 0).then(|| (config.steps / config.snapshots).max(1));
    let mut snapshot_error = None;
    run(
        config.model,
        &mut state,
        &config.groups,
        &config.weight,
        config.steps,
        snapshot_every,
        |step_count, current| {
            if config.snapshots > 0 && step_count < config.steps && snapshot_error.is_none() {
                let hist = histogram(current, config.a_n, plot_width);
                let path = config.out.join(format!("hist_step{step_count}_r{replica}.csv"));
                if let Err(e) =
                    write_hist_artifact(&path, config, replica, replica_seed, &hist, law)
                {
                    snapshot_error = Some(e);
                }
            }
        },
    );
    if let Some(e) = snapshot_error {
        return Err(e);
    }

    let final_config = state.config();
    let plot_hist = histogram(final_config, config.a_n, plot_width);
    write_hist_artifact(
        &config.out.join(format!("hist_final_r{replica}.csv")),
        config,
        replica,
        replica_seed,
        &plot_hist,
        law,
    )?;

    // The KS score is computed at per-coin resolution, not plot bins.
    let fine_hist = histogram(final_config, config.a_n, 1.0 / config.a_n);
    let ks = law.map(|l| ks_distance(&fine_hist, l));
    let m = moments(final_config, config.a_n, 4);
    let alpha = config
        .weight
        .regularity()
        .map(|r| r.alpha)
        .filter(|a| a.is_finite());
    let summary = RunSummary {
        seed: replica_seed,
        model: config.model.name().to_string(),
        alpha,
        n: config.n,
        l: config.l,
        a_n: config.a_n,
        t: config.temp,
        n_steps: config.steps,
        ks,
        m1: m[0],
        m2: m[1],
        m3: m[2],
        m4: m[3],
        config: config.resolved.clone(),
    };
    let mut out = artifact(&config.out.join(format!("summary_r{replica}.json")))?;
    serde_json::to_writer_pretty(&mut out, &summary)?;
    writeln!(out)?;
    Ok(())
}

/// Exact analysis at the configured (N, L): the marginal table with the
/// constant-weight closed form, and a detailed-balance report for the
/// configured model.
pub fn cmd_exact(config: &RunConfig) -> Result<()> {
    fs::create_dir_all(&config.out)?;

    let table = partition_table(&config.weight, config.n, config.l)?;
    let is_constant = matches!(config.weight.kind(), WeightKind::Constant(_));
    let mut out = artifact(&config.out.join("marginal.csv"))?;
    writeln!(out, "# config: {}", config.resolved)?;
    writeln!(out, "k,marginal,lr_formula,abs_diff")?;
    for k in 0..=config.l {
        let marginal = table.marginal(config.n, config.l, k)?;
        if is_constant {
            let lr = coinflow_core::exact::lr_marginal_constant_g(config.n, config.l, k);
            writeln!(out, "{k},{marginal},{lr},{}", (marginal - lr).abs())?;
        } else {
            writeln!(out, "{k},{marginal},,")?;
        }
    }
    drop(out);

    let kernel = build_kernel(config.model, &config.weight, &config.groups, config.n, config.l)?;
    let mu: Vec<f64> = kernel
        .states()
        .iter()
        .map(|s| table.stationary_prob(s))
        .collect::<Result<_, _>>()?;
    let mut out = artifact(&config.out.join("detailed_balance.csv"))?;
    writeln!(out, "# config: {}", config.resolved)?;
    writeln!(out, "quantity,value")?;
    writeln!(out, "states,{}", kernel.n_states())?;
    writeln!(out, "max_row_sum_error,{}", kernel.row_sum_error())?;
    writeln!(out, "max_detailed_balance_violation,{}", check_detailed_balance(&kernel, &mu))?;
    writeln!(out, "stationarity_residual,{}", kernel.stationary_residual(&mu))?;
    if config.model == ModelKind::UniformReshuffling {
        writeln!(out, "max_kernel_asymmetry,{}", kernel.max_asymmetry())?;
    }
    Ok(())
}

/// Tilted-family asymptotics, local-limit-theorem error curve, and the
/// ensemble-equivalence TV table for the configured weight.
pub fn cmd_limits(config: &RunConfig) -> Result<()> {
    fs::create_dir_all(&config.out)?;
    let spec = &config.weight;
    let (slope, variance_ratio) = match spec.regularity() {
        Some(reg) if reg.alpha > -1.0 && !spec.is_summable() => {
            (reg.alpha + 2.0, 1.0 / (reg.alpha + 2.0))
        }
        _ => (1.0, 1.0),
    };

    let mut out = artifact(&config.out.join("s_star.csv"))?;
    writeln!(out, "# config: {}", config.resolved)?;
    writeln!(out, "K,s_star,one_minus_s_star_times_K,predicted,variance_ratio,predicted_ratio")?;
    for k in [100.0, 1000.0, 10_000.0] {
        let s = solve_s_star(spec, k, 1e-9)?;
        let ratio = tilted_variance(spec, s, k)? / (k * k);
        writeln!(out, "{k},{s},{},{slope},{ratio},{variance_ratio}", (1.0 - s) * k)?;
    }
    drop(out);

    let mut out = artifact(&config.out.join("llt_error.csv"))?;
    writeln!(out, "# config: {}", config.resolved)?;
    writeln!(out, "N,b_N,llt_error")?;
    for n in [50u64, 100, 200] {
        writeln!(out, "{n},20,{}", llt_error(spec, n, 20.0)?)?;
    }
    drop(out);

    let mut out = artifact(&config.out.join("ensemble_tv.csv"))?;
    writeln!(out, "# config: {}", config.resolved)?;
    writeln!(out, "N,a_N,T,tv")?;
    for (n, a_n) in [(8usize, 16.0), (16, 32.0), (32, 64.0)] {
        writeln!(out, "{n},{a_n},1,{}", ensemble_marginal_vs_limit(spec, n, a_n, 1.0)?)?;
    }
    Ok(())
}

/// Runs the validation suite, printing one line per check. The supplied
/// config has already passed construction; chains without an ergodicity
/// guarantee only draw a warning, since the suite runs its own pinned
/// parameter grid.
pub fn cmd_validate(config: &RunConfig) -> Result<bool> {
    for warning in ergodicity_warnings(config.model, &config.weight, &config.groups) {
        eprintln!("warning: {warning} (validation grid is unaffected)");
    }
    let results = crate::validate::all_criteria();
    let mut all_passed = true;
    for r in &results {
        println!("{r}");
        all_passed &= r.passed;
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!(
        "{} checks, {} passed, {} failed",
        results.len(),
        results.len() - failed,
        failed
    );
    Ok(all_passed)
}
