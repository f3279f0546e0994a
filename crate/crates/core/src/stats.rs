//! Empirical wealth statistics: scaled histograms, raw moments, and
//! goodness-of-fit distances against limit laws and exact marginals.

use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::configspace::Configuration;
use crate::limits::LimitLaw;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("pmf supports differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

/// Binned distribution of the scaled wealth xi(x)/a_N.
#[derive(Debug, Clone)]
pub struct WealthHistogram {
    bin_width: f64,
    counts: Vec<u64>,
    n_agents: usize,
    a_n: f64,
    scaled_mean: f64,
}

/// Bins xi(x)/a_N into cells [j w, (j+1) w).
pub fn histogram(config: &Configuration, a_n: f64, bin_width: f64) -> WealthHistogram {
    assert!(a_n > 0.0 && bin_width > 0.0);
    let mut counts: Vec<u64> = Vec::new();
    for &coins in config.counts() {
        let bin = (coins as f64 / a_n / bin_width).floor() as usize;
        if counts.len() <= bin {
            counts.resize(bin + 1, 0);
        }
        counts[bin] += 1;
    }
    let n_agents = config.len();
    let scaled_mean = config.total() as f64 / (n_agents as f64 * a_n);
    WealthHistogram { bin_width, counts, n_agents, a_n, scaled_mean }
}

impl WealthHistogram {
    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn a_n(&self) -> f64 {
        self.a_n
    }

    /// Exact mean of the scaled wealth, L/(N a_N).
    pub fn scaled_mean(&self) -> f64 {
        self.scaled_mean
    }
}

/// Kolmogorov-Smirnov distance between the binned empirical law (each
/// bin's mass sitting at its left edge) and a limit law, evaluated at the
/// bin edges. Agents under the stationary law are exchangeable but not
/// independent, so this is a raw fit score with no p-value attached.
pub fn ks_distance(hist: &WealthHistogram, law: &LimitLaw) -> f64 {
    let n = hist.n_agents as f64;
    let w = hist.bin_width;
    let mut prefix = 0u64;
    let mut sup = 0.0f64;
    for (j, &count) in hist.counts.iter().enumerate() {
        prefix += count;
        let edge = j as f64 * w;
        sup = sup.max((prefix as f64 / n - law.cdf(edge)).abs());
    }
    let last_edge = hist.counts.len() as f64 * w;
    sup.max(1.0 - law.cdf(last_edge))
}

/// (1/2) sum |p_k - q_k| over a common support.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64, StatsError> {
    if p.len() != q.len() {
        return Err(StatsError::LengthMismatch(p.len(), q.len()));
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Scaled raw moments m_r = (1/N) sum (xi(x)/a_N)^r for r = 1..=max_order.
pub fn moments(config: &Configuration, a_n: f64, max_order: u32) -> Vec<f64> {
    assert!(a_n > 0.0 && max_order >= 1);
    let n = config.len() as f64;
    (1..=max_order)
        .map(|r| {
            config.counts().iter().map(|&c| (c as f64 / a_n).powi(r as i32)).sum::<f64>() / n
        })
        .collect()
}

/// One row per bin: `bin_left,bin_right,count,density,limit_density`.
/// Density integrates to one; the limit density is evaluated at the bin
/// midpoint when a law is given.
pub fn write_histogram_csv<W: Write>(
    out: &mut W,
    hist: &WealthHistogram,
    law: Option<&LimitLaw>,
) -> io::Result<()> {
    writeln!(out, "bin_left,bin_right,count,density,limit_density")?;
    let w = hist.bin_width;
    let norm = hist.n_agents as f64 * w;
    for (j, &count) in hist.counts.iter().enumerate() {
        let left = j as f64 * w;
        let right = (j as f64 + 1.0) * w;
        let density = count as f64 / norm;
        let limit = law.map(|l| l.density(0.5 * (left + right)));
        match limit {
            Some(v) => writeln!(out, "{left},{right},{count},{density},{v}")?,
            None => writeln!(out, "{left},{right},{count},{density},")?,
        }
    }
    Ok(())
}

/// Final JSON summary of a simulation run.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub model: String,
    pub alpha: Option<f64>,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: u64,
    #[serde(rename = "a_N")]
    pub a_n: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub n_steps: u64,
    /// KS distance to the limit law; absent when the weight spec does not
    /// select one.
    pub ks: Option<f64>,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
    pub config: String,
}
