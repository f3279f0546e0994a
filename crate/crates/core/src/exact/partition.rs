//! Partition functions Z_{n,l} = sum over Omega_n(l) of prod G(xi(x)),
//! computed in the log domain by the convolution recursion
//! Z_{n,l} = sum_k G(k) Z_{n-1,l-k}.

use crate::configspace::Configuration;
use crate::exact::ExactError;
use crate::math::{ln_choose, log_sum_exp};
use crate::weights::WeightSpec;

/// Default bound on n_max * l_max^2, the number of log-sum-exp terms.
pub const DEFAULT_COMPUTE_BUDGET: u128 = 4_000_000_000;

/// Table of log Z_{n,l} for 1 <= n <= n_max, 0 <= l <= l_max.
#[derive(Debug, Clone)]
pub struct PartitionTable {
    spec: WeightSpec,
    n_max: usize,
    l_max: u64,
    log_g: Vec<f64>,
    log_z: Vec<f64>, // row-major, row n-1 holds log Z_{n, 0..=l_max}
}

pub fn partition_table(
    spec: &WeightSpec,
    n_max: usize,
    l_max: u64,
) -> Result<PartitionTable, ExactError> {
    partition_table_with_budget(spec, n_max, l_max, DEFAULT_COMPUTE_BUDGET)
}

pub fn partition_table_with_budget(
    spec: &WeightSpec,
    n_max: usize,
    l_max: u64,
    budget: u128,
) -> Result<PartitionTable, ExactError> {
    assert!(n_max >= 1);
    let cost = n_max as u128 * (l_max as u128 + 1).pow(2);
    if cost > budget {
        return Err(ExactError::BudgetExceeded { n_max, l_max, cost, budget });
    }

    let width = l_max as usize + 1;
    let log_g: Vec<f64> = (0..=l_max).map(|k| spec.cum_g(k).ln()).collect();
    let mut log_z = vec![0.0f64; n_max * width];
    log_z[..width].copy_from_slice(&log_g);

    let mut terms = vec![0.0f64; width];
    for n in 1..n_max {
        let (prev_rows, row) = log_z.split_at_mut(n * width);
        let prev = &prev_rows[(n - 1) * width..];
        for l in 0..width {
            for k in 0..=l {
                terms[k] = log_g[k] + prev[l - k];
            }
            row[l] = log_sum_exp(&terms[..=l]);
        }
    }

    Ok(PartitionTable { spec: spec.clone(), n_max, l_max, log_g, log_z })
}

impl PartitionTable {
    pub fn spec(&self) -> &WeightSpec {
        &self.spec
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn l_max(&self) -> u64 {
        self.l_max
    }

    /// log Z_{n,l}.
    pub fn log_z(&self, n: usize, l: u64) -> Result<f64, ExactError> {
        self.check(n, l)?;
        Ok(self.log_z[(n - 1) * (self.l_max as usize + 1) + l as usize])
    }

    /// mu_{N,L}(xi) = prod_x G(xi(x)) / Z_{N,L} for N = xi.len(),
    /// L = xi.total().
    pub fn stationary_prob(&self, config: &Configuration) -> Result<f64, ExactError> {
        let n = config.len();
        let l = config.total();
        self.check(n, l)?;
        let log_num: f64 = config.counts().iter().map(|&k| self.log_g[k as usize]).sum();
        Ok((log_num - self.log_z(n, l)?).exp())
    }

    /// One-site marginal mu_{N,L}(xi(x) = k) = Z_{N-1,L-k} G(k) / Z_{N,L}.
    pub fn marginal(&self, n: usize, l: u64, k: u64) -> Result<f64, ExactError> {
        if k > l {
            return Err(ExactError::BadMarginalIndex { k, l });
        }
        self.check(n, l)?;
        assert!(n >= 2, "marginal needs at least two sites");
        let log_p = self.log_g[k as usize] + self.log_z(n - 1, l - k)? - self.log_z(n, l)?;
        Ok(log_p.exp())
    }

    fn check(&self, n: usize, l: u64) -> Result<(), ExactError> {
        if n == 0 || n > self.n_max || l > self.l_max {
            return Err(ExactError::OutOfRange { n, l, n_max: self.n_max, l_max: self.l_max });
        }
        Ok(())
    }
}

/// Closed-form marginal for constant g:
/// (c+1) C(L-c+2N-3, 2N-3) / C(L+2N-1, 2N-1), in the log-Gamma domain.
pub fn lr_marginal_constant_g(n: usize, l: u64, c: u64) -> f64 {
    assert!(n >= 2 && c <= l);
    let two_n = 2 * n as u64;
    let log_p = (c as f64 + 1.0).ln() + ln_choose(l - c + two_n - 3, two_n - 3)
        - ln_choose(l + two_n - 1, two_n - 1);
    log_p.exp()
}
