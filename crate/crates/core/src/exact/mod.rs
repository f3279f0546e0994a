//! Exact small-instance analysis: partition functions and the product-form
//! stationary law, closed-form marginals for constant weights, full
//! transition kernels on enumerable state spaces, and the symmetry
//! functionals behind the reversibility argument. This layer is the oracle
//! the Monte Carlo dynamics are tested against.

mod kernel;
mod partition;
mod symmetry;

pub use kernel::{build_kernel, check_detailed_balance, Kernel};
pub use partition::{
    lr_marginal_constant_g, partition_table, partition_table_with_budget, PartitionTable,
    DEFAULT_COMPUTE_BUDGET,
};
pub use symmetry::{symmetry_cycle, symmetry_cycle_parts, symmetry_pair, SymmetryError};

use thiserror::Error;

use crate::configspace::ConfigError;

#[derive(Debug, Error)]
pub enum ExactError {
    #[error("partition table cost {cost} exceeds budget {budget} (N={n_max}, L={l_max})")]
    BudgetExceeded { n_max: usize, l_max: u64, cost: u128, budget: u128 },
    #[error("query (N={n}, L={l}) outside table bounds (N<={n_max}, L<={l_max})")]
    OutOfRange { n: usize, l: u64, n_max: usize, l_max: u64 },
    #[error("marginal index k={k} exceeds L={l}")]
    BadMarginalIndex { k: u64, l: u64 },
    #[error(transparent)]
    StateSpaceTooLarge(#[from] ConfigError),
    #[error("kernel construction caps interaction groups at 4 agents (got {0})")]
    GroupTooLarge(usize),
}
