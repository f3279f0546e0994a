//! Core library for discrete money-exchange models.
//!
//! Agents hold integer coin counts; at each step a random group exchanges
//! coins by one of four local rules (immediate exchange, random saving,
//! its offer variant, uniform reshuffling). The total number of coins is
//! conserved. The stationary distribution is an explicit product form
//! weighted by the cumulative sums of a weight function `g`, and under
//! scaling the one-site wealth law converges to a Gamma or exponential
//! distribution.
//!
//! Module map:
//! - [`weights`]: weight functions `g`, cumulative sums `G`, regularity.
//! - [`configspace`]: coin configurations, composition enumeration/sampling.
//! - [`groups`]: the group-selection distribution and its hypergraph.
//! - [`dynamics`]: single steps and seeded multi-step runs of the chains.
//! - [`exact`]: partition functions, exact stationary laws, full kernels,
//!   and the symmetry functionals used by the reversibility argument.
//! - [`limits`]: tilted exponential family, mean-matching solver, local
//!   limit theorem and equivalence-of-ensembles checks.
//! - [`stats`]: wealth histograms, moments, KS/TV distances, artifacts.
//!
//! All randomness flows through explicitly seeded ChaCha8 generators;
//! results are reproducible per (build, seed).

pub mod configspace;
pub mod dynamics;
pub mod exact;
pub mod groups;
pub mod limits;
pub(crate) mod math;
pub mod stats;
pub mod weights;

pub use configspace::Configuration;
pub use dynamics::{ChainState, ModelKind};
pub use groups::GroupDistribution;
pub use limits::LimitLaw;
pub use weights::WeightSpec;
