//! Equivalence of ensembles at desk scale: the exact one-site marginal of
//! the conditioned product measure against the continuum limit law.

use crate::exact::partition_table;
use crate::limits::{LimitLaw, LimitsError};
use crate::weights::WeightSpec;

/// Builds the exact marginal of mu_{N,L} with L = round(N a_N T), rescales
/// the coin count by 1/a_N, and returns the total-variation distance to
/// the limit law integrated over the same 1/a_N-width cells.
pub fn ensemble_marginal_vs_limit(
    spec: &WeightSpec,
    n: usize,
    a_n: f64,
    temperature: f64,
) -> Result<f64, LimitsError> {
    assert!(n >= 2 && a_n > 0.0);
    let l = (n as f64 * a_n * temperature).round() as u64;
    let table = partition_table(spec, n, l)?;
    let law = LimitLaw::from_spec(spec, temperature)?;

    let mut tv = 0.0f64;
    let mut prev_cdf = 0.0f64;
    for k in 0..=l {
        let exact = table.marginal(n, l, k)?;
        let cdf = law.cdf((k as f64 + 1.0) / a_n);
        tv += (exact - (cdf - prev_cdf)).abs();
        prev_cdf = cdf;
    }
    tv += 1.0 - prev_cdf; // limit mass beyond the largest possible count
    Ok(0.5 * tv)
}
