//! The symmetry functionals from the reversibility argument, in exact
//! big-integer arithmetic over integer-valued weight tables.
//!
//! For vectors a, b with equal sums, S (pair case) and S_+ + S_- (cycle
//! case) are symmetric under swapping a and b; this is what makes the
//! product measure reversible for the exchange dynamics. The functions
//! here evaluate the sums so that the identities can be tested, not
//! proved.

use num_bigint::BigUint;
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SymmetryError {
    #[error("vectors must have equal sums (got {0} and {1})")]
    SumMismatch(u64, u64),
    #[error("cycle functionals need vectors of length >= 3 (got {0})")]
    CycleTooShort(usize),
    #[error("vectors must have equal lengths ({0} and {1})")]
    LengthMismatch(usize, usize),
}

/// Table lookup with zero extension past the end.
fn g_at(g: &[u64], k: i64) -> u64 {
    if k < 0 {
        return 0;
    }
    g.get(k as usize).copied().unwrap_or(0)
}

fn check_sums(a: &[u64], b: &[u64]) -> Result<(), SymmetryError> {
    if a.len() != b.len() {
        return Err(SymmetryError::LengthMismatch(a.len(), b.len()));
    }
    let sa: u64 = a.iter().sum();
    let sb: u64 = b.iter().sum();
    if sa != sb {
        return Err(SymmetryError::SumMismatch(sa, sb));
    }
    Ok(())
}

/// Pair functional: S(a,b) = sum over 0 <= t_i <= a_i of
/// g(t_1) g(t_2) I(t_1 - t_2 = a_1 - b_1) I(t_2 - t_1 = a_2 - b_2).
pub fn symmetry_pair(a: [u64; 2], b: [u64; 2], g: &[u64]) -> Result<BigUint, SymmetryError> {
    check_sums(&a, &b)?;
    let mut total = BigUint::zero();
    for t1 in 0..=a[0] as i64 {
        for t2 in 0..=a[1] as i64 {
            if t1 - t2 == a[0] as i64 - b[0] as i64 && t2 - t1 == a[1] as i64 - b[1] as i64 {
                total += BigUint::from(g_at(g, t1)) * BigUint::from(g_at(g, t2));
            }
        }
    }
    Ok(total)
}

/// Cycle functionals (S_+, S_-) for n >= 3:
/// S_+ constrains t_i - t_{i+1} = a_i - b_i cyclically, S_- the reverse
/// orientation t_i - t_{i-1} = a_i - b_i. The constraint chain pins every
/// t_i to t_1, so each sum is a single loop over t_1.
pub fn symmetry_cycle_parts(
    a: &[u64],
    b: &[u64],
    g: &[u64],
) -> Result<(BigUint, BigUint), SymmetryError> {
    check_sums(a, b)?;
    let n = a.len();
    if n < 3 {
        return Err(SymmetryError::CycleTooShort(n));
    }

    // diff[i] = a_i - b_i; the cyclic closure holds because sums agree.
    let diff: Vec<i64> = a.iter().zip(b).map(|(&x, &y)| x as i64 - y as i64).collect();

    let mut forward = BigUint::zero();
    let mut backward = BigUint::zero();
    for t1 in 0..=a[0] as i64 {
        // S_+: t_{i+1} = t_i - diff[i].
        let mut product = BigUint::from(g_at(g, t1));
        let mut t = t1;
        for i in 0..n - 1 {
            t -= diff[i];
            if t < 0 || t > a[i + 1] as i64 {
                product = BigUint::zero();
                break;
            }
            product *= BigUint::from(g_at(g, t));
        }
        forward += product;

        // S_-: t_{i} = t_{i-1} + diff[i].
        let mut product = BigUint::from(g_at(g, t1));
        let mut t = t1;
        for i in 1..n {
            t += diff[i];
            if t < 0 || t > a[i] as i64 {
                product = BigUint::zero();
                break;
            }
            product *= BigUint::from(g_at(g, t));
        }
        backward += product;
    }
    Ok((forward, backward))
}

/// S = S_+(a,b) + S_-(a,b).
pub fn symmetry_cycle(a: &[u64], b: &[u64], g: &[u64]) -> Result<BigUint, SymmetryError> {
    let (forward, backward) = symmetry_cycle_parts(a, b, g)?;
    Ok(forward + backward)
}
