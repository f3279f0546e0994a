//! The power series Q_n(s) = sum_k k^n s^k G(k) and the mean-matching
//! tilt s*(K), found by bisection on the (continuous, increasing) mean
//! Q_1/Q_0.

use crate::limits::LimitsError;
use crate::weights::WeightSpec;

pub const DEFAULT_REL_TOL: f64 = 1e-12;

const MAX_TERMS: u64 = 50_000_000;
const MAX_BISECTIONS: u32 = 200;

/// Q_n(s), truncated once the geometric tail bound (current term times
/// r/(1-r) for the recent worst term ratio r) drops below rel_tol times
/// the partial sum. Fallback: 50 consecutive terms each below
/// rel_tol * sum.
pub fn q_series(spec: &WeightSpec, s: f64, n: u32, rel_tol: f64) -> Result<f64, LimitsError> {
    if !(0.0..1.0).contains(&s) {
        return Err(LimitsError::BadTilt(s));
    }
    let mut sum = 0.0f64;
    let mut s_pow = 1.0f64;
    let mut recent_ratios = [f64::NAN; 4];
    let mut prev_term = f64::NAN;
    let mut small_streak = 0u32;

    for k in 0..MAX_TERMS {
        let term = (k as f64).powi(n as i32) * s_pow * spec.cum_g(k);
        sum += term;

        if term > 0.0 && prev_term > 0.0 {
            recent_ratios[(k % 4) as usize] = term / prev_term;
            let worst = recent_ratios.iter().cloned().fold(0.0, f64::max);
            // Skip the initial transient where terms still grow.
            if k >= 16 && worst < 1.0 {
                let tail_bound = term * worst / (1.0 - worst);
                if tail_bound <= rel_tol * sum {
                    return Ok(sum);
                }
            }
        }
        if term <= rel_tol * sum {
            small_streak += 1;
            if small_streak >= 50 {
                return Ok(sum);
            }
        } else {
            small_streak = 0;
        }

        prev_term = term;
        s_pow *= s;
    }
    Err(LimitsError::NonConvergence { context: "q_series term cap" })
}

/// E over nu_s of the coin count: Q_1(s)/Q_0(s).
pub fn tilted_mean(spec: &WeightSpec, s: f64) -> Result<f64, LimitsError> {
    Ok(q_series(spec, s, 1, DEFAULT_REL_TOL)? / q_series(spec, s, 0, DEFAULT_REL_TOL)?)
}

/// The unique s in (0, 1) with E^{nu_s}[k] = K, to |mean - K| <= tol * K.
/// The bracket starts from the asymptote 1 - (alpha+2)/K (or 1 - 1/K) and
/// is widened until it straddles the target.
pub fn solve_s_star(spec: &WeightSpec, big_k: f64, tol: f64) -> Result<f64, LimitsError> {
    if !big_k.is_finite() || big_k <= 0.0 {
        return Err(LimitsError::BadTarget(big_k));
    }
    let slope = match spec.regularity() {
        Some(reg) if reg.alpha > -1.0 && !spec.is_summable() => reg.alpha + 2.0,
        _ => 1.0,
    };
    let guess = (1.0 - slope / big_k).clamp(0.0, 1.0 - 1e-12);

    let mut lo = guess;
    let mut hi = guess;
    while tilted_mean(spec, lo)? > big_k {
        if lo == 0.0 {
            break;
        }
        lo = (1.0 - 2.0 * (1.0 - lo)).max(0.0);
    }
    loop {
        if tilted_mean(spec, hi)? >= big_k {
            break;
        }
        let gap = 1.0 - hi;
        if gap <= f64::EPSILON {
            return Err(LimitsError::NonConvergence { context: "s* bracket at s -> 1" });
        }
        hi = 1.0 - gap / 2.0;
    }

    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let mean = tilted_mean(spec, mid)?;
        if (mean - big_k).abs() <= tol * big_k {
            return Ok(mid);
        }
        if mean < big_k {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            return Err(LimitsError::NonConvergence { context: "s* interval exhausted" });
        }
    }
    Err(LimitsError::NonConvergence { context: "s* bisection cap" })
}

/// Var over nu_{s*} of the coin count, as Q_2/Q_0 - K^2 for the matched
/// mean K.
pub fn tilted_variance(spec: &WeightSpec, s_star: f64, big_k: f64) -> Result<f64, LimitsError> {
    let q0 = q_series(spec, s_star, 0, DEFAULT_REL_TOL)?;
    let q2 = q_series(spec, s_star, 2, DEFAULT_REL_TOL)?;
    Ok(q2 / q0 - big_k * big_k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn series_at_zero_tilt_keeps_only_the_first_term() {
        for spec in [
            WeightSpec::constant(1.0).unwrap(),
            WeightSpec::power_alpha(2.0),
            WeightSpec::delta_zero(),
        ] {
            assert_eq!(q_series(&spec, 0.0, 0, 1e-12).unwrap(), spec.cum_g(0));
            assert_eq!(q_series(&spec, 0.0, 1, 1e-12).unwrap(), 0.0);
        }
    }

    #[test]
    fn constant_weight_series_matches_closed_forms() {
        // G(k) = k+1: Q_0(s) = 1/(1-s)^2.
        let spec = WeightSpec::constant(1.0).unwrap();
        assert_relative_eq!(q_series(&spec, 0.5, 0, 1e-12).unwrap(), 4.0, max_relative = 1e-10);
        for s in [0.2, 0.9, 0.999] {
            let expected = (1.0f64 - s).powi(-2);
            assert_relative_eq!(
                q_series(&spec, s, 0, 1e-12).unwrap(),
                expected,
                max_relative = 1e-9
            );
        }
        // The normalized limit (1-s)^2 Q_0 -> Gamma(2) = 1 as s -> 1.
        let s = 0.999;
        assert!(((1.0f64 - s).powi(2) * q_series(&spec, s, 0, 1e-12).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn delta_zero_series_matches_geometric_forms() {
        // G = 1: Q_0 = 1/(1-s), Q_1 = s/(1-s)^2.
        let spec = WeightSpec::delta_zero();
        for s in [0.3, 0.8, 0.99] {
            assert_relative_eq!(
                q_series(&spec, s, 0, 1e-12).unwrap(),
                1.0 / (1.0 - s),
                max_relative = 1e-9
            );
            assert_relative_eq!(
                q_series(&spec, s, 1, 1e-12).unwrap(),
                s / (1.0f64 - s).powi(2),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn tilted_mean_is_strictly_increasing_for_builtins() {
        for spec in [
            WeightSpec::constant(1.0).unwrap(),
            WeightSpec::power_alpha(1.0),
            WeightSpec::power_alpha(-1.0),
            WeightSpec::power_alpha(-2.0),
            WeightSpec::delta_zero(),
        ] {
            let mut prev = -1.0;
            let mut s = 0.10;
            while s <= 0.99 {
                let mean = tilted_mean(&spec, s).unwrap();
                assert!(mean > prev, "mean not increasing at s={s} for {:?}", spec.kind());
                prev = mean;
                s += 0.01;
            }
        }
    }

    #[test]
    fn s_star_hits_the_requested_mean() {
        let spec = WeightSpec::power_alpha(1.0);
        for k in [5.0, 50.0, 2000.0] {
            let s = solve_s_star(&spec, k, 1e-9).unwrap();
            let mean = tilted_mean(&spec, s).unwrap();
            assert!((mean - k).abs() <= 1e-9 * k, "K={k}: mean={mean}");
        }
    }

    #[test]
    fn s_star_asymptotics_constant_weight() {
        // (1 - s*) K -> alpha + 2 = 2 for constant g.
        let spec = WeightSpec::constant(1.0).unwrap();
        let k = 1.0e4;
        let s = solve_s_star(&spec, k, 1e-9).unwrap();
        let scaled = (1.0 - s) * k;
        assert!((scaled - 2.0).abs() <= 0.05 * 2.0, "(1-s*)K = {scaled}");
    }

    #[test]
    fn s_star_asymptotics_delta_zero() {
        let spec = WeightSpec::delta_zero();
        let k = 1.0e4;
        let s = solve_s_star(&spec, k, 1e-9).unwrap();
        let scaled = (1.0 - s) * k;
        assert!((scaled - 1.0).abs() <= 0.05, "(1-s*)K = {scaled}");
    }

    #[test]
    fn variance_asymptotics() {
        let k = 1.0e4;
        // alpha = 1: variance / K^2 -> 1/3.
        let spec = WeightSpec::power_alpha(1.0);
        let s = solve_s_star(&spec, k, 1e-9).unwrap();
        let ratio = tilted_variance(&spec, s, k).unwrap() / (k * k);
        assert!((ratio - 1.0 / 3.0).abs() <= 0.1 / 3.0, "ratio = {ratio}");
        // delta_0: variance / K^2 -> 1.
        let spec = WeightSpec::delta_zero();
        let s = solve_s_star(&spec, k, 1e-9).unwrap();
        let ratio = tilted_variance(&spec, s, k).unwrap() / (k * k);
        assert!((ratio - 1.0).abs() <= 0.1, "ratio = {ratio}");
        assert!(tilted_variance(&spec, 0.5, tilted_mean(&spec, 0.5).unwrap()).unwrap() > 0.0);
    }

    #[test]
    fn invalid_arguments_are_rejected() {
        let spec = WeightSpec::constant(1.0).unwrap();
        assert!(matches!(q_series(&spec, 1.0, 0, 1e-12), Err(LimitsError::BadTilt(_))));
        assert!(matches!(q_series(&spec, -0.1, 0, 1e-12), Err(LimitsError::BadTilt(_))));
        assert!(matches!(solve_s_star(&spec, 0.0, 1e-9), Err(LimitsError::BadTarget(_))));
    }
}
