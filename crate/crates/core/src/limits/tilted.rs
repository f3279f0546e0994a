//! The tilted law nu_s(k) = s^k G(k) / Q_0(s), its convolution powers,
//! and the numerical local-limit-theorem discrepancy.

use crate::limits::series::{q_series, solve_s_star, tilted_variance, DEFAULT_REL_TOL};
use crate::limits::LimitsError;
use crate::weights::WeightSpec;

/// Mass beyond the pmf truncation point is kept below this.
const TRUNCATION_TOL: f64 = 1e-12;

/// nu_s with its pmf cached over {0..truncation_k}.
#[derive(Debug, Clone)]
pub struct TiltedLaw {
    s: f64,
    q0: f64,
    pmf: Vec<f64>,
}

impl TiltedLaw {
    pub fn new(spec: &WeightSpec, s: f64) -> Result<Self, LimitsError> {
        let q0 = q_series(spec, s, 0, DEFAULT_REL_TOL)?;
        let mut pmf = Vec::new();
        let mut covered = 0.0f64;
        let mut s_pow = 1.0f64;
        let mut k = 0u64;
        while covered < 1.0 - TRUNCATION_TOL {
            let p = s_pow * spec.cum_g(k) / q0;
            pmf.push(p);
            covered += p;
            s_pow *= s;
            k += 1;
            if k > 100_000_000 {
                return Err(LimitsError::NonConvergence { context: "tilted pmf truncation" });
            }
        }
        Ok(TiltedLaw { s, q0, pmf })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn normalizer(&self) -> f64 {
        self.q0
    }

    pub fn truncation_k(&self) -> u64 {
        self.pmf.len() as u64 - 1
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn prob(&self, k: u64) -> f64 {
        self.pmf.get(k as usize).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(k, &p)| k as f64 * p).sum()
    }
}

/// The pmf of a sum of `n` independent nu_s draws, restricted to
/// {0..l_max}. Truncation is exact for nonnegative summands: a partial
/// sum past l_max can never come back, so the entries are the true
/// probabilities and `lost_mass` is exactly the mass of sums beyond
/// l_max (plus the pmf truncation tail).
#[derive(Debug, Clone)]
pub struct ConvPmf {
    pub pmf: Vec<f64>,
    pub lost_mass: f64,
}

impl ConvPmf {
    pub fn kept_mass(&self) -> f64 {
        self.pmf.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(l, &p)| l as f64 * p).sum::<f64>()
            / self.kept_mass()
    }
}

/// n-fold convolution power of nu_s on {0..l_max} by binary
/// exponentiation.
pub fn conv_power_pmf(
    spec: &WeightSpec,
    s: f64,
    n: u64,
    l_max: u64,
) -> Result<ConvPmf, LimitsError> {
    assert!(n >= 1);
    let law = TiltedLaw::new(spec, s)?;
    let cut = (l_max as usize + 1).min(law.pmf().len());
    let base: Vec<f64> = law.pmf()[..cut].to_vec();

    let mut result = vec![1.0f64]; // delta at zero
    let mut square = base;
    let mut exponent = n;
    loop {
        if exponent & 1 == 1 {
            result = convolve_truncated(&result, &square, l_max as usize);
        }
        exponent >>= 1;
        if exponent == 0 {
            break;
        }
        square = convolve_truncated(&square, &square, l_max as usize);
    }
    let lost_mass = 1.0 - result.iter().sum::<f64>();
    Ok(ConvPmf { pmf: result, lost_mass })
}

fn convolve_truncated(p: &[f64], q: &[f64], l_max: usize) -> Vec<f64> {
    let len = (p.len() + q.len() - 1).min(l_max + 1);
    let mut out = vec![0.0f64; len];
    for (i, &pi) in p.iter().enumerate() {
        if pi == 0.0 || i >= len {
            continue;
        }
        let top = (len - i).min(q.len());
        for (j, &qj) in q[..top].iter().enumerate() {
            out[i + j] += pi * qj;
        }
    }
    out
}

/// Local-limit-theorem discrepancy for the triangular array nu_{s*(b_n)}:
/// sup over L of |sqrt(N sigma^2) P(sum = L) - phi((L - N b_n)/sqrt(N sigma^2))|
/// with phi the standard normal density.
pub fn llt_error(spec: &WeightSpec, n: u64, b_n: f64) -> Result<f64, LimitsError> {
    let s_star = solve_s_star(spec, b_n, 1e-9)?;
    let sigma2 = tilted_variance(spec, s_star, b_n)?;
    let sd_sum = (n as f64 * sigma2).sqrt();
    let center = n as f64 * b_n;
    let l_max = (center + 12.0 * sd_sum).ceil() as u64;

    let conv = conv_power_pmf(spec, s_star, n, l_max)?;
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let mut sup = 0.0f64;
    for (l, &p) in conv.pmf.iter().enumerate() {
        let z = (l as f64 - center) / sd_sum;
        let gauss = norm * (-0.5 * z * z).exp();
        sup = sup.max((sd_sum * p - gauss).abs());
    }
    Ok(sup)
}
