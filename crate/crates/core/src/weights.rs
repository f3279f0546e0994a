//! Weight functions `g` on the nonnegative integers and their cumulative
//! sums `G(k) = sum_{j<=k} g(j)`.
//!
//! `G` drives both the coin-count sampling law (`g(k)/G(holdings)`) and the
//! stationary product form, so its prefix sums are cached inside the spec.
//! The cache is guarded by an `RwLock`: readers may run concurrently, and
//! callers that need lock-free hot loops can pre-extend it with
//! [`WeightSpec::ensure_cached`].

use std::str::FromStr;
use std::sync::RwLock;

use thiserror::Error;

/// How a finite weight table continues beyond its last entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailRule {
    /// g(k) = 0 past the table; makes `sum g` finite.
    ZeroExtend,
    /// g(k) repeats the last table value forever.
    ConstExtend,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    /// g(k) = gamma for all k.
    Constant(f64),
    /// g(k) = (k+1)^alpha.
    PowerAlpha(f64),
    /// g(k) = 1 if k = 0 else 0; the uniform-reshuffling weight.
    DeltaZero,
    /// Finite table of values with an explicit tail rule.
    Table { values: Vec<f64>, tail: TailRule },
}

/// Asymptotic regularity class: g(k) / k^alpha -> c_alpha.
///
/// For `DeltaZero` we use `alpha = -inf`, meaning faster-than-any-power
/// decay; every branch test of the form `alpha > -1` then lands in the
/// summable/exponential case, which is the correct limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularity {
    pub alpha: f64,
    pub c_alpha: f64,
}

#[derive(Debug, Error)]
pub enum WeightError {
    #[error("g(0) must be positive (got {0})")]
    ZeroAtOrigin(f64),
    #[error("weight values must be nonnegative and finite (g({index}) = {value})")]
    NegativeValue { index: usize, value: f64 },
    #[error("constant weight must be positive (got {0})")]
    NonPositiveConstant(f64),
    #[error("asymptotic form requires a declared regularity class")]
    MissingRegularity,
    #[error("cannot parse weight spec `{0}`")]
    Parse(String),
}

/// A weight function together with its cached prefix sums.
#[derive(Debug)]
pub struct WeightSpec {
    kind: WeightKind,
    regularity: Option<Regularity>,
    // cumsum[k] = G(k); extended on demand, never shrunk.
    cumsum: RwLock<Vec<f64>>,
}

impl Clone for WeightSpec {
    fn clone(&self) -> Self {
        WeightSpec {
            kind: self.kind.clone(),
            regularity: self.regularity,
            cumsum: RwLock::new(self.cumsum.read().unwrap().clone()),
        }
    }
}

impl PartialEq for WeightSpec {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.regularity == other.regularity
    }
}

impl WeightSpec {
    pub fn constant(gamma: f64) -> Result<Self, WeightError> {
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(WeightError::NonPositiveConstant(gamma));
        }
        Ok(Self::with_kind(
            WeightKind::Constant(gamma),
            Some(Regularity { alpha: 0.0, c_alpha: gamma }),
        ))
    }

    pub fn power_alpha(alpha: f64) -> Self {
        Self::with_kind(
            WeightKind::PowerAlpha(alpha),
            Some(Regularity { alpha, c_alpha: 1.0 }),
        )
    }

    pub fn delta_zero() -> Self {
        Self::with_kind(
            WeightKind::DeltaZero,
            Some(Regularity { alpha: f64::NEG_INFINITY, c_alpha: 1.0 }),
        )
    }

    /// Finite table; `regularity` is caller-declared metadata and is not
    /// checked against the values.
    pub fn table(
        values: Vec<f64>,
        tail: TailRule,
        regularity: Option<Regularity>,
    ) -> Result<Self, WeightError> {
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(WeightError::NegativeValue { index, value });
            }
        }
        let g0 = values.first().copied().unwrap_or(0.0);
        if g0 <= 0.0 {
            return Err(WeightError::ZeroAtOrigin(g0));
        }
        Ok(Self::with_kind(WeightKind::Table { values, tail }, regularity))
    }

    fn with_kind(kind: WeightKind, regularity: Option<Regularity>) -> Self {
        let spec = WeightSpec { kind, regularity, cumsum: RwLock::new(Vec::new()) };
        spec.ensure_cached(0);
        spec
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn regularity(&self) -> Option<Regularity> {
        self.regularity
    }

    /// True when `sum_k g(k)` is finite, which selects the exponential
    /// branch of the limit law regardless of a declared power class.
    pub fn is_summable(&self) -> bool {
        match &self.kind {
            WeightKind::Constant(_) => false,
            WeightKind::PowerAlpha(alpha) => *alpha < -1.0,
            WeightKind::DeltaZero => true,
            WeightKind::Table { values, tail } => match tail {
                TailRule::ZeroExtend => true,
                TailRule::ConstExtend => values.last().copied().unwrap_or(0.0) == 0.0,
            },
        }
    }

    /// g(k).
    pub fn g(&self, k: u64) -> f64 {
        match &self.kind {
            WeightKind::Constant(gamma) => *gamma,
            WeightKind::PowerAlpha(alpha) => (k as f64 + 1.0).powf(*alpha),
            WeightKind::DeltaZero => {
                if k == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            WeightKind::Table { values, tail } => {
                if (k as usize) < values.len() {
                    values[k as usize]
                } else {
                    match tail {
                        TailRule::ZeroExtend => 0.0,
                        TailRule::ConstExtend => *values.last().unwrap(),
                    }
                }
            }
        }
    }

    /// G(k), from the prefix-sum cache.
    pub fn cum_g(&self, k: u64) -> f64 {
        self.ensure_cached(k);
        self.cumsum.read().unwrap()[k as usize]
    }

    /// Extends the prefix-sum cache through index `k`.
    pub fn ensure_cached(&self, k: u64) {
        {
            let cache = self.cumsum.read().unwrap();
            if cache.len() > k as usize {
                return;
            }
        }
        let mut cache = self.cumsum.write().unwrap();
        if cache.is_empty() {
            cache.push(self.g(0));
        }
        while cache.len() <= k as usize {
            let next = cache.len() as u64;
            let value = cache[cache.len() - 1] + self.g(next);
            cache.push(value);
        }
    }

    /// Runs `f` on the prefix sums `G(0..=upto)` under a single read lock.
    pub(crate) fn with_cumsum<R>(&self, upto: u64, f: impl FnOnce(&[f64]) -> R) -> R {
        self.ensure_cached(upto);
        let cache = self.cumsum.read().unwrap();
        f(&cache[..=upto as usize])
    }

    /// Inverse CDF of the truncated law P(k) = g(k)/G(holdings) on
    /// {0..holdings}: the smallest k with u * G(holdings) < G(k).
    pub fn inv_cdf(&self, holdings: u64, u: f64) -> u64 {
        debug_assert!((0.0..1.0).contains(&u));
        self.with_cumsum(holdings, |cumsum| {
            let target = u * cumsum[holdings as usize];
            let k = cumsum.partition_point(|&c| c <= target) as u64;
            k.min(holdings)
        })
    }

    /// Leading-order asymptote of G(k): `c/(alpha+1) k^(alpha+1)` for
    /// alpha > -1, `c log k` at alpha = -1, and the limiting constant
    /// (approximated by G at the evaluation point) for alpha < -1.
    /// Diagnostic only.
    pub fn asymptotic_g(&self, k: u64) -> Result<f64, WeightError> {
        let Regularity { alpha, c_alpha } = self.regularity.ok_or(WeightError::MissingRegularity)?;
        if alpha > -1.0 {
            Ok(c_alpha / (alpha + 1.0) * (k as f64).powf(alpha + 1.0))
        } else if alpha == -1.0 {
            Ok(c_alpha * (k as f64).ln())
        } else {
            Ok(self.cum_g(k))
        }
    }
}

/// Config syntax: `constant:<gamma> | power:<alpha> | delta0 |
/// table:<v0,v1,...>:<zero|const>`.
impl FromStr for WeightSpec {
    type Err = WeightError;

    fn from_str(s: &str) -> Result<Self, WeightError> {
        let s = s.trim();
        if s == "delta0" {
            return Ok(WeightSpec::delta_zero());
        }
        if let Some(rest) = s.strip_prefix("constant:") {
            let gamma: f64 = rest.trim().parse().map_err(|_| WeightError::Parse(s.into()))?;
            return WeightSpec::constant(gamma);
        }
        if let Some(rest) = s.strip_prefix("power:") {
            let alpha: f64 = rest.trim().parse().map_err(|_| WeightError::Parse(s.into()))?;
            return Ok(WeightSpec::power_alpha(alpha));
        }
        if let Some(rest) = s.strip_prefix("table:") {
            let (values_part, tail_part) =
                rest.rsplit_once(':').ok_or_else(|| WeightError::Parse(s.into()))?;
            let tail = match tail_part.trim() {
                "zero" => TailRule::ZeroExtend,
                "const" => TailRule::ConstExtend,
                _ => return Err(WeightError::Parse(s.into())),
            };
            let values = values_part
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| WeightError::Parse(s.into()))?;
            return WeightSpec::table(values, tail, None);
        }
        Err(WeightError::Parse(s.into()))
    }
}
