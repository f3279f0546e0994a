//! The analytical layer: the tilted exponential family nu_s with
//! pmf proportional to s^k G(k), its mean-matching parameter s*(K), the
//! limiting Gamma/exponential wealth laws, and numerical verification of
//! the local limit theorem and the equivalence of ensembles.

mod ensemble;
mod series;
mod tilted;

pub use ensemble::ensemble_marginal_vs_limit;
pub use series::{q_series, solve_s_star, tilted_mean, tilted_variance, DEFAULT_REL_TOL};
pub use tilted::{conv_power_pmf, llt_error, ConvPmf, TiltedLaw};

use statrs::distribution::{Continuous, ContinuousCDF, Exp, Gamma};
use thiserror::Error;

use crate::exact::ExactError;
use crate::weights::WeightSpec;

#[derive(Debug, Error)]
pub enum LimitsError {
    #[error("tilt parameter must lie in [0, 1) (got {0})")]
    BadTilt(f64),
    #[error("target mean must be positive and finite (got {0})")]
    BadTarget(f64),
    #[error("series or solver failed to converge: {context}")]
    NonConvergence { context: &'static str },
    #[error("no limit law: weight has neither a declared power class nor a summable tail")]
    UnknownLimitLaw,
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// The continuum wealth law at money temperature T: Gamma with shape
/// alpha+2 and mean T when g grows like k^alpha with alpha > -1, and
/// exponential with mean T when alpha <= -1 or g is summable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitLaw {
    Gamma { shape: f64, rate: f64 },
    Exponential { rate: f64 },
}

impl LimitLaw {
    pub fn from_spec(spec: &WeightSpec, temperature: f64) -> Result<Self, LimitsError> {
        if !temperature.is_finite() || temperature <= 0.0 {
            return Err(LimitsError::BadTarget(temperature));
        }
        if spec.is_summable() {
            return Ok(LimitLaw::Exponential { rate: 1.0 / temperature });
        }
        match spec.regularity() {
            Some(reg) if reg.alpha > -1.0 => Ok(LimitLaw::Gamma {
                shape: reg.alpha + 2.0,
                rate: (reg.alpha + 2.0) / temperature,
            }),
            Some(_) => Ok(LimitLaw::Exponential { rate: 1.0 / temperature }),
            None => Err(LimitsError::UnknownLimitLaw),
        }
    }

    pub fn density(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        match *self {
            LimitLaw::Gamma { shape, rate } => Gamma::new(shape, rate).unwrap().pdf(r),
            LimitLaw::Exponential { rate } => rate * (-rate * r).exp(),
        }
    }

    pub fn cdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        match *self {
            LimitLaw::Gamma { shape, rate } => Gamma::new(shape, rate).unwrap().cdf(r),
            LimitLaw::Exponential { rate } => Exp::new(rate).unwrap().cdf(r),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            LimitLaw::Gamma { shape, rate } => shape / rate,
            LimitLaw::Exponential { rate } => 1.0 / rate,
        }
    }
}
