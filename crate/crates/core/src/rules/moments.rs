//! Moments of the positive and negative parts of a zero-mean perturbation
//! `z = z⁺ - z⁻` with `z⁺ = max(z, 0)` and `z⁻ = max(-z, 0)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    /// `N(0, scale)`.
    Normal,
    /// `U(-scale, scale)`.
    Uniform,
}

impl std::str::FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Distribution::Normal),
            "uniform" => Ok(Distribution::Uniform),
            other => Err(Error::UnsupportedDistribution(other.to_string())),
        }
    }
}

/// For symmetric perturbations `E[z⁺] = E[z⁻]` and `Var[z⁺] = Var[z⁻]`; the
/// two variances are kept separate to match the general form.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SegregatedMoments {
    pub mu: f64,
    pub var_p: f64,
    pub var_m: f64,
}

impl SegregatedMoments {
    /// `Cov[z⁺, z⁻] = -mu²`, since `z⁺ z⁻ = 0` everywhere.
    pub fn covariance(&self) -> f64 {
        -self.mu * self.mu
    }
}

pub fn segregated_moments(distribution: Distribution, scale: f64) -> Result<SegregatedMoments> {
    if !(scale >= 0.0) {
        return Err(Error::Invalid(format!("distribution scale {scale} must be nonnegative")));
    }
    let (mu, var) = match distribution {
        Distribution::Normal => (scale / (2.0 * PI).sqrt(), (PI - 1.0) * scale * scale / (2.0 * PI)),
        Distribution::Uniform => (scale / 4.0, 5.0 * scale * scale / 48.0),
    };
    Ok(SegregatedMoments { mu, var_p: var, var_m: var })
}

/// Mean and variance, or upper bounds on them.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MomentPair {
    pub mean: f64,
    pub var: f64,
}

impl MomentPair {
    pub fn new(mean: f64, var: f64) -> Self {
        Self { mean, var }
    }

    pub fn std_dev(&self) -> f64 {
        self.var.max(0.0).sqrt()
    }
}
