//! One-sided Chebyshev bound: `P(X >= mean + k sd) <= 1 / (1 + k²)`, so with
//! `k = sqrt((1 - eps) / eps)` the bound is exceeded with probability at most
//! `eps`.

use crate::error::{Error, Result};
use crate::rules::moments::MomentPair;

pub fn chebyshev_factor(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    Ok(((1.0 - epsilon) / epsilon).sqrt())
}

pub fn robust_fitness(mp: MomentPair, epsilon: f64) -> Result<f64> {
    Ok(mp.mean + chebyshev_factor(epsilon)? * mp.std_dev())
}
