//! Bernoulli Kullback-Leibler divergence and the Chernoff-Hoeffding tail
//! bound.

use crate::error::{Error, Result};

/// D(x || y) between Bernoulli(x) and Bernoulli(y); both arguments in (0, 1).
pub fn kl_divergence(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0) {
        return Err(Error::ParameterRange(format!(
            "kl_divergence needs x, y in (0, 1), got {x}, {y}"
        )));
    }
    Ok(x * (x / y).ln() + (1.0 - x) * ((1.0 - x) / (1.0 - y)).ln())
}

/// Upper bound on P( sum zeta_j >= (1 - lambda) |B| ) for |B| i.i.d.
/// Bernoulli(p) variables: exp(-D(1 - lambda || p) |B|). Requires
/// 1 - lambda - p > 0.
pub fn chernoff_bound(b: usize, p: f64, lambda: f64) -> Result<f64> {
    if b == 0 {
        return Err(Error::ParameterRange("|B| must be positive".into()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::ParameterRange(format!("p = {p} outside (0, 1)")));
    }
    if !(lambda > 0.0 && 1.0 - lambda - p > 0.0) {
        return Err(Error::ParameterRange(format!(
            "need 0 < lambda < 1 - p, got lambda = {lambda}, p = {p}"
        )));
    }
    let d = kl_divergence(1.0 - lambda, p)?;
    Ok((-d * b as f64).exp())
}
