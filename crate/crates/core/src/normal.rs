//! Standard normal CDF helper shared across modules.

use std::f64::consts::SQRT_2;

/// Φ(x), the standard normal cumulative distribution function.
pub fn cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / SQRT_2)
}
