//! MacKinnon (1994) response-surface p-values for Dickey-Fuller-type tau
//! statistics, single-series case, constant and constant+trend regressions.
//!
//! The approximation is `p = Φ(c0 + c1·τ + c2·τ² [+ c3·τ³])` with one
//! polynomial for the far-left tail and one for the center/right, split at a
//! published threshold; beyond the tabulated range the p-value saturates to
//! 0 or 1.

use statrs::distribution::{ContinuousCDF, Normal};

use super::DetSpec;

struct Surface {
    tau_max: f64,
    tau_min: f64,
    tau_star: f64,
    small_p: [f64; 3],
    large_p: [f64; 4],
}

/// Constant-only regression surface.
const SURFACE_C: Surface = Surface {
    tau_max: 2.74,
    tau_min: -18.83,
    tau_star: -1.61,
    small_p: [2.1659, 1.4412, 0.038269],
    large_p: [1.7339, 0.93202, -0.12745, -0.010368],
};

/// Constant+trend regression surface.
const SURFACE_CT: Surface = Surface {
    tau_max: 0.7,
    tau_min: -16.18,
    tau_star: -2.89,
    small_p: [3.2512, 1.6047, 0.049588],
    large_p: [2.5261, 0.61654, -0.37956, -0.060285],
};

/// Approximate asymptotic p-value of a DF/ADF/PP tau statistic.
pub fn mackinnon_pvalue(tau: f64, det: DetSpec) -> f64 {
    let s = match det {
        DetSpec::Constant => &SURFACE_C,
        DetSpec::ConstantTrend => &SURFACE_CT,
    };
    if tau > s.tau_max {
        return 1.0;
    }
    if tau < s.tau_min {
        return 0.0;
    }
    let z = if tau <= s.tau_star {
        let [c0, c1, c2] = s.small_p;
        c0 + c1 * tau + c2 * tau * tau
    } else {
        let [c0, c1, c2, c3] = s.large_p;
        c0 + c1 * tau + c2 * tau * tau + c3 * tau * tau * tau
    };
    Normal::standard().cdf(z)
}

/// Standard normal CDF, shared by the unit-root statistics.
pub(crate) fn norm_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}
