//! Fisher's combination of independent per-unit p-values:
//! `−2 Σ ln pᵢ ~ χ²(2N)` under the joint null.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Smallest p-value admitted into the log; exact zeros are clamped here and
/// counted so reports can warn about them.
pub const P_CLAMP: f64 = 1e-16;

/// Combined chi-square statistic over per-unit p-values.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherOutcome {
    pub statistic: f64,
    pub p_value: f64,
    /// Degrees of freedom, `2 × N`.
    pub dof: usize,
    /// Number of inputs clamped up to [`P_CLAMP`].
    pub clamped: usize,
}

/// Combine per-unit p-values; inputs must lie in `[0, 1]` (zeros are clamped
/// with a count rather than rejected, since MacKinnon p-values saturate).
pub fn fisher_combine(pvalues: &[f64]) -> Result<FisherOutcome> {
    if pvalues.is_empty() {
        return Err(Error::InvalidParameter(
            "fisher combination needs ≥ 1 p-value".to_string(),
        ));
    }
    let mut statistic = 0.0;
    let mut clamped = 0usize;
    for (i, &p) in pvalues.iter().enumerate() {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "p-value {p} at position {i} outside [0, 1]"
            )));
        }
        let p = if p < P_CLAMP {
            clamped += 1;
            P_CLAMP
        } else {
            p
        };
        statistic += -2.0 * p.ln();
    }
    let dof = 2 * pvalues.len();
    let chi = ChiSquared::new(dof as f64).expect("dof ≥ 2");
    Ok(FisherOutcome {
        statistic,
        p_value: chi.sf(statistic),
        dof,
        clamped,
    })
}
