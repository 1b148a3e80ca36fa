//! Augmented Dickey-Fuller test with MacKinnon p-values and Schwarz-criterion
//! lag selection.
//!
//! Regression: `Δy_t = ρ·y_{t−1} + Σ_{j=1..p} γ_j·Δy_{t−j} + α [+ β·t] + ε_t`;
//! the test statistic is the t-ratio of `ρ`. Usable sample after lagging:
//! `T − 1 − p` rows.

use nalgebra::{DMatrix, DVector};

use super::mackinnon::mackinnon_pvalue;
use super::DetSpec;
use crate::error::{Error, Result};
use crate::linalg::ols;

/// Result of one ADF regression.
#[derive(Debug, Clone, PartialEq)]
pub struct AdfOutcome {
    /// t-ratio of the lagged level.
    pub tau: f64,
    /// MacKinnon asymptotic p-value of `tau`.
    pub p_value: f64,
    /// Lag-difference terms included.
    pub lags: usize,
    /// Rows in the regression, `T − 1 − lags`.
    pub nobs: usize,
}

/// Design matrix and response for the ADF regression of `values` with `p`
/// lagged differences, restricted to the last `nobs` usable rows.
fn build_design(
    values: &[f64],
    p: usize,
    det: DetSpec,
    common_trim: usize,
) -> (DVector<f64>, DMatrix<f64>) {
    let t_len = values.len();
    let dy: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let trim = p.max(common_trim);
    let nobs = t_len - 1 - trim;
    let ncols = 1 + p + 1 + if det == DetSpec::ConstantTrend { 1 } else { 0 };
    let mut x = DMatrix::<f64>::zeros(nobs, ncols);
    let mut y = DVector::<f64>::zeros(nobs);
    for i in 0..nobs {
        let t = trim + i; // index into dy
        y[i] = dy[t];
        x[(i, 0)] = values[t]; // y_{t−1} for Δy_t
        for l in 1..=p {
            x[(i, l)] = dy[t - l];
        }
        x[(i, p + 1)] = 1.0;
        if det == DetSpec::ConstantTrend {
            x[(i, p + 2)] = (i + 1) as f64;
        }
    }
    (y, x)
}

/// ADF test at a fixed lag order.
pub fn adf_test(values: &[f64], lags: usize, det: DetSpec) -> Result<AdfOutcome> {
    if values.len() < lags + 10 {
        return Err(Error::NotEnoughObservations {
            operation: "adf test".to_string(),
            needed: lags + 10,
            got: values.len(),
        });
    }
    let (y, x) = build_design(values, lags, det, 0);
    let fit = ols(&y, &x, "adf regression")?;
    let tau = fit.coef[0] / fit.std_err[0];
    Ok(AdfOutcome {
        tau,
        p_value: mackinnon_pvalue(tau, det),
        lags,
        nobs: fit.nobs,
    })
}

/// Default maximum lag for automatic selection: `⌊12·(T/100)^{1/4}⌋`,
/// capped so the largest candidate regression stays estimable.
pub fn default_max_lags(t_len: usize, det: DetSpec) -> usize {
    let ndet = match det {
        DetSpec::Constant => 1,
        DetSpec::ConstantTrend => 2,
    };
    let rule = (12.0 * (t_len as f64 / 100.0).powf(0.25)).floor() as usize;
    let cap = (t_len.saturating_sub(1) / 2).saturating_sub(ndet + 1);
    rule.min(cap)
}

/// Choose the ADF lag order by the Schwarz (BIC) criterion.
///
/// All candidates `0..=max_lags` are scored on the common sample trimmed for
/// `max_lags`, so their likelihoods are comparable; ties go to the smaller
/// lag. The criterion per candidate is `n·ln(RSS/n) + k·ln(n)`.
pub fn select_adf_lags(values: &[f64], det: DetSpec, max_lags: usize) -> Result<usize> {
    if values.len() < max_lags + 10 {
        return Err(Error::NotEnoughObservations {
            operation: "adf lag selection".to_string(),
            needed: max_lags + 10,
            got: values.len(),
        });
    }
    let mut best = (f64::INFINITY, 0usize);
    for p in 0..=max_lags {
        let (y, x) = build_design(values, p, det, max_lags);
        let fit = ols(&y, &x, "adf lag selection")?;
        let n = fit.nobs as f64;
        let bic = n * (fit.rss / n).ln() + fit.nregs as f64 * n.ln();
        if bic < best.0 {
            best = (bic, p);
        }
    }
    Ok(best.1)
}

/// ADF test with Schwarz-selected lag order (selection on the common sample,
/// final regression refitted on the full usable sample for the chosen lag).
pub fn adf_test_auto(values: &[f64], det: DetSpec) -> Result<AdfOutcome> {
    let max_lags = default_max_lags(values.len(), det);
    let lags = select_adf_lags(values, det, max_lags)?;
    adf_test(values, lags, det)
}
