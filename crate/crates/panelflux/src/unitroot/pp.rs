//! Phillips-Perron test: the unaugmented Dickey-Fuller regression with the
//! t-ratio corrected nonparametrically for serial correlation through a
//! Newey-West (Bartlett kernel) long-run variance of the residuals.

use nalgebra::{DMatrix, DVector};

use super::mackinnon::mackinnon_pvalue;
use super::DetSpec;
use crate::error::{Error, Result};
use crate::linalg::ols;

/// Result of one Phillips-Perron test.
#[derive(Debug, Clone, PartialEq)]
pub struct PpOutcome {
    /// Serial-correlation-corrected t-ratio (Z-tau).
    pub z_tau: f64,
    /// MacKinnon asymptotic p-value of `z_tau`.
    pub p_value: f64,
    /// Bartlett kernel truncation lag used.
    pub bandwidth: usize,
    /// Rows in the regression, `T − 1`.
    pub nobs: usize,
}

/// Standard Newey-West bandwidth rule `⌊4·(T/100)^{2/9}⌋`.
pub fn default_bandwidth(t_len: usize) -> usize {
    (4.0 * (t_len as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

/// Phillips-Perron Z-tau test. `bandwidth = None` applies the default rule;
/// bandwidth 0 reduces exactly to the unaugmented DF t-ratio.
pub fn pp_test(values: &[f64], bandwidth: Option<usize>, det: DetSpec) -> Result<PpOutcome> {
    let t_len = values.len();
    if t_len < 10 {
        return Err(Error::NotEnoughObservations {
            operation: "phillips-perron test".to_string(),
            needed: 10,
            got: t_len,
        });
    }
    let bw = bandwidth.unwrap_or_else(|| default_bandwidth(t_len));
    let n = t_len - 1;
    let ncols = 2 + if det == DetSpec::ConstantTrend { 1 } else { 0 };
    let mut x = DMatrix::<f64>::zeros(n, ncols);
    let mut y = DVector::<f64>::zeros(n);
    for i in 0..n {
        y[i] = values[i + 1] - values[i];
        x[(i, 0)] = values[i];
        x[(i, 1)] = 1.0;
        if det == DetSpec::ConstantTrend {
            x[(i, 2)] = (i + 1) as f64;
        }
    }
    let fit = ols(&y, &x, "phillips-perron regression")?;
    let tau = fit.coef[0] / fit.std_err[0];
    let se = fit.std_err[0];
    let s = fit.sigma2.sqrt(); // dof-corrected regression std error
    let gamma0 = fit.rss / n as f64; // MLE residual variance
    // Bartlett long-run variance of the residuals.
    let u = &fit.resid;
    let mut lambda2 = gamma0;
    for j in 1..=bw {
        let w = 1.0 - j as f64 / (bw as f64 + 1.0);
        let mut cov = 0.0;
        for t in j..n {
            cov += u[t] * u[t - j];
        }
        lambda2 += 2.0 * w * cov / n as f64;
    }
    if lambda2 <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "long-run variance non-positive ({lambda2:e}) at bandwidth {bw}"
        )));
    }
    let z_tau = (gamma0 / lambda2).sqrt() * tau
        - 0.5 * (lambda2 - gamma0) / lambda2.sqrt() * (n as f64 * se / s);
    Ok(PpOutcome {
        z_tau,
        p_value: mackinnon_pvalue(z_tau, det),
        bandwidth: bw,
        nobs: n,
    })
}
