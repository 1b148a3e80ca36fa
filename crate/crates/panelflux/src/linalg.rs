//! Small dense linear-algebra helpers shared by the estimators.
//!
//! Everything here wraps [`nalgebra`] types; the helpers exist so that the
//! econometric modules agree on one OLS implementation (and therefore on one
//! set of standard errors) and on one Cholesky with a descriptive failure.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Result of an ordinary-least-squares fit of `y` on the columns of `x`.
#[derive(Debug, Clone)]
pub struct OlsFit {
    /// Estimated coefficients, one per column of the design matrix.
    pub coef: DVector<f64>,
    /// Conventional standard errors, `sqrt(sigma2 * diag((X'X)^-1))`.
    pub std_err: DVector<f64>,
    /// Residuals `y - X b`.
    pub resid: DVector<f64>,
    /// Residual sum of squares.
    pub rss: f64,
    /// Degrees-of-freedom-corrected residual variance `rss / (n - k)`.
    pub sigma2: f64,
    /// `(X'X)^-1`, kept for covariance computations downstream.
    pub xtx_inv: DMatrix<f64>,
    /// Number of rows used.
    pub nobs: usize,
    /// Number of regressors.
    pub nregs: usize,
}

impl OlsFit {
    /// t-statistics `coef / std_err`.
    pub fn t_stats(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.coef.len(),
            self.coef.iter().zip(self.std_err.iter()).map(|(b, s)| b / s),
        )
    }
}

/// Ordinary least squares via the normal equations, solved with a Cholesky
/// factorization of `X'X`.
///
/// Fails with [`Error::SingularMatrix`] when `X'X` is not positive definite
/// (collinear regressors) and with [`Error::NotEnoughObservations`] when
/// `n <= k` so that the residual variance would be undefined.
pub fn ols(y: &DVector<f64>, x: &DMatrix<f64>, context: &str) -> Result<OlsFit> {
    let n = x.nrows();
    let k = x.ncols();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            context: format!("ols response in {context}"),
            expected: n,
            got: y.len(),
        });
    }
    if n <= k {
        return Err(Error::NotEnoughObservations {
            operation: format!("ols in {context}"),
            needed: k + 1,
            got: n,
        });
    }

    let xtx = x.transpose() * x;
    let xty = x.transpose() * y;
    let chol = nalgebra::Cholesky::new(xtx).ok_or_else(|| Error::SingularMatrix {
        context: context.to_string(),
    })?;
    let coef = chol.solve(&xty);
    let xtx_inv = chol.inverse();

    let resid = y - x * &coef;
    let rss = resid.dot(&resid);
    let sigma2 = rss / (n - k) as f64;
    let std_err = DVector::from_iterator(
        k,
        (0..k).map(|j| (sigma2 * xtx_inv[(j, j)]).max(0.0).sqrt()),
    );

    Ok(OlsFit {
        coef,
        std_err,
        resid,
        rss,
        sigma2,
        xtx_inv,
        nobs: n,
        nregs: k,
    })
}

/// Lower-triangular Cholesky factor `L` with `L L' = m`.
///
/// Implemented directly (rather than through `nalgebra::Cholesky`) so the
/// error can report which pivot failed; impulse-response orthogonalization
/// wants that diagnostic when a residual covariance is degenerate.
pub fn cholesky_lower(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "cholesky (square matrix required)".to_string(),
            expected: n,
            got: m.ncols(),
        });
    }
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut diag = m[(j, j)];
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if diag <= 0.0 || !diag.is_finite() {
            return Err(Error::NotPositiveDefinite {
                pivot: j,
                value: diag,
            });
        }
        let d = diag.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Mean of a slice; `NaN` on empty input.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}
