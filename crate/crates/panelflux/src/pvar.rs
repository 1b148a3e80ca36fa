//! Fixed-effects panel VAR estimated by within-transformation OLS.
//!
//! Model: `x_it = c + U_i + Σ_{j=1..p} Γ_j x_{i,t−j} + ε_it`. Each unit's
//! estimation rows are demeaned over its own sample (removing `c + U_i`),
//! the demeaned rows are stacked across units, and each equation is fitted
//! by OLS on the `K·p` lag regressors. Per-unit intercepts are recovered
//! afterwards from the unit means, normalized so the `U_i` sum to zero.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ols;
use crate::panel::{PanelDataset, Period, Series};

/// One estimated coefficient with its inference statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    /// Regressor label, e.g. `F(-1)`.
    pub name: String,
    pub value: f64,
    pub std_err: f64,
    pub t_stat: f64,
}

/// Per-equation fit statistics (one equation per model variable).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquationStats {
    /// Dependent variable of this equation.
    pub variable: String,
    pub coefficients: Vec<Coefficient>,
    /// Within R²: `1 − RSS/TSS` on the demeaned data.
    pub r_squared: f64,
    /// Overall regression F (all slopes zero).
    pub f_statistic: f64,
    /// Degrees-of-freedom-corrected residual variance.
    pub residual_variance: f64,
}

/// Estimation-sample descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleInfo {
    pub span_start: Period,
    pub span_end: Period,
    /// Stacked observation count, `N × (T − p)`.
    pub included_observations: usize,
    pub units: usize,
}

/// Estimation options.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FitOptions {
    /// Subtract the `N` estimated unit means from the residual degrees of
    /// freedom. Off by default, matching the convention of common VAR output
    /// so the reported standard errors look familiar.
    pub dof_correct_fixed_effects: bool,
}

/// Lag-order selection criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LagCriterion {
    Aic,
    Bic,
}

/// A fitted fixed-effects panel VAR.
#[derive(Debug, Clone, PartialEq)]
pub struct PvarModel {
    variables: Vec<String>,
    lag_order: usize,
    /// `Γ_1..Γ_p`; entry `(i, j)` is the effect of variable `j` (lagged) in
    /// the equation for variable `i`.
    lag_matrices: Vec<DMatrix<f64>>,
    /// Grand intercept `c` (unit effects average to zero around it).
    intercept: DVector<f64>,
    /// Zero-sum unit effects `U_i`, one per unit, unit order.
    unit_effects: Vec<(String, DVector<f64>)>,
    /// Innovation covariance `Σ_ε`, dof-corrected.
    sigma: DMatrix<f64>,
    equations: Vec<EquationStats>,
    sample: SampleInfo,
    options: FitOptions,
}

/// Stability diagnostic: companion eigenvalue moduli, descending.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub moduli: Vec<f64>,
    pub stable: bool,
}

/// Within-demeaned residuals of a fitted model on its estimation panel:
/// one `(T − p) × K` matrix per unit.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualPanel {
    pub variables: Vec<String>,
    pub units: Vec<String>,
    /// Period of each unit's first residual row.
    pub start: Period,
    pub data: Vec<DMatrix<f64>>,
}

/// Per-unit means removed by [`within_demean`].
#[derive(Debug, Clone, PartialEq)]
pub struct UnitMeans {
    pub unit: String,
    /// `(indicator, mean)` in the dataset's indicator order.
    pub means: Vec<(String, f64)>,
}

/// Subtract each (unit, indicator) series' own mean; returns the demeaned
/// panel and the removed means for fixed-effect recovery.
pub fn within_demean(ds: &PanelDataset) -> Result<(PanelDataset, Vec<UnitMeans>)> {
    let mut series_out = Vec::new();
    let mut means_out = Vec::new();
    for unit in ds.units() {
        let mut unit_means = Vec::new();
        for indicator in ds.indicators() {
            let s = ds.series(unit, indicator)?;
            let mean = s.values().iter().sum::<f64>() / s.len() as f64;
            let demeaned: Vec<f64> = s.values().iter().map(|v| v - mean).collect();
            series_out.push(s.with_values(s.start(), demeaned)?);
            unit_means.push((indicator.clone(), mean));
        }
        means_out.push(UnitMeans {
            unit: unit.clone(),
            means: unit_means,
        });
    }
    Ok((PanelDataset::from_series_unchecked(&series_out)?, means_out))
}

/// Per-unit level matrices (`T × K`, variable order = `vars`) from a
/// balanced panel.
fn unit_matrices(ds: &PanelDataset, vars: &[String]) -> Result<(Vec<DMatrix<f64>>, Period)> {
    let sub = ds.restrict_indicators(&vars.iter().map(|s| s.as_str()).collect::<Vec<_>>())?;
    if !sub.is_balanced() {
        return Err(Error::UnbalancedPanel {
            detail: "panel VAR requires a balanced panel over its variables".to_string(),
        });
    }
    let t_len = sub.periods().len();
    let mut out = Vec::with_capacity(sub.units().len());
    for unit in sub.units() {
        let mut m = DMatrix::<f64>::zeros(t_len, vars.len());
        for (k, var) in vars.iter().enumerate() {
            let s = sub.series(unit, var)?;
            if s.len() != t_len {
                return Err(Error::UnbalancedPanel {
                    detail: format!("{unit}/{var} span differs from the panel span"),
                });
            }
            for (t, &v) in s.values().iter().enumerate() {
                m[(t, k)] = v;
            }
        }
        out.push(m);
    }
    Ok((out, sub.periods()[0]))
}

/// Stacked within-demeaned response and design for lag order `p`, trimming
/// `trim` initial rows per unit (`trim ≥ p` allows a common sample across
/// candidate lag orders). Also returns per-unit response/design means.
struct StackedDesign {
    y: DMatrix<f64>,
    z: DMatrix<f64>,
    /// Per unit: (mean of y rows, mean of z rows) over its estimation rows.
    unit_row_means: Vec<(DVector<f64>, DVector<f64>)>,
    rows_per_unit: usize,
}

fn build_design(units: &[DMatrix<f64>], p: usize, trim: usize) -> Result<StackedDesign> {
    let k = units[0].ncols();
    let t_len = units[0].nrows();
    if trim >= t_len {
        return Err(Error::NotEnoughObservations {
            operation: "panel VAR design".to_string(),
            needed: trim + 1,
            got: t_len,
        });
    }
    let rows_per_unit = t_len - trim;
    let total = rows_per_unit * units.len();
    let kp = k * p;
    let mut y = DMatrix::<f64>::zeros(total, k);
    let mut z = DMatrix::<f64>::zeros(total, kp);
    let mut unit_row_means = Vec::with_capacity(units.len());
    for (u, x) in units.iter().enumerate() {
        let base = u * rows_per_unit;
        for (r, t) in (trim..t_len).enumerate() {
            for c in 0..k {
                y[(base + r, c)] = x[(t, c)];
            }
            for j in 1..=p {
                for c in 0..k {
                    z[(base + r, (j - 1) * k + c)] = x[(t - j, c)];
                }
            }
        }
        // Demean this unit's block.
        let mut ym = DVector::<f64>::zeros(k);
        let mut zm = DVector::<f64>::zeros(kp);
        for r in 0..rows_per_unit {
            for c in 0..k {
                ym[c] += y[(base + r, c)];
            }
            for c in 0..kp {
                zm[c] += z[(base + r, c)];
            }
        }
        ym /= rows_per_unit as f64;
        zm /= rows_per_unit as f64;
        for r in 0..rows_per_unit {
            for c in 0..k {
                y[(base + r, c)] -= ym[c];
            }
            for c in 0..kp {
                z[(base + r, c)] -= zm[c];
            }
        }
        unit_row_means.push((ym, zm));
    }
    Ok(StackedDesign {
        y,
        z,
        unit_row_means,
        rows_per_unit,
    })
}

/// Regressor labels in design-column order: lag-major, variables within lag.
fn coefficient_names(vars: &[String], p: usize) -> Vec<String> {
    let mut names = Vec::with_capacity(vars.len() * p);
    for j in 1..=p {
        for v in vars {
            names.push(format!("{v}(-{j})"));
        }
    }
    names
}

/// Fit a fixed-effects panel VAR of order `p` on the named variables
/// (equation order follows `vars`).
pub fn fit(ds: &PanelDataset, vars: &[&str], p: usize, options: FitOptions) -> Result<PvarModel> {
    if p == 0 {
        return Err(Error::InvalidParameter("lag order must be ≥ 1".to_string()));
    }
    let vars: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
    let k = vars.len();
    if k == 0 {
        return Err(Error::InvalidParameter("no variables given".to_string()));
    }
    let (units, span_start) = unit_matrices(ds, &vars)?;
    let n_units = units.len();
    let t_len = units[0].nrows();
    if t_len < p + 10 {
        return Err(Error::NotEnoughObservations {
            operation: "panel VAR fit".to_string(),
            needed: p + 10,
            got: t_len,
        });
    }
    let design = build_design(&units, p, p)?;
    let nobs = design.y.nrows();
    let kp = k * p;
    let fe_dof = if options.dof_correct_fixed_effects {
        n_units
    } else {
        0
    };
    if nobs <= kp + fe_dof {
        return Err(Error::NotEnoughObservations {
            operation: "panel VAR fit".to_string(),
            needed: kp + fe_dof + 1,
            got: nobs,
        });
    }

    let names = coefficient_names(&vars, p);
    let mut lag_matrices = vec![DMatrix::<f64>::zeros(k, k); p];
    let mut equations = Vec::with_capacity(k);
    let mut resid_cols: Vec<DVector<f64>> = Vec::with_capacity(k);
    for eq in 0..k {
        let yk = DVector::from_iterator(nobs, design.y.column(eq).iter().cloned());
        let fit = ols(&yk, &design.z, &format!("pvar equation {}", vars[eq]))?;
        // Re-derive dof-sensitive statistics under the chosen convention.
        let dof = (nobs - kp - fe_dof) as f64;
        let sigma2 = fit.rss / dof;
        let mut coefficients = Vec::with_capacity(kp);
        for c in 0..kp {
            let se = (sigma2 * fit.xtx_inv[(c, c)]).max(0.0).sqrt();
            coefficients.push(Coefficient {
                name: names[c].clone(),
                value: fit.coef[c],
                std_err: se,
                t_stat: fit.coef[c] / se,
            });
            lag_matrices[c / k][(eq, c % k)] = fit.coef[c];
        }
        let tss: f64 = yk.iter().map(|v| v * v).sum();
        let r_squared = if tss > 0.0 { 1.0 - fit.rss / tss } else { 0.0 };
        let f_statistic = ((tss - fit.rss) / kp as f64) / (fit.rss / dof);
        equations.push(EquationStats {
            variable: vars[eq].clone(),
            coefficients,
            r_squared,
            f_statistic,
            residual_variance: sigma2,
        });
        resid_cols.push(fit.resid);
    }

    // Innovation covariance from stacked residual cross-products.
    let dof = (nobs - kp - fe_dof) as f64;
    let mut sigma = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            sigma[(i, j)] = resid_cols[i].dot(&resid_cols[j]) / dof;
        }
    }

    // Per-unit intercepts a_i = ȳ_i − Σ_j Γ_j z̄_{i,j}; split into the grand
    // intercept and zero-sum unit effects.
    let mut a = Vec::with_capacity(n_units);
    for (ym, zm) in &design.unit_row_means {
        let mut ai = ym.clone();
        for j in 0..p {
            let zj = DVector::from_iterator(k, (0..k).map(|c| zm[j * k + c]));
            ai -= &lag_matrices[j] * zj;
        }
        a.push(ai);
    }
    let mut intercept = DVector::<f64>::zeros(k);
    for ai in &a {
        intercept += ai;
    }
    intercept /= n_units as f64;
    let sub_units: Vec<String> = {
        let sub =
            ds.restrict_indicators(&vars.iter().map(|s| s.as_str()).collect::<Vec<_>>())?;
        sub.units().to_vec()
    };
    let unit_effects: Vec<(String, DVector<f64>)> = sub_units
        .iter()
        .zip(&a)
        .map(|(u, ai)| (u.clone(), ai - &intercept))
        .collect();

    let sample = SampleInfo {
        span_start: span_start.offset(p as i64),
        span_end: span_start.offset(t_len as i64 - 1),
        included_observations: nobs,
        units: n_units,
    };
    Ok(PvarModel {
        variables: vars,
        lag_order: p,
        lag_matrices,
        intercept,
        unit_effects,
        sigma,
        equations,
        sample,
        options,
    })
}

/// Choose the lag order in `1..=p_max` by a multivariate information
/// criterion evaluated on the common sample (all candidates trimmed for
/// `p_max`); ties break toward the smaller order.
pub fn select_lag(
    ds: &PanelDataset,
    vars: &[&str],
    p_max: usize,
    criterion: LagCriterion,
) -> Result<usize> {
    if p_max == 0 {
        return Err(Error::InvalidParameter("p_max must be ≥ 1".to_string()));
    }
    let vars_owned: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
    let (units, _) = unit_matrices(ds, &vars_owned)?;
    let t_len = units[0].nrows();
    if t_len < p_max + 10 {
        return Err(Error::NotEnoughObservations {
            operation: "panel VAR lag selection".to_string(),
            needed: p_max + 10,
            got: t_len,
        });
    }
    let k = vars.len();
    let mut best = (f64::INFINITY, 1usize);
    for p in 1..=p_max {
        let design = build_design(&units, p, p_max)?;
        let nobs = design.y.nrows();
        // ML residual covariance on the common sample.
        let mut resid = Vec::with_capacity(k);
        for eq in 0..k {
            let yk = DVector::from_iterator(nobs, design.y.column(eq).iter().cloned());
            let fit = ols(&yk, &design.z, "pvar lag selection")?;
            resid.push(fit.resid);
        }
        let mut sig = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                sig[(i, j)] = resid[i].dot(&resid[j]) / nobs as f64;
            }
        }
        let det = sig.determinant();
        if det <= 0.0 {
            return Err(Error::SingularMatrix {
                context: format!("lag selection covariance at p={p}"),
            });
        }
        let params = (p * k * k) as f64;
        let n = nobs as f64;
        let penalty = match criterion {
            LagCriterion::Aic => 2.0 * params / n,
            LagCriterion::Bic => n.ln() * params / n,
        };
        let score = det.ln() + penalty;
        if score < best.0 {
            best = (score, p);
        }
    }
    Ok(best.1)
}

impl PvarModel {
    /// Build a model with known dynamics and innovation covariance directly,
    /// bypassing estimation. The inference fields (equations, sample, unit
    /// effects) are filled with neutral placeholders; intended for
    /// analytical impulse-response checks and simulators.
    pub fn from_parameters(
        variables: &[&str],
        lag_matrices: Vec<DMatrix<f64>>,
        sigma: DMatrix<f64>,
    ) -> Result<Self> {
        let k = variables.len();
        if k == 0 {
            return Err(Error::InvalidParameter("no variables given".to_string()));
        }
        if lag_matrices.is_empty() {
            return Err(Error::InvalidParameter("need at least one lag matrix".to_string()));
        }
        for (j, g) in lag_matrices.iter().enumerate() {
            if g.shape() != (k, k) {
                return Err(Error::DimensionMismatch {
                    context: format!("lag matrix {}", j + 1),
                    expected: k,
                    got: g.nrows().max(g.ncols()),
                });
            }
        }
        if sigma.shape() != (k, k) {
            return Err(Error::DimensionMismatch {
                context: "innovation covariance".to_string(),
                expected: k,
                got: sigma.nrows().max(sigma.ncols()),
            });
        }
        let p = lag_matrices.len();
        let start = Period::new(2000, 1).expect("valid period");
        Ok(Self {
            variables: variables.iter().map(|s| s.to_string()).collect(),
            lag_order: p,
            lag_matrices,
            intercept: DVector::zeros(k),
            unit_effects: Vec::new(),
            sigma,
            equations: Vec::new(),
            sample: SampleInfo {
                span_start: start,
                span_end: start,
                included_observations: 0,
                units: 0,
            },
            options: FitOptions::default(),
        })
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn lag_order(&self) -> usize {
        self.lag_order
    }

    pub fn lag_matrices(&self) -> &[DMatrix<f64>] {
        &self.lag_matrices
    }

    pub fn intercept(&self) -> &DVector<f64> {
        &self.intercept
    }

    pub fn unit_effects(&self) -> &[(String, DVector<f64>)] {
        &self.unit_effects
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn equations(&self) -> &[EquationStats] {
        &self.equations
    }

    pub fn sample(&self) -> &SampleInfo {
        &self.sample
    }

    pub fn options(&self) -> FitOptions {
        self.options
    }

    /// `pK × pK` companion matrix: `[Γ_1 … Γ_p]` on top, identity blocks on
    /// the subdiagonal.
    pub fn companion_matrix(&self) -> DMatrix<f64> {
        let k = self.variables.len();
        let p = self.lag_order;
        let dim = k * p;
        let mut c = DMatrix::<f64>::zeros(dim, dim);
        for (j, g) in self.lag_matrices.iter().enumerate() {
            c.view_mut((0, j * k), (k, k)).copy_from(g);
        }
        for b in 1..p {
            for d in 0..k {
                c[(b * k + d, (b - 1) * k + d)] = 1.0;
            }
        }
        c
    }
}

/// Companion-eigenvalue moduli, descending; stable iff all lie inside the
/// unit circle.
pub fn stability(model: &PvarModel) -> StabilityReport {
    let c = model.companion_matrix();
    let eig = c.complex_eigenvalues();
    let mut moduli: Vec<f64> = eig.iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let stable = moduli.first().map_or(true, |&m| m < 1.0);
    StabilityReport { moduli, stable }
}

/// Within-demeaned residuals of `model` recomputed on `ds` (normally its
/// estimation panel).
pub fn residuals(model: &PvarModel, ds: &PanelDataset) -> Result<ResidualPanel> {
    let vars = model.variables.to_vec();
    let (units, span_start) = unit_matrices(ds, &vars)?;
    let p = model.lag_order;
    let k = vars.len();
    let design = build_design(&units, p, p)?;
    let rows = design.rows_per_unit;
    let sub_units = {
        let sub =
            ds.restrict_indicators(&vars.iter().map(|s| s.as_str()).collect::<Vec<_>>())?;
        sub.units().to_vec()
    };
    let mut data = Vec::with_capacity(sub_units.len());
    for u in 0..sub_units.len() {
        let mut e = DMatrix::<f64>::zeros(rows, k);
        for r in 0..rows {
            let row = u * rows + r;
            for eq in 0..k {
                let mut fitted = 0.0;
                for j in 0..p {
                    for c in 0..k {
                        fitted += model.lag_matrices[j][(eq, c)] * design.z[(row, j * k + c)];
                    }
                }
                e[(r, eq)] = design.y[(row, eq)] - fitted;
            }
        }
        data.push(e);
    }
    Ok(ResidualPanel {
        variables: vars,
        units: sub_units,
        start: span_start.offset(p as i64),
        data,
    })
}

/// Write the coefficient table: equations as columns, each regressor as a
/// three-row block (coefficient, standard error in parentheses, t-statistic
/// in brackets), preceded by the sample header and followed by the
/// intercept row and per-equation R²/F footers.
pub fn write_estimates_csv(writer: impl Write, model: &PvarModel) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let k = model.variables.len();
    let blank_tail = vec![String::new(); k];

    let mut title = vec!["Vector Autoregression Estimates".to_string()];
    title.extend(blank_tail.clone());
    w.write_record(&title)?;

    let mut sample = vec![
        "Sample (adjusted):".to_string(),
        format!("{} {}", model.sample.span_start, model.sample.span_end),
    ];
    sample.extend(vec![String::new(); k - 1]);
    w.write_record(&sample)?;

    let mut included = vec![
        "Included observations:".to_string(),
        format!("{} after adjustments", model.sample.included_observations),
    ];
    included.extend(vec![String::new(); k - 1]);
    w.write_record(&included)?;

    let mut legend = vec!["Standard errors in () & t-statistics in []".to_string()];
    legend.extend(blank_tail.clone());
    w.write_record(&legend)?;

    let mut header = vec![String::new()];
    header.extend(model.variables.iter().cloned());
    w.write_record(&header)?;

    let n_coef = model.equations[0].coefficients.len();
    for c in 0..n_coef {
        let name = model.equations[0].coefficients[c].name.clone();
        let mut values = vec![name];
        let mut errs = vec![String::new()];
        let mut ts = vec![String::new()];
        for eq in &model.equations {
            let co = &eq.coefficients[c];
            values.push(format!("{:.6}", co.value));
            errs.push(format!("({:.5})", co.std_err));
            ts.push(format!("[{:.5}]", co.t_stat));
        }
        w.write_record(&values)?;
        w.write_record(&errs)?;
        w.write_record(&ts)?;
    }

    let mut c_row = vec!["C".to_string()];
    for eq in 0..k {
        c_row.push(format!("{:.6}", model.intercept[eq]));
    }
    w.write_record(&c_row)?;

    let mut r2 = vec!["R-squared".to_string()];
    let mut fstat = vec!["F-statistic".to_string()];
    for eq in &model.equations {
        r2.push(format!("{:.6}", eq.r_squared));
        fstat.push(format!("{:.3}", eq.f_statistic));
    }
    w.write_record(&r2)?;
    w.write_record(&fstat)?;
    w.flush()?;
    Ok(())
}

/// Convenience for tests and simulators: wrap per-unit `T × K` matrices into
/// a quarterly panel dataset starting at `start`.
pub fn dataset_from_matrices(
    unit_names: &[String],
    variables: &[&str],
    start: Period,
    data: &[DMatrix<f64>],
) -> Result<PanelDataset> {
    if unit_names.len() != data.len() {
        return Err(Error::DimensionMismatch {
            context: "dataset_from_matrices units".to_string(),
            expected: unit_names.len(),
            got: data.len(),
        });
    }
    let mut series = Vec::new();
    for (name, m) in unit_names.iter().zip(data) {
        if m.ncols() != variables.len() {
            return Err(Error::DimensionMismatch {
                context: "dataset_from_matrices variables".to_string(),
                expected: variables.len(),
                got: m.ncols(),
            });
        }
        for (k, var) in variables.iter().enumerate() {
            let values: Vec<f64> = m.column(k).iter().cloned().collect();
            series.push(Series::new(name.clone(), *var, start, values)?);
        }
    }
    PanelDataset::from_series_unchecked(&series)
}
