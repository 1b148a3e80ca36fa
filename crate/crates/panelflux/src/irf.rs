//! Orthogonalized impulse-response functions for a fitted panel VAR, with
//! residual-bootstrap confidence bands.
//!
//! Moving-average weights come from the recursion `Φ_0 = I`,
//! `Φ_h = Σ_{j=1..min(h,p)} Γ_j Φ_{h−j}`; orthogonalized responses are
//! `Θ_h = Φ_h · P` where `P` is the lower Cholesky factor of the innovation
//! covariance after permuting variables into the requested ordering.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::cholesky_lower;
use crate::panel::PanelDataset;
use crate::pvar::{self, PvarModel};

/// Orthogonalized impulse responses. `responses[h][(i, j)]` is the response
/// of variable `i` to a one-standard-deviation shock in variable `j`,
/// `h` periods after impact, in the model's variable order.
#[derive(Debug, Clone, PartialEq)]
pub struct IrfResult {
    pub horizon: usize,
    pub variables: Vec<String>,
    /// Cholesky ordering used for orthogonalization.
    pub ordering: Vec<String>,
    pub responses: Vec<DMatrix<f64>>,
    pub bands: Option<IrfBands>,
    pub warnings: Vec<String>,
}

/// Pointwise percentile bands from a residual bootstrap, same indexing as
/// the point responses.
#[derive(Debug, Clone, PartialEq)]
pub struct IrfBands {
    pub lower: Vec<DMatrix<f64>>,
    pub upper: Vec<DMatrix<f64>>,
    pub coverage: f64,
    pub replicates_used: usize,
    pub replicates_dropped: usize,
}

/// Bootstrap settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    /// Two-sided coverage of the reported band, e.g. 0.90.
    pub coverage: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replicates: 200,
            coverage: 0.90,
            seed: 0,
        }
    }
}

/// Reduced-form moving-average weights `Φ_0..Φ_H`.
pub fn ma_weights(model: &PvarModel, horizon: usize) -> Vec<DMatrix<f64>> {
    let k = model.variables().len();
    let p = model.lag_order();
    let mut phi = Vec::with_capacity(horizon + 1);
    phi.push(DMatrix::<f64>::identity(k, k));
    for h in 1..=horizon {
        let mut m = DMatrix::<f64>::zeros(k, k);
        for j in 1..=p.min(h) {
            m += model.lag_matrices()[j - 1].clone() * &phi[h - j];
        }
        phi.push(m);
    }
    phi
}

/// Permutation such that `perm[r]` is the model index of the `r`-th variable
/// in the requested ordering.
fn ordering_permutation(variables: &[String], ordering: &[&str]) -> Result<Vec<usize>> {
    if ordering.len() != variables.len() {
        return Err(Error::InvalidOrdering(format!(
            "ordering names {} of {} variables",
            ordering.len(),
            variables.len()
        )));
    }
    let mut perm = Vec::with_capacity(ordering.len());
    for name in ordering {
        let idx = variables
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::InvalidOrdering(format!("unknown variable `{name}`")))?;
        if perm.contains(&idx) {
            return Err(Error::InvalidOrdering(format!("variable `{name}` repeated")));
        }
        perm.push(idx);
    }
    Ok(perm)
}

/// Impact matrix in model-variable order: permute Σ into the ordering,
/// factor, and permute back so rows/columns align with `model.variables()`.
fn impact_matrix(model: &PvarModel, perm: &[usize]) -> Result<DMatrix<f64>> {
    let k = perm.len();
    let mut sigma_perm = DMatrix::<f64>::zeros(k, k);
    for r in 0..k {
        for c in 0..k {
            sigma_perm[(r, c)] = model.sigma()[(perm[r], perm[c])];
        }
    }
    let l = cholesky_lower(&sigma_perm)?;
    let mut p_mat = DMatrix::<f64>::zeros(k, k);
    for r in 0..k {
        for c in 0..k {
            p_mat[(perm[r], perm[c])] = l[(r, c)];
        }
    }
    Ok(p_mat)
}

fn point_responses(
    model: &PvarModel,
    horizon: usize,
    perm: &[usize],
) -> Result<Vec<DMatrix<f64>>> {
    let p_mat = impact_matrix(model, perm)?;
    Ok(ma_weights(model, horizon)
        .into_iter()
        .map(|phi| phi * &p_mat)
        .collect())
}

/// Orthogonalized IRFs out to `horizon` under the given Cholesky `ordering`
/// (must name every model variable exactly once).
pub fn impulse_response(
    model: &PvarModel,
    horizon: usize,
    ordering: &[&str],
) -> Result<IrfResult> {
    let perm = ordering_permutation(model.variables(), ordering)?;
    let responses = point_responses(model, horizon, &perm)?;
    let mut warnings = Vec::new();
    let st = pvar::stability(model);
    if !st.stable {
        warnings.push(format!(
            "VAR is not stable (max companion eigenvalue modulus {:.4}); responses may diverge",
            st.moduli[0]
        ));
    }
    Ok(IrfResult {
        horizon,
        variables: model.variables().to_vec(),
        ordering: ordering.iter().map(|s| s.to_string()).collect(),
        responses,
        bands: None,
        warnings,
    })
}

/// Residual bootstrap: resample each unit's residual rows with replacement,
/// rebuild the panel from the fitted dynamics (seeding each unit with its
/// first `p` observed rows and its recovered intercept), refit, and take
/// pointwise percentiles of the replicate IRFs.
pub fn bootstrap_bands(
    model: &PvarModel,
    ds: &PanelDataset,
    horizon: usize,
    ordering: &[&str],
    config: &BootstrapConfig,
) -> Result<IrfResult> {
    if config.replicates < 100 {
        return Err(Error::InvalidParameter(
            "bootstrap needs at least 100 replicates".to_string(),
        ));
    }
    if !(config.coverage > 0.0 && config.coverage < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "coverage must lie in (0, 1), got {}",
            config.coverage
        )));
    }
    let mut base = impulse_response(model, horizon, ordering)?;
    let perm = ordering_permutation(model.variables(), ordering)?;

    let resid = pvar::residuals(model, ds)?;
    let vars: Vec<&str> = model.variables().iter().map(|s| s.as_str()).collect();
    let sub = ds.restrict_indicators(&vars)?;
    let k = vars.len();
    let p = model.lag_order();
    let t_len = sub.periods().len();
    let rows = t_len - p;

    // Levels per unit for the seed rows.
    let mut level0 = Vec::with_capacity(resid.units.len());
    for unit in &resid.units {
        let mut m = DMatrix::<f64>::zeros(t_len, k);
        for (c, var) in model.variables().iter().enumerate() {
            let s = sub.series(unit, var)?;
            for (t, &v) in s.values().iter().enumerate() {
                m[(t, c)] = v;
            }
        }
        level0.push(m);
    }
    // Per-unit intercepts a_i = c + U_i in model variable order.
    let intercepts: Vec<DVector<f64>> = model
        .unit_effects()
        .iter()
        .map(|(_, u)| model.intercept() + u)
        .collect();

    // Replicates run concurrently; each derives its own ChaCha stream from
    // (seed, replicate index), so results are independent of scheduling.
    let n_h = horizon + 1;
    let start_period = sub.periods()[0];
    let replicate_irfs: Vec<Option<Vec<DMatrix<f64>>>> = (0..config.replicates)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(rep as u64 + 1);
            // Rebuild each unit from its own resampled residual rows.
            let mut sim_units = Vec::with_capacity(level0.len());
            for (u, e) in resid.data.iter().enumerate() {
                let mut m = DMatrix::<f64>::zeros(t_len, k);
                for t in 0..p {
                    for c in 0..k {
                        m[(t, c)] = level0[u][(t, c)];
                    }
                }
                for t in p..t_len {
                    let pick = rng.gen_range(0..rows);
                    for eq in 0..k {
                        let mut v = intercepts[u][eq] + e[(pick, eq)];
                        for j in 1..=p {
                            for c in 0..k {
                                v += model.lag_matrices()[j - 1][(eq, c)] * m[(t - j, c)];
                            }
                        }
                        m[(t, eq)] = v;
                    }
                }
                sim_units.push(m);
            }
            let sim_ds =
                pvar::dataset_from_matrices(&resid.units, &vars, start_period, &sim_units)
                    .ok()?;
            let refit = pvar::fit(&sim_ds, &vars, p, model.options()).ok()?;
            point_responses(&refit, horizon, &perm).ok()
        })
        .collect();

    let mut draws: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); k * k]; n_h];
    let mut dropped = 0usize;
    for resp in replicate_irfs {
        match resp {
            Some(resp) => {
                for (h, m) in resp.iter().enumerate() {
                    for i in 0..k {
                        for j in 0..k {
                            draws[h][i * k + j].push(m[(i, j)]);
                        }
                    }
                }
            }
            None => dropped += 1,
        }
    }
    let used = config.replicates - dropped;
    if used < config.replicates / 2 {
        return Err(Error::InvalidParameter(format!(
            "bootstrap failed: only {used} of {} replicates usable",
            config.replicates
        )));
    }

    let alpha = (1.0 - config.coverage) / 2.0;
    let mut lower = Vec::with_capacity(n_h);
    let mut upper = Vec::with_capacity(n_h);
    for cell in &mut draws {
        let mut lo = DMatrix::<f64>::zeros(k, k);
        let mut hi = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                let v = &mut cell[i * k + j];
                v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                lo[(i, j)] = percentile(v, alpha);
                hi[(i, j)] = percentile(v, 1.0 - alpha);
            }
        }
        lower.push(lo);
        upper.push(hi);
    }
    if dropped > 0 {
        base.warnings
            .push(format!("{dropped} bootstrap replicates dropped after refit failures"));
    }
    base.bands = Some(IrfBands {
        lower,
        upper,
        coverage: config.coverage,
        replicates_used: used,
        replicates_dropped: dropped,
    });
    Ok(base)
}

/// Linear-interpolated percentile of an ascending-sorted slice.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

impl IrfResult {
    /// Response of `response_var` to a shock in `shock_var` across horizons
    /// `0..=horizon`.
    pub fn response_path(&self, shock_var: &str, response_var: &str) -> Result<Vec<f64>> {
        let i = self
            .variables
            .iter()
            .position(|v| v == response_var)
            .ok_or_else(|| Error::InvalidOrdering(format!("unknown variable `{response_var}`")))?;
        let j = self
            .variables
            .iter()
            .position(|v| v == shock_var)
            .ok_or_else(|| Error::InvalidOrdering(format!("unknown variable `{shock_var}`")))?;
        Ok(self.responses.iter().map(|m| m[(i, j)]).collect())
    }

    /// Band path for one (shock, response) pair, if bands were computed.
    pub fn band_path(&self, shock_var: &str, response_var: &str) -> Option<(Vec<f64>, Vec<f64>)> {
        let bands = self.bands.as_ref()?;
        let i = self.variables.iter().position(|v| v == response_var)?;
        let j = self.variables.iter().position(|v| v == shock_var)?;
        Some((
            bands.lower.iter().map(|m| m[(i, j)]).collect(),
            bands.upper.iter().map(|m| m[(i, j)]).collect(),
        ))
    }
}

/// Long-form CSV: `horizon,shock,response_var,value,lower,upper` (band cells
/// empty when no bootstrap was run). Rows are ordered horizon-major, then
/// shock in the Cholesky ordering, then response in the same ordering.
pub fn write_irf_csv(writer: impl Write, irf: &IrfResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["horizon", "shock", "response_var", "value", "lower", "upper"])?;
    for h in 0..=irf.horizon {
        for shock in &irf.ordering {
            for resp in &irf.ordering {
                let i = irf.variables.iter().position(|v| v == resp).unwrap();
                let j = irf.variables.iter().position(|v| v == shock).unwrap();
                let value = irf.responses[h][(i, j)];
                let (lo, hi) = match &irf.bands {
                    Some(b) => (
                        format!("{}", b.lower[h][(i, j)]),
                        format!("{}", b.upper[h][(i, j)]),
                    ),
                    None => (String::new(), String::new()),
                };
                w.write_record([
                    h.to_string(),
                    shock.clone(),
                    resp.clone(),
                    format!("{value}"),
                    lo,
                    hi,
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Build a model with known dynamics directly (bypassing estimation), for
/// analytical checks and simulators.
pub fn model_from_parameters(
    variables: &[&str],
    lag_matrices: Vec<DMatrix<f64>>,
    sigma: DMatrix<f64>,
) -> Result<PvarModel> {
    PvarModel::from_parameters(variables, lag_matrices, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::Period;
    use crate::pvar::FitOptions;
    use crate::sim::simulate_var_panel;
    use rand::SeedableRng;

    fn diag_model(phi: f64) -> PvarModel {
        model_from_parameters(
            &["F", "ICT"],
            vec![DMatrix::from_diagonal_element(2, 2, phi)],
            DMatrix::identity(2, 2),
        )
        .unwrap()
    }

    fn spec_model() -> PvarModel {
        model_from_parameters(
            &["F", "ICT"],
            vec![DMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.1, 0.4])],
            DMatrix::identity(2, 2),
        )
        .unwrap()
    }

    #[test]
    fn impact_equals_cholesky_factor() {
        let sigma = DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 5.0]);
        let model = model_from_parameters(
            &["F", "ICT"],
            vec![DMatrix::from_diagonal_element(2, 2, 0.5)],
            sigma,
        )
        .unwrap();
        let irf = impulse_response(&model, 3, &["F", "ICT"]).unwrap();
        // Lower factor of [[4,2],[2,5]] is [[2,0],[1,2]].
        let h0 = &irf.responses[0];
        assert_eq!(h0[(0, 0)], 2.0);
        assert_eq!(h0[(0, 1)], 0.0);
        assert_eq!(h0[(1, 0)], 1.0);
        assert_eq!(h0[(1, 1)], 2.0);
    }

    #[test]
    fn diagonal_var_own_response_decays_geometrically() {
        let model = diag_model(0.5);
        let irf = impulse_response(&model, 20, &["F", "ICT"]).unwrap();
        for h in 0..=20 {
            let expect = 0.5f64.powi(h as i32);
            assert!((irf.responses[h][(0, 0)] - expect).abs() < 1e-12);
            assert!((irf.responses[h][(1, 1)] - expect).abs() < 1e-12);
            assert!(irf.responses[h][(0, 1)].abs() < 1e-12);
            assert!(irf.responses[h][(1, 0)].abs() < 1e-12);
        }
    }

    #[test]
    fn cross_response_hand_values() {
        // Γ = [[0.5, 0.2], [0.1, 0.4]], Σ = I: response of F to an ICT shock
        // is 0 on impact, Γ[0][1] = 0.2 at h = 1, and at h = 2 the (0,1)
        // entry of Γ² = 0.5·0.2 + 0.2·0.4 = 0.18.
        let model = spec_model();
        let irf = impulse_response(&model, 5, &["ICT", "F"]).unwrap();
        let path = irf.response_path("ICT", "F").unwrap();
        assert!(path[0].abs() < 1e-12);
        assert!((path[1] - 0.2).abs() < 1e-12);
        assert!((path[2] - 0.18).abs() < 1e-12);
    }

    #[test]
    fn ma_weights_match_companion_powers() {
        let model = spec_model();
        let phi = ma_weights(&model, 12);
        let c = model.companion_matrix();
        let mut power = DMatrix::<f64>::identity(2, 2);
        for h in 0..=12 {
            for i in 0..2 {
                for j in 0..2 {
                    assert!(
                        (phi[h][(i, j)] - power[(i, j)]).abs() < 1e-10,
                        "h={h} ({i},{j})"
                    );
                }
            }
            power = &c * power;
        }
    }

    #[test]
    fn ordering_changes_orthogonalization_with_correlated_shocks() {
        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 0.6, 0.6, 1.0]);
        let model = model_from_parameters(
            &["F", "ICT"],
            vec![DMatrix::from_diagonal_element(2, 2, 0.4)],
            sigma.clone(),
        )
        .unwrap();
        let a = impulse_response(&model, 2, &["F", "ICT"]).unwrap();
        let b = impulse_response(&model, 2, &["ICT", "F"]).unwrap();
        // First-ordered variable takes the full impact; the other impact
        // column differs between orderings.
        assert!((a.responses[0][(0, 0)] - 1.0).abs() < 1e-12);
        assert!((b.responses[0][(1, 1)] - 1.0).abs() < 1e-12);
        assert!((a.responses[0][(0, 1)] - b.responses[0][(0, 1)]).abs() > 0.1);
        // Either factorization reconstructs Σ at impact: P Pᵀ = Σ.
        for r in [&a, &b] {
            let p = &r.responses[0];
            let re = p * p.transpose();
            for i in 0..2 {
                for j in 0..2 {
                    assert!((re[(i, j)] - sigma[(i, j)]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn stable_var_response_decays_to_zero() {
        let model = spec_model();
        let irf = impulse_response(&model, 60, &["ICT", "F"]).unwrap();
        let tail = &irf.responses[60];
        for i in 0..2 {
            for j in 0..2 {
                assert!(tail[(i, j)].abs() < 1e-6, "({i},{j}) = {}", tail[(i, j)]);
            }
        }
        assert!(irf.warnings.is_empty());
    }

    #[test]
    fn unstable_var_warns() {
        let model = model_from_parameters(
            &["F", "ICT"],
            vec![DMatrix::from_diagonal_element(2, 2, 1.05)],
            DMatrix::identity(2, 2),
        )
        .unwrap();
        let irf = impulse_response(&model, 4, &["F", "ICT"]).unwrap();
        assert_eq!(irf.warnings.len(), 1);
        assert!(irf.warnings[0].contains("not stable"));
    }

    #[test]
    fn ordering_validation() {
        let model = spec_model();
        assert!(matches!(
            impulse_response(&model, 4, &["F"]),
            Err(Error::InvalidOrdering(_))
        ));
        assert!(matches!(
            impulse_response(&model, 4, &["F", "F"]),
            Err(Error::InvalidOrdering(_))
        ));
        assert!(matches!(
            impulse_response(&model, 4, &["F", "GDP"]),
            Err(Error::InvalidOrdering(_))
        ));
    }

    #[test]
    fn csv_layout_and_row_count() {
        let model = spec_model();
        let irf = impulse_response(&model, 3, &["ICT", "F"]).unwrap();
        let mut buf = Vec::new();
        write_irf_csv(&mut buf, &irf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "horizon,shock,response_var,value,lower,upper");
        assert_eq!(lines.len(), 1 + 4 * 4);
        assert!(lines[1].starts_with("0,ICT,ICT,"));
        assert!(lines[2].starts_with("0,ICT,F,"));
        assert!(lines[1].ends_with(",,"), "no bands ⇒ empty cells: {}", lines[1]);
    }

    fn simulated_panel() -> (PanelDataset, PvarModel) {
        let gamma = DMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.1, 0.4]);
        let chol = DMatrix::identity(2, 2);
        let effects: Vec<DVector<f64>> = (0..6)
            .map(|i| DVector::from_column_slice(&[0.2 * i as f64, -0.1 * i as f64]))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let units = simulate_var_panel(&[gamma], &effects, &chol, 120, 50, &mut rng).unwrap();
        let names: Vec<String> = (0..6).map(|i| format!("U{i}")).collect();
        let ds = pvar::dataset_from_matrices(
            &names,
            &["F", "ICT"],
            Period::new(2000, 1).unwrap(),
            &units,
        )
        .unwrap();
        let model = pvar::fit(&ds, &["F", "ICT"], 1, FitOptions::default()).unwrap();
        (ds, model)
    }

    #[test]
    fn bootstrap_bands_bracket_point_estimates_and_are_deterministic() {
        let (ds, model) = simulated_panel();
        let cfg = BootstrapConfig {
            replicates: 100,
            coverage: 0.90,
            seed: 7,
        };
        let a = bootstrap_bands(&model, &ds, 6, &["ICT", "F"], &cfg).unwrap();
        let bands = a.bands.as_ref().unwrap();
        assert_eq!(bands.replicates_used + bands.replicates_dropped, 100);
        for h in 0..=6 {
            for i in 0..2 {
                for j in 0..2 {
                    assert!(
                        bands.lower[h][(i, j)] <= bands.upper[h][(i, j)],
                        "band order at h={h}"
                    );
                }
            }
        }
        // Bands should be non-degenerate beyond impact of the first shock.
        assert!(bands.upper[1][(0, 0)] > bands.lower[1][(0, 0)]);
        let b = bootstrap_bands(&model, &ds, 6, &["ICT", "F"], &cfg).unwrap();
        assert_eq!(a.bands, b.bands);
        let c = bootstrap_bands(
            &model,
            &ds,
            6,
            &["ICT", "F"],
            &BootstrapConfig {
                seed: 8,
                ..cfg.clone()
            },
        )
        .unwrap();
        assert_ne!(a.bands, c.bands);
        // One extra replicate changes the percentile sample but stays
        // reproducible.
        let d = bootstrap_bands(
            &model,
            &ds,
            6,
            &["ICT", "F"],
            &BootstrapConfig {
                replicates: 101,
                ..cfg.clone()
            },
        )
        .unwrap();
        assert_ne!(a.bands, d.bands);
        let e = bootstrap_bands(
            &model,
            &ds,
            6,
            &["ICT", "F"],
            &BootstrapConfig {
                replicates: 101,
                ..cfg
            },
        )
        .unwrap();
        assert_eq!(d.bands, e.bands);
    }

    #[test]
    fn bootstrap_rejects_too_few_replicates() {
        let (ds, model) = simulated_panel();
        let cfg = BootstrapConfig {
            replicates: 99,
            coverage: 0.90,
            seed: 7,
        };
        assert!(bootstrap_bands(&model, &ds, 4, &["F", "ICT"], &cfg).is_err());
    }

    #[test]
    fn percentile_interpolation() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile(&v, 0.0), 1.0);
        assert_eq!(percentile(&v, 1.0), 4.0);
        assert_eq!(percentile(&v, 0.5), 2.5);
        assert_eq!(percentile(&[5.0], 0.3), 5.0);
    }
}
