//! Levin-Lin-Chu (2002) pooled panel unit-root t* test.
//!
//! Per unit: regress Δy and the lagged level on the lag/deterministic block,
//! standardize both residual vectors by the unit's regression standard error,
//! and form the ratio of long-run to innovation standard deviation. Pool the
//! standardized residuals into one OLS slope `δ̂`, whose t-ratio is then
//! centered and scaled with the tabulated moments `μ*_T̃, σ*_T̃` so that
//! `t*` is asymptotically standard normal; `p = Φ(t*)`.

use nalgebra::{DMatrix, DVector};

use super::mackinnon::norm_cdf;
use super::DetSpec;
use crate::error::{Error, Result};
use crate::linalg::ols;
use crate::panel::PanelDataset;
use crate::unitroot::pp::default_bandwidth;

/// Result of the pooled Levin-Lin-Chu test.
#[derive(Debug, Clone, PartialEq)]
pub struct LlcOutcome {
    /// Moment-adjusted pooled statistic, asymptotically N(0, 1).
    pub t_star: f64,
    /// Left-tail p-value `Φ(t*)`.
    pub p_value: f64,
    /// Lag-difference terms per unit.
    pub lags: usize,
    /// Per-unit usable length `T̃ = T − lags − 1`.
    pub t_tilde: usize,
    /// Pooled observations, `N × T̃`.
    pub nobs: usize,
    pub cross_sections: usize,
    /// Non-fatal notes (e.g. moment table clamped at its edge).
    pub warnings: Vec<String>,
}

/// Truncation-lag grid of the published moment table.
const T_GRID: [f64; 12] = [
    25.0, 30.0, 35.0, 40.0, 45.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0, 250.0,
];
/// Mean adjustment μ*, constant-only model.
const MU_C: [f64; 12] = [
    -0.554, -0.546, -0.541, -0.537, -0.533, -0.531, -0.527, -0.524, -0.521, -0.520, -0.518, -0.509,
];
/// Standard-deviation adjustment σ*, constant-only model.
const SIG_C: [f64; 12] = [
    0.919, 0.889, 0.867, 0.850, 0.837, 0.826, 0.810, 0.798, 0.789, 0.782, 0.776, 0.742,
];
const MU_C_INF: f64 = -0.500;
const SIG_C_INF: f64 = 0.707;
/// Mean adjustment μ*, constant+trend model.
const MU_CT: [f64; 12] = [
    -0.703, -0.674, -0.653, -0.637, -0.624, -0.614, -0.598, -0.587, -0.578, -0.571, -0.566, -0.533,
];
/// Standard-deviation adjustment σ*, constant+trend model.
const SIG_CT: [f64; 12] = [
    1.003, 0.949, 0.906, 0.871, 0.842, 0.818, 0.780, 0.751, 0.728, 0.710, 0.695, 0.603,
];
const MU_CT_INF: f64 = -0.500;
const SIG_CT_INF: f64 = 0.500;

/// Moment adjustments for usable length `t_tilde`: linear interpolation
/// inside the table, interpolation in `1/T̃` toward the asymptotic row above
/// it, and an edge clamp (with warning) below it.
fn adjustment_moments(t_tilde: usize, det: DetSpec, warnings: &mut Vec<String>) -> (f64, f64) {
    let (mu, sig, mu_inf, sig_inf) = match det {
        DetSpec::Constant => (&MU_C, &SIG_C, MU_C_INF, SIG_C_INF),
        DetSpec::ConstantTrend => (&MU_CT, &SIG_CT, MU_CT_INF, SIG_CT_INF),
    };
    let t = t_tilde as f64;
    if t < T_GRID[0] {
        warnings.push(format!(
            "usable length {t_tilde} below the moment table range; using the T={} row",
            T_GRID[0]
        ));
        return (mu[0], sig[0]);
    }
    if t >= T_GRID[11] {
        let w = T_GRID[11] / t;
        return (
            mu_inf + (mu[11] - mu_inf) * w,
            sig_inf + (sig[11] - sig_inf) * w,
        );
    }
    for k in 0..11 {
        if T_GRID[k] <= t && t <= T_GRID[k + 1] {
            let f = (t - T_GRID[k]) / (T_GRID[k + 1] - T_GRID[k]);
            return (mu[k] + f * (mu[k + 1] - mu[k]), sig[k] + f * (sig[k + 1] - sig[k]));
        }
    }
    unreachable!("grid covers [25, 250]")
}

/// Residuals of `y` on the columns of `z`.
fn residualize(y: &DVector<f64>, z: &DMatrix<f64>) -> Result<DVector<f64>> {
    Ok(ols(y, z, "llc orthogonalization")?.resid)
}

/// LLC test on raw per-unit series (all must share one length).
/// `bandwidth = None` applies the Newey-West rule to the series length.
pub fn llc_test_values(
    series: &[Vec<f64>],
    lags: usize,
    det: DetSpec,
    bandwidth: Option<usize>,
) -> Result<LlcOutcome> {
    let n_units = series.len();
    if n_units < 2 {
        return Err(Error::NotEnoughUnits {
            operation: "levin-lin-chu test".to_string(),
            needed: 2,
            got: n_units,
        });
    }
    let t_len = series[0].len();
    if series.iter().any(|s| s.len() != t_len) {
        return Err(Error::UnbalancedPanel {
            detail: "levin-lin-chu requires equal-length unit series".to_string(),
        });
    }
    if t_len < lags + 12 {
        return Err(Error::NotEnoughObservations {
            operation: "levin-lin-chu test".to_string(),
            needed: lags + 12,
            got: t_len,
        });
    }
    let bw = bandwidth.unwrap_or_else(|| default_bandwidth(t_len));
    let t_tilde = t_len - lags - 1;
    let n_det = 1 + if det == DetSpec::ConstantTrend { 1 } else { 0 };
    let mut warnings = Vec::new();

    let mut e_all = Vec::with_capacity(n_units * t_tilde);
    let mut v_all = Vec::with_capacity(n_units * t_tilde);
    let mut s_ratio_sum = 0.0;
    for y in series {
        let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
        // Rows t = lags .. T−2 of dy; regress Δy_t and y_{t−1} on the block.
        let mut z = DMatrix::<f64>::zeros(t_tilde, lags + n_det);
        let mut dyt = DVector::<f64>::zeros(t_tilde);
        let mut ylag = DVector::<f64>::zeros(t_tilde);
        for i in 0..t_tilde {
            let t = lags + i;
            dyt[i] = dy[t];
            ylag[i] = y[t];
            for l in 1..=lags {
                z[(i, l - 1)] = dy[t - l];
            }
            z[(i, lags)] = 1.0;
            if det == DetSpec::ConstantTrend {
                z[(i, lags + 1)] = (i + 1) as f64;
            }
        }
        let e = residualize(&dyt, &z)?;
        let v = residualize(&ylag, &z)?;
        let dvv = v.dot(&v);
        if dvv <= 0.0 {
            return Err(Error::SingularMatrix {
                context: "llc level residual".to_string(),
            });
        }
        let d_i = e.dot(&v) / dvv;
        let r = &e - d_i * &v;
        let sig2_e = r.dot(&r) / t_tilde as f64;
        if sig2_e <= 0.0 {
            return Err(Error::SingularMatrix {
                context: "llc innovation variance".to_string(),
            });
        }
        let sig_e = sig2_e.sqrt();
        e_all.extend(e.iter().map(|x| x / sig_e));
        v_all.extend(v.iter().map(|x| x / sig_e));

        // Long-run variance of Δy over the full differenced sample, with the
        // deterministic component removed to match the model.
        let m = dy.len() as f64;
        let centered: Vec<f64> = match det {
            DetSpec::Constant => {
                let mean = dy.iter().sum::<f64>() / m;
                dy.iter().map(|d| d - mean).collect()
            }
            DetSpec::ConstantTrend => {
                let yv = DVector::from_column_slice(&dy);
                let mut zx = DMatrix::<f64>::zeros(dy.len(), 2);
                for (i, row) in (0..dy.len()).enumerate() {
                    zx[(row, 0)] = 1.0;
                    zx[(row, 1)] = (i + 1) as f64;
                }
                residualize(&yv, &zx)?.iter().cloned().collect()
            }
        };
        let mut lrv = centered.iter().map(|d| d * d).sum::<f64>() / m;
        for l in 1..=bw {
            let w = 1.0 - l as f64 / (bw as f64 + 1.0);
            let cov: f64 = centered[l..]
                .iter()
                .zip(&centered[..centered.len() - l])
                .map(|(a, b)| a * b)
                .sum();
            lrv += 2.0 * w * cov / m;
        }
        s_ratio_sum += lrv.max(1e-12).sqrt() / sig_e;
    }

    // Pooled slope of ẽ on ṽ and its t-ratio.
    let evv: f64 = e_all.iter().zip(&v_all).map(|(a, b)| a * b).sum();
    let vvv: f64 = v_all.iter().map(|b| b * b).sum();
    let delta = evv / vvv;
    let rss: f64 = e_all
        .iter()
        .zip(&v_all)
        .map(|(a, b)| {
            let r = a - delta * b;
            r * r
        })
        .sum();
    let pooled_n = (n_units * t_tilde) as f64;
    let sig2_t = rss / pooled_n;
    let std_delta = sig2_t.sqrt() / vvv.sqrt();
    let t_delta = delta / std_delta;

    let s_bar = s_ratio_sum / n_units as f64;
    let (mu, sig) = adjustment_moments(t_tilde, det, &mut warnings);
    let t_star = (t_delta - pooled_n * s_bar * (std_delta / sig2_t) * mu) / sig;

    Ok(LlcOutcome {
        t_star,
        p_value: norm_cdf(t_star),
        lags,
        t_tilde,
        nobs: n_units * t_tilde,
        cross_sections: n_units,
        warnings,
    })
}

/// LLC test on one indicator of a balanced panel dataset.
pub fn llc_test(
    ds: &PanelDataset,
    indicator: &str,
    lags: usize,
    det: DetSpec,
    bandwidth: Option<usize>,
) -> Result<LlcOutcome> {
    let sub = ds.restrict_indicators(&[indicator])?;
    if !sub.is_balanced() {
        return Err(Error::UnbalancedPanel {
            detail: format!("indicator {indicator} is not balanced across units/periods"),
        });
    }
    let series: Vec<Vec<f64>> = sub
        .units()
        .to_vec()
        .iter()
        .map(|u| sub.series(u, indicator).map(|s| s.values().to_vec()))
        .collect::<Result<_>>()?;
    llc_test_values(&series, lags, det, bandwidth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{lcg_random_walk, lcg_uniforms};

    fn golden_panel() -> Vec<Vec<f64>> {
        (0..6).map(|i| lcg_random_walk(80, 1000 + i)).collect()
    }

    #[test]
    fn golden_random_walk_panel() {
        // Frozen from an independent reference implementation before this
        // module was written: N = 6 random walks, T = 80, bandwidth 4-rule
        // (= 3), constant spec.
        let panel = golden_panel();
        let out = llc_test_values(&panel, 0, DetSpec::Constant, None).unwrap();
        assert!(
            (out.t_star - 0.04325759157431716).abs() < 1e-8,
            "t* {}",
            out.t_star
        );
        assert!((out.p_value - 0.517251901711248).abs() < 1e-9);
        assert_eq!(out.t_tilde, 79);
        assert_eq!(out.nobs, 6 * 79);
        assert_eq!(out.cross_sections, 6);

        let out = llc_test_values(&panel, 1, DetSpec::Constant, None).unwrap();
        assert!((out.t_star - 0.23668671475594802).abs() < 1e-8);
        assert!((out.p_value - 0.5935500788782879).abs() < 1e-9);
        assert_eq!(out.t_tilde, 78);
    }

    #[test]
    fn stationary_panel_strongly_rejected() {
        // AR(0.5) panel: pooled evidence should reject decisively.
        let panel: Vec<Vec<f64>> = (0..8)
            .map(|i| {
                let u = lcg_uniforms(120, 500 + i);
                let mut y = vec![0.0; 120];
                for t in 1..120 {
                    y[t] = 0.5 * y[t - 1] + (u[t] - 0.5);
                }
                y
            })
            .collect();
        let out = llc_test_values(&panel, 0, DetSpec::Constant, None).unwrap();
        assert!(out.t_star < -4.0, "t* {}", out.t_star);
        assert!(out.p_value < 1e-4);
    }

    #[test]
    fn moment_table_edges() {
        let mut w = Vec::new();
        // Clamp below the grid warns.
        let (mu, sig) = adjustment_moments(20, DetSpec::Constant, &mut w);
        assert_eq!((mu, sig), (-0.554, 0.919));
        assert_eq!(w.len(), 1);
        // Above 250 interpolates toward the asymptotic row.
        let mut w = Vec::new();
        let (mu, _) = adjustment_moments(500, DetSpec::Constant, &mut w);
        assert!(w.is_empty());
        assert!(mu > -0.509 && mu < -0.500, "mu {mu}");
        // Exactly on a grid point.
        let mut w = Vec::new();
        let (mu, sig) = adjustment_moments(80, DetSpec::ConstantTrend, &mut w);
        assert_eq!((mu, sig), (-0.578, 0.728));
    }

    #[test]
    fn short_panels_and_single_units_rejected() {
        let panel = golden_panel();
        assert!(matches!(
            llc_test_values(&panel[..1], 0, DetSpec::Constant, None),
            Err(Error::NotEnoughUnits { .. })
        ));
        let short: Vec<Vec<f64>> = (0..4).map(|i| lcg_random_walk(11, i)).collect();
        assert!(matches!(
            llc_test_values(&short, 0, DetSpec::Constant, None),
            Err(Error::NotEnoughObservations { .. })
        ));
        let mut ragged = golden_panel();
        ragged[0].pop();
        assert!(matches!(
            llc_test_values(&ragged, 0, DetSpec::Constant, None),
            Err(Error::UnbalancedPanel { .. })
        ));
    }

    #[test]
    fn below_grid_usable_length_warns_but_computes() {
        let panel: Vec<Vec<f64>> = (0..5).map(|i| lcg_random_walk(20, 40 + i)).collect();
        let out = llc_test_values(&panel, 0, DetSpec::Constant, None).unwrap();
        assert_eq!(out.t_tilde, 19);
        assert_eq!(out.warnings.len(), 1);
        assert!(out.warnings[0].contains("moment table"));
    }
}
