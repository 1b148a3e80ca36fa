//! Panel stationarity testing: per-unit ADF and Phillips-Perron regressions
//! combined Fisher-style, the pooled Levin-Lin-Chu t*, and a suite runner
//! that emits reports shaped like conventional panel-unit-root tables.

mod adf;
mod fisher;
mod llc;
mod mackinnon;
mod pp;

pub use adf::{adf_test, adf_test_auto, default_max_lags, select_adf_lags, AdfOutcome};
pub use fisher::{fisher_combine, FisherOutcome, P_CLAMP};
pub use llc::{llc_test, llc_test_values, LlcOutcome};
pub use mackinnon::mackinnon_pvalue;
pub use pp::{default_bandwidth, pp_test, PpOutcome};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::PanelDataset;

/// Deterministic terms included in the test regressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetSpec {
    Constant,
    ConstantTrend,
}

impl std::fmt::Display for DetSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DetSpec::Constant => write!(f, "constant"),
            DetSpec::ConstantTrend => write!(f, "constant+trend"),
        }
    }
}

/// How per-unit ADF lag orders are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LagPolicy {
    Fixed(usize),
    /// Schwarz-criterion selection per unit.
    AutoSchwarz,
}

/// The three tests the suite reports, labeled as in conventional output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnitRootMethod {
    LevinLinChu,
    AdfFisher,
    PpFisher,
}

impl UnitRootMethod {
    pub fn label(&self) -> &'static str {
        match self {
            UnitRootMethod::LevinLinChu => "Levin, Lin & Chu t*",
            UnitRootMethod::AdfFisher => "ADF - Fisher Chi-square",
            UnitRootMethod::PpFisher => "PP - Fisher Chi-square",
        }
    }
}

/// Per-unit test detail feeding a Fisher combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitDetail {
    pub unit: String,
    pub statistic: f64,
    pub p_value: f64,
}

/// One row of a stationarity table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitRootReport {
    pub method: UnitRootMethod,
    pub statistic: f64,
    pub p_value: f64,
    pub cross_sections: usize,
    /// Sum of usable per-unit regression lengths.
    pub observations: usize,
    pub det: DetSpec,
    /// Per-unit statistics (Fisher methods; empty for the pooled LLC).
    pub per_unit: Vec<UnitDetail>,
    pub warnings: Vec<String>,
}

impl UnitRootReport {
    /// Rejection of the unit-root null at the 5% level.
    pub fn rejects_at_5pct(&self) -> bool {
        self.p_value < 0.05
    }
}

/// Suite configuration; defaults mirror common software conventions
/// (constant-only regressions, Schwarz ADF lags, Newey-West bandwidths).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub det: DetSpec,
    pub adf_lags: LagPolicy,
    pub llc_lags: usize,
    /// `None` = Newey-West rule per series length.
    pub pp_bandwidth: Option<usize>,
    /// `None` = Newey-West rule, applied inside the LLC variance ratio.
    pub llc_bandwidth: Option<usize>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            det: DetSpec::Constant,
            adf_lags: LagPolicy::AutoSchwarz,
            llc_lags: 0,
            pp_bandwidth: None,
            llc_bandwidth: None,
        }
    }
}

/// All three reports for one indicator, plus the suite-level conclusion.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    /// Report rows in table order: LLC, ADF-Fisher, PP-Fisher. LLC is absent
    /// when the panel has a single unit (with a warning).
    pub reports: Vec<UnitRootReport>,
    /// True when every computed test fails to reject at 5% — the suite's
    /// "non-stationary, difference the data" flag.
    pub non_stationary: bool,
    pub rejections_at_5pct: usize,
    pub warnings: Vec<String>,
}

/// Run LLC, ADF-Fisher and PP-Fisher on one indicator of a balanced panel.
pub fn panel_unit_root_suite(
    ds: &PanelDataset,
    indicator: &str,
    cfg: &SuiteConfig,
) -> Result<SuiteResult> {
    let sub = ds.restrict_indicators(&[indicator])?;
    if !sub.is_balanced() {
        return Err(Error::UnbalancedPanel {
            detail: format!("unit-root suite needs a balanced panel for {indicator}"),
        });
    }
    let units = sub.units().to_vec();
    let mut suite_warnings = Vec::new();

    // Per-unit ADF.
    let mut adf_detail = Vec::with_capacity(units.len());
    let mut adf_obs = 0usize;
    for unit in &units {
        let s = sub.series(unit, indicator)?;
        let out = match cfg.adf_lags {
            LagPolicy::Fixed(p) => adf_test(s.values(), p, cfg.det)?,
            LagPolicy::AutoSchwarz => adf_test_auto(s.values(), cfg.det)?,
        };
        adf_obs += out.nobs;
        adf_detail.push(UnitDetail {
            unit: unit.clone(),
            statistic: out.tau,
            p_value: out.p_value,
        });
    }
    let adf_fisher = fisher_combine(
        &adf_detail.iter().map(|d| d.p_value).collect::<Vec<_>>(),
    )?;
    let mut adf_warn = Vec::new();
    if adf_fisher.clamped > 0 {
        adf_warn.push(format!(
            "{} per-unit p-value(s) clamped at {P_CLAMP:e} before combining",
            adf_fisher.clamped
        ));
    }

    // Per-unit Phillips-Perron.
    let mut pp_detail = Vec::with_capacity(units.len());
    let mut pp_obs = 0usize;
    for unit in &units {
        let s = sub.series(unit, indicator)?;
        let out = pp_test(s.values(), cfg.pp_bandwidth, cfg.det)?;
        pp_obs += out.nobs;
        pp_detail.push(UnitDetail {
            unit: unit.clone(),
            statistic: out.z_tau,
            p_value: out.p_value,
        });
    }
    let pp_fisher =
        fisher_combine(&pp_detail.iter().map(|d| d.p_value).collect::<Vec<_>>())?;
    let mut pp_warn = Vec::new();
    if pp_fisher.clamped > 0 {
        pp_warn.push(format!(
            "{} per-unit p-value(s) clamped at {P_CLAMP:e} before combining",
            pp_fisher.clamped
        ));
    }

    let mut reports = Vec::with_capacity(3);

    // Pooled LLC, omitted (with warning) when pooling is impossible.
    match llc_test(&sub, indicator, cfg.llc_lags, cfg.det, cfg.llc_bandwidth) {
        Ok(out) => reports.push(UnitRootReport {
            method: UnitRootMethod::LevinLinChu,
            statistic: out.t_star,
            p_value: out.p_value,
            cross_sections: out.cross_sections,
            observations: out.nobs,
            det: cfg.det,
            per_unit: Vec::new(),
            warnings: out.warnings,
        }),
        Err(Error::NotEnoughUnits { got, needed, .. }) => {
            suite_warnings.push(format!(
                "Levin-Lin-Chu omitted: {got} cross-section(s), needs {needed}"
            ));
        }
        Err(e) => return Err(e),
    }

    reports.push(UnitRootReport {
        method: UnitRootMethod::AdfFisher,
        statistic: adf_fisher.statistic,
        p_value: adf_fisher.p_value,
        cross_sections: adf_detail.len(),
        observations: adf_obs,
        det: cfg.det,
        per_unit: adf_detail,
        warnings: adf_warn,
    });
    reports.push(UnitRootReport {
        method: UnitRootMethod::PpFisher,
        statistic: pp_fisher.statistic,
        p_value: pp_fisher.p_value,
        cross_sections: pp_detail.len(),
        observations: pp_obs,
        det: cfg.det,
        per_unit: pp_detail,
        warnings: pp_warn,
    });

    let rejections = reports.iter().filter(|r| r.rejects_at_5pct()).count();
    Ok(SuiteResult {
        non_stationary: rejections == 0,
        rejections_at_5pct: rejections,
        warnings: suite_warnings,
        reports,
    })
}

/// Format with six significant digits, trailing zeros trimmed — the style of
/// the statistic column in conventional stationarity tables.
pub(crate) fn format_sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (5 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Write report rows as `Method,Statistic,Prob,Cross-sections,Obs`.
pub fn write_reports_csv(writer: impl Write, reports: &[UnitRootReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["Method", "Statistic", "Prob", "Cross-sections", "Obs"])?;
    for r in reports {
        w.write_record(&[
            r.method.label().to_string(),
            format_sig6(r.statistic),
            format!("{:.4}", r.p_value),
            r.cross_sections.to_string(),
            r.observations.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::{Period, Series};
    use crate::sim::{lcg_random_walk, lcg_uniforms};

    fn panel_from(series: Vec<Vec<f64>>, indicator: &str) -> PanelDataset {
        let start = Period::new(2000, 1).unwrap();
        let list: Vec<Series> = series
            .into_iter()
            .enumerate()
            .map(|(i, v)| Series::new(format!("C{i:02}"), indicator, start, v).unwrap())
            .collect();
        PanelDataset::from_series(&list).unwrap()
    }

    #[test]
    fn suite_on_stationary_panel_rejects_everywhere() {
        let units: Vec<Vec<f64>> = (0..6)
            .map(|i| {
                let u = lcg_uniforms(150, 900 + i);
                let mut y = vec![0.0; 150];
                for t in 1..150 {
                    y[t] = 0.4 * y[t - 1] + (u[t] - 0.5);
                }
                y
            })
            .collect();
        let ds = panel_from(units, "ICT");
        let res = panel_unit_root_suite(&ds, "ICT", &SuiteConfig::default()).unwrap();
        assert_eq!(res.reports.len(), 3);
        assert_eq!(res.rejections_at_5pct, 3);
        assert!(!res.non_stationary);
        assert_eq!(res.reports[0].method, UnitRootMethod::LevinLinChu);
        assert_eq!(res.reports[1].method, UnitRootMethod::AdfFisher);
        assert_eq!(res.reports[2].method, UnitRootMethod::PpFisher);
        // Fisher rows carry per-unit detail; cross-sections match it.
        assert_eq!(res.reports[1].per_unit.len(), 6);
        assert_eq!(res.reports[1].cross_sections, 6);
        // Obs: PP uses T−1 per unit.
        assert_eq!(res.reports[2].observations, 6 * 149);
    }

    #[test]
    fn suite_on_random_walk_panel_flags_non_stationary() {
        let units: Vec<Vec<f64>> = (0..6).map(|i| lcg_random_walk(150, 700 + i)).collect();
        let ds = panel_from(units, "F");
        let res = panel_unit_root_suite(&ds, "F", &SuiteConfig::default()).unwrap();
        assert!(res.non_stationary, "p-values: {:?}",
            res.reports.iter().map(|r| r.p_value).collect::<Vec<_>>());
        assert_eq!(res.rejections_at_5pct, 0);
    }

    #[test]
    fn suite_single_unit_keeps_fisher_drops_llc() {
        let ds = panel_from(vec![lcg_random_walk(100, 66)], "F");
        let res = panel_unit_root_suite(&ds, "F", &SuiteConfig::default()).unwrap();
        assert_eq!(res.reports.len(), 2);
        assert!(res.reports.iter().all(|r| r.method != UnitRootMethod::LevinLinChu));
        assert_eq!(res.warnings.len(), 1);
        assert!(res.warnings[0].contains("Levin-Lin-Chu omitted"));
    }

    #[test]
    fn csv_layout_matches_table_shape() {
        let units: Vec<Vec<f64>> = (0..3).map(|i| lcg_random_walk(80, 50 + i)).collect();
        let ds = panel_from(units, "F");
        let res = panel_unit_root_suite(&ds, "F", &SuiteConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_reports_csv(&mut buf, &res.reports).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "Method,Statistic,Prob,Cross-sections,Obs"
        );
        let llc_row = lines.next().unwrap();
        assert!(llc_row.starts_with("\"Levin, Lin & Chu t*\","), "{llc_row}");
        let adf_row = lines.next().unwrap();
        assert!(adf_row.starts_with("ADF - Fisher Chi-square,"));
        let pp_row = lines.next().unwrap();
        assert!(pp_row.starts_with("PP - Fisher Chi-square,"));
        assert_eq!(pp_row.split(',').count(), 5);
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(format_sig6(-7.526504), "-7.5265");
        assert_eq!(format_sig6(107.3590), "107.359");
        assert_eq!(format_sig6(175.873), "175.873");
        assert_eq!(format_sig6(-4.28222), "-4.28222");
        assert_eq!(format_sig6(0.0), "0");
        assert_eq!(format_sig6(51.6539), "51.6539");
    }
}
