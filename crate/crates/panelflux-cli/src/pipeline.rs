//! Stage orchestration: ingest → disaggregate → forecast → fuse →
//! openness → unit-root suite (with differencing fallback) → P-VAR → IRF.
//!
//! Every stage writes its product as a readable interchange CSV before the
//! next stage starts, so any stage can be re-run standalone from the
//! previous stage's file, and a failed run leaves the completed prefix on
//! disk. The run report records per-stage status, timing, warnings with
//! their stage attached, and the manifest of produced files.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use panelflux::irf::{self, BootstrapConfig, IrfResult};
use panelflux::mlp::{self, ForecastResult};
use panelflux::panel::{
    group_annual, read_observations, write_observations_to_path, Observation, PanelDataset,
    Series,
};
use panelflux::pvar::{self, FitOptions, LagCriterion, PvarModel};
use panelflux::transform::{self, ICT, OPENNESS};
use panelflux::unitroot::{panel_unit_root_suite, write_reports_csv, SuiteResult};

use crate::config::{DataSourceKind, LagSetting, PipelineConfig};
use crate::error::{CliError, Result};
use crate::svg::render_irf_svg;
use crate::worldbank::{Transport, WorldBankClient};

/// Canonical stage order.
pub const STAGE_NAMES: [&str; 8] = [
    "ingest",
    "disaggregate",
    "forecast",
    "fuse",
    "openness",
    "unitroot",
    "pvar",
    "irf",
];

/// How far to drive the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StagePoint {
    Ingest,
    Disaggregate,
    Forecast,
    Fuse,
    Openness,
    UnitRoot,
    Pvar,
    Irf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Ok,
    Failed,
    Skipped,
}

/// One executed (or skipped) stage.
#[derive(Debug, Clone, Serialize)]
pub struct StageReport {
    pub name: String,
    pub status: StageStatus,
    pub duration_ms: u64,
    /// Warnings raised inside this stage (already carrying their context).
    pub warnings: Vec<String>,
    /// Stage-specific facts: counts, chosen lag orders, estimates, paths.
    pub details: BTreeMap<String, serde_json::Value>,
}

/// The run artifact: what ran, what it produced, what it warned about.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub seed: u64,
    pub out_dir: String,
    pub stages: Vec<StageReport>,
    /// File names (relative to `out_dir`) produced by this run.
    pub manifest: Vec<String>,
    /// All warnings, each prefixed with the stage that raised it.
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn stage(&self, name: &str) -> Option<&StageReport> {
        self.stages.iter().find(|s| s.name == name)
    }
}

/// Output file names, relative to the output directory.
pub mod artifact {
    pub const OBSERVED: &str = "observed.csv";
    pub const OBSERVED_QUARTERLY: &str = "observed_quarterly.csv";
    pub const FORECASTS: &str = "forecasts.csv";
    pub const FUSED: &str = "fused.csv";
    pub const OPENNESS: &str = "openness.csv";
    pub const ANALYSIS: &str = "analysis.csv";
    pub const PVAR_ESTIMATES: &str = "pvar_estimates.csv";
    pub const IRF: &str = "irf.csv";
    pub const RUN_REPORT: &str = "run_report.json";

    pub fn unitroot(indicator: &str, differenced: bool) -> String {
        if differenced {
            format!("unitroot_{indicator}_diff.csv")
        } else {
            format!("unitroot_{indicator}.csv")
        }
    }

    pub fn irf_svg(shock: &str, response: &str) -> String {
        format!("irf_{shock}_to_{response}.svg")
    }
}

/// Work products handed from stage to stage. Slots already filled (from a
/// previous run's artifacts) make the producing stage a no-op.
#[derive(Default)]
struct PipelineState {
    observations: Option<Vec<Observation>>,
    quarterly: Option<PanelDataset>,
    forecasts: Option<Vec<ForecastResult>>,
    fused: Option<PanelDataset>,
    openness: Option<PanelDataset>,
    analysis: Option<PanelDataset>,
    model: Option<PvarModel>,
    irf: Option<IrfResult>,
}

struct Runner<'a> {
    cfg: &'a PipelineConfig,
    out_dir: PathBuf,
    stages: Vec<StageReport>,
    manifest: Vec<String>,
    state: PipelineState,
}

/// Run the full pipeline with the default HTTP transport. The report is
/// returned (and written to `run_report.json`) even when a stage fails;
/// the error names the failing stage.
pub fn run_pipeline(cfg: &PipelineConfig) -> (RunReport, Result<()>) {
    run_pipeline_with(cfg, crate::worldbank::HttpTransport::new(), StagePoint::Irf, false)
}

/// Run the pipeline with an explicit transport, stopping after `through`.
/// With `resume`, stages whose outputs already exist in the output
/// directory are skipped and their artifacts re-read, so a single stage
/// can be re-run standalone from the previous stage's file.
pub fn run_pipeline_with<T: Transport>(
    cfg: &PipelineConfig,
    transport: T,
    through: StagePoint,
    resume: bool,
) -> (RunReport, Result<()>) {
    let mut runner = Runner {
        cfg,
        out_dir: cfg.out_dir.clone(),
        stages: Vec::new(),
        manifest: Vec::new(),
        state: PipelineState::default(),
    };
    let result = runner.drive(transport, through, resume);
    let report = runner.finish(result.as_ref().err());
    (report, result)
}

impl<'a> Runner<'a> {
    fn drive<T: Transport>(
        &mut self,
        transport: T,
        through: StagePoint,
        resume: bool,
    ) -> Result<()> {
        std::fs::create_dir_all(&self.out_dir)?;
        if resume {
            self.preload(through)?;
        }

        self.stage(StagePoint::Ingest, through, move |r, s| r.ingest(s, transport))?;
        self.stage(StagePoint::Disaggregate, through, Runner::disaggregate)?;
        self.stage(StagePoint::Forecast, through, Runner::forecast)?;
        self.stage(StagePoint::Fuse, through, Runner::fuse)?;
        self.stage(StagePoint::Openness, through, Runner::openness)?;
        self.stage(StagePoint::UnitRoot, through, Runner::unitroot)?;
        self.stage(StagePoint::Pvar, through, Runner::pvar)?;
        self.stage(StagePoint::Irf, through, Runner::irf)?;
        Ok(())
    }

    /// Fill the furthest state slot available from a previous run so the
    /// requested stage starts from the artifact on disk.
    fn preload(&mut self, through: StagePoint) -> Result<()> {
        let candidates: &[(&str, StagePoint)] = &[
            (artifact::ANALYSIS, StagePoint::UnitRoot),
            (artifact::OPENNESS, StagePoint::Openness),
            (artifact::FUSED, StagePoint::Fuse),
            (artifact::OBSERVED_QUARTERLY, StagePoint::Disaggregate),
        ];
        for (file, produced_by) in candidates {
            // Never preload the target stage's own output (or anything
            // later): the point of re-running a stage is to recompute it.
            if *produced_by >= through {
                continue;
            }
            let path = self.out_dir.join(file);
            if !path.is_file() {
                continue;
            }
            let ds = PanelDataset::read_csv(&path)?;
            match produced_by {
                StagePoint::UnitRoot => self.state.analysis = Some(ds),
                StagePoint::Openness => self.state.openness = Some(ds),
                StagePoint::Fuse => self.state.fused = Some(ds),
                StagePoint::Disaggregate => self.state.quarterly = Some(ds),
                _ => unreachable!(),
            }
            return Ok(());
        }
        Ok(())
    }

    fn stage<F>(&mut self, point: StagePoint, through: StagePoint, body: F) -> Result<()>
    where
        F: FnOnce(&mut Self, &mut StageReport) -> Result<()>,
    {
        if point > through {
            return Ok(());
        }
        let name = STAGE_NAMES[point as usize];
        let mut report = StageReport {
            name: name.to_string(),
            status: StageStatus::Ok,
            duration_ms: 0,
            warnings: Vec::new(),
            details: BTreeMap::new(),
        };
        if self.has_product(point) {
            report.status = StageStatus::Skipped;
            report
                .details
                .insert("reason".into(), json!("reused artifact from the output directory"));
            self.stages.push(report);
            return Ok(());
        }
        let t0 = Instant::now();
        let outcome = body(self, &mut report);
        report.duration_ms = t0.elapsed().as_millis() as u64;
        match outcome {
            Ok(()) => {
                self.stages.push(report);
                Ok(())
            }
            Err(e) => {
                report.status = StageStatus::Failed;
                report.details.insert("error".into(), json!(e.to_string()));
                self.stages.push(report);
                Err(e.in_stage(name))
            }
        }
    }

    /// A stage's product can be present without the stage having run: a
    /// later slot filled by `preload` makes every upstream stage a no-op.
    fn has_product(&self, point: StagePoint) -> bool {
        let s = &self.state;
        let from = |p: StagePoint| -> bool {
            match p {
                StagePoint::Ingest => s.observations.is_some(),
                StagePoint::Disaggregate => s.quarterly.is_some(),
                StagePoint::Forecast => s.forecasts.is_some(),
                StagePoint::Fuse => s.fused.is_some(),
                StagePoint::Openness => s.openness.is_some(),
                StagePoint::UnitRoot => s.analysis.is_some(),
                StagePoint::Pvar => s.model.is_some(),
                StagePoint::Irf => s.irf.is_some(),
            }
        };
        // Any downstream product implies this stage's work is already
        // represented on disk.
        (point as usize..STAGE_NAMES.len()).any(|i| {
            from(match i {
                0 => StagePoint::Ingest,
                1 => StagePoint::Disaggregate,
                2 => StagePoint::Forecast,
                3 => StagePoint::Fuse,
                4 => StagePoint::Openness,
                5 => StagePoint::UnitRoot,
                6 => StagePoint::Pvar,
                _ => StagePoint::Irf,
            })
        })
    }

    fn add_artifact(&mut self, name: impl Into<String>) {
        let name = name.into();
        if !self.manifest.contains(&name) {
            self.manifest.push(name);
        }
    }

    fn write_panel(&mut self, ds: &PanelDataset, name: &str) -> Result<()> {
        ds.write_csv(self.out_dir.join(name))?;
        self.add_artifact(name);
        Ok(())
    }

    // ---- stages ---------------------------------------------------------

    fn ingest<T: Transport>(&mut self, report: &mut StageReport, transport: T) -> Result<()> {
        let cfg = self.cfg;
        let mut observations = match cfg.source {
            DataSourceKind::Worldbank => {
                let client = WorldBankClient::new(transport, cfg.cache_dir.clone(), cfg.refresh);
                let mut all = Vec::new();
                for (role, id) in cfg.indicator_roles() {
                    let path = client.fetch(&cfg.countries, &id, cfg.observed_years)?;
                    let mut obs = read_observations(&path)?;
                    // Cache files carry the provider's indicator id; the
                    // pipeline works in role names.
                    for o in &mut obs {
                        o.indicator = role.clone();
                    }
                    all.extend(obs);
                }
                all
            }
            DataSourceKind::Csv => {
                let path = cfg
                    .csv_path
                    .as_ref()
                    .ok_or_else(|| CliError::Config("source = \"csv\" requires data.csv_path".into()))?;
                read_observations(path)?
            }
            DataSourceKind::Papersim => crate::papersim::embedded_observations()?,
        };

        // Restrict to the configured panel and span.
        observations.retain(|o| {
            o.year >= cfg.observed_years.0 && o.year <= cfg.observed_years.1
        });
        let missing: Vec<&String> = cfg
            .countries
            .iter()
            .filter(|c| !observations.iter().any(|o| &o.country == *c))
            .collect();
        if !missing.is_empty() {
            return Err(CliError::Config(format!(
                "countries not present in the ingested data: {}",
                missing.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
            )));
        }
        observations.retain(|o| cfg.countries.contains(&o.country));

        let annual = observations.iter().filter(|o| o.quarter.is_none()).count();
        let quarterly = observations.len() - annual;
        if annual > 0 && quarterly > 0 {
            return Err(CliError::Config(format!(
                "mixed-frequency input: {annual} annual and {quarterly} quarterly rows; \
                 split the file and disaggregate explicitly"
            )));
        }

        write_observations_to_path(self.out_dir.join(artifact::OBSERVED), &observations)
            .map_err(CliError::Core)?;
        self.add_artifact(artifact::OBSERVED);
        report.details.insert("rows".into(), json!(observations.len()));
        report
            .details
            .insert("countries".into(), json!(cfg.countries.len()));
        report.details.insert(
            "frequency".into(),
            json!(if annual > 0 { "annual" } else { "quarterly" }),
        );
        self.state.observations = Some(observations);
        Ok(())
    }

    fn disaggregate(&mut self, report: &mut StageReport) -> Result<()> {
        let observations = self.state.observations.take().expect("ingest ran");
        let annual_rows = observations.iter().any(|o| o.quarter.is_none());
        let ds = if annual_rows {
            let annual = group_annual(&observations)?;
            let series: Vec<Series> = annual
                .iter()
                .map(transform::disaggregate_annual_to_quarterly)
                .collect::<std::result::Result<_, _>>()?;
            report.details.insert("series".into(), json!(series.len()));
            PanelDataset::from_series(&series)?
        } else {
            report
                .details
                .insert("reason".into(), json!("input already quarterly"));
            PanelDataset::from_observations(&observations)?
        };
        let ds = if ds.is_balanced() {
            ds
        } else {
            let trimmed = ds.trim_to_balanced()?;
            let w = format!(
                "unbalanced panel trimmed from {} to {} quarters",
                ds.periods().len(),
                trimmed.periods().len()
            );
            report.warnings.push(w);
            trimmed
        };
        report
            .details
            .insert("quarters".into(), json!(ds.periods().len()));
        self.write_panel(&ds, artifact::OBSERVED_QUARTERLY)?;
        self.state.quarterly = Some(ds);
        Ok(())
    }

    fn forecast(&mut self, report: &mut StageReport) -> Result<()> {
        let cfg = self.cfg;
        let ds = self.state.quarterly.as_ref().expect("disaggregate ran");
        // One forecaster per (country, indicator) series, trained
        // concurrently; seeds derive from the root seed and the series
        // key, so scheduling never changes results.
        let mut keys: Vec<(String, String)> = Vec::new();
        for unit in ds.units() {
            for ind in ds.indicators() {
                keys.push((unit.clone(), ind.clone()));
            }
        }
        let results: Vec<Result<ForecastResult>> = keys
            .par_iter()
            .map(|(unit, ind)| {
                let series = ds.series(unit, ind)?;
                let fc = cfg.forecaster_for(unit, ind);
                mlp::forecast_series(&series, &fc).map_err(CliError::Core)
            })
            .collect();

        let mut forecasts = Vec::with_capacity(results.len());
        let mut acc_sum = 0.0;
        let mut acc_min = f64::INFINITY;
        for ((unit, ind), res) in keys.iter().zip(results) {
            let fr = res?;
            let acc = fr.accuracy.accuracy_pct;
            acc_sum += acc;
            if acc < acc_min {
                acc_min = acc;
            }
            if acc < 80.0 {
                report.warnings.push(format!(
                    "low holdout accuracy for {unit}/{ind}: {acc:.1}%"
                ));
            }
            forecasts.push(fr);
        }

        let rows: Vec<Observation> = forecasts
            .iter()
            .flat_map(|fr| series_observations(&fr.predicted))
            .collect();
        write_observations_to_path(self.out_dir.join(artifact::FORECASTS), &rows)
            .map_err(CliError::Core)?;
        self.add_artifact(artifact::FORECASTS);

        report.details.insert("series".into(), json!(forecasts.len()));
        report
            .details
            .insert("steps".into(), json!(cfg.forecast_steps()));
        report.details.insert(
            "holdout_accuracy_mean_pct".into(),
            json!(round4(acc_sum / forecasts.len() as f64)),
        );
        report
            .details
            .insert("holdout_accuracy_min_pct".into(), json!(round4(acc_min)));
        self.state.forecasts = Some(forecasts);
        Ok(())
    }

    fn fuse(&mut self, report: &mut StageReport) -> Result<()> {
        let ds = self.state.quarterly.take().expect("disaggregate ran");
        let forecasts = self.state.forecasts.take().expect("forecast ran");
        let mut series = Vec::with_capacity(forecasts.len());
        for fr in &forecasts {
            let observed = ds.series(fr.predicted.unit(), fr.predicted.indicator())?;
            let mut values = observed.values().to_vec();
            values.extend_from_slice(fr.predicted.values());
            series.push(Series::new(
                observed.unit(),
                observed.indicator(),
                observed.start(),
                values,
            )?);
        }
        let fused = PanelDataset::from_series(&series)?;
        report
            .details
            .insert("quarters".into(), json!(fused.periods().len()));
        report.details.insert(
            "span".into(),
            json!(format!(
                "{}..{}",
                fused.periods()[0],
                fused.periods()[fused.periods().len() - 1]
            )),
        );
        self.write_panel(&fused, artifact::FUSED)?;
        self.state.fused = Some(fused);
        Ok(())
    }

    fn openness(&mut self, report: &mut StageReport) -> Result<()> {
        let fused = self.state.fused.take().expect("fuse ran");
        let with_f = transform::trade_openness(&fused)?;
        let analysis = with_f.restrict_indicators(&[OPENNESS, ICT])?;
        report
            .details
            .insert("variables".into(), json!([OPENNESS, ICT]));
        self.write_panel(&analysis, artifact::OPENNESS)?;
        self.state.openness = Some(analysis);
        Ok(())
    }

    fn unitroot(&mut self, report: &mut StageReport) -> Result<()> {
        let cfg = self.cfg;
        let levels = self.state.openness.take().expect("openness ran");
        let suite_cfg = cfg.suite_config();
        let vars = [OPENNESS, ICT];

        let mut any_nonstationary = false;
        for var in vars {
            let suite = panel_unit_root_suite(&levels, var, &suite_cfg)?;
            self.write_suite(var, false, &suite)?;
            self.record_suite(report, var, false, &suite);
            any_nonstationary |= suite.non_stationary;
        }

        let analysis = if any_nonstationary {
            // Difference every variable so the system stays in one
            // integration order, then re-test.
            let diffed = transform::difference_panel(&levels, 1)?;
            for var in vars {
                let suite = panel_unit_root_suite(&diffed, var, &suite_cfg)?;
                self.write_suite(var, true, &suite)?;
                self.record_suite(report, var, true, &suite);
                if suite.non_stationary {
                    report.warnings.push(format!(
                        "{var} still fails to reject a unit root after first differencing"
                    ));
                }
            }
            report.details.insert("differenced".into(), json!(true));
            diffed
        } else {
            report.details.insert("differenced".into(), json!(false));
            levels
        };

        self.write_panel(&analysis, artifact::ANALYSIS)?;
        self.state.analysis = Some(analysis);
        Ok(())
    }

    fn write_suite(&mut self, var: &str, differenced: bool, suite: &SuiteResult) -> Result<()> {
        let name = artifact::unitroot(var, differenced);
        let file = std::fs::File::create(self.out_dir.join(&name))?;
        write_reports_csv(file, &suite.reports)?;
        self.add_artifact(name);
        Ok(())
    }

    fn record_suite(
        &mut self,
        report: &mut StageReport,
        var: &str,
        differenced: bool,
        suite: &SuiteResult,
    ) {
        let key = if differenced {
            format!("d_{var}")
        } else {
            var.to_string()
        };
        report.details.insert(
            format!("rejections_{key}"),
            json!(format!("{}/{}", suite.rejections_at_5pct, suite.reports.len())),
        );
        for w in &suite.warnings {
            report.warnings.push(format!("{key}: {w}"));
        }
    }

    fn pvar(&mut self, report: &mut StageReport) -> Result<()> {
        let cfg = self.cfg;
        let ds = self.state.analysis.as_ref().expect("unitroot ran");
        let vars = [OPENNESS, ICT];
        let p = match cfg.pvar.lags {
            LagSetting::Fixed(p) => p,
            LagSetting::Auto => {
                let p = pvar::select_lag(ds, &vars, 4, LagCriterion::Bic)?;
                report.details.insert("lag_selection".into(), json!("bic"));
                p
            }
        };
        let options = FitOptions {
            dof_correct_fixed_effects: cfg.pvar.dof_correct_fixed_effects,
        };
        let model = pvar::fit(ds, &vars, p, options)?;

        let st = pvar::stability(&model);
        if !st.stable {
            report.warnings.push(format!(
                "estimated dynamics are unstable (max companion modulus {:.4})",
                st.moduli.first().copied().unwrap_or(f64::NAN)
            ));
        }
        report.details.insert("lags".into(), json!(p));
        report.details.insert(
            "max_companion_modulus".into(),
            json!(round4(st.moduli.first().copied().unwrap_or(f64::NAN))),
        );
        report.details.insert(
            "lag_matrices".into(),
            json!(model
                .lag_matrices()
                .iter()
                .map(|g| (0..g.nrows())
                    .map(|i| (0..g.ncols()).map(|j| g[(i, j)]).collect::<Vec<_>>())
                    .collect::<Vec<_>>())
                .collect::<Vec<_>>()),
        );

        let file = std::fs::File::create(self.out_dir.join(artifact::PVAR_ESTIMATES))?;
        pvar::write_estimates_csv(file, &model)?;
        self.add_artifact(artifact::PVAR_ESTIMATES);
        self.state.model = Some(model);
        Ok(())
    }

    fn irf(&mut self, report: &mut StageReport) -> Result<()> {
        let cfg = self.cfg;
        let model = self.state.model.as_ref().expect("pvar ran");
        let ds = self.state.analysis.as_ref().expect("unitroot ran");
        let ordering: Vec<&str> = cfg.irf.ordering.iter().map(|s| s.as_str()).collect();

        let result = if cfg.irf.bootstrap_replicates == 0 {
            irf::impulse_response(model, cfg.irf.horizon, &ordering)?
        } else {
            let bs = BootstrapConfig {
                replicates: cfg.irf.bootstrap_replicates,
                coverage: cfg.irf.coverage,
                seed: cfg.seed,
            };
            irf::bootstrap_bands(model, ds, cfg.irf.horizon, &ordering, &bs)?
        };
        for w in &result.warnings {
            report.warnings.push(w.clone());
        }
        report.details.insert("horizon".into(), json!(result.horizon));
        report
            .details
            .insert("ordering".into(), json!(result.ordering.clone()));
        if let Some(bands) = &result.bands {
            report
                .details
                .insert("bootstrap_replicates_used".into(), json!(bands.replicates_used));
            if bands.replicates_dropped > 0 {
                report.warnings.push(format!(
                    "{} bootstrap replicates dropped after refit failures",
                    bands.replicates_dropped
                ));
            }
        }

        let file = std::fs::File::create(self.out_dir.join(artifact::IRF))?;
        irf::write_irf_csv(file, &result)?;
        self.add_artifact(artifact::IRF);

        let vars = result.variables.clone();
        for shock in &vars {
            for response in &vars {
                let name = artifact::irf_svg(shock, response);
                render_irf_svg(&result, shock, response, &self.out_dir.join(&name))?;
                self.add_artifact(name);
            }
        }
        self.state.irf = Some(result);
        Ok(())
    }

    // ---- wrap-up --------------------------------------------------------

    fn finish(mut self, error: Option<&CliError>) -> RunReport {
        let mut warnings = Vec::new();
        for stage in &self.stages {
            for w in &stage.warnings {
                warnings.push(format!("{}: {}", stage.name, w));
            }
        }
        if let Some(e) = error {
            warnings.push(format!("run aborted: {e}"));
        }
        self.add_artifact(artifact::RUN_REPORT);
        let report = RunReport {
            seed: self.cfg.seed,
            out_dir: self.out_dir.display().to_string(),
            stages: self.stages,
            manifest: self.manifest,
            warnings,
        };
        // Best-effort: the report file itself must not mask the original
        // failure, so its write errors are swallowed here.
        if let Ok(body) = serde_json::to_string_pretty(&report) {
            let _ = std::fs::write(self.out_dir.join(artifact::RUN_REPORT), body + "\n");
        }
        report
    }
}

fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

/// Flatten one series into interchange rows.
fn series_observations(s: &Series) -> Vec<Observation> {
    (0..s.len())
        .map(|i| {
            let p = s.period(i);
            Observation {
                country: s.unit().to_string(),
                year: p.year(),
                quarter: Some(p.quarter()),
                indicator: s.indicator().to_string(),
                value: s.values()[i],
            }
        })
        .collect()
}
