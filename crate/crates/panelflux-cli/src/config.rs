//! Pipeline configuration: a TOML file with sections, every field optional
//! with documented defaults, plus CLI flag overrides (flags win).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use panelflux::mlp::{Activation, ForecasterConfig, TrainConfig};
use panelflux::unitroot::{DetSpec, LagPolicy, SuiteConfig};

use crate::error::{CliError, Result};

/// Canonical indicator roles used throughout the pipeline.
pub const ROLE_XP: &str = "XP";
pub const ROLE_MP: &str = "MP";
pub const ROLE_GDP: &str = "GDP";
pub const ROLE_ICT: &str = "ICT";
pub const ROLE_OPENNESS: &str = "F";

/// Default World Bank source series per role. These are this project's
/// choices of standard series (exports/imports of goods and services and
/// GDP in current US$; internet users as the ICT proxy), documented as
/// defaults — any mapping can be supplied in the config file.
pub fn default_indicator_ids() -> BTreeMap<String, String> {
    BTreeMap::from([
        (ROLE_XP.to_string(), "NE.EXP.GNFS.CD".to_string()),
        (ROLE_MP.to_string(), "NE.IMP.GNFS.CD".to_string()),
        (ROLE_GDP.to_string(), "NY.GDP.MKTP.CD".to_string()),
        (ROLE_ICT.to_string(), "IT.NET.USER.ZS".to_string()),
    ])
}

pub const DEFAULT_COUNTRIES: [&str; 10] = [
    "IRN", "USA", "CAN", "DEU", "FRA", "JPN", "TUR", "KOR", "PRT", "GRC",
];

/// Where observations come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataSourceKind {
    /// Fetch annual data from the World Bank API (cached).
    Worldbank,
    /// Read an observations CSV (annual or quarterly rows).
    Csv,
    /// The bundled synthetic dataset generated from a known panel VAR.
    Papersim,
}

/// Fully resolved pipeline configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub countries: Vec<String>,
    /// Role → source indicator id (XP, MP, GDP, ICT).
    pub indicators: BTreeMap<String, String>,
    /// Observed sample years, inclusive.
    pub observed_years: (i32, i32),
    /// Forecast years, inclusive; must start the year after the observed
    /// span ends.
    pub forecast_years: (i32, i32),
    pub source: DataSourceKind,
    /// Observations CSV path when `source = csv`.
    pub csv_path: Option<PathBuf>,
    pub forecast: ForecastSection,
    pub unitroot: UnitRootSection,
    pub pvar: PvarSection,
    pub irf: IrfSection,
    pub out_dir: PathBuf,
    /// Root seed; per-series and per-replicate seeds derive from it.
    pub seed: u64,
    /// HTTP cache directory; `PANELFLUX_CACHE` overrides, flag `--refresh`
    /// bypasses reads.
    pub cache_dir: PathBuf,
    pub refresh: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastSection {
    pub window: usize,
    pub hidden: Vec<usize>,
    pub holdout: usize,
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for ForecastSection {
    fn default() -> Self {
        let d = ForecasterConfig::default();
        ForecastSection {
            window: d.window,
            hidden: d.hidden,
            holdout: d.holdout,
            epochs: d.train.epochs,
            learning_rate: d.train.learning_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitRootSection {
    pub det: DetSpec,
    /// "auto" (Schwarz) or a fixed lag count.
    pub adf_lags: LagSetting,
    pub llc_lags: usize,
}

impl Default for UnitRootSection {
    fn default() -> Self {
        UnitRootSection {
            det: DetSpec::Constant,
            adf_lags: LagSetting::Auto,
            llc_lags: 0,
        }
    }
}

/// ADF lag setting: the literal string `"auto"` (Schwarz selection) or a
/// fixed non-negative lag count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagSetting {
    Fixed(usize),
    Auto,
}

impl Serialize for LagSetting {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            LagSetting::Auto => s.serialize_str("auto"),
            LagSetting::Fixed(n) => s.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for LagSetting {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct Visitor;
        impl serde::de::Visitor<'_> for Visitor {
            type Value = LagSetting;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                write!(f, "\"auto\" or a non-negative integer lag count")
            }

            fn visit_str<E: serde::de::Error>(self, v: &str) -> std::result::Result<LagSetting, E> {
                if v == "auto" {
                    Ok(LagSetting::Auto)
                } else {
                    Err(E::custom(format!(
                        "expected \"auto\" or an integer lag count, got \"{v}\""
                    )))
                }
            }

            fn visit_u64<E: serde::de::Error>(self, v: u64) -> std::result::Result<LagSetting, E> {
                Ok(LagSetting::Fixed(v as usize))
            }

            fn visit_i64<E: serde::de::Error>(self, v: i64) -> std::result::Result<LagSetting, E> {
                if v < 0 {
                    Err(E::custom("lag count must be non-negative"))
                } else {
                    Ok(LagSetting::Fixed(v as usize))
                }
            }
        }
        d.deserialize_any(Visitor)
    }
}

impl From<LagSetting> for LagPolicy {
    fn from(s: LagSetting) -> LagPolicy {
        match s {
            LagSetting::Auto => LagPolicy::AutoSchwarz,
            LagSetting::Fixed(p) => LagPolicy::Fixed(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PvarSection {
    /// Fixed lag order, or `auto` for Schwarz-criterion selection.
    pub lags: LagSetting,
    pub dof_correct_fixed_effects: bool,
}

impl Default for PvarSection {
    fn default() -> Self {
        PvarSection {
            lags: LagSetting::Fixed(1),
            dof_correct_fixed_effects: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrfSection {
    pub horizon: usize,
    /// Cholesky ordering; contemporaneously exogenous variable first.
    pub ordering: Vec<String>,
    pub bootstrap_replicates: usize,
    pub coverage: f64,
}

impl Default for IrfSection {
    fn default() -> Self {
        IrfSection {
            horizon: 10,
            ordering: vec![ROLE_ICT.to_string(), ROLE_OPENNESS.to_string()],
            bootstrap_replicates: 200,
            coverage: 0.90,
        }
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            countries: DEFAULT_COUNTRIES.iter().map(|s| s.to_string()).collect(),
            indicators: default_indicator_ids(),
            observed_years: (2000, 2020),
            forecast_years: (2021, 2025),
            source: DataSourceKind::Worldbank,
            csv_path: None,
            forecast: ForecastSection::default(),
            unitroot: UnitRootSection::default(),
            pvar: PvarSection::default(),
            irf: IrfSection::default(),
            out_dir: PathBuf::from("out"),
            seed: 42,
            cache_dir: PathBuf::from(".panelflux-cache"),
            refresh: false,
        }
    }
}

/// The TOML file mirror of [`PipelineConfig`]: every field optional so a
/// config file only states what it changes.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    data: Option<DataFile>,
    forecast: Option<ForecastFile>,
    unitroot: Option<UnitRootFile>,
    pvar: Option<PvarFile>,
    irf: Option<IrfFile>,
    output: Option<OutputFile>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DataFile {
    countries: Option<Vec<String>>,
    observed_years: Option<(i32, i32)>,
    forecast_years: Option<(i32, i32)>,
    source: Option<DataSourceKind>,
    csv_path: Option<PathBuf>,
    cache_dir: Option<PathBuf>,
    indicators: Option<BTreeMap<String, String>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ForecastFile {
    window: Option<usize>,
    hidden: Option<Vec<usize>>,
    holdout: Option<usize>,
    epochs: Option<usize>,
    learning_rate: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitRootFile {
    det: Option<DetSpec>,
    adf_lags: Option<LagSetting>,
    llc_lags: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PvarFile {
    lags: Option<LagSetting>,
    dof_correct_fixed_effects: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct IrfFile {
    horizon: Option<usize>,
    ordering: Option<Vec<String>>,
    bootstrap_replicates: Option<usize>,
    coverage: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputFile {
    dir: Option<PathBuf>,
    seed: Option<u64>,
}

/// Flag-level overrides; every field beats the config file when present.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub refresh: bool,
    pub countries: Option<Vec<String>>,
    pub lags: Option<usize>,
    pub horizon: Option<usize>,
    pub ordering: Option<Vec<String>>,
}

impl PipelineConfig {
    /// Load defaults ← config file (if any) ← flag overrides, then validate.
    pub fn resolve(config_path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        if let Some(path) = config_path {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::ConfigRead {
                path: path.display().to_string(),
                source,
            })?;
            let file: ConfigFile =
                toml::from_str(&text).map_err(|e| CliError::ConfigParse {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
            cfg.apply_file(file);
        }
        cfg.finalize(overrides)
    }

    /// Apply flag overrides and the `PANELFLUX_CACHE` environment
    /// variable, then validate.
    pub fn finalize(mut self, overrides: &Overrides) -> Result<Self> {
        self.apply_overrides(overrides);
        if let Ok(dir) = std::env::var("PANELFLUX_CACHE") {
            if !dir.is_empty() {
                self.cache_dir = PathBuf::from(dir);
            }
        }
        self.validate()?;
        Ok(self)
    }

    fn apply_file(&mut self, file: ConfigFile) {
        if let Some(d) = file.data {
            if let Some(v) = d.countries {
                self.countries = v;
            }
            if let Some(v) = d.observed_years {
                self.observed_years = v;
            }
            if let Some(v) = d.forecast_years {
                self.forecast_years = v;
            }
            if let Some(v) = d.source {
                self.source = v;
            }
            if let Some(v) = d.csv_path {
                self.csv_path = Some(v);
            }
            if let Some(v) = d.cache_dir {
                self.cache_dir = v;
            }
            if let Some(map) = d.indicators {
                for (k, v) in map {
                    self.indicators.insert(k, v);
                }
            }
        }
        if let Some(f) = file.forecast {
            if let Some(v) = f.window {
                self.forecast.window = v;
            }
            if let Some(v) = f.hidden {
                self.forecast.hidden = v;
            }
            if let Some(v) = f.holdout {
                self.forecast.holdout = v;
            }
            if let Some(v) = f.epochs {
                self.forecast.epochs = v;
            }
            if let Some(v) = f.learning_rate {
                self.forecast.learning_rate = v;
            }
        }
        if let Some(u) = file.unitroot {
            if let Some(v) = u.det {
                self.unitroot.det = v;
            }
            if let Some(v) = u.adf_lags {
                self.unitroot.adf_lags = v;
            }
            if let Some(v) = u.llc_lags {
                self.unitroot.llc_lags = v;
            }
        }
        if let Some(p) = file.pvar {
            if let Some(v) = p.lags {
                self.pvar.lags = v;
            }
            if let Some(v) = p.dof_correct_fixed_effects {
                self.pvar.dof_correct_fixed_effects = v;
            }
        }
        if let Some(i) = file.irf {
            if let Some(v) = i.horizon {
                self.irf.horizon = v;
            }
            if let Some(v) = i.ordering {
                self.irf.ordering = v;
            }
            if let Some(v) = i.bootstrap_replicates {
                self.irf.bootstrap_replicates = v;
            }
            if let Some(v) = i.coverage {
                self.irf.coverage = v;
            }
        }
        if let Some(o) = file.output {
            if let Some(v) = o.dir {
                self.out_dir = v;
            }
            if let Some(v) = o.seed {
                self.seed = v;
            }
        }
    }

    fn apply_overrides(&mut self, ov: &Overrides) {
        if let Some(v) = &ov.out {
            self.out_dir = v.clone();
        }
        if let Some(v) = ov.seed {
            self.seed = v;
        }
        if ov.refresh {
            self.refresh = true;
        }
        if let Some(v) = &ov.countries {
            self.countries = v.clone();
        }
        if let Some(v) = ov.lags {
            self.pvar.lags = LagSetting::Fixed(v);
        }
        if let Some(v) = ov.horizon {
            self.irf.horizon = v;
        }
        if let Some(v) = &ov.ordering {
            self.irf.ordering = v.clone();
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.countries.len() < 2 {
            return Err(CliError::Config(format!(
                "need at least 2 countries, got {}",
                self.countries.len()
            )));
        }
        let mut sorted = self.countries.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.countries.len() {
            return Err(CliError::Config("duplicate country codes".to_string()));
        }
        if self.observed_years.1 < self.observed_years.0 {
            return Err(CliError::Config(format!(
                "observed span {}..{} is inverted",
                self.observed_years.0, self.observed_years.1
            )));
        }
        if self.forecast_years.1 < self.forecast_years.0 {
            return Err(CliError::Config(format!(
                "forecast span {}..{} is inverted",
                self.forecast_years.0, self.forecast_years.1
            )));
        }
        if self.forecast_years.0 != self.observed_years.1 + 1 {
            return Err(CliError::Config(format!(
                "forecast span must start the year after the observed span ends \
                 (observed ends {}, forecast starts {})",
                self.observed_years.1, self.forecast_years.0
            )));
        }
        for role in [ROLE_XP, ROLE_MP, ROLE_GDP, ROLE_ICT] {
            if !self.indicators.contains_key(role) {
                return Err(CliError::Config(format!(
                    "indicator mapping for {role} is missing"
                )));
            }
        }
        if self.source == DataSourceKind::Csv && self.csv_path.is_none() {
            return Err(CliError::Config(
                "source = \"csv\" requires data.csv_path".to_string(),
            ));
        }
        if self.forecast.window == 0 || self.forecast.holdout == 0 {
            return Err(CliError::Config(
                "forecast.window and forecast.holdout must be ≥ 1".to_string(),
            ));
        }
        if self.pvar.lags == LagSetting::Fixed(0) {
            return Err(CliError::Config("pvar.lags must be ≥ 1".to_string()));
        }
        if self.irf.ordering.is_empty() {
            return Err(CliError::Config("irf.ordering must not be empty".to_string()));
        }
        if !(self.irf.coverage > 0.0 && self.irf.coverage < 1.0) {
            return Err(CliError::Config(format!(
                "irf.coverage must lie in (0, 1), got {}",
                self.irf.coverage
            )));
        }
        if self.irf.bootstrap_replicates != 0 && self.irf.bootstrap_replicates < 100 {
            return Err(CliError::Config(format!(
                "irf.bootstrap_replicates must be 0 (no bands) or >= 100, got {}",
                self.irf.bootstrap_replicates
            )));
        }
        Ok(())
    }

    /// Role-to-source-id pairs in canonical fetch order.
    pub fn indicator_roles(&self) -> Vec<(String, String)> {
        [ROLE_XP, ROLE_MP, ROLE_GDP, ROLE_ICT]
            .iter()
            .map(|r| (r.to_string(), self.indicators[*r].clone()))
            .collect()
    }

    /// Number of forecast quarters implied by the forecast span.
    pub fn forecast_steps(&self) -> usize {
        ((self.forecast_years.1 - self.forecast_years.0 + 1) * 4) as usize
    }

    /// Per-series forecaster settings with a series-specific derived seed.
    pub fn forecaster_for(&self, unit: &str, indicator: &str) -> ForecasterConfig {
        ForecasterConfig {
            window: self.forecast.window,
            hidden: self.forecast.hidden.clone(),
            hidden_activation: Activation::Tanh,
            holdout: self.forecast.holdout,
            steps: self.forecast_steps(),
            train: TrainConfig {
                learning_rate: self.forecast.learning_rate,
                epochs: self.forecast.epochs,
                seed: derive_seed(self.seed, &[unit, indicator]),
                shuffle: false,
            },
        }
    }

    pub fn suite_config(&self) -> SuiteConfig {
        SuiteConfig {
            det: self.unitroot.det,
            adf_lags: self.unitroot.adf_lags.into(),
            llc_lags: self.unitroot.llc_lags,
            pp_bandwidth: None,
            llc_bandwidth: None,
        }
    }
}

/// Stable seed derivation: FNV-1a over the label parts mixed into the root
/// seed. Deterministic across platforms and runs.
pub fn derive_seed(root: u64, parts: &[&str]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for part in parts {
        for b in part.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h ^= 0x1f;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    root ^ h
}
