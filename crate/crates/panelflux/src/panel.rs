//! Panel data model: quarterly periods, per-(country, indicator) series, and
//! the balanced N × T × K dataset consumed by every estimation stage.
//!
//! The on-disk interchange format is a UTF-8 CSV with header
//! `country,year,quarter,indicator,value`; `quarter` is `1..=4` for quarterly
//! observations and empty for annual source data (which must be disaggregated
//! before it can enter a [`PanelDataset`]).

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A calendar quarter, e.g. `2003Q3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Period {
    year: i32,
    quarter: u8,
}

impl Period {
    /// Build a period; `quarter` must lie in `1..=4`.
    pub fn new(year: i32, quarter: u8) -> Result<Self> {
        if !(1..=4).contains(&quarter) {
            return Err(Error::InvalidPeriod {
                year,
                quarter: Some(quarter),
            });
        }
        Ok(Period { year, quarter })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn quarter(&self) -> u8 {
        self.quarter
    }

    /// Total quarter count since year 0; gives periods a linear index so that
    /// consecutive quarters differ by exactly 1.
    pub fn index(&self) -> i64 {
        self.year as i64 * 4 + (self.quarter as i64 - 1)
    }

    /// Inverse of [`Period::index`].
    pub fn from_index(idx: i64) -> Self {
        Period {
            year: idx.div_euclid(4) as i32,
            quarter: (idx.rem_euclid(4) + 1) as u8,
        }
    }

    /// The period `n` quarters later (or earlier for negative `n`).
    pub fn offset(&self, n: i64) -> Self {
        Period::from_index(self.index() + n)
    }

    /// Next quarter.
    pub fn next(&self) -> Self {
        self.offset(1)
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}Q{}", self.year, self.quarter)
    }
}

impl FromStr for Period {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::InvalidPeriod {
            year: 0,
            quarter: None,
        };
        let (y, q) = s.split_once(['Q', 'q']).ok_or_else(err)?;
        let year: i32 = y.trim().parse().map_err(|_| err())?;
        let quarter: u8 = q.trim().parse().map_err(|_| err())?;
        Period::new(year, quarter)
    }
}

/// One observation as it appears in the interchange CSV. `quarter == None`
/// marks annual source data.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub country: String,
    pub year: i32,
    pub quarter: Option<u8>,
    pub indicator: String,
    pub value: f64,
}

/// A contiguous quarterly series for one (country, indicator) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    unit: String,
    indicator: String,
    start: Period,
    values: Vec<f64>,
}

impl Series {
    /// Build a series; it must be non-empty and all values finite.
    pub fn new(
        unit: impl Into<String>,
        indicator: impl Into<String>,
        start: Period,
        values: Vec<f64>,
    ) -> Result<Self> {
        let unit = unit.into();
        let indicator = indicator.into();
        if values.is_empty() {
            return Err(Error::SeriesTooShort {
                operation: format!("series {unit}/{indicator}"),
                needed: 1,
                got: 0,
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("{unit}/{indicator} at {}", start.offset(pos as i64)),
            });
        }
        Ok(Series {
            unit,
            indicator,
            start,
            values,
        })
    }

    pub fn unit(&self) -> &str {
        &self.unit
    }

    pub fn indicator(&self) -> &str {
        &self.indicator
    }

    pub fn start(&self) -> Period {
        self.start
    }

    /// Period of observation `i`.
    pub fn period(&self, i: usize) -> Period {
        self.start.offset(i as i64)
    }

    /// Period of the last observation.
    pub fn end(&self) -> Period {
        self.period(self.values.len() - 1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // enforced non-empty at construction
    }

    /// Same identity (unit/indicator), new values and start — used by the
    /// transforms, which shift or shorten the period axis.
    pub fn with_values(&self, start: Period, values: Vec<f64>) -> Result<Self> {
        Series::new(self.unit.clone(), self.indicator.clone(), start, values)
    }

    /// Same period axis, relabeled indicator.
    pub fn renamed(&self, indicator: impl Into<String>) -> Self {
        Series {
            unit: self.unit.clone(),
            indicator: indicator.into(),
            start: self.start,
            values: self.values.clone(),
        }
    }
}

/// An annual series awaiting disaggregation; years are contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnualSeries {
    pub unit: String,
    pub indicator: String,
    pub start_year: i32,
    pub values: Vec<f64>,
}

impl AnnualSeries {
    pub fn new(
        unit: impl Into<String>,
        indicator: impl Into<String>,
        start_year: i32,
        values: Vec<f64>,
    ) -> Result<Self> {
        let unit = unit.into();
        let indicator = indicator.into();
        if values.is_empty() {
            return Err(Error::SeriesTooShort {
                operation: format!("annual series {unit}/{indicator}"),
                needed: 1,
                got: 0,
            });
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("annual series {unit}/{indicator}"),
            });
        }
        Ok(Self {
            unit,
            indicator,
            start_year,
            values,
        })
    }
}

/// Min-max scaling record for one series; inverts normalization before any
/// reporting in level units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleParams {
    pub min: f64,
    pub max: f64,
}

/// Balanced-capable panel cube: `units × periods × indicators` with a
/// missing-value mask. Periods form a contiguous quarterly axis; units and
/// indicators are kept sorted so construction is order-independent.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelDataset {
    units: Vec<String>,
    periods: Vec<Period>,
    indicators: Vec<String>,
    values: Vec<f64>,
    present: Vec<bool>,
}

impl PanelDataset {
    /// Assemble a dataset from quarterly observations. Annual rows are
    /// rejected — disaggregate them first. Duplicate cells are an error, as
    /// are non-finite values and non-positive GDP.
    pub fn from_observations(observations: &[Observation]) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::EmptyPanel);
        }
        let mut units: Vec<String> = Vec::new();
        let mut indicators: Vec<String> = Vec::new();
        let mut min_idx = i64::MAX;
        let mut max_idx = i64::MIN;
        for obs in observations {
            let q = obs.quarter.ok_or(Error::InvalidPeriod {
                year: obs.year,
                quarter: None,
            })?;
            let p = Period::new(obs.year, q)?;
            min_idx = min_idx.min(p.index());
            max_idx = max_idx.max(p.index());
            if let Err(i) = units.binary_search(&obs.country) {
                units.insert(i, obs.country.clone());
            }
            if let Err(i) = indicators.binary_search(&obs.indicator) {
                indicators.insert(i, obs.indicator.clone());
            }
        }
        let periods: Vec<Period> = (min_idx..=max_idx).map(Period::from_index).collect();
        let mut ds = PanelDataset::empty(units, periods, indicators);
        for obs in observations {
            let p = Period::new(obs.year, obs.quarter.unwrap())?;
            ds.insert(&obs.country, p, &obs.indicator, obs.value)?;
        }
        ds.validate()?;
        Ok(ds)
    }

    /// Assemble a dataset from per-(unit, indicator) series; the period axis
    /// is the union of the series spans, cells outside a series are missing.
    pub fn from_series(series: &[Series]) -> Result<Self> {
        let ds = Self::from_series_unchecked(series)?;
        ds.validate_gdp()?;
        Ok(ds)
    }

    /// [`PanelDataset::from_series`] without the GDP-positivity rule — for
    /// internal reconstruction of transformed panels (demeaned, differenced)
    /// whose values are no longer levels.
    pub(crate) fn from_series_unchecked(series: &[Series]) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::EmptyPanel);
        }
        let mut units: Vec<String> = Vec::new();
        let mut indicators: Vec<String> = Vec::new();
        let mut min_idx = i64::MAX;
        let mut max_idx = i64::MIN;
        for s in series {
            min_idx = min_idx.min(s.start().index());
            max_idx = max_idx.max(s.end().index());
            if let Err(i) = units.binary_search(&s.unit().to_string()) {
                units.insert(i, s.unit().to_string());
            }
            if let Err(i) = indicators.binary_search(&s.indicator().to_string()) {
                indicators.insert(i, s.indicator().to_string());
            }
        }
        let periods: Vec<Period> = (min_idx..=max_idx).map(Period::from_index).collect();
        let mut ds = PanelDataset::empty(units, periods, indicators);
        for s in series {
            for (i, &v) in s.values().iter().enumerate() {
                ds.insert(s.unit(), s.period(i), s.indicator(), v)?;
            }
        }
        ds.validate_not_empty()?;
        Ok(ds)
    }

    fn empty(units: Vec<String>, periods: Vec<Period>, indicators: Vec<String>) -> Self {
        let n = units.len() * periods.len() * indicators.len();
        PanelDataset {
            units,
            periods,
            indicators,
            values: vec![f64::NAN; n],
            present: vec![false; n],
        }
    }

    fn cell(&self, u: usize, p: usize, k: usize) -> usize {
        (u * self.periods.len() + p) * self.indicators.len() + k
    }

    fn insert(&mut self, unit: &str, period: Period, indicator: &str, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::NonFinite {
                context: format!("{unit}/{indicator} at {period}"),
            });
        }
        let u = self
            .units
            .binary_search(&unit.to_string())
            .map_err(|_| Error::MissingUnit {
                unit: unit.to_string(),
            })?;
        let k = self
            .indicators
            .binary_search(&indicator.to_string())
            .map_err(|_| Error::MissingIndicator {
                indicator: indicator.to_string(),
            })?;
        let p_off = period.index() - self.periods[0].index();
        if p_off < 0 || p_off as usize >= self.periods.len() {
            return Err(Error::InvalidPeriod {
                year: period.year(),
                quarter: Some(period.quarter()),
            });
        }
        let idx = self.cell(u, p_off as usize, k);
        if self.present[idx] {
            return Err(Error::DuplicateCell {
                unit: unit.to_string(),
                period: period.to_string(),
                indicator: indicator.to_string(),
            });
        }
        self.values[idx] = value;
        self.present[idx] = true;
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        self.validate_not_empty()?;
        self.validate_gdp()
    }

    fn validate_not_empty(&self) -> Result<()> {
        if !self.present.iter().any(|&p| p) {
            return Err(Error::EmptyPanel);
        }
        Ok(())
    }

    /// GDP must be strictly positive wherever observed (it divides in the
    /// openness transform). Enforced at ingestion and fusion; internal
    /// reconstructions of transformed values bypass it.
    fn validate_gdp(&self) -> Result<()> {
        if let Ok(k) = self.indicators.binary_search(&"GDP".to_string()) {
            for u in 0..self.units.len() {
                for p in 0..self.periods.len() {
                    let idx = self.cell(u, p, k);
                    if self.present[idx] && self.values[idx] <= 0.0 {
                        return Err(Error::NonPositiveGdp {
                            unit: self.units[u].clone(),
                            period: self.periods[p].to_string(),
                            value: self.values[idx],
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn units(&self) -> &[String] {
        &self.units
    }

    pub fn periods(&self) -> &[Period] {
        &self.periods
    }

    pub fn indicators(&self) -> &[String] {
        &self.indicators
    }

    pub fn unit_index(&self, unit: &str) -> Option<usize> {
        self.units.binary_search(&unit.to_string()).ok()
    }

    pub fn indicator_index(&self, indicator: &str) -> Option<usize> {
        self.indicators.binary_search(&indicator.to_string()).ok()
    }

    /// Value at a cell by position; `None` when missing.
    pub fn value(&self, unit: usize, period: usize, indicator: usize) -> Option<f64> {
        let idx = self.cell(unit, period, indicator);
        self.present[idx].then(|| self.values[idx])
    }

    /// Value at a cell by name; `None` when missing or out of range.
    pub fn value_at(&self, unit: &str, period: Period, indicator: &str) -> Option<f64> {
        let u = self.unit_index(unit)?;
        let k = self.indicator_index(indicator)?;
        let off = period.index() - self.periods[0].index();
        if off < 0 || off as usize >= self.periods.len() {
            return None;
        }
        self.value(u, off as usize, k)
    }

    /// Extract the contiguous observed series for one (unit, indicator).
    /// The observed cells must form a single gap-free run.
    pub fn series(&self, unit: &str, indicator: &str) -> Result<Series> {
        let u = self.unit_index(unit).ok_or_else(|| Error::MissingUnit {
            unit: unit.to_string(),
        })?;
        let k = self
            .indicator_index(indicator)
            .ok_or_else(|| Error::MissingIndicator {
                indicator: indicator.to_string(),
            })?;
        let mut first = None;
        let mut last = None;
        for p in 0..self.periods.len() {
            if self.present[self.cell(u, p, k)] {
                if first.is_none() {
                    first = Some(p);
                }
                last = Some(p);
            }
        }
        let (first, last) = match (first, last) {
            (Some(f), Some(l)) => (f, l),
            _ => {
                return Err(Error::SeriesTooShort {
                    operation: format!("series {unit}/{indicator}"),
                    needed: 1,
                    got: 0,
                })
            }
        };
        let mut values = Vec::with_capacity(last - first + 1);
        for p in first..=last {
            match self.value(u, p, k) {
                Some(v) => values.push(v),
                None => {
                    return Err(Error::UnbalancedPanel {
                        detail: format!(
                            "{unit}/{indicator} has an interior gap at {}",
                            self.periods[p]
                        ),
                    })
                }
            }
        }
        Series::new(unit, indicator, self.periods[first], values)
    }

    /// True when every cell in the cube is observed.
    pub fn is_balanced(&self) -> bool {
        self.present.iter().all(|&p| p)
    }

    /// Trim to the widest contiguous period span over which every
    /// (unit, indicator) cell is observed — the rebalancing rule used before
    /// any estimation stage. Fails when no period is fully observed.
    pub fn trim_to_balanced(&self) -> Result<PanelDataset> {
        let full: Vec<bool> = (0..self.periods.len())
            .map(|p| {
                (0..self.units.len())
                    .all(|u| (0..self.indicators.len()).all(|k| self.present[self.cell(u, p, k)]))
            })
            .collect();
        // Longest run of `true`.
        let mut best: Option<(usize, usize)> = None;
        let mut run_start = None;
        for (p, &ok) in full.iter().enumerate() {
            if ok {
                run_start.get_or_insert(p);
            }
            let run_end = if ok && p + 1 < full.len() {
                continue;
            } else if ok {
                p + 1
            } else {
                p
            };
            if let Some(s) = run_start.take() {
                if best.map_or(true, |(bs, be)| run_end - s > be - bs) {
                    best = Some((s, run_end));
                }
            }
        }
        let (s, e) = best.ok_or_else(|| Error::UnbalancedPanel {
            detail: "no period is observed for every unit and indicator".to_string(),
        })?;
        self.restrict_periods(self.periods[s], self.periods[e - 1])
    }

    /// Subset the period axis to `start..=end` (inclusive).
    pub fn restrict_periods(&self, start: Period, end: Period) -> Result<PanelDataset> {
        let lo = start.index() - self.periods[0].index();
        let hi = end.index() - self.periods[0].index();
        if lo < 0 || hi < lo || hi as usize >= self.periods.len() {
            return Err(Error::InvalidParameter(format!(
                "period range {start}..{end} outside dataset span {}..{}",
                self.periods[0],
                self.periods[self.periods.len() - 1]
            )));
        }
        let (lo, hi) = (lo as usize, hi as usize);
        let periods: Vec<Period> = self.periods[lo..=hi].to_vec();
        let mut out = PanelDataset::empty(self.units.clone(), periods, self.indicators.clone());
        for u in 0..self.units.len() {
            for (np, p) in (lo..=hi).enumerate() {
                for k in 0..self.indicators.len() {
                    let src = self.cell(u, p, k);
                    let dst = out.cell(u, np, k);
                    out.values[dst] = self.values[src];
                    out.present[dst] = self.present[src];
                }
            }
        }
        out.validate_not_empty()?;
        Ok(out)
    }

    /// Subset to the named indicators (all must exist).
    pub fn restrict_indicators(&self, keep: &[&str]) -> Result<PanelDataset> {
        let mut keep_idx = Vec::with_capacity(keep.len());
        for name in keep {
            keep_idx.push(
                self.indicator_index(name)
                    .ok_or_else(|| Error::MissingIndicator {
                        indicator: name.to_string(),
                    })?,
            );
        }
        keep_idx.sort_unstable();
        keep_idx.dedup();
        let indicators: Vec<String> = keep_idx
            .iter()
            .map(|&k| self.indicators[k].clone())
            .collect();
        let mut out = PanelDataset::empty(self.units.clone(), self.periods.clone(), indicators);
        for u in 0..self.units.len() {
            for p in 0..self.periods.len() {
                for (nk, &k) in keep_idx.iter().enumerate() {
                    let src = self.cell(u, p, k);
                    let dst = out.cell(u, p, nk);
                    out.values[dst] = self.values[src];
                    out.present[dst] = self.present[src];
                }
            }
        }
        out.validate_not_empty()?;
        Ok(out)
    }

    /// Add a derived indicator column from per-(unit, period) optional
    /// values, laid out row-major as `unit * periods + period`. Used by
    /// transforms whose output may inherit arbitrary missing patterns.
    pub(crate) fn with_indicator(&self, name: &str, cells: &[Option<f64>]) -> Result<PanelDataset> {
        assert_eq!(cells.len(), self.units.len() * self.periods.len());
        if self.indicator_index(name).is_some() {
            return Err(Error::DuplicateCell {
                unit: "*".to_string(),
                period: "*".to_string(),
                indicator: name.to_string(),
            });
        }
        let mut indicators = self.indicators.clone();
        let at = indicators
            .binary_search(&name.to_string())
            .expect_err("checked absent above");
        indicators.insert(at, name.to_string());
        let mut out = PanelDataset::empty(self.units.clone(), self.periods.clone(), indicators);
        for u in 0..self.units.len() {
            for p in 0..self.periods.len() {
                for (k, ind) in self.indicators.iter().enumerate() {
                    let nk = out.indicator_index(ind).expect("carried over");
                    let src = self.cell(u, p, k);
                    let dst = out.cell(u, p, nk);
                    out.values[dst] = self.values[src];
                    out.present[dst] = self.present[src];
                }
                if let Some(v) = cells[u * self.periods.len() + p] {
                    let dst = out.cell(u, p, at);
                    out.values[dst] = v;
                    out.present[dst] = true;
                }
            }
        }
        out.validate_not_empty()?;
        Ok(out)
    }

    /// Merge another indicator column in as a set of series (one per unit).
    /// The period axis widens to cover the new series if needed.
    pub fn with_series(&self, series: &[Series]) -> Result<PanelDataset> {
        let mut all = self.to_series_list();
        all.extend(series.iter().cloned());
        PanelDataset::from_series(&all)
    }

    /// Decompose into the list of contiguous per-(unit, indicator) series,
    /// skipping pairs with no observations.
    pub fn to_series_list(&self) -> Vec<Series> {
        let mut out = Vec::new();
        for unit in &self.units {
            for indicator in &self.indicators {
                if let Ok(s) = self.series(unit, indicator) {
                    out.push(s);
                }
            }
        }
        out
    }

    /// Flatten into CSV-ready observations (observed cells only), ordered by
    /// unit, then period, then indicator.
    pub fn to_observations(&self) -> Vec<Observation> {
        let mut out = Vec::new();
        for (u, unit) in self.units.iter().enumerate() {
            for (p, period) in self.periods.iter().enumerate() {
                for (k, indicator) in self.indicators.iter().enumerate() {
                    if let Some(v) = self.value(u, p, k) {
                        out.push(Observation {
                            country: unit.clone(),
                            year: period.year(),
                            quarter: Some(period.quarter()),
                            indicator: indicator.clone(),
                            value: v,
                        });
                    }
                }
            }
        }
        out
    }

    /// Number of observed cells.
    pub fn observed_cells(&self) -> usize {
        self.present.iter().filter(|&&p| p).count()
    }

    /// Write the interchange CSV.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_observations_to_path(path, &self.to_observations())
    }

    /// Read a quarterly interchange CSV into a dataset.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<PanelDataset> {
        let obs = read_observations(path)?;
        PanelDataset::from_observations(&obs)
    }
}

/// Group annual observations (empty `quarter` field) into per-(unit,
/// indicator) annual series with contiguous years. Quarterly rows are
/// rejected here; mixed-frequency files must be split upstream.
pub fn group_annual(observations: &[Observation]) -> Result<Vec<AnnualSeries>> {
    let mut grouped: BTreeMap<(String, String), BTreeMap<i32, f64>> = BTreeMap::new();
    for obs in observations {
        if obs.quarter.is_some() {
            return Err(Error::InvalidPeriod {
                year: obs.year,
                quarter: obs.quarter,
            });
        }
        if !obs.value.is_finite() {
            return Err(Error::NonFinite {
                context: format!("{}/{} at {}", obs.country, obs.indicator, obs.year),
            });
        }
        let key = (obs.country.clone(), obs.indicator.clone());
        if grouped
            .entry(key)
            .or_default()
            .insert(obs.year, obs.value)
            .is_some()
        {
            return Err(Error::DuplicateCell {
                unit: obs.country.clone(),
                period: obs.year.to_string(),
                indicator: obs.indicator.clone(),
            });
        }
    }
    let mut out = Vec::new();
    for ((unit, indicator), by_year) in grouped {
        let start_year = *by_year.keys().next().expect("non-empty group");
        let end_year = *by_year.keys().last().expect("non-empty group");
        if by_year.len() as i64 != (end_year - start_year) as i64 + 1 {
            return Err(Error::UnbalancedPanel {
                detail: format!(
                    "{unit}/{indicator} annual years not contiguous over {start_year}..{end_year}"
                ),
            });
        }
        out.push(AnnualSeries {
            unit,
            indicator,
            start_year,
            values: by_year.into_values().collect(),
        });
    }
    Ok(out)
}

const CSV_HEADER: [&str; 5] = ["country", "year", "quarter", "indicator", "value"];

/// Read interchange-CSV observations (quarterly and/or annual rows).
pub fn read_observations(path: impl AsRef<Path>) -> Result<Vec<Observation>> {
    let file = std::fs::File::open(path)?;
    read_observations_from(file)
}

/// Read interchange-CSV observations from any reader.
pub fn read_observations_from(reader: impl Read) -> Result<Vec<Observation>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    {
        let headers = rdr.headers()?;
        let got: Vec<&str> = headers.iter().collect();
        if got != CSV_HEADER {
            return Err(Error::CsvSchema {
                record: 0,
                message: format!("expected header {CSV_HEADER:?}, got {got:?}"),
            });
        }
    }
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| -> Result<&str> {
            record.get(i).ok_or_else(|| Error::CsvSchema {
                record: line,
                message: format!("missing field {}", CSV_HEADER[i]),
            })
        };
        let country = field(0)?.to_string();
        let year: i32 = field(1)?.parse().map_err(|e| Error::CsvSchema {
            record: line,
            message: format!("bad year: {e}"),
        })?;
        let quarter_raw = field(2)?;
        let quarter = if quarter_raw.is_empty() {
            None
        } else {
            let q: u8 = quarter_raw.parse().map_err(|e| Error::CsvSchema {
                record: line,
                message: format!("bad quarter: {e}"),
            })?;
            if !(1..=4).contains(&q) {
                return Err(Error::CsvSchema {
                    record: line,
                    message: format!("quarter {q} outside 1..=4"),
                });
            }
            Some(q)
        };
        let indicator = field(3)?.to_string();
        let value: f64 = field(4)?.parse().map_err(|e| Error::CsvSchema {
            record: line,
            message: format!("bad value: {e}"),
        })?;
        out.push(Observation {
            country,
            year,
            quarter,
            indicator,
            value,
        });
    }
    Ok(out)
}

/// Write observations in the interchange schema.
pub fn write_observations_to_path(
    path: impl AsRef<Path>,
    observations: &[Observation],
) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_observations(file, observations)
}

/// Write observations in the interchange schema to any writer.
pub fn write_observations(writer: impl Write, observations: &[Observation]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(CSV_HEADER)?;
    for obs in observations {
        wtr.write_record(&[
            obs.country.as_str(),
            &obs.year.to_string(),
            &obs.quarter.map_or(String::new(), |q| q.to_string()),
            obs.indicator.as_str(),
            &format_value(obs.value),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Shortest decimal representation that round-trips the exact f64; keeps CSV
/// output byte-stable across runs.
pub fn format_value(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(country: &str, year: i32, quarter: u8, indicator: &str, value: f64) -> Observation {
        Observation {
            country: country.to_string(),
            year,
            quarter: Some(quarter),
            indicator: indicator.to_string(),
            value,
        }
    }

    #[test]
    fn period_arithmetic_and_formatting() {
        let p = Period::new(2003, 3).unwrap();
        assert_eq!(p.to_string(), "2003Q3");
        assert_eq!(p.next().to_string(), "2003Q4");
        assert_eq!(p.offset(2).to_string(), "2004Q1");
        assert_eq!(p.offset(-3).to_string(), "2002Q4");
        assert_eq!("2003Q3".parse::<Period>().unwrap(), p);
        assert_eq!(Period::from_index(p.index()), p);
        assert!(Period::new(2003, 5).is_err());
        assert!("2003".parse::<Period>().is_err());
    }

    #[test]
    fn period_ordering_follows_time() {
        let a = Period::new(1999, 4).unwrap();
        let b = Period::new(2000, 1).unwrap();
        assert!(a < b);
        assert_eq!(b.index() - a.index(), 1);
    }

    #[test]
    fn dataset_roundtrip_and_accessors() {
        let rows = vec![
            obs("USA", 2000, 1, "GDP", 10.0),
            obs("USA", 2000, 2, "GDP", 11.0),
            obs("IRN", 2000, 1, "GDP", 5.0),
            obs("IRN", 2000, 2, "GDP", 6.0),
        ];
        let ds = PanelDataset::from_observations(&rows).unwrap();
        assert_eq!(ds.units(), &["IRN".to_string(), "USA".to_string()]);
        assert_eq!(ds.periods().len(), 2);
        assert_eq!(
            ds.value_at("USA", Period::new(2000, 2).unwrap(), "GDP"),
            Some(11.0)
        );
        assert!(ds.is_balanced());
        let s = ds.series("IRN", "GDP").unwrap();
        assert_eq!(s.values(), &[5.0, 6.0]);
        assert_eq!(s.start().to_string(), "2000Q1");
    }

    #[test]
    fn duplicate_cell_rejected() {
        let rows = vec![
            obs("USA", 2000, 1, "GDP", 10.0),
            obs("USA", 2000, 1, "GDP", 12.0),
        ];
        assert!(matches!(
            PanelDataset::from_observations(&rows),
            Err(Error::DuplicateCell { .. })
        ));
    }

    #[test]
    fn nonpositive_gdp_rejected_with_location() {
        let rows = vec![
            obs("USA", 2000, 1, "GDP", 10.0),
            obs("USA", 2000, 2, "GDP", -3.0),
        ];
        match PanelDataset::from_observations(&rows) {
            Err(Error::NonPositiveGdp { unit, period, .. }) => {
                assert_eq!(unit, "USA");
                assert_eq!(period, "2000Q2");
            }
            other => panic!("expected NonPositiveGdp, got {other:?}"),
        }
    }

    #[test]
    fn annual_rows_rejected_by_quarterly_constructor() {
        let rows = vec![Observation {
            country: "USA".into(),
            year: 2000,
            quarter: None,
            indicator: "GDP".into(),
            value: 1.0,
        }];
        assert!(matches!(
            PanelDataset::from_observations(&rows),
            Err(Error::InvalidPeriod { .. })
        ));
    }

    #[test]
    fn trim_to_balanced_finds_widest_span() {
        // USA observed 2000Q1..2001Q4, IRN observed 2000Q3..2001Q4:
        // balanced span is 2000Q3..2001Q4 (6 quarters).
        let mut rows = Vec::new();
        for i in 0..8 {
            let p = Period::new(2000, 1).unwrap().offset(i);
            rows.push(obs("USA", p.year(), p.quarter(), "GDP", 1.0 + i as f64));
        }
        for i in 2..8 {
            let p = Period::new(2000, 1).unwrap().offset(i);
            rows.push(obs("IRN", p.year(), p.quarter(), "GDP", 2.0 + i as f64));
        }
        let ds = PanelDataset::from_observations(&rows).unwrap();
        assert!(!ds.is_balanced());
        let trimmed = ds.trim_to_balanced().unwrap();
        assert!(trimmed.is_balanced());
        assert_eq!(trimmed.periods().len(), 6);
        assert_eq!(trimmed.periods()[0].to_string(), "2000Q3");
        assert_eq!(trimmed.periods()[5].to_string(), "2001Q4");
    }

    #[test]
    fn trim_to_balanced_rejects_disjoint_coverage() {
        let rows = vec![obs("USA", 2000, 1, "GDP", 1.0), obs("IRN", 2001, 1, "GDP", 2.0)];
        let ds = PanelDataset::from_observations(&rows).unwrap();
        assert!(matches!(
            ds.trim_to_balanced(),
            Err(Error::UnbalancedPanel { .. })
        ));
    }

    #[test]
    fn series_with_interior_gap_is_an_error() {
        let rows = vec![
            obs("USA", 2000, 1, "GDP", 1.0),
            obs("USA", 2000, 3, "GDP", 3.0),
        ];
        let ds = PanelDataset::from_observations(&rows).unwrap();
        assert!(matches!(
            ds.series("USA", "GDP"),
            Err(Error::UnbalancedPanel { .. })
        ));
    }

    #[test]
    fn csv_roundtrip_preserves_values_exactly() {
        let rows = vec![
            obs("USA", 2000, 1, "XP", 1.2e11),
            obs("USA", 2000, 2, "XP", 0.1 + 0.2), // representable but awkward
            Observation {
                country: "USA".into(),
                year: 1999,
                quarter: None,
                indicator: "GDP".into(),
                value: 4.3e11,
            },
        ];
        let mut buf = Vec::new();
        write_observations(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("country,year,quarter,indicator,value\n"));
        let back = read_observations_from(&buf[..]).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn csv_header_is_validated() {
        let bad = b"nation,year,quarter,indicator,value\nUSA,2000,1,GDP,1\n";
        assert!(matches!(
            read_observations_from(&bad[..]),
            Err(Error::CsvSchema { .. })
        ));
    }

    #[test]
    fn group_annual_requires_contiguous_years() {
        let mk = |year: i32| Observation {
            country: "USA".into(),
            year,
            quarter: None,
            indicator: "GDP".into(),
            value: year as f64,
        };
        let ok = group_annual(&[mk(2000), mk(2001), mk(2002)]).unwrap();
        assert_eq!(ok.len(), 1);
        assert_eq!(ok[0].start_year, 2000);
        assert_eq!(ok[0].values, vec![2000.0, 2001.0, 2002.0]);
        assert!(matches!(
            group_annual(&[mk(2000), mk(2002)]),
            Err(Error::UnbalancedPanel { .. })
        ));
    }

    #[test]
    fn with_series_adds_an_indicator_column() {
        let rows = vec![
            obs("USA", 2000, 1, "GDP", 10.0),
            obs("USA", 2000, 2, "GDP", 11.0),
        ];
        let ds = PanelDataset::from_observations(&rows).unwrap();
        let f = Series::new("USA", "F", Period::new(2000, 1).unwrap(), vec![0.5, 0.6]).unwrap();
        let merged = ds.with_series(&[f]).unwrap();
        assert_eq!(merged.indicators(), &["F".to_string(), "GDP".to_string()]);
        assert_eq!(
            merged.value_at("USA", Period::new(2000, 2).unwrap(), "F"),
            Some(0.6)
        );
    }
}
