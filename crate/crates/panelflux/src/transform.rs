//! Deterministic series and panel transforms: trade openness, differencing,
//! annual→quarterly disaggregation, min-max scaling, supervised windowing.
//!
//! Everything here is a pure function; transforms never mutate their inputs.

use crate::error::{Error, Result};
use crate::panel::{AnnualSeries, PanelDataset, ScaleParams, Series};

/// Names of the raw indicators the openness transform consumes and produces.
pub const XP: &str = "XP";
pub const MP: &str = "MP";
pub const GDP: &str = "GDP";
/// Trade openness, the derived dependent variable.
pub const OPENNESS: &str = "F";
/// Conventional name of the technology indicator column.
pub const ICT: &str = "ICT";

/// One supervised training pair produced by [`windowize`]: a sliding window
/// of `w` consecutive values and the value that follows it.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainPair {
    pub inputs: Vec<f64>,
    pub target: f64,
}

/// Add the trade-openness indicator `F = (XP + MP) / GDP` to a dataset.
///
/// `F` is present exactly where all three inputs are present. Requires the
/// `XP`, `MP`, `GDP` columns and strictly positive GDP at every used cell.
pub fn trade_openness(ds: &PanelDataset) -> Result<PanelDataset> {
    for needed in [XP, MP, GDP] {
        if ds.indicator_index(needed).is_none() {
            return Err(Error::MissingIndicator {
                indicator: needed.to_string(),
            });
        }
    }
    let xp = ds.indicator_index(XP).unwrap();
    let mp = ds.indicator_index(MP).unwrap();
    let gdp = ds.indicator_index(GDP).unwrap();
    let n_p = ds.periods().len();
    let mut cells = vec![None; ds.units().len() * n_p];
    for u in 0..ds.units().len() {
        for p in 0..n_p {
            let (x, m, g) = match (ds.value(u, p, xp), ds.value(u, p, mp), ds.value(u, p, gdp)) {
                (Some(x), Some(m), Some(g)) => (x, m, g),
                _ => continue,
            };
            if g <= 0.0 {
                return Err(Error::NonPositiveGdp {
                    unit: ds.units()[u].clone(),
                    period: ds.periods()[p].to_string(),
                    value: g,
                });
            }
            cells[u * n_p + p] = Some((x + m) / g);
        }
    }
    ds.with_indicator(OPENNESS, &cells)
}

/// `order`-fold first difference. `order = 0` is the identity; the start of
/// the period axis advances by `order` quarters.
pub fn difference(s: &Series, order: usize) -> Result<Series> {
    if order >= s.len() {
        return Err(Error::SeriesTooShort {
            operation: format!("difference of order {order}"),
            needed: order + 1,
            got: s.len(),
        });
    }
    let mut values = s.values().to_vec();
    for _ in 0..order {
        values = values.windows(2).map(|w| w[1] - w[0]).collect();
    }
    s.with_values(s.start().offset(order as i64), values)
}

/// Difference every (unit, indicator) series in a panel by `order`.
pub fn difference_panel(ds: &PanelDataset, order: usize) -> Result<PanelDataset> {
    let mut out = Vec::new();
    for s in ds.to_series_list() {
        out.push(difference(&s, order)?);
    }
    // Differenced values may legitimately be negative for any indicator, so
    // skip the ingestion-time level checks.
    PanelDataset::from_series_unchecked(&out)
}

/// Piecewise-linear annual→quarterly disaggregation with each annual value
/// anchored at its year midpoint (the Q2/Q3 boundary).
///
/// Quarter centers sit at year + (2q−1)/8; interior quarters interpolate
/// between the two neighbouring anchors, and the two quarters before the
/// first anchor / after the last extrapolate along the boundary slope. For
/// any year whose four quarter centers all lie between anchors, the mean of
/// its four quarterly values reproduces the annual value exactly (linearity).
pub fn disaggregate_annual_to_quarterly(annual: &AnnualSeries) -> Result<Series> {
    let n = annual.values.len();
    if n < 2 {
        return Err(Error::SeriesTooShort {
            operation: "annual-to-quarterly disaggregation".to_string(),
            needed: 2,
            got: n,
        });
    }
    let v = &annual.values;
    let mut out = Vec::with_capacity(4 * n);
    for year in 0..n {
        for q in 0..4u32 {
            // Offset of this quarter's center from the first anchor, in years.
            let u = year as f64 + (2.0 * q as f64 + 1.0) / 8.0 - 0.5;
            let value = if u < 0.0 {
                v[0] + u * (v[1] - v[0])
            } else if u >= (n - 1) as f64 {
                v[n - 1] + (u - (n - 1) as f64) * (v[n - 1] - v[n - 2])
            } else {
                let j = u.floor() as usize;
                v[j] + (u - j as f64) * (v[j + 1] - v[j])
            };
            out.push(value);
        }
    }
    Series::new(
        annual.unit.clone(),
        annual.indicator.clone(),
        crate::panel::Period::new(annual.start_year, 1)?,
        out,
    )
}

impl ScaleParams {
    /// Fit min-max parameters to a slice; the slice must not be constant.
    pub fn fit(values: &[f64]) -> Result<ScaleParams> {
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(min.is_finite() && max.is_finite()) {
            return Err(Error::NonFinite {
                context: "scale fit".to_string(),
            });
        }
        if max <= min {
            return Err(Error::ConstantSeries { value: min });
        }
        Ok(ScaleParams { min, max })
    }

    /// Map a level value into [0, 1].
    pub fn apply(&self, x: f64) -> f64 {
        (x - self.min) / (self.max - self.min)
    }

    /// Map a [0, 1] value back to level units.
    pub fn invert(&self, y: f64) -> f64 {
        self.min + y * (self.max - self.min)
    }

    /// Apply to a whole slice.
    pub fn apply_all(&self, values: &[f64]) -> Vec<f64> {
        values.iter().map(|&x| self.apply(x)).collect()
    }

    /// Invert a whole slice.
    pub fn invert_all(&self, values: &[f64]) -> Vec<f64> {
        values.iter().map(|&y| self.invert(y)).collect()
    }
}

/// Min-max normalize a series to [0, 1], returning the scaling record needed
/// to invert the map. Fails on constant series.
pub fn normalize(s: &Series) -> Result<(Series, ScaleParams)> {
    let scale = ScaleParams::fit(s.values())?;
    let scaled = s.with_values(s.start(), scale.apply_all(s.values()))?;
    Ok((scaled, scale))
}

/// Invert [`normalize`] using its scaling record.
pub fn denormalize(s: &Series, scale: ScaleParams) -> Result<Series> {
    if scale.max <= scale.min {
        return Err(Error::ConstantSeries { value: scale.min });
    }
    s.with_values(s.start(), scale.invert_all(s.values()))
}

/// Slide a window of length `w` over the values: pair `k` maps
/// `values[k..k+w]` to target `values[k+w]`. Produces `len − w` pairs.
pub fn windowize_values(values: &[f64], w: usize) -> Result<Vec<TrainPair>> {
    if w == 0 {
        return Err(Error::InvalidParameter("window must be ≥ 1".to_string()));
    }
    if w >= values.len() {
        return Err(Error::SeriesTooShort {
            operation: format!("windowize with window {w}"),
            needed: w + 1,
            got: values.len(),
        });
    }
    Ok((0..values.len() - w)
        .map(|k| TrainPair {
            inputs: values[k..k + w].to_vec(),
            target: values[k + w],
        })
        .collect())
}

/// [`windowize_values`] on a series.
pub fn windowize(s: &Series, w: usize) -> Result<Vec<TrainPair>> {
    windowize_values(s.values(), w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::{Observation, Period};

    fn quarterly(country: &str, year: i32, quarter: u8, indicator: &str, value: f64) -> Observation {
        Observation {
            country: country.to_string(),
            year,
            quarter: Some(quarter),
            indicator: indicator.to_string(),
            value,
        }
    }

    fn openness_fixture(xp: f64, mp: f64, gdp: f64) -> PanelDataset {
        PanelDataset::from_observations(&[
            quarterly("USA", 2000, 1, "XP", xp),
            quarterly("USA", 2000, 1, "MP", mp),
            quarterly("USA", 2000, 1, "GDP", gdp),
        ])
        .unwrap()
    }

    #[test]
    fn openness_direct_arithmetic() {
        let ds = trade_openness(&openness_fixture(2.0, 3.0, 10.0)).unwrap();
        let f = ds
            .value_at("USA", Period::new(2000, 1).unwrap(), "F")
            .unwrap();
        assert!((f - 0.5).abs() < 1e-15);
    }

    #[test]
    fn openness_zero_trade() {
        let ds = trade_openness(&openness_fixture(0.0, 0.0, 7.0)).unwrap();
        let f = ds
            .value_at("USA", Period::new(2000, 1).unwrap(), "F")
            .unwrap();
        assert_eq!(f, 0.0);
    }

    #[test]
    fn openness_macro_magnitudes() {
        // (1.2e11 + 9.7e10) / 4.3e11, evaluated independently beforehand.
        let ds = trade_openness(&openness_fixture(1.2e11, 9.7e10, 4.3e11)).unwrap();
        let f = ds
            .value_at("USA", Period::new(2000, 1).unwrap(), "F")
            .unwrap();
        assert!((f - 0.5046511627906977).abs() < 1e-15);
    }

    #[test]
    fn openness_missing_where_any_input_missing() {
        let ds = PanelDataset::from_observations(&[
            quarterly("USA", 2000, 1, "XP", 2.0),
            quarterly("USA", 2000, 1, "MP", 3.0),
            quarterly("USA", 2000, 1, "GDP", 10.0),
            // 2000Q2 lacks MP: F must be missing there.
            quarterly("USA", 2000, 2, "XP", 2.0),
            quarterly("USA", 2000, 2, "GDP", 10.0),
        ])
        .unwrap();
        let out = trade_openness(&ds).unwrap();
        assert!(out
            .value_at("USA", Period::new(2000, 1).unwrap(), "F")
            .is_some());
        assert!(out
            .value_at("USA", Period::new(2000, 2).unwrap(), "F")
            .is_none());
    }

    #[test]
    fn openness_requires_all_inputs() {
        let ds = PanelDataset::from_observations(&[
            quarterly("USA", 2000, 1, "XP", 2.0),
            quarterly("USA", 2000, 1, "GDP", 10.0),
        ])
        .unwrap();
        match trade_openness(&ds) {
            Err(Error::MissingIndicator { indicator }) => assert_eq!(indicator, "MP"),
            other => panic!("expected MissingIndicator, got {other:?}"),
        }
    }

    fn series(values: &[f64]) -> Series {
        Series::new("USA", "X", Period::new(2000, 1).unwrap(), values.to_vec()).unwrap()
    }

    #[test]
    fn difference_first_and_identity() {
        let s = series(&[1.0, 3.0, 6.0]);
        let d1 = difference(&s, 1).unwrap();
        assert_eq!(d1.values(), &[2.0, 3.0]);
        assert_eq!(d1.start().to_string(), "2000Q2");
        let d0 = difference(&s, 0).unwrap();
        assert_eq!(d0.values(), s.values());
        assert_eq!(d0.start(), s.start());
    }

    #[test]
    fn difference_second_order() {
        let s = series(&[1.0, 3.0, 6.0, 10.0]);
        let d2 = difference(&s, 2).unwrap();
        assert_eq!(d2.values(), &[1.0, 1.0]);
        assert_eq!(d2.start().to_string(), "2000Q3");
    }

    #[test]
    fn difference_order_too_large() {
        let s = series(&[1.0, 2.0]);
        assert!(matches!(
            difference(&s, 2),
            Err(Error::SeriesTooShort { .. })
        ));
    }

    fn annual(values: &[f64]) -> AnnualSeries {
        AnnualSeries {
            unit: "USA".to_string(),
            indicator: "GDP".to_string(),
            start_year: 2000,
            values: values.to_vec(),
        }
    }

    #[test]
    fn disaggregation_constant_is_constant() {
        let q = disaggregate_annual_to_quarterly(&annual(&[5.0, 5.0, 5.0])).unwrap();
        assert_eq!(q.len(), 12);
        assert!(q.values().iter().all(|&v| (v - 5.0).abs() < 1e-12));
    }

    #[test]
    fn disaggregation_monotone_for_increasing_input() {
        let q = disaggregate_annual_to_quarterly(&annual(&[4.0, 8.0])).unwrap();
        assert_eq!(q.len(), 8);
        assert!(q.values().windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn disaggregation_golden_vector() {
        // Hand-evaluated anchored-midpoint interpolation of annual [0, 4]:
        // anchors at mid-2000 (0) and mid-2001 (4), slope 4/year, quarter
        // centers at (2q−1)/8 within each year.
        let q = disaggregate_annual_to_quarterly(&annual(&[0.0, 4.0])).unwrap();
        let expected = [-1.5, -0.5, 0.5, 1.5, 2.5, 3.5, 4.5, 5.5];
        for (got, want) in q.values().iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "got {got}, want {want}");
        }
        assert_eq!(q.start().to_string(), "2000Q1");
    }

    #[test]
    fn disaggregation_year_mean_exact_on_collinear_anchors() {
        // With collinear anchors the interpolant is a single line, so each
        // year's quarterly mean reproduces its annual value exactly.
        let q = disaggregate_annual_to_quarterly(&annual(&[3.0, 5.0, 7.0, 9.0])).unwrap();
        for (year, want) in [(0usize, 3.0), (1, 5.0), (2, 7.0), (3, 9.0)] {
            let mean: f64 = q.values()[4 * year..4 * year + 4].iter().sum::<f64>() / 4.0;
            assert!(
                (mean - want).abs() <= 1e-12,
                "year {year}: mean {mean} vs annual {want}"
            );
        }
    }

    #[test]
    fn disaggregation_year_mean_shift_at_kink_is_slope_difference_over_eight() {
        // A slope change at an interior anchor biases that year's quarterly
        // mean by (right slope − left slope)/8: the two quarters on either
        // side of mid-year sit 1/8 and 3/8 of a year away from the anchor.
        let q = disaggregate_annual_to_quarterly(&annual(&[3.0, 9.0, 7.0, 2.0])).unwrap();
        for (year, anchor, s_left, s_right) in
            [(1usize, 9.0, 6.0, -2.0), (2, 7.0, -2.0, -5.0)]
        {
            let mean: f64 = q.values()[4 * year..4 * year + 4].iter().sum::<f64>() / 4.0;
            let want = anchor + (s_right - s_left) / 8.0;
            assert!(
                (mean - want).abs() <= 1e-12,
                "year {year}: mean {mean} vs {want}"
            );
        }
    }

    #[test]
    fn disaggregation_needs_two_points() {
        assert!(matches!(
            disaggregate_annual_to_quarterly(&annual(&[1.0])),
            Err(Error::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn normalize_affine_map_and_golden() {
        let (n, sc) = normalize(&series(&[0.0, 5.0, 10.0])).unwrap();
        assert_eq!(n.values(), &[0.0, 0.5, 1.0]);
        assert_eq!((sc.min, sc.max), (0.0, 10.0));

        let (n, _) = normalize(&series(&[2.0, 3.0, 7.0])).unwrap();
        let expected = [0.0, 0.2, 1.0];
        for (got, want) in n.values().iter().zip(expected) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn normalize_roundtrip() {
        let s = series(&[3.0, -1.0, 4.0, 1.5, -0.5]);
        let (n, sc) = normalize(&s).unwrap();
        let back = denormalize(&n, sc).unwrap();
        for (a, b) in s.values().iter().zip(back.values()) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn normalize_rejects_constant() {
        assert!(matches!(
            normalize(&series(&[2.0, 2.0, 2.0])),
            Err(Error::ConstantSeries { .. })
        ));
    }

    #[test]
    fn windowize_enumeration() {
        let pairs = windowize(&series(&[1.0, 2.0, 3.0, 4.0, 5.0]), 2).unwrap();
        assert_eq!(pairs.len(), 3);
        assert_eq!(pairs[0].inputs, vec![1.0, 2.0]);
        assert_eq!(pairs[0].target, 3.0);
        assert_eq!(pairs[2].inputs, vec![3.0, 4.0]);
        assert_eq!(pairs[2].target, 5.0);
    }

    #[test]
    fn windowize_boundary_and_count() {
        let ten: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert_eq!(windowize_values(&ten, 9).unwrap().len(), 1);
        let ninety: Vec<f64> = (0..90).map(|i| (i as f64).sin()).collect();
        assert_eq!(windowize_values(&ninety, 8).unwrap().len(), 82);
        assert!(matches!(
            windowize_values(&ten, 10),
            Err(Error::SeriesTooShort { .. })
        ));
    }
}
