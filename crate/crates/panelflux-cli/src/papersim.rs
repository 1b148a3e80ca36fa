//! Bundled synthetic dataset: a quarterly four-indicator panel generated
//! from a known fixed-effects VAR(1) so the full pipeline is demonstrable
//! and checkable offline.
//!
//! The latent DGP drives trade openness `F` and the ICT index directly:
//!
//! ```text
//! [F, ICT]_it = c_i + Γ [F, ICT]_{i,t−1} + P ε_it,   Γ = [[0.5, 0.2], [0.1, 0.4]]
//! ```
//!
//! per-country stationary means rise with the country index, `P` is the
//! Cholesky factor of a mildly correlated innovation covariance, and the
//! observable indicators are reconstructed so the pipeline's openness
//! transform recovers `F` exactly: `GDP` is a smooth positive trend with a
//! gentle cycle (learnable by the forecaster), `XP = 0.55·F·GDP`, and
//! `MP = 0.45·F·GDP`. The generator is bit-deterministic; the repository
//! ships its output (`data/papersim.csv`) and a test pins the file to the
//! generator byte for byte.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use panelflux::linalg::cholesky_lower;
use panelflux::panel::{read_observations_from, write_observations, Observation};
use panelflux::sim::simulate_var_panel;

use crate::config::{DataSourceKind, PipelineConfig, DEFAULT_COUNTRIES};
use crate::error::Result;

/// Lag matrix of the generating VAR, row-major.
pub const GAMMA: [[f64; 2]; 2] = [[0.5, 0.2], [0.1, 0.4]];
/// Export share of trade volume; imports take the complement.
pub const EXPORT_SHARE: f64 = 0.55;
/// RNG seed of the bundled dataset.
pub const SEED: u64 = 99;
/// Observed span of the bundled dataset (inclusive years). Longer than the
/// World Bank default span so the demo's dynamics estimates sit well inside
/// their finite-sample bias bounds.
pub const SPAN: (i32, i32) = (1990, 2020);

const SIGMA_F: f64 = 0.05;
const SIGMA_ICT: f64 = 0.04;
const SHOCK_CORRELATION: f64 = 0.3;
const BURNIN: usize = 200;

/// The shipped dataset, embedded so the demo needs no repository checkout.
pub const EMBEDDED_CSV: &str = include_str!("../data/papersim.csv");

/// Stationary mean of `F` for country index `i` (sorted code order).
fn f_mean(i: usize) -> f64 {
    0.45 + 0.03 * i as f64
}

/// Stationary mean of `ICT` for country index `i`.
fn ict_mean(i: usize) -> f64 {
    0.35 + 0.025 * i as f64
}

/// Country codes in the panel's sorted order.
pub fn country_codes() -> Vec<String> {
    let mut codes: Vec<String> = DEFAULT_COUNTRIES.iter().map(|s| s.to_string()).collect();
    codes.sort();
    codes
}

/// Latent `(F, ICT)` paths per country, `T × 2`, in sorted country order.
pub fn latent_paths() -> Vec<DMatrix<f64>> {
    let t_len = ((SPAN.1 - SPAN.0 + 1) * 4) as usize;
    let gamma = DMatrix::from_row_slice(2, 2, &[
        GAMMA[0][0], GAMMA[0][1], //
        GAMMA[1][0], GAMMA[1][1],
    ]);
    let sigma = DMatrix::from_row_slice(2, 2, &[
        SIGMA_F * SIGMA_F,
        SHOCK_CORRELATION * SIGMA_F * SIGMA_ICT,
        SHOCK_CORRELATION * SIGMA_F * SIGMA_ICT,
        SIGMA_ICT * SIGMA_ICT,
    ]);
    let chol = cholesky_lower(&sigma).expect("innovation covariance is positive definite");
    // Intercepts from target stationary means: c_i = (I − Γ)·μ_i.
    let eye = DMatrix::<f64>::identity(2, 2);
    let effects: Vec<DVector<f64>> = (0..country_codes().len())
        .map(|i| (&eye - &gamma) * DVector::from_column_slice(&[f_mean(i), ict_mean(i)]))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    simulate_var_panel(&[gamma], &effects, &chol, t_len, BURNIN, &mut rng)
        .expect("simulation parameters are valid")
}

/// Smooth positive GDP path for country `i`: a gentle linear trend around
/// a country-specific base with a ten-year cycle. The trend is kept mild
/// so recursive multi-step forecasts of the observable components stay
/// mutually consistent and their ratio does not drift.
fn gdp_at(i: usize, t: usize) -> f64 {
    let base = 400.0 + 2_300.0 * i as f64;
    let growth = 0.001 + 0.0002 * (i % 3) as f64;
    let phase = i as f64 * 0.7;
    base * (1.0 + growth * t as f64) * (1.0 + 0.03 * (st(t) + phase).sin())
}

fn st(t: usize) -> f64 {
    2.0 * std::f64::consts::PI * t as f64 / 40.0
}

/// Generate the bundled dataset as interchange observations: quarterly
/// rows for XP, MP, GDP, ICT over all default countries.
pub fn generate_observations() -> Vec<Observation> {
    let codes = country_codes();
    let latent = latent_paths();
    let t_len = ((SPAN.1 - SPAN.0 + 1) * 4) as usize;
    let mut out = Vec::with_capacity(codes.len() * t_len * 4);
    for (i, code) in codes.iter().enumerate() {
        for t in 0..t_len {
            let year = SPAN.0 + (t / 4) as i32;
            let quarter = Some((t % 4) as u8 + 1);
            let f = latent[i][(t, 0)];
            let ict = latent[i][(t, 1)];
            let gdp = gdp_at(i, t);
            let volume = f * gdp;
            for (indicator, value) in [
                ("GDP", gdp),
                ("ICT", ict),
                ("MP", (1.0 - EXPORT_SHARE) * volume),
                ("XP", EXPORT_SHARE * volume),
            ] {
                out.push(Observation {
                    country: code.clone(),
                    year,
                    quarter,
                    indicator: indicator.to_string(),
                    value,
                });
            }
        }
    }
    out
}

/// Serialize the generated dataset to interchange CSV bytes.
pub fn generate_csv() -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_observations(&mut buf, &generate_observations())?;
    Ok(buf)
}

/// Parse the embedded dataset.
pub fn embedded_observations() -> Result<Vec<Observation>> {
    Ok(read_observations_from(EMBEDDED_CSV.as_bytes())?)
}

/// Pipeline configuration for the bundled dataset: the generator's own
/// countries and span, all other knobs at their defaults.
pub fn demo_config() -> PipelineConfig {
    let mut cfg = PipelineConfig::default();
    cfg.countries = country_codes();
    cfg.observed_years = SPAN;
    cfg.forecast_years = (SPAN.1 + 1, SPAN.1 + 5);
    cfg.source = DataSourceKind::Papersim;
    cfg
}
