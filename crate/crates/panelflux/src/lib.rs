//! Panel econometrics and neural forecasting for macro indicator panels.
//!
//! The crate covers the full analysis chain used by the companion CLI:
//!
//! - [`panel`]: balanced/unbalanced panel containers over
//!   country × quarter × indicator cells, with CSV interchange;
//! - [`transform`]: trade-openness construction, differencing,
//!   annual→quarterly disaggregation, min–max scaling, and window
//!   extraction for supervised training;
//! - [`mlp`]: a small dense multilayer perceptron with analytic gradients,
//!   full-batch gradient-descent training, recursive forecasting, and JSON
//!   persistence;
//! - [`unitroot`]: augmented Dickey–Fuller and Phillips–Perron tests with
//!   Fisher panel combination, and the Levin–Lin–Chu pooled panel test;
//! - [`pvar`]: fixed-effects panel vector autoregression via the within
//!   estimator;
//! - [`irf`]: orthogonalized impulse responses with residual-bootstrap
//!   bands;
//! - [`sim`]: deterministic generators used in tests and the bundled demo.
//!
//! All numerical routines are deterministic given their explicit seeds.

pub mod error;
pub mod irf;
pub mod linalg;
pub mod mlp;
pub mod panel;
pub mod pvar;
pub mod sim;
pub mod transform;
pub mod unitroot;

pub use error::{Error, Result};
pub use panel::{AnnualSeries, Observation, PanelDataset, Period, ScaleParams, Series};
