//! Pipeline crate for the `panelflux` command-line tool: configuration,
//! World Bank ingestion, the bundled synthetic dataset, stage
//! orchestration, and SVG chart rendering on top of the `panelflux`
//! econometrics library.

pub mod config;
pub mod error;
pub mod papersim;
pub mod pipeline;
pub mod svg;
pub mod worldbank;
