//! CLI-level error type: wraps the library error and adds configuration,
//! transport, and pipeline-stage failures.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] panelflux::Error),

    #[error("config: {0}")]
    Config(String),

    #[error("could not read config file {path}: {source}")]
    ConfigRead {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("could not parse config file {path}: {message}")]
    ConfigParse { path: String, message: String },

    #[error("HTTP request failed after {attempts} attempts: {url}: {message}")]
    Http {
        url: String,
        attempts: usize,
        message: String,
    },

    #[error("malformed API response from {url} at byte offset {offset} (line {line}, column {column}): {message}")]
    MalformedResponse {
        url: String,
        offset: usize,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("API returned no data for indicator {indicator} and countries [{countries}]")]
    EmptyApiResult {
        indicator: String,
        countries: String,
    },

    #[error("no API data for indicator {indicator}, countries not found: [{missing}]")]
    CountriesNotFound { indicator: String, missing: String },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<CliError>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// Tag an error with the pipeline stage it occurred in.
    pub fn in_stage(self, stage: &str) -> CliError {
        CliError::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }
}
