//! Error type shared across the crate.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Unified error type for panel construction, estimation and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A quarter outside `1..=4` (or a missing quarter where one is required).
    #[error("invalid period: year {year}, quarter {quarter:?} (quarter must be in 1..=4)")]
    InvalidPeriod { year: i32, quarter: Option<u8> },

    /// The same (country, period, indicator) cell appeared twice in the input.
    #[error("duplicate observation for {unit} {period} {indicator}")]
    DuplicateCell {
        unit: String,
        period: String,
        indicator: String,
    },

    /// A value that must be a finite real number was not.
    #[error("non-finite value for {context}")]
    NonFinite { context: String },

    /// GDP must be strictly positive wherever it enters a denominator.
    #[error("non-positive GDP for {unit} at {period}: {value}")]
    NonPositiveGdp {
        unit: String,
        period: String,
        value: f64,
    },

    /// An indicator required by an operation is absent from the dataset.
    #[error("indicator {indicator:?} not present in dataset")]
    MissingIndicator { indicator: String },

    /// A unit (country) required by an operation is absent from the dataset.
    #[error("unit {unit:?} not present in dataset")]
    MissingUnit { unit: String },

    /// The dataset holds no observations at all.
    #[error("dataset contains no observations")]
    EmptyPanel,

    /// An operation that requires a balanced panel was given an unbalanced one.
    #[error("unbalanced panel: {detail}")]
    UnbalancedPanel { detail: String },

    /// A series is shorter than the operation requires.
    #[error("series too short for {operation}: need at least {needed} observations, got {got}")]
    SeriesTooShort {
        operation: String,
        needed: usize,
        got: usize,
    },

    /// Normalization of a constant series is undefined (max == min).
    #[error("cannot normalize a constant series (min == max == {value})")]
    ConstantSeries { value: f64 },

    /// A malformed CSV record (wrong arity, unparsable field, bad schema).
    #[error("CSV schema error at record {record}: {message}")]
    CsvSchema { record: u64, message: String },

    /// Network architecture errors: empty layers, zero widths, arity mismatches.
    #[error("invalid network specification: {0}")]
    NetworkSpec(String),

    /// Input whose length does not match what the consumer expects.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        got: usize,
    },

    /// Training produced a non-finite loss (learning rate too high, bad data).
    #[error("training diverged at epoch {epoch} (loss became non-finite)")]
    TrainingDiverged { epoch: usize },

    /// Persisted model file with an unsupported schema version.
    #[error("unsupported model file version {found} (supported: {supported})")]
    ModelVersion { found: u32, supported: u32 },

    /// Not enough usable observations after lagging/differencing/trimming.
    #[error("not enough observations for {operation}: need at least {needed}, got {got}")]
    NotEnoughObservations {
        operation: String,
        needed: usize,
        got: usize,
    },

    /// Fewer cross-section units than the estimator requires.
    #[error("not enough cross-section units for {operation}: need at least {needed}, got {got}")]
    NotEnoughUnits {
        operation: String,
        needed: usize,
        got: usize,
    },

    /// A regressor matrix whose normal equations cannot be solved.
    #[error("singular design matrix in {context}")]
    SingularMatrix { context: String },

    /// Cholesky factorization found a non-positive pivot; the matrix is not
    /// positive definite. The failing pivot index is reported.
    #[error("matrix is not positive definite (pivot {pivot} is {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    /// A caller-supplied parameter outside its valid range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Impulse-response ordering did not name each model variable exactly once.
    #[error("invalid ordering: {0}")]
    InvalidOrdering(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
