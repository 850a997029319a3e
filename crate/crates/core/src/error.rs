//! Crate-wide error type.
//!
//! Variants split into two broad families: defects in the input data or
//! request (rejected up front by validation) and numerical failures
//! discovered while computing (non-convergence, singular information,
//! nonexistent estimates). [`Error::is_data_error`] exposes the split so
//! callers can map the families to different exit codes.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A diagonal entry of a count matrix is nonzero; self-loops are not modeled.
    #[error("diagonal entry ({i},{i}) must be zero: self-loops are not modeled")]
    DiagonalNonzero { i: usize },

    /// A success count exceeds its trial count.
    #[error("success count exceeds trials at ({i},{j}): {y} > {trials}")]
    CountExceedsTrials { i: usize, j: usize, y: u64, trials: u64 },

    /// Undirected observations must have symmetric count matrices.
    #[error("undirected data is asymmetric at ({i},{j}): {field} disagrees with its mirror")]
    AsymmetricUndirected { i: usize, j: usize, field: &'static str },

    /// The node whitelist resolved to fewer than two distinct ids.
    #[error("node whitelist must name at least two distinct nodes")]
    EmptyWhitelist,

    /// A binning specification contains no windows.
    #[error("binning specification contains no windows")]
    NoWindows,

    /// Two binning windows overlap.
    #[error("windows [{a_start},{a_end}) and [{b_start},{b_end}) overlap")]
    OverlappingWindows {
        a_start: i64,
        a_end: i64,
        b_start: i64,
        b_end: i64,
    },

    /// A text input failed to parse; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A structured input is missing a field or has inconsistent dimensions.
    #[error("schema error: {message}")]
    Schema { message: String },

    /// Dimensions of data, design, or parameters disagree.
    #[error("shape mismatch: {message}")]
    ShapeMismatch { message: String },

    /// An edge probability was requested for a node paired with itself.
    #[error("edge probability is undefined for the self-pair ({i},{i})")]
    SelfLoop { i: usize },

    /// The likelihood has no finite maximizer for the observed degrees.
    #[error("maximum-likelihood estimate does not exist: {message}")]
    NonexistentMle { message: String },

    /// The fixed-point iteration exhausted its iteration budget.
    #[error(
        "estimate did not converge within {max_iter} iterations \
         (final step norm {final_step_norm:.3e}, tolerance {tol:.3e})"
    )]
    NotConverged {
        max_iter: usize,
        final_step_norm: f64,
        tol: f64,
    },

    /// A coordinate update could not bracket its root.
    #[error("failed to bracket the coordinate-update root for parameter slot {slot}")]
    BracketFailure { slot: usize },

    /// The Fisher information matrix is numerically singular.
    #[error("Fisher information is numerically singular (pivot ratio {pivot_ratio:.3e})")]
    SingularFim { pivot_ratio: f64 },

    /// A closed-form expression was requested outside its domain.
    #[error("closed-form expression is undefined here: {message}")]
    InvalidSpecialCase { message: String },

    /// An analytic inverse was requested for a degenerate configuration.
    #[error("degenerate input: {message}")]
    DegenerateInput { message: String },

    /// A model fit inside a hypothesis test failed.
    #[error("{which} fit failed during the likelihood-ratio test: {source}")]
    FitFailed {
        which: &'static str,
        #[source]
        source: Box<Error>,
    },

    /// Too many bootstrap replicates were discarded to report a p-value.
    #[error("too many bootstrap replicates discarded: {discarded} of {requested}")]
    TooFewValidSims { discarded: usize, requested: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True when the error describes invalid input rather than a numerical
    /// failure encountered during an otherwise valid computation.
    pub fn is_data_error(&self) -> bool {
        !matches!(
            self,
            Error::NonexistentMle { .. }
                | Error::NotConverged { .. }
                | Error::BracketFailure { .. }
                | Error::SingularFim { .. }
                | Error::FitFailed { .. }
                | Error::TooFewValidSims { .. }
        )
    }
}
