use thiserror::Error;

/// Errors produced by this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Parameters fall outside the ECOMP parameter space. The message names
    /// the violated clause.
    #[error("invalid parameter space: {0}")]
    InvalidParameterSpace(String),

    /// An argument is outside the domain of the requested operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The series did not satisfy the tail bound within the term budget.
    #[error("series did not converge within {max_terms} terms (term ratio {last_ratio:.6} at k = {at})")]
    NonConvergent {
        max_terms: usize,
        last_ratio: f64,
        at: usize,
    },

    /// A simulated chain left the allowed state range.
    #[error("simulation exceeded the hard state cap of {cap}")]
    StateCapExceeded { cap: usize },

    /// Every optimizer start failed to converge.
    #[error("no optimizer start converged")]
    NoConvergence,

    /// Too few observations for the number of free parameters.
    #[error("data too sparse: {n} observations for {free} free parameters")]
    DataTooSparse { n: u64, free: usize },

    /// A goodness-of-fit cell has an expected frequency too close to zero.
    #[error("degenerate expected frequency in cell {0}")]
    DegenerateCells(String),

    /// A frequency table violates its structural invariants.
    #[error("invalid frequency table: {0}")]
    InvalidTable(String),

    /// A frequency-table file could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
