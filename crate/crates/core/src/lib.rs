//! Executable one-way communication complexity.
//!
//! This crate computes the combinatorial and information-theoretic measures
//! that govern one-way distributional communication complexity on explicit
//! finite functions and input distributions, and runs the matching
//! constructive protocols:
//!
//! - [`table`] and [`bench`]: dense function tables, joint input
//!   distributions and the benchmark families (GT, IP, DISJ, noisy partial
//!   matching).
//! - [`information`]: exact entropies, (conditional) mutual information,
//!   Fano's bound, min-entropy and the m-fold expansion of a conditional
//!   distribution.
//! - [`dimensions`]: exact VC dimension, Sauer's bound and the
//!   γ-pseudo-dimension by shattering search.
//! - [`rectangles`]: the one-way rectangle (corruption) bound.
//! - [`protocols`]: greedy rejection sampling for correlation generation,
//!   the sample-and-learn protocols for boolean and non-boolean functions,
//!   and a brute-force optimal deterministic one-way protocol.
//! - [`quantum`]: density matrices, Holevo χ and Helstrom discrimination.
//! - [`extractors`]: strong-extractor audits over worst flat sources.
//! - [`checks`]: randomized verification suites for the inequalities above.
//!
//! The crate is `no_std` and only needs `alloc`. All logarithms are base 2.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

use alloc::string::String;

pub mod bench;
pub mod checks;
pub mod dimensions;
pub mod extractors;
pub mod information;
pub mod protocols;
pub mod quantum;
pub mod random;
pub mod rectangles;
pub mod table;

pub use information::{LabeledJoint, MassFunction};
pub use table::{FunctionTable, JointDistribution};

/// Tolerance applied when constructing mass functions.
pub const CONSTRUCTION_TOLERANCE: f64 = 1e-12;
/// Tolerance applied to numerical comparisons between computed quantities.
pub const COMPARISON_TOLERANCE: f64 = 1e-9;
/// Allowed deviation of a joint distribution's total mass from 1.
pub const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid function table: {0}")]
    InvalidTable(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("row {0} has zero mass")]
    ZeroMassRow(usize),
    #[error("rectangle has zero mass")]
    ZeroMassRectangle,
    #[error("function must be boolean (z_size = 2)")]
    NotBoolean,
    #[error("function must be total")]
    NotTotal,
    #[error("target support is not contained in proposal support (index {0})")]
    SupportViolation(usize),
    #[error("{what} = {value} exceeds the configured limit {limit}")]
    CapExceeded {
        what: &'static str,
        value: u128,
        limit: u128,
    },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("invalid quantum state or operator: {0}")]
    InvalidOperator(String),
    #[error("bound not applicable: {0}")]
    BoundNotApplicable(String),
}

impl Error {
    /// True for errors caused by a search being infeasible or a size cap
    /// being hit, as opposed to malformed input.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::CapExceeded { .. } | Error::Infeasible(_) | Error::BoundNotApplicable(_)
        )
    }

    pub fn cap(what: &'static str, value: impl Into<u128>, limit: impl Into<u128>) -> Self {
        Error::CapExceeded {
            what,
            value: value.into(),
            limit: limit.into(),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
