//! Error type shared by every module of the crate.

use crate::rational::Rational;
use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid rational '{input}': {reason}")]
    InvalidRational { input: String, reason: &'static str },

    #[error("outcome space must contain at least one outcome")]
    EmptySpace,

    #[error("duplicate outcome label '{label}'")]
    DuplicateLabel { label: String },

    #[error("unknown outcome '{outcome}'")]
    UnknownOutcome { outcome: String },

    #[error("outcome '{outcome}' listed more than once")]
    DuplicateOutcome { outcome: String },

    #[error("negative mass {mass} on outcome '{outcome}'")]
    NegativeMass { outcome: String, mass: Rational },

    #[error("masses sum to {total}, expected exactly 1")]
    MassNotOne { total: Rational },

    #[error("utility does not assign a value to outcome '{outcome}'")]
    MissingOutcome { outcome: String },

    #[error("utility is not order-preserving: '{worse}' maps above '{better}'")]
    NotOrderPreserving { worse: String, better: String },

    #[error("marginals are defined on different outcome spaces")]
    SpaceMismatch,

    #[error("weight must be nonnegative, got {weight}")]
    NegativeWeight { weight: Rational },

    #[error("gain must be strictly positive, got {gain}")]
    NonPositiveGain { gain: Rational },

    #[error("loss {loss} is below gain {gain}; use from_weight for sub-unit ratios")]
    LossBelowGain { gain: Rational, loss: Rational },

    #[error("{side} marginal has {points} support points, expected exactly 2")]
    NotTwoPoint { side: &'static str, points: usize },

    #[error("support exceeds the oracle limit of {limit}x{limit} outcomes")]
    TooLarge { limit: usize },

    #[error("unknown treatment '{treatment}'")]
    UnknownTreatment { treatment: String },

    #[error("unknown utility '{utility}'")]
    UnknownUtility { utility: String },

    #[error("treatments in a pair must be distinct, got '{treatment}' twice")]
    IdenticalTreatments { treatment: String },

    #[error("treatment '{treatment}' listed more than once")]
    DuplicateTreatment { treatment: String },

    #[error("{axis} sums do not match the declared marginal at '{outcome}': joint gives {actual}, marginal has {expected}")]
    MarginalMismatch {
        axis: String,
        outcome: String,
        actual: Rational,
        expected: Rational,
    },

    #[error("p1 = {p1} lies outside the feasible range [{lo}, {hi}]")]
    StratumOutOfRange {
        p1: Rational,
        lo: Rational,
        hi: Rational,
    },

    #[error("audit needs at least two treatments, scenario has {count}")]
    TooFewTreatments { count: usize },

    #[error("target ordering is not a permutation of the scenario treatments: {reason}")]
    InvalidTarget { reason: String },

    #[error("value range [{lo}, {hi}] is empty or degenerate")]
    DegenerateRange { lo: Rational, hi: Rational },

    #[error("min_gap must be strictly positive, got {gap}")]
    NonPositiveMinGap { gap: Rational },

    #[error("monotone_gap must be nonnegative, got {gap}")]
    NegativeMonotoneGap { gap: Rational },

    #[error("population size must be at least 1")]
    EmptyPopulation,

    #[error("outcome tuple has {actual} entries, joint covers {expected} treatments")]
    TupleLengthMismatch { actual: usize, expected: usize },
}
