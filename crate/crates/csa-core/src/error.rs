//! Error type shared by the whole crate.

use core::fmt;

/// Everything that can go wrong while validating inputs or running analyses.
///
/// Validation failures (malformed codes, bad probability vectors, infeasible
/// problems) are distinguished from *indeterminate* analysis outcomes (the
/// numerics could not certify a verdict) so callers can map them to different
/// exit codes.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Dimensions outside the supported window (`1 <= k < n <= 16`, `k <= 4`).
    InvalidDimensions {
        /// Code dimension (information segments per burst).
        k: usize,
        /// Code length (encoded segments per burst).
        n: usize,
    },
    /// Generator matrix rows are linearly dependent over GF(2).
    RankDeficient,
    /// Generator matrix has an all-zero column (an idle encoded position).
    IdleColumn {
        /// Index of the offending column.
        index: usize,
    },
    /// The code has a weight-1 codeword, i.e. minimum distance < 2.
    /// Equivalently, deleting the given column drops the rank below `k`.
    MinDistanceBelowTwo {
        /// Index of a column whose deletion reduces the rank.
        index: usize,
    },
    /// A generator-matrix string could not be parsed.
    MalformedMatrix {
        /// Human-readable description of the defect.
        reason: &'static str,
    },
    /// A probability vector does not describe a distribution.
    BadPmf {
        /// Human-readable description of the defect.
        reason: &'static str,
    },
    /// Ensemble members do not all share the same dimension `k`.
    MixedDimensions,
    /// An ensemble must contain at least one code or length.
    EmptyEnsemble,
    /// Random-model lengths must be distinct.
    DuplicateLength {
        /// The repeated length.
        n: usize,
    },
    /// A random-model length must exceed the dimension.
    LengthNotAboveK {
        /// The offending length.
        n: usize,
        /// The ensemble dimension.
        k: usize,
    },
    /// Exact enumeration of the random-code model is only supported for
    /// `k <= 3`, `n <= 16`.
    UnsupportedSize {
        /// Requested dimension.
        k: usize,
        /// Requested length.
        n: usize,
    },
    /// A numeric argument was out of range (e.g. a non-positive tolerance).
    BadArgument {
        /// Human-readable description of the defect.
        reason: &'static str,
    },
    /// The target rate cannot be met by any distribution over the candidates.
    InfeasibleRate {
        /// Requested rate.
        rate: f64,
        /// Smallest achievable rate (`k / n_max`).
        min: f64,
        /// Largest achievable rate (`k / n_min`).
        max: f64,
    },
    /// A candidate's local rate `k / n` falls below the configured floor.
    LocalRateTooSmall {
        /// Offending candidate length.
        n: usize,
    },
    /// Load admissibility did not flip exactly once along the bisection
    /// bracket; the fixed-point structure is not the expected monotone one.
    NonMonotoneAdmissibility,
    /// The fixed-point grid criterion and the density-evolution run reached
    /// decisively opposite verdicts at the same load.
    AdmissibilityConflict {
        /// Offered load at which the two criteria disagreed.
        load: f64,
    },
    /// An iteration budget was exhausted before any verdict could be reached.
    Indeterminate,
    /// A burst's code length exceeds the number of slots in the frame.
    CodeLongerThanFrame {
        /// Code length.
        n: usize,
        /// Slot count.
        n_slots: usize,
    },
    /// The slot count must be a multiple of the segment count `k`.
    SlotsNotMultipleOfK {
        /// Slot count.
        n_slots: usize,
        /// The ensemble dimension.
        k: usize,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidDimensions { k, n } => {
                write!(f, "unsupported code dimensions k={k}, n={n} (need 1 <= k < n <= 16, k <= 4)")
            }
            Error::RankDeficient => write!(f, "generator matrix rows are linearly dependent"),
            Error::IdleColumn { index } => {
                write!(f, "generator matrix column {index} is all-zero (idle position)")
            }
            Error::MinDistanceBelowTwo { index } => write!(
                f,
                "minimum distance below 2: deleting column {index} drops the rank"
            ),
            Error::MalformedMatrix { reason } => write!(f, "malformed generator matrix: {reason}"),
            Error::BadPmf { reason } => write!(f, "invalid probability vector: {reason}"),
            Error::MixedDimensions => write!(f, "ensemble codes do not share one dimension k"),
            Error::EmptyEnsemble => write!(f, "ensemble has no members"),
            Error::DuplicateLength { n } => write!(f, "duplicate length {n} in random ensemble"),
            Error::LengthNotAboveK { n, k } => {
                write!(f, "length {n} does not exceed dimension {k}")
            }
            Error::UnsupportedSize { k, n } => {
                write!(f, "random-code enumeration unsupported for k={k}, n={n} (need k <= 3, n <= 16)")
            }
            Error::BadArgument { reason } => write!(f, "bad argument: {reason}"),
            Error::InfeasibleRate { rate, min, max } => write!(
                f,
                "target rate {rate} outside achievable range [{min}, {max}]"
            ),
            Error::LocalRateTooSmall { n } => {
                write!(f, "candidate length {n} violates the minimum local-rate floor")
            }
            Error::NonMonotoneAdmissibility => {
                write!(f, "load admissibility is not monotone over the bisection bracket")
            }
            Error::AdmissibilityConflict { load } => write!(
                f,
                "fixed-point grid and density-evolution run disagree at load {load}"
            ),
            Error::Indeterminate => write!(f, "iteration budget exhausted without a verdict"),
            Error::CodeLongerThanFrame { n, n_slots } => {
                write!(f, "code length {n} exceeds frame size {n_slots}")
            }
            Error::SlotsNotMultipleOfK { n_slots, k } => {
                write!(f, "slot count {n_slots} is not a multiple of k={k}")
            }
        }
    }
}

impl core::error::Error for Error {}

impl Error {
    /// True for outcomes where the numerics could not certify a verdict, as
    /// opposed to invalid input. CLI layers map these to a distinct exit code.
    pub fn is_indeterminate(&self) -> bool {
        matches!(
            self,
            Error::Indeterminate
                | Error::NonMonotoneAdmissibility
                | Error::AdmissibilityConflict { .. }
        )
    }
}
