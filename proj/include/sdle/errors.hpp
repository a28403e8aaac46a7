#pragma once

#include <stdexcept>

namespace sdle {

/// Base class of every error thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A QR pivot fell below the rank threshold (degenerate fundamental matrix).
struct RankDeficientError : Error { using Error::Error; };

/// An iterative routine exceeded its iteration cap.
struct NoConvergenceError : Error { using Error::Error; };

/// A state, transition matrix, or accumulator became NaN/Inf (trajectory blow-up).
struct NonFiniteError : Error { using Error::Error; };

/// Milstein requested for correlated multi-channel noise.
struct MilsteinUnsupportedError : Error { using Error::Error; };

/// The algebraic resolver does not satisfy the constraint at the initial state.
struct ResolverInconsistentError : Error { using Error::Error; };

/// No deterministic equilibrium found in the searched bracket.
struct NoEquilibriumError : Error { using Error::Error; };

/// A stationary density does not normalize on the truncated support.
struct NonNormalizableError : Error { using Error::Error; };

/// Ensemble histories were sampled on different time grids.
struct MismatchedGridsError : Error { using Error::Error; };

/// Invalid run configuration (bad field, unknown parameter, ...).
struct ConfigError : Error { using Error::Error; };

}  // namespace sdle
