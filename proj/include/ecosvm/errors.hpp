#pragma once

#include <stdexcept>
#include <string>

namespace ecosvm {

/// Malformed input data or file: bad CSV/IDX content, mismatched dimensions
/// between files, invalid labels.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Filesystem-level failure: missing file, unreadable path.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A steady-state search ran out of steps. Carries the last flow residual so
/// callers can decide whether to fall back to the QP oracle.
struct ConvergenceError : std::runtime_error {
    double residual;
    explicit ConvergenceError(const std::string& what, double resid)
        : std::runtime_error(what), residual(resid) {}
};

/// Multipliers grew past the configured cap. In separable mode this is the
/// signature of data that is not separable in the chosen kernel space.
struct DivergenceError : std::runtime_error {
    double max_multiplier;
    explicit DivergenceError(const std::string& what, double max_mult)
        : std::runtime_error(what), max_multiplier(max_mult) {}
};

/// Slack-mode bias or invasion formulas need at least one multiplier strictly
/// between 0 and C; thrown when every multiplier is saturated.
struct EmptyActiveSetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ecosvm
