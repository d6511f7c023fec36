#pragma once

#include <cmath>
#include <stdexcept>

namespace shrinklab {

// Error types thrown by samplers and fitters. All derive from the standard
// hierarchy so callers can catch coarsely or precisely.
struct DegeneratePredictorError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct RankDeficiencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SamplingError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct UndefinedFactorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BootstrapFailureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RootFindError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UndefinedMetricError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Numerically stable inverse logit; no overflow for any finite input.
inline double inverse_logit(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// log(1 + exp(x)) without overflow for large |x|.
inline double log1pexp(double x) {
    if (x > 0.0) {
        return x + std::log1p(std::exp(-x));
    }
    return std::log1p(std::exp(x));
}

}  // namespace shrinklab
