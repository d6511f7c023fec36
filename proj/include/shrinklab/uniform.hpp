#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "shrinklab/dataset.hpp"
#include "shrinklab/fit.hpp"

namespace shrinklab {

/// (chi2 - df) / chi2. May be negative when chi2 < df; no flooring is
/// applied. Throws UndefinedFactorError when chi2 == 0.
double likelihood_shrinkage_factor(double chi2, int df);

/// Likelihood-based uniform shrinkage: scales the ML slopes by
/// (chi2 - df) / chi2 and re-estimates the intercept so the mean fitted
/// probability equals the event rate. df is the number of candidate
/// predictors.
FitResult likelihood_uniform(const FitResult& ml_fit, const Dataset& data, int df,
                             const FitOptions& opts = {});

/// Draws row indices (size n, with replacement) for one bootstrap attempt.
using BootstrapSampler = std::function<std::vector<int>(int attempt)>;

/// Bootstrap-based uniform shrinkage. Per replicate: resample n rows with
/// replacement, fit ML, evaluate that model's linear predictor on the
/// original data, regress the original outcomes on it, and retain the slope.
/// The shrinkage factor is the mean of B retained slopes. Replicates whose
/// ML fit shows separation (or fails) are redrawn, up to 10 B attempts in
/// total; exhausting the cap throws BootstrapFailureError.
FitResult bootstrap_uniform(const Dataset& data, const FitResult& ml_fit, int bootstrap_reps,
                            const FitOptions& opts, std::uint64_t seed);

/// Convenience overload that fits ML internally.
FitResult bootstrap_uniform(const Dataset& data, int bootstrap_reps, const FitOptions& opts,
                            std::uint64_t seed);

/// Deterministic-sampler variant (the RNG overloads delegate to this).
FitResult bootstrap_uniform_with_sampler(const Dataset& data, const FitResult& ml_fit,
                                         int bootstrap_reps, const FitOptions& opts,
                                         const BootstrapSampler& sampler);

}  // namespace shrinklab
