#include "shrinklab/uniform.hpp"

#include <random>
#include <string>

#include "shrinklab/common.hpp"
#include "shrinklab/glm.hpp"
#include "shrinklab/metrics.hpp"
#include "shrinklab/rng.hpp"

namespace shrinklab {

double likelihood_shrinkage_factor(double chi2, int df) {
    if (chi2 <= 0.0) {
        throw UndefinedFactorError("likelihood shrinkage factor undefined for chi2 = " +
                                   std::to_string(chi2));
    }
    return (chi2 - df) / chi2;
}

namespace {

/// Packages shrunken slopes plus a recalibrated intercept as a FitResult.
FitResult shrunken_fit(Method method, double s, const FitResult& ml_fit, const Dataset& data,
                       const FitOptions& opts) {
    FitResult fit;
    fit.method = method;
    fit.shrinkage_factor = s;
    fit.betas = s * ml_fit.betas;
    fit.intercept = refit_intercept(fit.betas, data, opts);
    fit.log_lik = log_likelihood(fit.intercept, fit.betas, data);
    fit.converged = true;
    return fit;
}

}  // namespace

FitResult likelihood_uniform(const FitResult& ml_fit, const Dataset& data, int df,
                             const FitOptions& opts) {
    const double s = likelihood_shrinkage_factor(lr_chi_square(ml_fit, data), df);
    return shrunken_fit(Method::LU, s, ml_fit, data, opts);
}

FitResult bootstrap_uniform_with_sampler(const Dataset& data, const FitResult& ml_fit,
                                         int bootstrap_reps, const FitOptions& opts,
                                         const BootstrapSampler& sampler) {
    const int n = data.n();
    const int max_attempts = 10 * bootstrap_reps;
    double slope_sum = 0.0;
    int retained = 0;
    int attempt = 0;
    while (retained < bootstrap_reps) {
        if (attempt >= max_attempts) {
            throw BootstrapFailureError("bootstrap_uniform: only " + std::to_string(retained) +
                                        " of " + std::to_string(bootstrap_reps) +
                                        " replicates usable after " +
                                        std::to_string(max_attempts) + " attempts");
        }
        const std::vector<int> rows = sampler(attempt);
        ++attempt;

        Dataset resample;
        resample.X.resize(n, data.p());
        resample.y.resize(n);
        for (int i = 0; i < n; ++i) {
            resample.X.row(i) = data.X.row(rows[i]);
            resample.y[i] = data.y[rows[i]];
        }

        // A replicate counts only when its ML fit is clean; otherwise redraw.
        double slope = 0.0;
        try {
            const FitResult rep = fit_ml(resample, opts);
            if (rep.separation_detected) {
                continue;
            }
            slope = calibration_slope(linear_predictor(rep, data.X), data.y);
        } catch (const std::exception&) {
            continue;
        }
        slope_sum += slope;
        ++retained;
    }
    return shrunken_fit(Method::BU, slope_sum / bootstrap_reps, ml_fit, data, opts);
}

FitResult bootstrap_uniform(const Dataset& data, const FitResult& ml_fit, int bootstrap_reps,
                            const FitOptions& opts, std::uint64_t seed) {
    const int n = data.n();
    // Each attempt gets its own derived stream, so the draw for attempt k
    // does not depend on how many earlier attempts were discarded.
    const BootstrapSampler sampler = [n, seed](int attempt) {
        auto rng = make_rng(derive_seed(seed, {static_cast<std::uint64_t>(attempt)}));
        std::uniform_int_distribution<int> pick(0, n - 1);
        std::vector<int> rows(n);
        for (int i = 0; i < n; ++i) {
            rows[i] = pick(rng);
        }
        return rows;
    };
    return bootstrap_uniform_with_sampler(data, ml_fit, bootstrap_reps, opts, sampler);
}

FitResult bootstrap_uniform(const Dataset& data, int bootstrap_reps, const FitOptions& opts,
                            std::uint64_t seed) {
    return bootstrap_uniform(data, fit_ml(data, opts), bootstrap_reps, opts, seed);
}

}  // namespace shrinklab
