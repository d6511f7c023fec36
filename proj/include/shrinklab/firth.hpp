#pragma once

#include <Eigen/Dense>

#include "shrinklab/dataset.hpp"
#include "shrinklab/fit.hpp"

namespace shrinklab {

struct FirthOptions {
    int max_iter = 200;
    double tol = 1e-8;
    int step_halving_max = 20;
};

/// Log-likelihood plus the Jeffreys penalty 0.5 log det I(alpha, beta).
double firth_penalized_log_lik(double alpha, const Eigen::VectorXd& betas,
                               const Dataset& data);

/// Firth's bias-reduced logistic regression: IRLS with hat-diagonal
/// adjusted responses. Finite estimates exist even under separation.
FitResult fit_firth_raw(const Dataset& data, const FirthOptions& opts = {});

/// Firth fit with the intercept re-estimated by maximum likelihood holding
/// the Firth slopes fixed, so predictions are calibrated in the large
/// (mean fitted probability equals the event rate).
FitResult fit_firth(const Dataset& data, const FirthOptions& opts = {});

}  // namespace shrinklab
