#pragma once

#include <Eigen/Dense>

#include "shrinklab/dataset.hpp"
#include "shrinklab/fit.hpp"

namespace shrinklab {

/// Binary log-likelihood sum_i { y_i log pi_i + (1-y_i) log(1-pi_i) } with
/// pi_i = inverse_logit(alpha + betas . x_i), evaluated in a form that never
/// takes log(0).
double log_likelihood(double alpha, const Eigen::VectorXd& betas, const Dataset& data);

/// Same, from a precomputed linear predictor.
double log_likelihood_from_lp(const Eigen::VectorXd& lp, const Eigen::VectorXd& y);

/// Maximum-likelihood logistic regression by iteratively reweighted least
/// squares with step-halving. separation_detected is set when any fitted
/// probability ends within opts.prob_epsilon of 0 or 1, when every event sits
/// at or above every non-event on the fitted linear predictor (complete or
/// quasi-complete separation), or when the iteration cap is reached without
/// convergence.
FitResult fit_ml(const Dataset& data, const FitOptions& opts = {});

/// lp[i] = intercept + betas . X.row(i).
Eigen::VectorXd linear_predictor(const FitResult& fit, const Eigen::MatrixXd& X);
Eigen::VectorXd linear_predictor(double intercept, const Eigen::VectorXd& betas,
                                 const Eigen::MatrixXd& X);

/// One-dimensional maximum likelihood for the intercept with all slopes held
/// fixed. At the solution the mean fitted probability equals the observed
/// event rate (the intercept score equation).
double refit_intercept(const Eigen::VectorXd& betas_fixed, const Dataset& data,
                       const FitOptions& opts = {});

/// Log-likelihood of the intercept-only model (closed form).
double intercept_only_log_lik(const Dataset& data);

/// Likelihood-ratio statistic 2 (l(fit) - l(intercept-only)), floored at 0.
double lr_chi_square(const FitResult& ml_fit, const Dataset& data);

/// Fisher information [1 X]' W [1 X] at the given parameters, W = diag(pi(1-pi)).
Eigen::MatrixXd observed_information(double alpha, const Eigen::VectorXd& betas,
                                     const Dataset& data);

}  // namespace shrinklab
