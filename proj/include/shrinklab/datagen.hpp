#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "shrinklab/dataset.hpp"

namespace shrinklab {

/// The data-generating logistic model: coefficients on standardized Gaussian
/// predictors with equal pairwise correlation rho. Noise predictors carry a
/// zero coefficient.
struct TrueModel {
    Eigen::VectorXd betas;   // log-odds per predictor
    double intercept = 0.0;  // log-odds
    double rho = 0.0;        // equal pairwise correlation, in [0, 1)

    int p() const { return static_cast<int>(betas.size()); }
};

/// A generated population: predictors, Bernoulli outcomes, and the true risk
/// each outcome was drawn from.
struct Population {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    Eigen::VectorXd true_risk;

    int size() const { return static_cast<int>(X.rows()); }
};

/// Draws `size` rows i.i.d. from N(0, (1-rho) I + rho J), applies the true
/// model to obtain risks, and draws Bernoulli outcomes. Deterministic per
/// seed. The equicorrelated draw uses the one-factor construction
/// x_j = sqrt(rho) z0 + sqrt(1-rho) z_j.
Population generate_population(const TrueModel& model, int size, std::uint64_t seed);

/// Solves for the intercept that hits `target_rate` as the mean risk over a
/// Monte Carlo population of `mc_size` rows, by bisection on [-20, 20].
/// `tol` bounds the deviation of the achieved Monte Carlo mean risk.
double solve_intercept(const Eigen::VectorXd& betas, double rho, double target_rate,
                       int mc_size, std::uint64_t seed, double tol = 1e-6);

/// Stratified sample without replacement: exactly n_events rows with y = 1
/// and n_total - n_events rows with y = 0, row order shuffled.
Dataset draw_development_sample(const Population& pop, int n_events, int n_total,
                                std::uint64_t seed);

}  // namespace shrinklab
