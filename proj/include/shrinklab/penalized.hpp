#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "shrinklab/dataset.hpp"
#include "shrinklab/fit.hpp"

namespace shrinklab {

/// The tuning grid: 0 plus `points - 1` values equidistant on log scale
/// between lambda_min and lambda_max.
struct LambdaGrid {
    std::vector<double> values;

    static LambdaGrid make(double lambda_min, double lambda_max, int points);
};

/// The default grid: 251 values, 0 then 1e-4 ... 64 log-equidistant.
LambdaGrid lambda_grid();

/// Fold assignment for cross-validation, stratified by outcome so every fold
/// carries events even at the smallest sample sizes.
struct CvPlan {
    int folds = 0;
    std::vector<int> assignments;  // fold index per row
    bool stratified = true;
};

/// Random stratified fold assignment, deterministic per seed. If a class has
/// fewer members than `folds`, the fold count is reduced to that class size;
/// a class smaller than 2 throws SamplingError.
CvPlan make_cv_plan(const Dataset& data, int folds, std::uint64_t seed);

enum class PenaltyKind { Ridge, PML, Lasso, AdaptiveLasso, Garrote };

/// Everything a penalized fit needs besides the data and a lambda value.
///
/// Objective conventions: the cross-validation-tuned kinds (ridge, lasso,
/// adaptive lasso, garrote) maximize (1/n) loglik - lambda * P(beta), so a
/// single grid spans negligible-to-total shrinkage at every sample size.
/// PML maximizes loglik - 0.5 lambda sum (s_j beta_j)^2 on the total
/// likelihood; its tuning is AICc on the total deviance.
struct PenaltySpec {
    PenaltyKind kind = PenaltyKind::Ridge;
    Eigen::VectorXd weights;     // adaptive lasso w_j = 1 / |beta_init_j|^gamma
    Eigen::VectorXd scaling;     // PML s_j (per-predictor sd; 1 after standardization)
    Eigen::VectorXd init_betas;  // adaptive lasso / garrote initial estimates
    double gamma = 1.0;

    static PenaltySpec ridge();
    static PenaltySpec pml(const Dataset& data);
    static PenaltySpec lasso();
    static PenaltySpec adaptive_lasso(const FitResult& ml_fit);
    static PenaltySpec garrote(const FitResult& ml_fit);
};

// Weight cap for adaptive lasso when an initial coefficient vanishes.
constexpr double kAdaptiveWeightCap = 1e10;

/// Fits one penalized model at a fixed lambda (no tuning). Ridge/PML use
/// penalized IRLS; the L1 kinds use coordinate descent with soft
/// thresholding (one-sided, clipped at zero, for the garrote).
FitResult fit_at_lambda(const Dataset& data, const PenaltySpec& spec, double lambda,
                        const FitOptions& opts = {});

/// The penalized objective the fitters maximize, evaluated at arbitrary
/// parameters (mean-likelihood convention for CV kinds, total for PML).
/// For the garrote, `betas` are the final coefficients c_j * init_j.
double penalized_objective(const Dataset& data, const PenaltySpec& spec, double lambda,
                           double alpha, const Eigen::VectorXd& betas);

/// Sum over folds of -2 x out-of-fold log-likelihood for models fit at
/// `lambda` on the complementary folds.
double cv_deviance(const Dataset& data, const PenaltySpec& spec, double lambda,
                   const CvPlan& plan, const FitOptions& opts = {});

/// Ridge logistic regression tuned by cross-validated deviance over `grid`.
FitResult fit_ridge(const Dataset& data, const LambdaGrid& grid, const CvPlan& plan,
                    const FitOptions& opts = {});

/// Penalized maximum likelihood tuned by the corrected AIC over `grid`.
FitResult fit_pml(const Dataset& data, const LambdaGrid& grid, const FitOptions& opts = {});

/// Effective degrees of freedom of a PML fit: trace of
/// [unpenalized information x inverse penalized information] over the full
/// parameter vector (intercept unpenalized).
double pml_effective_df(const Dataset& data, const FitResult& fit, double lambda,
                        const Eigen::VectorXd& scaling);

/// LASSO tuned by cross-validated deviance; exact zeros via soft thresholding.
FitResult fit_lasso(const Dataset& data, const LambdaGrid& grid, const CvPlan& plan,
                    const FitOptions& opts = {});

/// Adaptive LASSO with weights 1/|beta_ML| (gamma = 1), tuned by
/// cross-validated deviance.
FitResult fit_adaptive_lasso(const Dataset& data, const LambdaGrid& grid, const CvPlan& plan,
                             const FitResult& ml_fit, const FitOptions& opts = {});

/// Non-negative garrote on ML initial estimates, tuned by cross-validated
/// deviance. Final coefficients are c_j * beta_ML_j with c_j >= 0, so signs
/// never flip.
FitResult fit_garrote(const Dataset& data, const LambdaGrid& grid, const CvPlan& plan,
                      const FitResult& ml_fit, const FitOptions& opts = {});

}  // namespace shrinklab
