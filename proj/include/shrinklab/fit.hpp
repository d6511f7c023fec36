#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace shrinklab {

enum class Method {
    ML,
    LU,
    BU,
    Ridge,
    PML,
    Lasso,
    AdaptiveLasso,
    Garrote,
    Firth,
};

const char* method_name(Method m);

constexpr Method kAllMethods[] = {
    Method::ML,     Method::LU,    Method::BU,
    Method::Ridge,  Method::PML,   Method::Lasso,
    Method::AdaptiveLasso, Method::Garrote, Method::Firth,
};

/// A fitted logistic model plus the metadata downstream consumers need:
/// which method produced it, the selected tuning value or shrinkage factor,
/// and whether the fit converged cleanly.
struct FitResult {
    Method method = Method::ML;
    double intercept = 0.0;
    Eigen::VectorXd betas;
    std::optional<double> lambda;            // selected tuning value
    std::optional<double> shrinkage_factor;  // s_LU or s_BU
    bool converged = false;
    bool separation_detected = false;
    double log_lik = 0.0;  // unpenalized log-likelihood at the returned parameters

    std::vector<bool> selected_mask() const {
        std::vector<bool> mask(static_cast<std::size_t>(betas.size()));
        for (Eigen::Index j = 0; j < betas.size(); ++j) {
            mask[static_cast<std::size_t>(j)] = betas[j] != 0.0;
        }
        return mask;
    }

    int n_selected() const {
        int k = 0;
        for (Eigen::Index j = 0; j < betas.size(); ++j) {
            if (betas[j] != 0.0) ++k;
        }
        return k;
    }
};

struct FitOptions {
    int max_iter = 100;
    double tol = 1e-8;  // relative log-likelihood change
    // Separation threshold on fitted probabilities: a fit is flagged when any
    // fitted probability lands within this distance of 0 or 1, i.e. when it is
    // numerically indistinguishable from a degenerate prediction.  Ten machine
    // epsilons, matching the convention of mainstream GLM implementations.
    double prob_epsilon = 2.220446049250313e-15;
    // When set, the accepted log-likelihood after each IRLS iteration is
    // appended here (initial value included).
    std::vector<double>* ll_trace = nullptr;
};

}  // namespace shrinklab
