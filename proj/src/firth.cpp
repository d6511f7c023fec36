#include "shrinklab/firth.hpp"

#include <cmath>
#include <limits>

#include "shrinklab/common.hpp"
#include "shrinklab/glm.hpp"

namespace shrinklab {

namespace {

/// 0.5 log det of a positive definite matrix via LDLT; -inf when the
/// factorization finds a non-positive pivot.
double half_log_det(const Eigen::MatrixXd& m) {
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
    if (ldlt.info() != Eigen::Success) {
        return -std::numeric_limits<double>::infinity();
    }
    double sum = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double d = ldlt.vectorD()[i];
        if (!(d > 0.0)) {
            return -std::numeric_limits<double>::infinity();
        }
        sum += std::log(d);
    }
    return 0.5 * sum;
}

}  // namespace

double firth_penalized_log_lik(double alpha, const Eigen::VectorXd& betas,
                               const Dataset& data) {
    return log_likelihood(alpha, betas, data) +
           half_log_det(observed_information(alpha, betas, data));
}

FitResult fit_firth_raw(const Dataset& data, const FirthOptions& opts) {
    const int n = data.n();
    const int p = data.p();
    if (!data.has_both_classes()) {
        throw DegeneratePredictorError("fit_firth: outcome has a single class");
    }

    Eigen::MatrixXd design(n, p + 1);
    design.col(0).setOnes();
    design.rightCols(p) = data.X;

    FitResult fit;
    fit.method = Method::Firth;
    fit.intercept = logit(data.event_rate());
    fit.betas = Eigen::VectorXd::Zero(p);
    double pll = firth_penalized_log_lik(fit.intercept, fit.betas, data);

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        const Eigen::VectorXd lp = linear_predictor(fit.intercept, fit.betas, data.X);
        const Eigen::VectorXd pi = lp.unaryExpr([](double e) { return inverse_logit(e); });
        const Eigen::VectorXd w = pi.array() * (1.0 - pi.array());

        const Eigen::MatrixXd info = design.transpose() * w.asDiagonal() * design;
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
        // Hat diagonal h_i = w_i x_i' I^{-1} x_i, the leverage that sizes the
        // bias-reducing adjustment of each response.
        const Eigen::MatrixXd solved = ldlt.solve(design.transpose());  // (p+1) x n
        Eigen::VectorXd adjusted(n);
        bool finite = true;
        for (int i = 0; i < n; ++i) {
            const double h = w[i] * design.row(i).dot(solved.col(i));
            if (!std::isfinite(h)) {
                finite = false;
                break;
            }
            adjusted[i] = data.y[i] - pi[i] + h * (0.5 - pi[i]);
        }
        if (ldlt.info() != Eigen::Success || !finite) {
            if (iter == 0) {
                throw RankDeficiencyError("fit_firth: design matrix is rank deficient");
            }
            break;
        }

        const Eigen::VectorXd grad = design.transpose() * adjusted;
        const Eigen::VectorXd delta = ldlt.solve(grad);
        if (!delta.allFinite()) {
            break;
        }

        double step = 1.0;
        bool improved = false;
        double cand_alpha = 0.0;
        Eigen::VectorXd cand_betas;
        double cand_pll = -std::numeric_limits<double>::infinity();
        for (int h = 0; h < opts.step_halving_max; ++h) {
            cand_alpha = fit.intercept + step * delta[0];
            cand_betas = fit.betas + step * delta.tail(p);
            cand_pll = firth_penalized_log_lik(cand_alpha, cand_betas, data);
            if (std::isfinite(cand_pll) && cand_pll >= pll) {
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) {
            break;
        }

        fit.intercept = cand_alpha;
        fit.betas = cand_betas;
        const double old_pll = pll;
        pll = cand_pll;
        if (std::abs(pll - old_pll) < opts.tol * (std::abs(pll) + 0.1)) {
            fit.converged = true;
            break;
        }
    }

    fit.log_lik = log_likelihood(fit.intercept, fit.betas, data);
    return fit;
}

FitResult fit_firth(const Dataset& data, const FirthOptions& opts) {
    FitResult fit = fit_firth_raw(data, opts);
    // Re-estimate the intercept by plain maximum likelihood with the Firth
    // slopes fixed, so the mean fitted risk matches the event rate.
    fit.intercept = refit_intercept(fit.betas, data);
    fit.log_lik = log_likelihood(fit.intercept, fit.betas, data);
    return fit;
}

}  // namespace shrinklab
