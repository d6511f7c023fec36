#include "shrinklab/glm.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "shrinklab/common.hpp"

namespace shrinklab {

double log_likelihood_from_lp(const Eigen::VectorXd& lp, const Eigen::VectorXd& y) {
    // sum y eta - log(1 + exp(eta)); never forms log of a zero probability.
    // Kahan-compensated so step-halving comparisons between nearly optimal
    // candidates are not decided by accumulation noise on large samples.
    double ll = 0.0;
    double comp = 0.0;
    for (Eigen::Index i = 0; i < lp.size(); ++i) {
        const double term = y[i] * lp[i] - log1pexp(lp[i]) - comp;
        const double next = ll + term;
        comp = (next - ll) - term;
        ll = next;
    }
    return ll;
}

double log_likelihood(double alpha, const Eigen::VectorXd& betas, const Dataset& data) {
    const Eigen::VectorXd lp = (data.X * betas).array() + alpha;
    return log_likelihood_from_lp(lp, data.y);
}

Eigen::VectorXd linear_predictor(double intercept, const Eigen::VectorXd& betas,
                                 const Eigen::MatrixXd& X) {
    return (X * betas).array() + intercept;
}

Eigen::VectorXd linear_predictor(const FitResult& fit, const Eigen::MatrixXd& X) {
    return linear_predictor(fit.intercept, fit.betas, X);
}

namespace {

Eigen::VectorXd probabilities(const Eigen::VectorXd& lp) {
    return lp.unaryExpr([](double e) { return inverse_logit(e); });
}

bool any_extreme(const Eigen::VectorXd& pi, double eps) {
    return (pi.array() < eps).any() || (pi.array() > 1.0 - eps).any();
}

// Complete or quasi-complete separation puts every event at or above every
// non-event on the fitted linear predictor (ties allowed). The iteration can
// stall on such data while all probabilities are still representable, so the
// ordering is checked directly rather than inferred from the probabilities.
bool perfectly_ordered(const Eigen::VectorXd& lp, const Eigen::VectorXd& y) {
    double min_event = std::numeric_limits<double>::infinity();
    double max_nonevent = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < lp.size(); ++i) {
        if (y[i] == 1.0) {
            min_event = std::min(min_event, lp[i]);
        } else {
            max_nonevent = std::max(max_nonevent, lp[i]);
        }
    }
    return min_event >= max_nonevent;
}

}  // namespace

FitResult fit_ml(const Dataset& data, const FitOptions& opts) {
    const int p = data.p();
    if (!data.has_both_classes()) {
        throw DegeneratePredictorError("fit_ml: outcome has a single class");
    }

    FitResult fit;
    fit.method = Method::ML;
    fit.intercept = logit(data.event_rate());
    fit.betas = Eigen::VectorXd::Zero(p);

    Eigen::VectorXd lp = linear_predictor(fit.intercept, fit.betas, data.X);
    double ll = log_likelihood_from_lp(lp, data.y);
    if (opts.ll_trace) {
        opts.ll_trace->push_back(ll);
    }

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        const Eigen::VectorXd pi = probabilities(lp);
        const Eigen::VectorXd w = pi.array() * (1.0 - pi.array());
        const Eigen::VectorXd resid = data.y - pi;

        Eigen::VectorXd grad(p + 1);
        grad[0] = resid.sum();
        grad.tail(p) = data.X.transpose() * resid;

        Eigen::MatrixXd hess(p + 1, p + 1);
        hess(0, 0) = w.sum();
        hess.block(0, 1, 1, p) = (w.transpose() * data.X);
        hess.block(1, 0, p, 1) = hess.block(0, 1, 1, p).transpose();
        hess.block(1, 1, p, p) = data.X.transpose() * w.asDiagonal() * data.X;

        const Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
        const Eigen::VectorXd delta = ldlt.solve(grad);
        const double resid_norm = (hess * delta - grad).norm();
        if (ldlt.info() != Eigen::Success || !delta.allFinite() ||
            resid_norm > 1e-6 * (1.0 + grad.norm())) {
            if (iter == 0) {
                // The first-iteration weights are uniform, so an unsolvable
                // system means the design itself is rank deficient.
                throw RankDeficiencyError("fit_ml: design matrix is rank deficient");
            }
            break;  // quasi-separated tail; leave non-converged
        }

        // Step-halve until the likelihood no longer deteriorates.
        double step = 1.0;
        double cand_alpha = 0.0;
        Eigen::VectorXd cand_betas;
        Eigen::VectorXd cand_lp;
        double cand_ll = -std::numeric_limits<double>::infinity();
        bool improved = false;
        for (int h = 0; h < 30; ++h) {
            cand_alpha = fit.intercept + step * delta[0];
            cand_betas = fit.betas + step * delta.tail(p);
            cand_lp = linear_predictor(cand_alpha, cand_betas, data.X);
            cand_ll = log_likelihood_from_lp(cand_lp, data.y);
            if (std::isfinite(cand_ll) && cand_ll >= ll) {
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) {
            // No candidate measurably improved the log-likelihood. When the
            // quadratic model also predicts a negligible remaining gain, the
            // fit is at its optimum to machine precision and rounding noise
            // merely hides the last step; otherwise leave the failure visible
            // as non-convergence.
            const double predicted_gain = 0.5 * grad.dot(delta);
            const double noise_floor =
                8.0 * std::numeric_limits<double>::epsilon() * (std::abs(ll) + 0.1);
            if (predicted_gain >= 0.0 &&
                predicted_gain < std::max(opts.tol * (std::abs(ll) + 0.1), noise_floor)) {
                fit.converged = true;
            }
            break;
        }

        fit.intercept = cand_alpha;
        fit.betas = cand_betas;
        lp = cand_lp;
        const double old_ll = ll;
        ll = cand_ll;
        if (opts.ll_trace) {
            opts.ll_trace->push_back(ll);
        }
        if (std::abs(ll - old_ll) < opts.tol * (std::abs(ll) + 0.1)) {
            fit.converged = true;
            break;
        }
    }

    fit.log_lik = ll;
    const Eigen::VectorXd pi = probabilities(lp);
    fit.separation_detected = !fit.converged || any_extreme(pi, opts.prob_epsilon) ||
                              perfectly_ordered(lp, data.y);
    return fit;
}

double refit_intercept(const Eigen::VectorXd& betas_fixed, const Dataset& data,
                       const FitOptions& opts) {
    if (!data.has_both_classes()) {
        throw DegeneratePredictorError("refit_intercept: outcome has a single class");
    }
    const Eigen::VectorXd offset = data.X * betas_fixed;
    const double ybar = data.event_rate();
    const int n = data.n();

    // One-dimensional Newton on the concave profile likelihood; the score is
    // sum(y - pi), so convergence is exactly "mean fitted = event rate".
    double alpha = logit(ybar) - offset.mean();
    double ll = log_likelihood_from_lp(offset.array() + alpha, data.y);
    for (int iter = 0; iter < 4 * opts.max_iter; ++iter) {
        const Eigen::VectorXd pi = probabilities(offset.array() + alpha);
        const double score = (data.y - pi).sum();
        if (std::abs(score) / n <= opts.tol) {
            return alpha;
        }
        const double info = (pi.array() * (1.0 - pi.array())).sum();
        if (!(info > 0.0)) {
            break;
        }
        double step = score / info;
        for (int h = 0; h < 30; ++h) {
            const double cand = alpha + step;
            const double cand_ll = log_likelihood_from_lp(offset.array() + cand, data.y);
            if (std::isfinite(cand_ll) && cand_ll >= ll) {
                alpha = cand;
                ll = cand_ll;
                break;
            }
            step *= 0.5;
        }
    }
    throw ConvergenceError("refit_intercept: Newton failed to drive the score to " +
                           std::to_string(opts.tol));
}

double intercept_only_log_lik(const Dataset& data) {
    const int n = data.n();
    const int e = data.event_count();
    double ll = 0.0;
    if (e > 0) {
        ll += e * std::log(static_cast<double>(e) / n);
    }
    if (e < n) {
        ll += (n - e) * std::log(static_cast<double>(n - e) / n);
    }
    return ll;
}

double lr_chi_square(const FitResult& ml_fit, const Dataset& data) {
    return std::max(0.0, 2.0 * (ml_fit.log_lik - intercept_only_log_lik(data)));
}

Eigen::MatrixXd observed_information(double alpha, const Eigen::VectorXd& betas,
                                     const Dataset& data) {
    const int p = data.p();
    const Eigen::VectorXd pi = probabilities(linear_predictor(alpha, betas, data.X));
    const Eigen::VectorXd w = pi.array() * (1.0 - pi.array());
    Eigen::MatrixXd info(p + 1, p + 1);
    info(0, 0) = w.sum();
    info.block(0, 1, 1, p) = w.transpose() * data.X;
    info.block(1, 0, p, 1) = info.block(0, 1, 1, p).transpose();
    info.block(1, 1, p, p) = data.X.transpose() * w.asDiagonal() * data.X;
    return info;
}

}  // namespace shrinklab
