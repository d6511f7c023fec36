#include "shrinklab/penalized.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "shrinklab/common.hpp"
#include "shrinklab/glm.hpp"
#include "shrinklab/rng.hpp"

namespace shrinklab {

LambdaGrid LambdaGrid::make(double lambda_min, double lambda_max, int points) {
    if (points < 3) {
        throw std::invalid_argument("LambdaGrid: need at least 3 points, got " +
                                    std::to_string(points));
    }
    if (!(lambda_min > 0.0 && lambda_min < lambda_max)) {
        throw std::invalid_argument("LambdaGrid: need 0 < lambda_min < lambda_max");
    }
    LambdaGrid grid;
    grid.values.resize(points);
    grid.values[0] = 0.0;
    const double log_min = std::log(lambda_min);
    const double log_max = std::log(lambda_max);
    const int steps = points - 2;
    for (int k = 0; k <= steps; ++k) {
        grid.values[1 + k] = std::exp(log_min + (log_max - log_min) * k / steps);
    }
    // Pin the endpoints exactly; exp/log round-trips drift in the last ulp.
    grid.values[1] = lambda_min;
    grid.values[points - 1] = lambda_max;
    return grid;
}

LambdaGrid lambda_grid() { return LambdaGrid::make(1e-4, 64.0, 251); }

CvPlan make_cv_plan(const Dataset& data, int folds, std::uint64_t seed) {
    if (folds < 2) {
        throw SamplingError("make_cv_plan: need at least 2 folds, got " +
                            std::to_string(folds));
    }
    std::vector<int> events;
    std::vector<int> controls;
    for (int i = 0; i < data.n(); ++i) {
        (data.y[i] == 1.0 ? events : controls).push_back(i);
    }
    const int smallest = static_cast<int>(std::min(events.size(), controls.size()));
    if (smallest < 2) {
        throw SamplingError("make_cv_plan: smaller outcome class has " +
                            std::to_string(smallest) + " rows; cannot stratify");
    }

    CvPlan plan;
    plan.folds = std::min(folds, smallest);
    plan.assignments.assign(data.n(), 0);
    auto rng = make_rng(seed);
    // Shuffle each stratum and deal it round-robin from a random starting
    // fold, so per-fold event counts differ by at most one.
    const auto deal = [&](std::vector<int>& idx) {
        std::shuffle(idx.begin(), idx.end(), rng);
        std::uniform_int_distribution<int> start_pick(0, plan.folds - 1);
        const int start = start_pick(rng);
        for (std::size_t k = 0; k < idx.size(); ++k) {
            plan.assignments[idx[k]] = static_cast<int>((start + k) % plan.folds);
        }
    };
    deal(events);
    deal(controls);
    return plan;
}

PenaltySpec PenaltySpec::ridge() {
    PenaltySpec spec;
    spec.kind = PenaltyKind::Ridge;
    return spec;
}

PenaltySpec PenaltySpec::pml(const Dataset& data) {
    PenaltySpec spec;
    spec.kind = PenaltyKind::PML;
    spec.scaling = column_stats(data).sds;
    return spec;
}

PenaltySpec PenaltySpec::lasso() {
    PenaltySpec spec;
    spec.kind = PenaltyKind::Lasso;
    return spec;
}

PenaltySpec PenaltySpec::adaptive_lasso(const FitResult& ml_fit) {
    PenaltySpec spec;
    spec.kind = PenaltyKind::AdaptiveLasso;
    spec.init_betas = ml_fit.betas;
    spec.weights.resize(ml_fit.betas.size());
    for (Eigen::Index j = 0; j < ml_fit.betas.size(); ++j) {
        const double denom = std::pow(std::abs(ml_fit.betas[j]), spec.gamma);
        spec.weights[j] = denom > 0.0 ? std::min(1.0 / denom, kAdaptiveWeightCap)
                                      : kAdaptiveWeightCap;
    }
    return spec;
}

PenaltySpec PenaltySpec::garrote(const FitResult& ml_fit) {
    PenaltySpec spec;
    spec.kind = PenaltyKind::Garrote;
    spec.init_betas = ml_fit.betas;
    return spec;
}

namespace {

constexpr double kMinWeight = 1e-10;   // IRLS weight clamp
constexpr double kInnerTol = 1e-10;    // coordinate update size to stop inner loop
constexpr double kTieTol = 1e-9;       // criterion ties resolve to the largest lambda

bool is_l1_kind(PenaltyKind kind) {
    return kind == PenaltyKind::Lasso || kind == PenaltyKind::AdaptiveLasso ||
           kind == PenaltyKind::Garrote;
}

Method method_for(PenaltyKind kind) {
    switch (kind) {
        case PenaltyKind::Ridge: return Method::Ridge;
        case PenaltyKind::PML: return Method::PML;
        case PenaltyKind::Lasso: return Method::Lasso;
        case PenaltyKind::AdaptiveLasso: return Method::AdaptiveLasso;
        case PenaltyKind::Garrote: return Method::Garrote;
    }
    throw std::logic_error("unreachable penalty kind");
}

/// Quadratic penalty curvature q_j (total-likelihood scale): the smooth
/// kinds maximize loglik - 0.5 sum q_j beta_j^2.
Eigen::VectorXd quadratic_curvature(const Dataset& data, const PenaltySpec& spec,
                                    double lambda) {
    const int p = data.p();
    if (spec.kind == PenaltyKind::Ridge) {
        // (1/n) loglik - lambda sum beta^2  ==  loglik - n lambda sum beta^2
        return Eigen::VectorXd::Constant(p, 2.0 * data.n() * lambda);
    }
    return lambda * spec.scaling.array().square();  // PML, total scale already
}

struct Params {
    double alpha = 0.0;
    Eigen::VectorXd betas;
};

/// Newton with step halving on loglik - 0.5 beta' diag(q) beta.
Params fit_quadratic(const Dataset& data, const Eigen::VectorXd& q, const FitOptions& opts,
                     Params start, bool* converged) {
    const int p = data.p();
    Params cur = std::move(start);
    const auto objective = [&](const Params& par) {
        return log_likelihood(par.alpha, par.betas, data) -
               0.5 * (q.array() * par.betas.array().square()).sum();
    };
    double obj = objective(cur);
    *converged = false;

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        const Eigen::VectorXd lp = linear_predictor(cur.alpha, cur.betas, data.X);
        const Eigen::VectorXd pi = lp.unaryExpr([](double e) { return inverse_logit(e); });
        const Eigen::VectorXd w = pi.array() * (1.0 - pi.array());
        const Eigen::VectorXd resid = data.y - pi;

        Eigen::VectorXd grad(p + 1);
        grad[0] = resid.sum();
        grad.tail(p) = data.X.transpose() * resid - q.cwiseProduct(cur.betas);

        Eigen::MatrixXd hess(p + 1, p + 1);
        hess(0, 0) = w.sum();
        hess.block(0, 1, 1, p) = w.transpose() * data.X;
        hess.block(1, 0, p, 1) = hess.block(0, 1, 1, p).transpose();
        hess.block(1, 1, p, p) = data.X.transpose() * w.asDiagonal() * data.X;
        hess.diagonal().tail(p) += q;

        const Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
        const Eigen::VectorXd delta = ldlt.solve(grad);
        if (ldlt.info() != Eigen::Success || !delta.allFinite()) {
            break;
        }

        double step = 1.0;
        bool improved = false;
        Params cand;
        double cand_obj = -std::numeric_limits<double>::infinity();
        for (int h = 0; h < 30; ++h) {
            cand.alpha = cur.alpha + step * delta[0];
            cand.betas = cur.betas + step * delta.tail(p);
            cand_obj = objective(cand);
            if (std::isfinite(cand_obj) && cand_obj >= obj) {
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) {
            break;
        }
        cur = std::move(cand);
        const double old_obj = obj;
        obj = cand_obj;
        if (std::abs(obj - old_obj) < opts.tol * (std::abs(obj) + 0.1)) {
            *converged = true;
            break;
        }
    }
    return cur;
}

double soft_threshold(double rho, double threshold) {
    if (rho > threshold) {
        return rho - threshold;
    }
    if (rho < -threshold) {
        return rho + threshold;
    }
    return 0.0;
}

/// L1 objective on the mean-likelihood scale, in the coordinates the descent
/// runs in (garrote: gamma are the c_j and the design is x_ij * init_j).
double l1_objective(const Dataset& data, const Eigen::MatrixXd& design,
                    const Eigen::VectorXd& pen_weights, bool nonneg, double lambda,
                    const Params& par) {
    const Eigen::VectorXd lp = (design * par.betas).array() + par.alpha;
    double penalty = 0.0;
    for (Eigen::Index j = 0; j < par.betas.size(); ++j) {
        penalty += pen_weights[j] * (nonneg ? par.betas[j] : std::abs(par.betas[j]));
    }
    return log_likelihood_from_lp(lp, data.y) / data.n() - lambda * penalty;
}

/// Coordinate descent for the L1 kinds: outer IRLS majorization, inner
/// cyclic soft-threshold updates (clipped at zero for the garrote).
Params fit_l1(const Dataset& data, const Eigen::MatrixXd& design,
              const Eigen::VectorXd& pen_weights, bool nonneg, double lambda,
              const FitOptions& opts, Params start, bool* converged) {
    const int n = data.n();
    const int p = static_cast<int>(design.cols());
    Params cur = std::move(start);
    double obj = l1_objective(data, design, pen_weights, nonneg, lambda, cur);
    *converged = false;

    for (int outer = 0; outer < opts.max_iter; ++outer) {
        const Eigen::VectorXd lp = (design * cur.betas).array() + cur.alpha;
        const Eigen::VectorXd pi = lp.unaryExpr([](double e) { return inverse_logit(e); });
        const Eigen::VectorXd w =
            (pi.array() * (1.0 - pi.array())).max(kMinWeight).matrix();
        // Working response of the quadratic majorization at the current fit.
        const Eigen::VectorXd z = lp.array() + (data.y - pi).array() / w.array();

        const double w_sum = w.sum();
        Eigen::VectorXd nu(p);
        for (int j = 0; j < p; ++j) {
            nu[j] = w.dot(design.col(j).cwiseAbs2()) / n;
        }

        // r holds the full working residual z - alpha - design * betas.
        Eigen::VectorXd r = z - lp;
        for (int inner = 0; inner < 1000; ++inner) {
            double max_change = 0.0;

            const double alpha_shift = w.dot(r) / w_sum;
            cur.alpha += alpha_shift;
            r.array() -= alpha_shift;
            max_change = std::max(max_change, std::abs(alpha_shift));

            for (int j = 0; j < p; ++j) {
                if (nu[j] <= 0.0) {
                    continue;  // degenerate column; leave its coefficient
                }
                const double rho = w.cwiseProduct(design.col(j)).dot(r) / n +
                                   nu[j] * cur.betas[j];
                const double threshold = lambda * pen_weights[j];
                const double updated = nonneg
                                           ? std::max(0.0, (rho - threshold) / nu[j])
                                           : soft_threshold(rho, threshold) / nu[j];
                const double change = updated - cur.betas[j];
                if (change != 0.0) {
                    r -= change * design.col(j);
                    cur.betas[j] = updated;
                    max_change = std::max(max_change, std::abs(change));
                }
            }
            if (max_change < kInnerTol) {
                break;
            }
        }

        const double old_obj = obj;
        obj = l1_objective(data, design, pen_weights, nonneg, lambda, cur);
        if (std::abs(obj - old_obj) < opts.tol * (std::abs(obj) + 0.1)) {
            *converged = true;
            break;
        }
    }
    return cur;
}

/// Shared L1 setup: descent design, penalty weights, and whether the
/// coefficients are sign-constrained.
struct L1Problem {
    Eigen::MatrixXd design;
    Eigen::VectorXd pen_weights;
    bool nonneg = false;
};

L1Problem l1_problem(const Dataset& data, const PenaltySpec& spec) {
    L1Problem prob;
    switch (spec.kind) {
        case PenaltyKind::Lasso:
            prob.design = data.X;
            prob.pen_weights = Eigen::VectorXd::Ones(data.p());
            break;
        case PenaltyKind::AdaptiveLasso:
            prob.design = data.X;
            prob.pen_weights = spec.weights;
            break;
        case PenaltyKind::Garrote:
            // Descent runs in the c_j coordinates on x_ij * beta_init_j.
            prob.design = data.X * spec.init_betas.asDiagonal();
            prob.pen_weights = Eigen::VectorXd::Ones(data.p());
            prob.nonneg = true;
            break;
        default:
            throw std::logic_error("l1_problem: not an L1 penalty kind");
    }
    return prob;
}

FitResult package(const Dataset& data, const PenaltySpec& spec, double lambda,
                  const Params& par, bool converged) {
    FitResult fit;
    fit.method = method_for(spec.kind);
    fit.lambda = lambda;
    fit.intercept = par.alpha;
    fit.betas = spec.kind == PenaltyKind::Garrote
                    ? par.betas.cwiseProduct(spec.init_betas).eval()
                    : par.betas;
    fit.converged = converged;
    fit.log_lik = log_likelihood(fit.intercept, fit.betas, data);
    return fit;
}

Params cold_start(const Dataset& data) {
    Params par;
    par.alpha = logit(data.event_rate());
    par.betas = Eigen::VectorXd::Zero(data.p());
    return par;
}

Dataset subset_rows(const Dataset& data, const std::vector<int>& rows) {
    Dataset out;
    out.X.resize(static_cast<Eigen::Index>(rows.size()), data.X.cols());
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.X.row(static_cast<Eigen::Index>(i)) = data.X.row(rows[i]);
        out.y[static_cast<Eigen::Index>(i)] = data.y[rows[i]];
    }
    return out;
}

/// Fits every grid value on `train` (warm-started in the order suited to the
/// penalty kind) and calls `consume(index, params)` for each solution.
template <typename Consumer>
void sweep_grid(const Dataset& train, const PenaltySpec& spec, const LambdaGrid& grid,
                const FitOptions& opts, Consumer&& consume) {
    const int m = static_cast<int>(grid.values.size());
    bool converged = false;
    if (is_l1_kind(spec.kind)) {
        const L1Problem prob = l1_problem(train, spec);
        Params par = cold_start(train);
        // Largest lambda first: the all-zero solution is (nearly) exact
        // there, and each fit seeds the next, denser one.
        for (int idx = m - 1; idx >= 0; --idx) {
            par = fit_l1(train, prob.design, prob.pen_weights, prob.nonneg,
                         grid.values[idx], opts, std::move(par), &converged);
            consume(idx, par, converged);
        }
    } else {
        Params par = cold_start(train);
        for (int idx = 0; idx < m; ++idx) {
            const Eigen::VectorXd q = quadratic_curvature(train, spec, grid.values[idx]);
            par = fit_quadratic(train, q, opts, std::move(par), &converged);
            consume(idx, par, converged);
        }
    }
}

/// Index of the smallest criterion value; ties within kTieTol go to the
/// largest lambda (the grid is ascending, so the highest index).
int select_index(const std::vector<double>& criterion) {
    const double best = *std::min_element(criterion.begin(), criterion.end());
    for (int idx = static_cast<int>(criterion.size()) - 1; idx >= 0; --idx) {
        if (criterion[idx] <= best + kTieTol) {
            return idx;
        }
    }
    throw std::logic_error("select_index: empty criterion");
}

/// Sum over folds of held-out deviances per grid value.
std::vector<double> cv_deviance_curve(const Dataset& data, const PenaltySpec& spec,
                                      const LambdaGrid& grid, const CvPlan& plan,
                                      const FitOptions& opts) {
    if (static_cast<int>(plan.assignments.size()) != data.n()) {
        throw SamplingError("cross-validation plan does not match the dataset");
    }
    std::vector<double> deviance(grid.values.size(), 0.0);
    const bool garrote = spec.kind == PenaltyKind::Garrote;
    for (int fold = 0; fold < plan.folds; ++fold) {
        std::vector<int> train_rows;
        std::vector<int> test_rows;
        for (int i = 0; i < data.n(); ++i) {
            (plan.assignments[i] == fold ? test_rows : train_rows).push_back(i);
        }
        const Dataset train = subset_rows(data, train_rows);
        const Dataset test = subset_rows(data, test_rows);
        sweep_grid(train, spec, grid, opts,
                   [&](int idx, const Params& par, bool /*converged*/) {
                       const Eigen::VectorXd betas =
                           garrote ? par.betas.cwiseProduct(spec.init_betas).eval()
                                   : par.betas;
                       const Eigen::VectorXd lp =
                           linear_predictor(par.alpha, betas, test.X);
                       deviance[idx] += -2.0 * log_likelihood_from_lp(lp, test.y);
                   });
    }
    return deviance;
}

}  // namespace

FitResult fit_at_lambda(const Dataset& data, const PenaltySpec& spec, double lambda,
                        const FitOptions& opts) {
    if (lambda < 0.0) {
        throw std::invalid_argument("fit_at_lambda: negative lambda");
    }
    bool converged = false;
    Params par;
    if (is_l1_kind(spec.kind)) {
        const L1Problem prob = l1_problem(data, spec);
        par = fit_l1(data, prob.design, prob.pen_weights, prob.nonneg, lambda, opts,
                     cold_start(data), &converged);
    } else {
        const Eigen::VectorXd q = quadratic_curvature(data, spec, lambda);
        par = fit_quadratic(data, q, opts, cold_start(data), &converged);
    }
    return package(data, spec, lambda, par, converged);
}

double penalized_objective(const Dataset& data, const PenaltySpec& spec, double lambda,
                           double alpha, const Eigen::VectorXd& betas) {
    const double ll = log_likelihood(alpha, betas, data);
    switch (spec.kind) {
        case PenaltyKind::Ridge:
            return ll / data.n() - lambda * betas.squaredNorm();
        case PenaltyKind::PML:
            return ll - 0.5 * lambda *
                            (spec.scaling.array() * betas.array()).square().sum();
        case PenaltyKind::Lasso:
            return ll / data.n() - lambda * betas.lpNorm<1>();
        case PenaltyKind::AdaptiveLasso:
            return ll / data.n() - lambda * spec.weights.dot(betas.cwiseAbs());
        case PenaltyKind::Garrote: {
            double csum = 0.0;
            for (Eigen::Index j = 0; j < betas.size(); ++j) {
                if (spec.init_betas[j] != 0.0) {
                    csum += betas[j] / spec.init_betas[j];
                } else if (betas[j] != 0.0) {
                    throw UndefinedFactorError(
                        "garrote objective: nonzero coefficient on a zero initial estimate");
                }
            }
            return ll / data.n() - lambda * csum;
        }
    }
    throw std::logic_error("unreachable penalty kind");
}

double cv_deviance(const Dataset& data, const PenaltySpec& spec, double lambda,
                   const CvPlan& plan, const FitOptions& opts) {
    LambdaGrid single;
    single.values = {lambda};
    return cv_deviance_curve(data, spec, single, plan, opts)[0];
}

namespace {

/// CV-tuned fit shared by ridge and the L1 kinds: pick lambda on the
/// deviance curve, then refit on the full development data.
FitResult fit_cv_tuned(const Dataset& data, const PenaltySpec& spec, const LambdaGrid& grid,
                       const CvPlan& plan, const FitOptions& opts) {
    const std::vector<double> deviance = cv_deviance_curve(data, spec, grid, plan, opts);
    const int chosen = select_index(deviance);
    FitResult fit = fit_at_lambda(data, spec, grid.values[chosen], opts);
    return fit;
}

}  // namespace

FitResult fit_ridge(const Dataset& data, const LambdaGrid& grid, const CvPlan& plan,
                    const FitOptions& opts) {
    return fit_cv_tuned(data, PenaltySpec::ridge(), grid, plan, opts);
}

FitResult fit_lasso(const Dataset& data, const LambdaGrid& grid, const CvPlan& plan,
                    const FitOptions& opts) {
    return fit_cv_tuned(data, PenaltySpec::lasso(), grid, plan, opts);
}

FitResult fit_adaptive_lasso(const Dataset& data, const LambdaGrid& grid, const CvPlan& plan,
                             const FitResult& ml_fit, const FitOptions& opts) {
    return fit_cv_tuned(data, PenaltySpec::adaptive_lasso(ml_fit), grid, plan, opts);
}

FitResult fit_garrote(const Dataset& data, const LambdaGrid& grid, const CvPlan& plan,
                      const FitResult& ml_fit, const FitOptions& opts) {
    return fit_cv_tuned(data, PenaltySpec::garrote(ml_fit), grid, plan, opts);
}

double pml_effective_df(const Dataset& data, const FitResult& fit, double lambda,
                        const Eigen::VectorXd& scaling) {
    const Eigen::MatrixXd info = observed_information(fit.intercept, fit.betas, data);
    Eigen::MatrixXd penalized = info;
    penalized.diagonal().tail(data.p()) += lambda * scaling.array().square().matrix();
    // tr[I (I + Lambda)^-1]: p+1 at lambda 0, decaying to 1 as the penalty
    // wipes out every slope but leaves the intercept free.
    return penalized.ldlt().solve(info).trace();
}

FitResult fit_pml(const Dataset& data, const LambdaGrid& grid, const FitOptions& opts) {
    const PenaltySpec spec = PenaltySpec::pml(data);
    const int n = data.n();
    std::vector<double> aicc(grid.values.size(),
                             std::numeric_limits<double>::infinity());
    std::vector<Params> path(grid.values.size());
    std::vector<bool> conv(grid.values.size(), false);
    sweep_grid(data, spec, grid, opts, [&](int idx, const Params& par, bool converged) {
        path[idx] = par;
        conv[idx] = converged;
        const double ll = log_likelihood(par.alpha, par.betas, data);
        FitResult tmp;
        tmp.intercept = par.alpha;
        tmp.betas = par.betas;
        const double df = pml_effective_df(data, tmp, grid.values[idx], spec.scaling);
        if (n - df - 1.0 > 0.0) {
            aicc[idx] = -2.0 * ll + 2.0 * df * n / (n - df - 1.0);
        }
    });
    const int chosen = select_index(aicc);
    return package(data, spec, grid.values[chosen], path[chosen], conv[chosen]);
}

}  // namespace shrinklab
