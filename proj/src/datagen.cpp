#include "shrinklab/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "shrinklab/common.hpp"
#include "shrinklab/rng.hpp"

namespace shrinklab {

namespace {

void check_rho(double rho) {
    if (!(rho >= 0.0 && rho < 1.0)) {
        throw SamplingError("correlation must lie in [0, 1), got " + std::to_string(rho));
    }
}

}  // namespace

Population generate_population(const TrueModel& model, int size, std::uint64_t seed) {
    check_rho(model.rho);
    if (size <= 0) {
        throw SamplingError("population size must be positive, got " + std::to_string(size));
    }
    const int p = model.p();
    const double shared = std::sqrt(model.rho);
    const double unique = std::sqrt(1.0 - model.rho);

    auto rng = make_rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    Population pop;
    pop.X.resize(size, p);
    pop.y.resize(size);
    pop.true_risk.resize(size);
    for (int i = 0; i < size; ++i) {
        const double z0 = normal(rng);
        double eta = model.intercept;
        for (int j = 0; j < p; ++j) {
            const double x = shared * z0 + unique * normal(rng);
            pop.X(i, j) = x;
            eta += model.betas[j] * x;
        }
        const double risk = inverse_logit(eta);
        pop.true_risk[i] = risk;
        pop.y[i] = uniform(rng) < risk ? 1.0 : 0.0;
    }
    return pop;
}

double solve_intercept(const Eigen::VectorXd& betas, double rho, double target_rate,
                       int mc_size, std::uint64_t seed, double tol) {
    check_rho(rho);
    if (!(target_rate > 0.0 && target_rate < 1.0)) {
        throw RootFindError("target event rate must lie in (0, 1), got " +
                            std::to_string(target_rate));
    }
    const int p = static_cast<int>(betas.size());
    const double shared = std::sqrt(rho);
    const double unique = std::sqrt(1.0 - rho);

    // Fix one Monte Carlo population's linear predictors (without intercept);
    // the mean risk is then a smooth increasing function of the intercept.
    auto rng = make_rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd eta0(mc_size);
    for (int i = 0; i < mc_size; ++i) {
        const double z0 = normal(rng);
        double eta = 0.0;
        for (int j = 0; j < p; ++j) {
            eta += betas[j] * (shared * z0 + unique * normal(rng));
        }
        eta0[i] = eta;
    }

    const auto mean_risk = [&](double alpha) {
        double sum = 0.0;
        for (int i = 0; i < mc_size; ++i) {
            sum += inverse_logit(alpha + eta0[i]);
        }
        return sum / mc_size;
    };

    double lo = -20.0;
    double hi = 20.0;
    if (mean_risk(lo) > target_rate || mean_risk(hi) < target_rate) {
        throw RootFindError("intercept bracket [-20, 20] does not contain the target rate");
    }
    double mid = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
        mid = 0.5 * (lo + hi);
        const double rate = mean_risk(mid);
        if (std::abs(rate - target_rate) <= tol) {
            return mid;
        }
        (rate < target_rate ? lo : hi) = mid;
    }
    throw RootFindError("intercept bisection failed to reach tolerance " + std::to_string(tol));
}

Dataset draw_development_sample(const Population& pop, int n_events, int n_total,
                                std::uint64_t seed) {
    if (n_events <= 0 || n_total <= n_events) {
        throw SamplingError("need 0 < n_events < n_total, got " + std::to_string(n_events) +
                            " / " + std::to_string(n_total));
    }
    std::vector<int> events;
    std::vector<int> controls;
    for (int i = 0; i < pop.size(); ++i) {
        (pop.y[i] == 1.0 ? events : controls).push_back(i);
    }
    const int n_controls = n_total - n_events;
    if (static_cast<int>(events.size()) < n_events ||
        static_cast<int>(controls.size()) < n_controls) {
        throw SamplingError("population too small for stratified draw of " +
                            std::to_string(n_events) + " events / " +
                            std::to_string(n_controls) + " controls");
    }

    auto rng = make_rng(seed);
    // Partial Fisher-Yates: only the first k positions of each stratum need
    // shuffling to obtain a uniform without-replacement sample.
    const auto take = [&rng](std::vector<int>& idx, int k) {
        const int m = static_cast<int>(idx.size());
        for (int i = 0; i < k; ++i) {
            std::uniform_int_distribution<int> pick(i, m - 1);
            std::swap(idx[i], idx[pick(rng)]);
        }
        idx.resize(k);
    };
    take(events, n_events);
    take(controls, n_controls);

    std::vector<int> rows;
    rows.reserve(n_total);
    rows.insert(rows.end(), events.begin(), events.end());
    rows.insert(rows.end(), controls.begin(), controls.end());
    std::shuffle(rows.begin(), rows.end(), rng);

    Dataset sample;
    sample.X.resize(n_total, pop.X.cols());
    sample.y.resize(n_total);
    for (int i = 0; i < n_total; ++i) {
        sample.X.row(i) = pop.X.row(rows[i]);
        sample.y[i] = pop.y[rows[i]];
    }
    return sample;
}

}  // namespace shrinklab
