#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "shrinklab/common.hpp"
#include "shrinklab/datagen.hpp"
#include "shrinklab/glm.hpp"
#include "shrinklab/metrics.hpp"
#include "shrinklab/penalized.hpp"
#include "shrinklab/rng.hpp"

using namespace shrinklab;

namespace {

Eigen::VectorXd coefficients(std::initializer_list<double> values) {
    Eigen::VectorXd beta(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double v : values) beta[i++] = v;
    return beta;
}

Dataset sample_dataset(const TrueModel& model, int n, std::uint64_t seed) {
    Population pop = generate_population(model, n, seed);
    return Dataset{pop.X, pop.y};
}

FitOptions precise_options() {
    FitOptions opts;
    opts.tol = 1e-12;
    opts.max_iter = 500;
    return opts;
}

// Penalized objective with the (unpenalized) intercept profiled out. Corners
// of the search box can pin every fitted probability to 0 or 1, where the
// one-dimensional Newton solve has nothing left to converge on; those points
// are nowhere near any optimum, so they score as unreachable.
double profiled_objective(const Dataset& data, const PenaltySpec& spec, double lambda,
                          const Eigen::VectorXd& betas) {
    FitOptions opts;
    opts.tol = 1e-9;
    opts.max_iter = 500;
    try {
        const double alpha = refit_intercept(betas, data, opts);
        return penalized_objective(data, spec, lambda, alpha, betas);
    } catch (const ConvergenceError&) {
        return -1e300;
    }
}

// Iteratively refined lattice search over a 2-D box; resolution shrinks by
// a factor points/4 per round, comfortably below 1e-3 after five rounds.
Eigen::Vector2d refine_search_2d(const std::function<double(const Eigen::Vector2d&)>& f,
                                 Eigen::Vector2d lo, Eigen::Vector2d hi, int points,
                                 int rounds, bool clip_at_zero) {
    Eigen::Vector2d best = (lo + hi) / 2.0;
    for (int round = 0; round < rounds; ++round) {
        double best_value = -1e300;
        Eigen::Vector2d round_best = best;
        for (int a = 0; a < points; ++a) {
            for (int b = 0; b < points; ++b) {
                Eigen::Vector2d candidate;
                candidate[0] = lo[0] + (hi[0] - lo[0]) * a / (points - 1);
                candidate[1] = lo[1] + (hi[1] - lo[1]) * b / (points - 1);
                const double value = f(candidate);
                if (value > best_value) {
                    best_value = value;
                    round_best = candidate;
                }
            }
        }
        best = round_best;
        const Eigen::Vector2d spacing = (hi - lo) / (points - 1);
        lo = best - 2.0 * spacing;
        hi = best + 2.0 * spacing;
        if (clip_at_zero) {
            lo = lo.cwiseMax(0.0);
            for (int k = 0; k < 2; ++k) hi[k] = std::max(hi[k], lo[k] + 1e-6);
        }
    }
    return best;
}

// Golden-section maximization of a unimodal scalar function.
double golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                          double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return (a + b) / 2.0;
}

Dataset two_predictor_data() {
    TrueModel model;
    model.betas = coefficients({0.9, -0.6});
    model.intercept = -0.4;
    Dataset raw = sample_dataset(model, 60, 4242);
    return standardize(raw).first;
}

double null_score_threshold(const Dataset& data) {
    const Eigen::VectorXd resid = data.y.array() - data.event_rate();
    double max_score = 0.0;
    for (int j = 0; j < data.p(); ++j) {
        max_score = std::max(max_score, std::abs(data.X.col(j).dot(resid)) / data.n());
    }
    return max_score;
}

}  // namespace

TEST_CASE("the tuning grid pins its endpoints and log spacing") {
    LambdaGrid grid = lambda_grid();
    REQUIRE(grid.values.size() == 251);
    CHECK(grid.values[0] == 0.0);
    CHECK(grid.values[1] == 1e-4);
    CHECK(grid.values[250] == 64.0);

    for (std::size_t k = 1; k + 1 < grid.values.size(); ++k) {
        CHECK(grid.values[k] < grid.values[k + 1]);
    }
    const double ratio = grid.values[2] / grid.values[1];
    for (std::size_t k = 1; k + 1 < grid.values.size(); ++k) {
        CHECK(grid.values[k + 1] / grid.values[k] == doctest::Approx(ratio).epsilon(1e-12));
    }
    const double expected = std::pow(64.0 / 1e-4, 124.0 / 249.0);
    CHECK(grid.values[125] / grid.values[1] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("fold assignment is stratified, exhaustive and seed-stable") {
    TrueModel model;
    model.betas = Eigen::VectorXd::Zero(2);

    SUBCASE("a divisible layout spreads events exactly evenly") {
        Dataset data = sample_dataset(model, 100, 5);
        for (int i = 0; i < 100; ++i) data.y[i] = i < 50 ? 1.0 : 0.0;
        CvPlan plan = make_cv_plan(data, 10, 11);
        REQUIRE(plan.folds == 10);
        std::vector<int> events(10, 0), totals(10, 0);
        for (int i = 0; i < 100; ++i) {
            REQUIRE(plan.assignments[i] >= 0);
            REQUIRE(plan.assignments[i] < 10);
            totals[plan.assignments[i]] += 1;
            if (data.y[i] == 1.0) events[plan.assignments[i]] += 1;
        }
        for (int f = 0; f < 10; ++f) {
            CHECK(events[f] == 5);
            CHECK(totals[f] == 10);
        }
    }
    SUBCASE("a non-divisible layout is balanced within one event") {
        Dataset data = sample_dataset(model, 30, 6);
        for (int i = 0; i < 30; ++i) data.y[i] = i < 15 ? 1.0 : 0.0;
        CvPlan plan = make_cv_plan(data, 10, 21);
        REQUIRE(plan.folds == 10);
        std::vector<int> events(10, 0), totals(10, 0);
        for (int i = 0; i < 30; ++i) {
            totals[plan.assignments[i]] += 1;
            if (data.y[i] == 1.0) events[plan.assignments[i]] += 1;
        }
        for (int f = 0; f < 10; ++f) {
            CHECK(totals[f] > 0);
            CHECK(events[f] >= 1);
            CHECK(events[f] <= 2);
        }
    }
    SUBCASE("assignments are reproducible per seed") {
        Dataset data = sample_dataset(model, 80, 7);
        for (int i = 0; i < 80; ++i) data.y[i] = i % 4 == 0 ? 1.0 : 0.0;
        CvPlan a = make_cv_plan(data, 10, 31);
        CvPlan b = make_cv_plan(data, 10, 31);
        CHECK(a.assignments == b.assignments);
        CvPlan c = make_cv_plan(data, 10, 32);
        CHECK(a.assignments != c.assignments);
    }
    SUBCASE("a class smaller than the fold count shrinks the plan") {
        Dataset data = sample_dataset(model, 40, 8);
        data.y.setZero();
        data.y.head(6).setOnes();
        CvPlan plan = make_cv_plan(data, 10, 41);
        CHECK(plan.folds == 6);
    }
    SUBCASE("a class smaller than two is infeasible") {
        Dataset data = sample_dataset(model, 20, 9);
        data.y.setZero();
        data.y[0] = 1.0;
        CHECK_THROWS_AS(make_cv_plan(data, 10, 51), SamplingError);
    }
}

TEST_CASE("cross-validated deviance reduces to plain maximum likelihood at zero") {
    TrueModel model;
    model.betas = coefficients({0.5, -0.4, 0.3});
    Dataset data = standardize(sample_dataset(model, 120, 300)).first;
    CvPlan plan = make_cv_plan(data, 5, 17);

    const double dev = cv_deviance(data, PenaltySpec::ridge(), 0.0, plan);

    double oracle = 0.0;
    for (int fold = 0; fold < plan.folds; ++fold) {
        std::vector<int> train, test;
        for (int i = 0; i < data.n(); ++i) {
            (plan.assignments[i] == fold ? test : train).push_back(i);
        }
        Dataset train_data, test_data;
        train_data.X.resize(static_cast<int>(train.size()), data.p());
        train_data.y.resize(static_cast<int>(train.size()));
        for (std::size_t r = 0; r < train.size(); ++r) {
            train_data.X.row(static_cast<int>(r)) = data.X.row(train[r]);
            train_data.y[static_cast<int>(r)] = data.y[train[r]];
        }
        test_data.X.resize(static_cast<int>(test.size()), data.p());
        test_data.y.resize(static_cast<int>(test.size()));
        for (std::size_t r = 0; r < test.size(); ++r) {
            test_data.X.row(static_cast<int>(r)) = data.X.row(test[r]);
            test_data.y[static_cast<int>(r)] = data.y[test[r]];
        }
        FitResult fit = fit_ml(train_data, precise_options());
        const Eigen::VectorXd lp = linear_predictor(fit, test_data.X);
        oracle += -2.0 * log_likelihood_from_lp(lp, test_data.y);
    }
    CHECK(dev == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("saturating penalties collapse the deviance to the intercept-only value") {
    TrueModel model;
    model.betas = coefficients({0.4, 0.2});
    Dataset data = standardize(sample_dataset(model, 100, 301)).first;
    CvPlan plan = make_cv_plan(data, 5, 23);

    // At a lasso penalty above every fold's score threshold all slopes are
    // exactly zero, so the held-out deviance is the intercept-only one.
    const double dev = cv_deviance(data, PenaltySpec::lasso(), 4.0, plan);

    double oracle = 0.0;
    for (int fold = 0; fold < plan.folds; ++fold) {
        double train_events = 0.0, train_n = 0.0;
        for (int i = 0; i < data.n(); ++i) {
            if (plan.assignments[i] != fold) {
                train_events += data.y[i];
                train_n += 1.0;
            }
        }
        const double alpha = logit(train_events / train_n);
        for (int i = 0; i < data.n(); ++i) {
            if (plan.assignments[i] == fold) {
                oracle += -2.0 * (data.y[i] * alpha - log1pexp(alpha));
            }
        }
    }
    CHECK(dev == doctest::Approx(oracle).epsilon(1e-7));
}

TEST_CASE("on pure noise a light penalty rarely beats a moderate one") {
    TrueModel model;
    model.betas = Eigen::VectorXd::Zero(5);
    int moderate_wins = 0;
    for (int seed = 0; seed < 50; ++seed) {
        Dataset data =
            standardize(sample_dataset(model, 80, 9000 + std::uint64_t(seed))).first;
        CvPlan plan = make_cv_plan(data, 5, 100 + std::uint64_t(seed));
        const double light = cv_deviance(data, PenaltySpec::ridge(), 1e-4, plan);
        const double moderate = cv_deviance(data, PenaltySpec::ridge(), 0.5, plan);
        if (light >= moderate) ++moderate_wins;
    }
    CHECK(moderate_wins >= 40);
}

TEST_CASE("ridge reduces to maximum likelihood when the penalty is off") {
    Dataset data = two_predictor_data();
    FitResult ml = fit_ml(data, precise_options());
    FitResult ridge = fit_at_lambda(data, PenaltySpec::ridge(), 0.0, precise_options());
    CHECK(ridge.intercept == doctest::Approx(ml.intercept).epsilon(1e-6));
    for (int j = 0; j < data.p(); ++j) {
        CHECK(ridge.betas[j] == doctest::Approx(ml.betas[j]).epsilon(1e-6));
    }
}

TEST_CASE("an overwhelming ridge penalty collapses to the marginal intercept") {
    Dataset data = two_predictor_data();
    FitResult fit = fit_at_lambda(data, PenaltySpec::ridge(), 1e6, precise_options());
    CHECK(fit.betas.cwiseAbs().maxCoeff() < 1e-4);
    CHECK(std::abs(fit.intercept - logit(data.event_rate())) < 1e-3);
}

TEST_CASE("the ridge solution matches a brute-force lattice search") {
    Dataset data = two_predictor_data();
    const double lambda = 0.05;
    FitResult fit = fit_at_lambda(data, PenaltySpec::ridge(), lambda, precise_options());

    auto objective = [&](const Eigen::Vector2d& beta) {
        return profiled_objective(data, PenaltySpec::ridge(), lambda, beta);
    };
    Eigen::Vector2d oracle = refine_search_2d(objective, {-3.0, -3.0}, {3.0, 3.0}, 33, 5, false);
    CHECK(std::abs(fit.betas[0] - oracle[0]) < 2e-3);
    CHECK(std::abs(fit.betas[1] - oracle[1]) < 2e-3);
}

TEST_CASE("ridge coefficients move continuously along the tuning grid") {
    Dataset data = two_predictor_data();
    LambdaGrid grid = lambda_grid();
    Eigen::VectorXd previous;
    double max_jump = 0.0;
    for (double lambda : grid.values) {
        FitResult fit = fit_at_lambda(data, PenaltySpec::ridge(), lambda);
        if (previous.size() > 0) {
            max_jump = std::max(max_jump, (fit.betas - previous).cwiseAbs().maxCoeff());
        }
        previous = fit.betas;
    }
    CHECK(max_jump < 0.5);
}

TEST_CASE("no small perturbation improves the penalized optima") {
    Dataset data = two_predictor_data();
    auto rng = make_rng(246);
    std::normal_distribution<double> normal(0.0, 1.0);

    auto perturbation = [&]() {
        Eigen::Vector3d direction;
        for (int k = 0; k < 3; ++k) direction[k] = normal(rng);
        direction.normalize();
        return Eigen::Vector3d(1e-3 * direction);
    };

    SUBCASE("ridge") {
        const double lambda = 0.1;
        FitResult fit = fit_at_lambda(data, PenaltySpec::ridge(), lambda, precise_options());
        const double best =
            penalized_objective(data, PenaltySpec::ridge(), lambda, fit.intercept, fit.betas);
        for (int k = 0; k < 10000; ++k) {
            const Eigen::Vector3d d = perturbation();
            Eigen::VectorXd beta = fit.betas;
            beta[0] += d[1];
            beta[1] += d[2];
            const double value = penalized_objective(data, PenaltySpec::ridge(), lambda,
                                                     fit.intercept + d[0], beta);
            CHECK(value <= best + 1e-9);
        }
    }
    SUBCASE("lasso, including its nonsmooth points") {
        const double lambda = 0.05;
        FitResult fit = fit_at_lambda(data, PenaltySpec::lasso(), lambda, precise_options());
        const double best =
            penalized_objective(data, PenaltySpec::lasso(), lambda, fit.intercept, fit.betas);
        for (int k = 0; k < 10000; ++k) {
            const Eigen::Vector3d d = perturbation();
            Eigen::VectorXd beta = fit.betas;
            beta[0] += d[1];
            beta[1] += d[2];
            const double value = penalized_objective(data, PenaltySpec::lasso(), lambda,
                                                     fit.intercept + d[0], beta);
            CHECK(value <= best + 1e-9);
        }
    }
    SUBCASE("garrote, perturbing inside the nonnegative cone") {
        FitResult ml = fit_ml(data, precise_options());
        PenaltySpec spec = PenaltySpec::garrote(ml);
        const double lambda = 0.02;
        FitResult fit = fit_at_lambda(data, spec, lambda, precise_options());
        const double best = penalized_objective(data, spec, lambda, fit.intercept, fit.betas);
        Eigen::Vector2d c;
        for (int j = 0; j < 2; ++j) {
            c[j] = ml.betas[j] != 0.0 ? fit.betas[j] / ml.betas[j] : 0.0;
        }
        for (int k = 0; k < 10000; ++k) {
            const Eigen::Vector3d d = perturbation();
            Eigen::Vector2d c_new = c + Eigen::Vector2d(d[1], d[2]);
            c_new = c_new.cwiseMax(0.0);
            Eigen::VectorXd beta(2);
            beta << c_new[0] * ml.betas[0], c_new[1] * ml.betas[1];
            const double value =
                penalized_objective(data, spec, lambda, fit.intercept + d[0], beta);
            CHECK(value <= best + 1e-9);
        }
    }
}

TEST_CASE("the ridge objective gradient vanishes at its optimum") {
    Dataset data = two_predictor_data();
    const double h = 1e-5;
    for (double lambda : {0.01, 0.2}) {
        FitResult fit = fit_at_lambda(data, PenaltySpec::ridge(), lambda, precise_options());
        auto f = [&](double a, const Eigen::VectorXd& b) {
            return penalized_objective(data, PenaltySpec::ridge(), lambda, a, b);
        };
        const double f0 = f(fit.intercept, fit.betas);
        double max_grad = std::abs(f(fit.intercept + h, fit.betas) -
                                   f(fit.intercept - h, fit.betas)) / (2.0 * h);
        for (int j = 0; j < 2; ++j) {
            Eigen::VectorXd up = fit.betas, down = fit.betas;
            up[j] += h;
            down[j] -= h;
            max_grad = std::max(max_grad,
                                std::abs(f(fit.intercept, up) - f(fit.intercept, down)) / (2.0 * h));
        }
        CHECK(max_grad < 1e-4 * (1.0 + std::abs(f0)));
    }
}

TEST_CASE("the quadratic-penalty fit matches its lattice oracle") {
    Dataset data = two_predictor_data();
    PenaltySpec spec = PenaltySpec::pml(data);
    const double lambda = 2.0;
    FitResult fit = fit_at_lambda(data, spec, lambda, precise_options());

    auto objective = [&](const Eigen::Vector2d& beta) {
        return profiled_objective(data, spec, lambda, beta);
    };
    Eigen::Vector2d oracle = refine_search_2d(objective, {-3.0, -3.0}, {3.0, 3.0}, 33, 5, false);
    CHECK(std::abs(fit.betas[0] - oracle[0]) < 2e-3);
    CHECK(std::abs(fit.betas[1] - oracle[1]) < 2e-3);
}

TEST_CASE("effective degrees of freedom slide from full rank to intercept only") {
    TrueModel model;
    model.betas = coefficients({0.5, -0.3, 0.2, 0.7});
    Dataset data = standardize(sample_dataset(model, 150, 606)).first;
    PenaltySpec spec = PenaltySpec::pml(data);

    FitResult ml = fit_ml(data, precise_options());
    const double df_zero = pml_effective_df(data, ml, 0.0, spec.scaling);
    CHECK(df_zero == doctest::Approx(5.0).epsilon(1e-6));

    FitResult heavy = fit_at_lambda(data, spec, 1e8, precise_options());
    const double df_heavy = pml_effective_df(data, heavy, 1e8, spec.scaling);
    CHECK(df_heavy == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("the quadratic-penalty fit reduces to maximum likelihood at zero") {
    Dataset data = two_predictor_data();
    PenaltySpec spec = PenaltySpec::pml(data);
    FitResult ml = fit_ml(data, precise_options());
    FitResult fit = fit_at_lambda(data, spec, 0.0, precise_options());
    CHECK(fit.intercept == doctest::Approx(ml.intercept).epsilon(1e-6));
    for (int j = 0; j < 2; ++j) {
        CHECK(fit.betas[j] == doctest::Approx(ml.betas[j]).epsilon(1e-6));
    }
}

TEST_CASE("soft thresholding zeroes every slope above the score bound") {
    Dataset data = two_predictor_data();
    const double threshold = null_score_threshold(data);
    FitResult at = fit_at_lambda(data, PenaltySpec::lasso(), threshold * 1.01);
    CHECK(at.betas[0] == 0.0);
    CHECK(at.betas[1] == 0.0);
    CHECK(at.n_selected() == 0);

    FitResult below = fit_at_lambda(data, PenaltySpec::lasso(), threshold * 0.5);
    CHECK(below.n_selected() > 0);

    // The all-zero region is exactly the interval above the bound, so the
    // top of the default grid always sits inside it.
    FitResult top = fit_at_lambda(data, PenaltySpec::lasso(), 64.0);
    CHECK(top.n_selected() == 0);
}

TEST_CASE("an unpenalized lasso reproduces maximum likelihood") {
    Dataset data = two_predictor_data();
    FitResult ml = fit_ml(data, precise_options());
    FitResult fit = fit_at_lambda(data, PenaltySpec::lasso(), 0.0, precise_options());
    for (int j = 0; j < 2; ++j) {
        CHECK(fit.betas[j] == doctest::Approx(ml.betas[j]).epsilon(1e-5));
    }
}

TEST_CASE("the single-predictor lasso matches a golden-section oracle") {
    TrueModel model;
    model.betas = coefficients({0.8});
    Dataset data = standardize(sample_dataset(model, 80, 808)).first;
    const double lambda = 0.02;
    FitResult fit = fit_at_lambda(data, PenaltySpec::lasso(), lambda, precise_options());

    auto objective = [&](double beta) {
        Eigen::VectorXd b(1);
        b << beta;
        return profiled_objective(data, PenaltySpec::lasso(), lambda, b);
    };
    const double oracle = golden_section_max(objective, -3.0, 3.0, 1e-8);
    CHECK(std::abs(fit.betas[0] - oracle) < 1e-5);
}

TEST_CASE("uniform adaptive weights replicate the plain lasso at a rescaled penalty") {
    Dataset data = two_predictor_data();
    FitResult ml = fit_ml(data, precise_options());

    PenaltySpec adaptive = PenaltySpec::adaptive_lasso(ml);
    adaptive.weights = Eigen::VectorXd::Constant(2, 2.0);

    const double lambda = 0.03;
    FitResult a = fit_at_lambda(data, adaptive, lambda, precise_options());
    FitResult plain = fit_at_lambda(data, PenaltySpec::lasso(), 2.0 * lambda, precise_options());
    for (int j = 0; j < 2; ++j) {
        CHECK(a.betas[j] == doctest::Approx(plain.betas[j]).epsilon(1e-7));
    }
}

TEST_CASE("adaptive weights kill weak coefficients before strong ones") {
    TrueModel model;
    model.betas = coefficients({1.2, 0.15});
    Dataset data = standardize(sample_dataset(model, 400, 909)).first;
    FitResult ml = fit_ml(data, precise_options());
    REQUIRE(std::abs(ml.betas[0]) > 3.0 * std::abs(ml.betas[1]));

    PenaltySpec spec = PenaltySpec::adaptive_lasso(ml);
    LambdaGrid grid = LambdaGrid::make(1e-4, 64.0, 81);
    double weak_death = -1.0, strong_death = -1.0;
    for (double lambda : grid.values) {
        FitResult fit = fit_at_lambda(data, spec, lambda);
        if (weak_death < 0.0 && fit.betas[1] == 0.0) weak_death = lambda;
        if (strong_death < 0.0 && fit.betas[0] == 0.0) strong_death = lambda;
    }
    REQUIRE(weak_death >= 0.0);
    REQUIRE(strong_death >= 0.0);
    CHECK(weak_death < strong_death);
}

TEST_CASE("adaptive weights cap when an initial coefficient vanishes") {
    FitResult ml;
    ml.betas = coefficients({0.5, 0.0});
    PenaltySpec spec = PenaltySpec::adaptive_lasso(ml);
    CHECK(spec.weights[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(spec.weights[1] == kAdaptiveWeightCap);
}

TEST_CASE("an unpenalized garrote keeps every multiplier at one") {
    Dataset data = two_predictor_data();
    FitResult ml = fit_ml(data, precise_options());
    FitResult fit = fit_at_lambda(data, PenaltySpec::garrote(ml), 0.0, precise_options());
    for (int j = 0; j < 2; ++j) {
        CHECK(fit.betas[j] == doctest::Approx(ml.betas[j]).epsilon(1e-5));
    }
}

TEST_CASE("a saturating garrote empties the model and triggers the slope stand-in") {
    Dataset data = two_predictor_data();
    FitResult ml = fit_ml(data, precise_options());
    FitResult fit = fit_at_lambda(data, PenaltySpec::garrote(ml), 64.0);
    CHECK(fit.betas[0] == 0.0);
    CHECK(fit.betas[1] == 0.0);

    TrueModel model;
    model.betas = coefficients({0.9, -0.6});
    Dataset validation = sample_dataset(model, 400, 111);
    CHECK(slope_for_run(fit, validation) == 1000.0);
}

TEST_CASE("the garrote solution matches a nonnegative lattice oracle") {
    Dataset data = two_predictor_data();
    FitResult ml = fit_ml(data, precise_options());
    PenaltySpec spec = PenaltySpec::garrote(ml);
    const double lambda = 0.02;
    FitResult fit = fit_at_lambda(data, spec, lambda, precise_options());

    auto objective = [&](const Eigen::Vector2d& c) {
        Eigen::VectorXd beta(2);
        beta << c[0] * ml.betas[0], c[1] * ml.betas[1];
        return profiled_objective(data, spec, lambda, beta);
    };
    Eigen::Vector2d oracle_c = refine_search_2d(objective, {0.0, 0.0}, {3.0, 3.0}, 33, 5, true);
    Eigen::Vector2d fit_c;
    for (int j = 0; j < 2; ++j) fit_c[j] = fit.betas[j] / ml.betas[j];
    CHECK(std::abs(fit_c[0] - oracle_c[0]) < 2e-3);
    CHECK(std::abs(fit_c[1] - oracle_c[1]) < 2e-3);
}

TEST_CASE("garrote coefficients never flip the sign of their seed estimate") {
    Dataset data = two_predictor_data();
    FitResult ml = fit_ml(data, precise_options());
    REQUIRE(ml.betas[1] < 0.0);  // the layout includes a negative coefficient
    PenaltySpec spec = PenaltySpec::garrote(ml);
    for (double lambda : {0.0, 0.001, 0.01, 0.05, 0.2, 1.0, 8.0, 64.0}) {
        FitResult fit = fit_at_lambda(data, spec, lambda);
        for (int j = 0; j < 2; ++j) {
            CHECK(fit.betas[j] * ml.betas[j] >= 0.0);
        }
    }
}

TEST_CASE("deviance ties select the largest penalty on the grid") {
    Dataset data = two_predictor_data();
    CvPlan plan = make_cv_plan(data, 5, 61);
    // Every grid value sits above the all-zero threshold, so the deviance
    // curve is flat and the tie must resolve to the most shrinkage.
    LambdaGrid saturated;
    saturated.values = {8.0, 16.0, 32.0, 64.0};
    FitResult fit = fit_lasso(data, saturated, plan);
    REQUIRE(fit.lambda.has_value());
    CHECK(*fit.lambda == 64.0);
    CHECK(fit.n_selected() == 0);
}

TEST_CASE("tuned fits select penalties from the grid and are reproducible") {
    TrueModel model;
    model.betas = coefficients({0.2, 0.2, 0.2, 0.5, 0.8});
    model.intercept = -1.0;
    Dataset data = standardize(sample_dataset(model, 150, 727)).first;
    LambdaGrid grid = lambda_grid();
    CvPlan plan = make_cv_plan(data, 10, 81);
    FitResult ml = fit_ml(data);

    auto in_grid = [&](double lambda) {
        for (double v : grid.values) {
            if (v == lambda) return true;
        }
        return false;
    };

    FitResult ridge = fit_ridge(data, grid, plan);
    FitResult pml = fit_pml(data, grid);
    FitResult lasso = fit_lasso(data, grid, plan);
    FitResult alasso = fit_adaptive_lasso(data, grid, plan, ml);
    FitResult garrote = fit_garrote(data, grid, plan, ml);

    for (const FitResult* fit : {&ridge, &pml, &lasso, &alasso, &garrote}) {
        REQUIRE(fit->lambda.has_value());
        CHECK(in_grid(*fit->lambda));
        CHECK(fit->converged);
    }
    CHECK(ridge.method == Method::Ridge);
    CHECK(pml.method == Method::PML);
    CHECK(lasso.method == Method::Lasso);
    CHECK(alasso.method == Method::AdaptiveLasso);
    CHECK(garrote.method == Method::Garrote);

    FitResult ridge_again = fit_ridge(data, grid, plan);
    CHECK(*ridge_again.lambda == *ridge.lambda);
    CHECK((ridge_again.betas.array() == ridge.betas.array()).all());

    // The garrote never flips signs relative to its seed fit.
    for (int j = 0; j < data.p(); ++j) {
        CHECK(garrote.betas[j] * ml.betas[j] >= 0.0);
    }
}
