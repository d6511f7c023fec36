#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <set>

#include "shrinklab/common.hpp"
#include "shrinklab/datagen.hpp"
#include "shrinklab/dataset.hpp"
#include "shrinklab/metrics.hpp"
#include "shrinklab/rng.hpp"

using namespace shrinklab;

namespace {

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& X) {
    Eigen::MatrixXd centered = X.rowwise() - X.colwise().mean();
    Eigen::MatrixXd cov = (centered.transpose() * centered) / double(X.rows() - 1);
    Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
    return cov.array() / (sd * sd.transpose()).array();
}

Eigen::VectorXd coefficients(std::initializer_list<double> values) {
    Eigen::VectorXd beta(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double v : values) beta[i++] = v;
    return beta;
}

}  // namespace

TEST_CASE("seed derivation is deterministic and path sensitive") {
    CHECK(derive_seed(42, {1, 2, 3}) == derive_seed(42, {1, 2, 3}));
    CHECK(derive_seed(42, {1, 2}) != derive_seed(42, {2, 1}));
    CHECK(derive_seed(42, {1}) != derive_seed(43, {1}));
    CHECK(derive_seed(42, {streams::kDraw, 7}) != derive_seed(42, {streams::kBootstrap, 7}));
}

TEST_CASE("mix64 sends distinct nearby inputs to distinct outputs") {
    std::set<std::uint64_t> outputs;
    for (std::uint64_t i = 0; i < 4096; ++i) outputs.insert(mix64(i));
    CHECK(outputs.size() == 4096);
}

TEST_CASE("column standardization matches the hand-computed small case") {
    Dataset data;
    data.X.resize(3, 1);
    data.X << 1.0, 2.0, 3.0;
    data.y.resize(3);
    data.y << 0.0, 1.0, 0.0;

    const auto [std_data, params] = standardize(data);
    // sd of {1,2,3} with the n-1 denominator is exactly 1.
    CHECK(params.means[0] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(params.sds[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std_data.X(0, 0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(std_data.X(1, 0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(std_data.X(2, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("standardized columns have mean zero and unit sd, idempotently") {
    TrueModel model;
    model.betas = Eigen::VectorXd::Zero(4);
    Population pop = generate_population(model, 500, 77);
    Dataset data{pop.X, pop.y};

    const auto [std_data, params] = standardize(data);
    const StandardizationParams again = column_stats(std_data);
    for (int j = 0; j < 4; ++j) {
        CHECK(std::abs(again.means[j]) < 1e-10);
        CHECK(std::abs(again.sds[j] - 1.0) < 1e-10);
    }
    (void)params;
}

TEST_CASE("validation data is transformed with development parameters") {
    TrueModel model;
    model.betas = Eigen::VectorXd::Zero(3);
    Population pop = generate_population(model, 400, 11);
    Dataset dev{pop.X, pop.y};

    const auto [std_dev, params] = standardize(dev);
    (void)std_dev;

    // A validation column equal to the development column shifted by +1
    // lands at mean 1/sd_dev on the standardized scale.
    Dataset shifted = dev;
    shifted.X.array() += 1.0;
    Dataset std_shifted = apply_standardization(params, shifted);
    for (int j = 0; j < 3; ++j) {
        const double expected = 1.0 / params.sds[j];
        CHECK(std_shifted.X.col(j).mean() == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("a constant predictor column is rejected") {
    Dataset data;
    data.X = Eigen::MatrixXd::Ones(10, 2);
    data.X.col(0) = Eigen::VectorXd::LinSpaced(10, 0.0, 1.0);
    data.y = Eigen::VectorXd::Zero(10);
    data.y[0] = 1.0;
    CHECK_THROWS_AS(column_stats(data), DegeneratePredictorError);
}

TEST_CASE("a null model yields a balanced outcome and uncorrelated predictors") {
    TrueModel model;
    model.betas = Eigen::VectorXd::Zero(5);
    model.intercept = 0.0;
    model.rho = 0.0;
    Population pop = generate_population(model, 100000, 2024);

    CHECK(pop.y.mean() == doctest::Approx(0.5).epsilon(0.02));
    const Eigen::MatrixXd corr = correlation_matrix(pop.X);
    for (int j = 0; j < 5; ++j) {
        for (int k = 0; k < 5; ++k) {
            if (j != k) CHECK(std::abs(corr(j, k)) < 0.02);
        }
    }
}

TEST_CASE("equicorrelated draws hit the requested pairwise correlation") {
    TrueModel model;
    model.betas = Eigen::VectorXd::Zero(5);
    model.rho = 0.5;
    Population pop = generate_population(model, 100000, 555);

    const Eigen::MatrixXd corr = correlation_matrix(pop.X);
    for (int j = 0; j < 5; ++j) {
        for (int k = 0; k < 5; ++k) {
            if (j != k) CHECK(corr(j, k) == doctest::Approx(0.5).epsilon(0.04));
        }
    }
}

TEST_CASE("stored true risks equal the model risk of each row") {
    TrueModel model;
    model.betas = coefficients({0.2, -0.4, 0.7});
    model.intercept = -1.0;
    model.rho = 0.3;
    Population pop = generate_population(model, 200, 9);
    for (int i = 0; i < pop.size(); ++i) {
        const double lp = model.intercept + model.betas.dot(pop.X.row(i));
        CHECK(pop.true_risk[i] == doctest::Approx(inverse_logit(lp)).epsilon(1e-12));
    }
}

TEST_CASE("population generation is reproducible per seed") {
    TrueModel model;
    model.betas = coefficients({0.2, 0.2, 0.2, 0.5, 0.8});
    model.intercept = -1.0;
    model.rho = 0.5;
    Population a = generate_population(model, 1000, 31);
    Population b = generate_population(model, 1000, 31);
    Population c = generate_population(model, 1000, 32);
    CHECK((a.X.array() == b.X.array()).all());
    CHECK((a.y.array() == b.y.array()).all());
    CHECK_FALSE((a.X.array() == c.X.array()).all());
}

TEST_CASE("intercept solving recovers zero when all coefficients vanish") {
    const Eigen::VectorXd beta = Eigen::VectorXd::Zero(5);
    const double alpha = solve_intercept(beta, 0.0, 0.5, 100000, 123, 1e-6);
    CHECK(std::abs(alpha) < 1e-4);
    const double alpha_corr = solve_intercept(beta, 0.5, 0.5, 100000, 124, 1e-6);
    CHECK(std::abs(alpha_corr) < 1e-4);
}

TEST_CASE("solved intercepts land in the expected range for known designs") {
    const Eigen::VectorXd five = coefficients({0.2, 0.2, 0.2, 0.5, 0.8});
    const double a5 = solve_intercept(five, 0.0, 0.1, 500000, 7, 1e-4);
    CHECK(std::abs(a5 - (-2.57)) < 0.04);

    Eigen::VectorXd ten(10);
    ten << 0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.5, 0.5, 0.8, 0.8;
    const double a10 = solve_intercept(ten, 0.5, 0.1, 500000, 8, 1e-4);
    CHECK(std::abs(a10 - (-4.34)) < 0.05);
}

TEST_CASE("the solved intercept reproduces the target event rate and c-statistic") {
    const Eigen::VectorXd beta = coefficients({0.2, 0.2, 0.2, 0.5, 0.8});
    const double alpha = solve_intercept(beta, 0.0, 0.1, 500000, 41, 1e-4);

    TrueModel model;
    model.betas = beta;
    model.intercept = alpha;
    model.rho = 0.0;
    Population pop = generate_population(model, 200000, 42);
    CHECK(pop.y.mean() == doctest::Approx(0.1).epsilon(0.05));

    const Eigen::VectorXd lp = (pop.X * beta).array() + alpha;
    CHECK(c_statistic(lp, pop.y) == doctest::Approx(0.75).epsilon(0.015));
}

TEST_CASE("stratified draws contain the exact requested event count") {
    TrueModel model;
    model.betas = coefficients({0.2, 0.2, 0.2, 0.5, 0.8});
    model.intercept = -2.57;
    Population pop = generate_population(model, 20000, 99);

    Dataset sample = draw_development_sample(pop, 15, 150, 1234);
    CHECK(sample.n() == 150);
    CHECK(sample.event_count() == 15);

    Dataset again = draw_development_sample(pop, 15, 150, 1234);
    CHECK((sample.X.array() == again.X.array()).all());
    CHECK((sample.y.array() == again.y.array()).all());

    Dataset other = draw_development_sample(pop, 15, 150, 1235);
    CHECK_FALSE((sample.X.array() == other.X.array()).all());
}

TEST_CASE("degenerate stratified draws are rejected") {
    TrueModel model;
    model.betas = Eigen::VectorXd::Zero(2);
    Population pop = generate_population(model, 100, 3);
    CHECK_THROWS_AS(draw_development_sample(pop, 0, 50, 1), SamplingError);
    CHECK_THROWS_AS(draw_development_sample(pop, 50, 50, 1), SamplingError);
    CHECK_THROWS_AS(draw_development_sample(pop, 1000, 2000, 1), SamplingError);
}

TEST_CASE("invalid correlations are rejected") {
    TrueModel model;
    model.betas = Eigen::VectorXd::Zero(2);
    model.rho = 1.0;
    CHECK_THROWS(generate_population(model, 10, 1));
    model.rho = -0.2;
    CHECK_THROWS(generate_population(model, 10, 1));
}
