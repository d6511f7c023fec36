#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "shrinklab/dataset.hpp"
#include "shrinklab/fit.hpp"

namespace shrinklab {

/// Concordance statistic of a linear predictor against binary outcomes,
/// computed via rank sums (ties get average ranks) in O(n log n). Throws
/// UndefinedMetricError when either class is empty.
double c_statistic(const Eigen::VectorXd& lp, const Eigen::VectorXd& y);

/// Slope of a univariable logistic regression of `y` on `lp`, the
/// calibration slope of the predictions. Throws UndefinedMetricError when
/// the predictor is constant or either class is empty.
double calibration_slope(const Eigen::VectorXd& lp, const Eigen::VectorXd& y);

// Slope recorded when a model shrinks every coefficient to exactly zero:
// a constant predictor has no slope, and the convention of a large stand-in
// keeps such runs in the summaries as extreme over-shrinkage.
constexpr double kNoSelectionSlope = 1000.0;

// Floor applied before log-scale spread summaries so all-noise slopes near
// zero cannot dominate.
constexpr double kSlopeFloor = 0.01;

/// Calibration slope of a fitted model on a validation set, applying the
/// all-zero convention above.
double slope_for_run(const FitResult& fit, const Dataset& validation);

/// Distribution summary of calibration slopes over simulation runs.
/// Location (median, percentiles) uses the raw slopes; the log-scale spread
/// measures use slopes clamped to kSlopeFloor.
struct SlopeSummary {
    int n_runs = 0;
    double median = 0.0;
    double p5 = 0.0;
    double p95 = 0.0;
    double mad_log = 0.0;   // median |log slope - log median slope|
    double rmsd_log = 0.0;  // sqrt(mean (log slope)^2), distance from slope 1
};

SlopeSummary aggregate_slopes(const std::vector<double>& slopes);

/// Type-7 (linear interpolation) quantile of a sample, q in [0, 1].
double percentile(std::vector<double> values, double q);

/// Spearman rank correlation with average ranks for ties; std::nullopt when
/// either side has zero rank variance.
std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b);

/// Correlation between estimated and optimal log shrinkage across paired
/// runs. The estimated amount for a method is log slope_method - log
/// slope_ML on the same validation draw; the optimal amount is
/// -log slope_ML. Slopes are clamped to kSlopeFloor before taking logs.
std::optional<double> shrinkage_correlation(const std::vector<double>& method_slopes,
                                            const std::vector<double>& ml_slopes);

/// Coefficient bias against the data-generating values, split by true and
/// noise predictors. True-predictor bias is signed away from zero (positive
/// means estimates overshoot the truth in magnitude); noise bias is the
/// plain mean of the estimates and absent when the model has no noise
/// coordinates.
struct BiasSummary {
    double mean_bias_true = 0.0;
    std::optional<double> mean_bias_noise;
};

BiasSummary coefficient_bias(const std::vector<Eigen::VectorXd>& estimates,
                             const Eigen::VectorXd& truth);

/// Variable-selection behaviour over runs: mean selected counts, overall and
/// among the truly-zero coefficients.
struct SelectionSummary {
    double mean_n_selected = 0.0;
    double mean_n_noise_selected = 0.0;
};

SelectionSummary selection_stats(const std::vector<Eigen::VectorXd>& estimates,
                                 const Eigen::VectorXd& truth);

}  // namespace shrinklab
