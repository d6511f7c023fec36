#pragma once

#include <Eigen/Dense>
#include <utility>

namespace shrinklab {

/// A predictor matrix with a binary outcome vector; the unit every fitter
/// consumes. Outcomes are stored as 0.0/1.0 doubles.
struct Dataset {
    Eigen::MatrixXd X;  // n x p
    Eigen::VectorXd y;  // entries in {0, 1}

    int n() const { return static_cast<int>(X.rows()); }
    int p() const { return static_cast<int>(X.cols()); }
    int event_count() const { return static_cast<int>(y.sum() + 0.5); }
    double event_rate() const { return y.mean(); }
    bool has_both_classes() const {
        const int e = event_count();
        return e > 0 && e < n();
    }
};

/// Per-predictor means and standard deviations taken from a development
/// sample. Standard deviations use the n-1 denominator.
struct StandardizationParams {
    Eigen::VectorXd means;
    Eigen::VectorXd sds;
};

/// Column means/sds of a dataset. Throws DegeneratePredictorError if any
/// column has zero variance.
StandardizationParams column_stats(const Dataset& data);

/// Standardizes the development sample to column mean 0 / sd 1 and returns
/// the parameters used, so validation data can be transformed on the same
/// scale.
std::pair<Dataset, StandardizationParams> standardize(const Dataset& dev);

/// Applies development-sample standardization parameters to another dataset.
Dataset apply_standardization(const StandardizationParams& params, const Dataset& data);

}  // namespace shrinklab
