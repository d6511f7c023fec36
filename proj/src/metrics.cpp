#include "shrinklab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "shrinklab/common.hpp"
#include "shrinklab/glm.hpp"

namespace shrinklab {

namespace {

/// Ranks 1..n with tied values sharing their average rank.
std::vector<double> average_ranks(const std::vector<double>& values) {
    const int n = static_cast<int>(values.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&values](int a, int b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    int i = 0;
    while (i < n) {
        int j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) {
            ++j;
        }
        const double avg = 0.5 * (i + j) + 1.0;  // mean of ranks i+1 .. j+1
        for (int k = i; k <= j; ++k) {
            ranks[order[k]] = avg;
        }
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double c_statistic(const Eigen::VectorXd& lp, const Eigen::VectorXd& y) {
    const int n = static_cast<int>(lp.size());
    double n1 = 0.0;
    for (int i = 0; i < n; ++i) {
        n1 += y[i];
    }
    const double n0 = n - n1;
    if (n1 == 0.0 || n0 == 0.0) {
        throw UndefinedMetricError("c_statistic: needs both outcome classes");
    }
    // Rank-sum form of the Mann-Whitney statistic; average ranks make ties
    // count exactly one half, matching the pairwise definition.
    const std::vector<double> ranks =
        average_ranks(std::vector<double>(lp.data(), lp.data() + n));
    double rank_sum = 0.0;
    for (int i = 0; i < n; ++i) {
        if (y[i] == 1.0) {
            rank_sum += ranks[i];
        }
    }
    return (rank_sum - n1 * (n1 + 1.0) / 2.0) / (n1 * n0);
}

double calibration_slope(const Eigen::VectorXd& lp, const Eigen::VectorXd& y) {
    const double events = y.sum();
    if (events == 0.0 || events == static_cast<double>(y.size())) {
        throw UndefinedMetricError("calibration_slope: needs both outcome classes");
    }
    const double mean = lp.mean();
    const double sd = std::sqrt((lp.array() - mean).square().sum() / (lp.size() - 1));
    if (!(sd > 0.0)) {
        throw UndefinedMetricError("calibration_slope: constant linear predictor");
    }
    // Regress on the standardized predictor and rescale; maximum likelihood
    // is invariant to the affine change, and the conditioning is far better
    // when the raw predictor is nearly constant.
    Dataset uni;
    uni.X = ((lp.array() - mean) / sd).matrix();
    uni.y = y;
    const FitResult fit = fit_ml(uni);
    return fit.betas[0] / sd;
}

double slope_for_run(const FitResult& fit, const Dataset& validation) {
    if (fit.n_selected() == 0) {
        return kNoSelectionSlope;
    }
    return calibration_slope(linear_predictor(fit, validation.X), validation.y);
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) {
        throw UndefinedMetricError("percentile of an empty sample");
    }
    std::sort(values.begin(), values.end());
    const double h = (values.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= values.size()) {
        return values.back();
    }
    return values[lo] + (h - lo) * (values[lo + 1] - values[lo]);
}

SlopeSummary aggregate_slopes(const std::vector<double>& slopes) {
    if (slopes.empty()) {
        throw UndefinedMetricError("aggregate_slopes: no runs to summarize");
    }
    SlopeSummary s;
    s.n_runs = static_cast<int>(slopes.size());
    s.median = percentile(slopes, 0.5);
    s.p5 = percentile(slopes, 0.05);
    s.p95 = percentile(slopes, 0.95);

    std::vector<double> logs;
    logs.reserve(slopes.size());
    for (double v : slopes) {
        logs.push_back(std::log(std::max(v, kSlopeFloor)));
    }
    const double log_med = percentile(logs, 0.5);
    std::vector<double> abs_dev;
    abs_dev.reserve(logs.size());
    double sq_sum = 0.0;
    for (double l : logs) {
        abs_dev.push_back(std::abs(l - log_med));
        sq_sum += l * l;  // distance from log slope 1 = 0
    }
    s.mad_log = percentile(abs_dev, 0.5);
    s.rmsd_log = std::sqrt(sq_sum / logs.size());
    return s;
}

std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw UndefinedMetricError("spearman: size mismatch " + std::to_string(a.size()) +
                                   " vs " + std::to_string(b.size()));
    }
    if (a.size() < 2) {
        return std::nullopt;
    }
    const std::vector<double> ra = average_ranks(a);
    const std::vector<double> rb = average_ranks(b);
    const int n = static_cast<int>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double saa = 0.0;
    double sbb = 0.0;
    double sab = 0.0;
    for (int i = 0; i < n; ++i) {
        const double da = ra[i] - ma;
        const double db = rb[i] - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (saa == 0.0 || sbb == 0.0) {
        return std::nullopt;
    }
    return sab / std::sqrt(saa * sbb);
}

std::optional<double> shrinkage_correlation(const std::vector<double>& method_slopes,
                                            const std::vector<double>& ml_slopes) {
    if (method_slopes.size() != ml_slopes.size()) {
        throw UndefinedMetricError("shrinkage_correlation: unpaired slope vectors");
    }
    std::vector<double> estimated;
    std::vector<double> optimal;
    estimated.reserve(ml_slopes.size());
    optimal.reserve(ml_slopes.size());
    for (std::size_t i = 0; i < ml_slopes.size(); ++i) {
        const double log_ml = std::log(std::max(ml_slopes[i], kSlopeFloor));
        const double log_m = std::log(std::max(method_slopes[i], kSlopeFloor));
        estimated.push_back(log_m - log_ml);  // shrinkage the method applied
        optimal.push_back(-log_ml);           // shrinkage that was needed
    }
    return spearman(estimated, optimal);
}

BiasSummary coefficient_bias(const std::vector<Eigen::VectorXd>& estimates,
                             const Eigen::VectorXd& truth) {
    if (estimates.empty()) {
        throw UndefinedMetricError("coefficient_bias: no estimates");
    }
    BiasSummary out;
    double bias_true = 0.0;
    double bias_noise = 0.0;
    int n_true = 0;
    int n_noise = 0;
    for (const Eigen::VectorXd& est : estimates) {
        for (Eigen::Index j = 0; j < truth.size(); ++j) {
            if (truth[j] != 0.0) {
                // Signed away from zero, so overshoot is positive whatever
                // the sign of the true coefficient.
                bias_true += (truth[j] > 0.0 ? 1.0 : -1.0) * (est[j] - truth[j]);
                ++n_true;
            } else {
                bias_noise += est[j];
                ++n_noise;
            }
        }
    }
    out.mean_bias_true = n_true > 0 ? bias_true / n_true : 0.0;
    if (n_noise > 0) {
        out.mean_bias_noise = bias_noise / n_noise;
    }
    return out;
}

SelectionSummary selection_stats(const std::vector<Eigen::VectorXd>& estimates,
                                 const Eigen::VectorXd& truth) {
    if (estimates.empty()) {
        throw UndefinedMetricError("selection_stats: no estimates");
    }
    SelectionSummary out;
    for (const Eigen::VectorXd& est : estimates) {
        for (Eigen::Index j = 0; j < truth.size(); ++j) {
            if (est[j] != 0.0) {
                out.mean_n_selected += 1.0;
                if (truth[j] == 0.0) {
                    out.mean_n_noise_selected += 1.0;
                }
            }
        }
    }
    out.mean_n_selected /= static_cast<double>(estimates.size());
    out.mean_n_noise_selected /= static_cast<double>(estimates.size());
    return out;
}

}  // namespace shrinklab
