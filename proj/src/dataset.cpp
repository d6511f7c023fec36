#include "shrinklab/dataset.hpp"

#include <cmath>
#include <string>

#include "shrinklab/common.hpp"

namespace shrinklab {

StandardizationParams column_stats(const Dataset& data) {
    const int n = data.n();
    const int p = data.p();
    if (n < 2) {
        throw DegeneratePredictorError("column_stats: need at least 2 rows, got " +
                                       std::to_string(n));
    }
    StandardizationParams params;
    params.means = data.X.colwise().mean();
    params.sds.resize(p);
    for (int j = 0; j < p; ++j) {
        const double ss = (data.X.col(j).array() - params.means[j]).square().sum();
        const double sd = std::sqrt(ss / (n - 1));
        if (!(sd > 0.0)) {
            throw DegeneratePredictorError("column_stats: predictor " + std::to_string(j) +
                                           " has zero variance");
        }
        params.sds[j] = sd;
    }
    return params;
}

std::pair<Dataset, StandardizationParams> standardize(const Dataset& dev) {
    StandardizationParams params = column_stats(dev);
    return {apply_standardization(params, dev), std::move(params)};
}

Dataset apply_standardization(const StandardizationParams& params, const Dataset& data) {
    Dataset out;
    out.X = (data.X.rowwise() - params.means.transpose()).array().rowwise() /
            params.sds.transpose().array();
    out.y = data.y;
    return out;
}

}  // namespace shrinklab
