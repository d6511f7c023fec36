#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "shrinklab/datagen.hpp"
#include "shrinklab/fit.hpp"
#include "shrinklab/metrics.hpp"

namespace shrinklab {

/// The three candidate-predictor layouts of the factorial design.
enum class PredictorSet { FiveTrue, FiveTrueFiveNoise, TenTrue };

const char* predictor_set_name(PredictorSet set);

/// True coefficient vector for a predictor layout (noise predictors are
/// exact zeros).
Eigen::VectorXd true_betas(PredictorSet set);

/// One cell of the simulation factorial: predictor layout x correlation x
/// marginal event rate x events per candidate predictor.
struct Scenario {
    PredictorSet predictors = PredictorSet::FiveTrue;
    double rho = 0.0;
    double event_rate = 0.1;
    int epv = 3;

    int df() const;        // number of candidate predictors
    int n_events() const;  // epv * df
    int n_total() const;   // n_events / event_rate
    std::string code() const;  // compact id, e.g. "p5t-r00-e10-v03"
};

/// The full 60-cell factorial (3 layouts x 2 correlations x 2 event rates
/// x 5 events-per-variable levels).
std::vector<Scenario> enumerate_scenarios();

/// Everything the simulation loop needs beyond the scenario itself.
struct HarnessConfig {
    int runs = 200;
    int dev_pool_size = 200000;
    int validation_size = 100000;
    int bootstrap_reps = 200;
    int cv_folds = 10;
    int intercept_mc_size = 500000;
    std::uint64_t master_seed = 20260825;
    int threads = 1;
    std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
    FitOptions fit_options;
};

/// Validation-set performance of one method on one run. Coefficients are
/// reported on the original predictor scale, comparable to the true model.
struct MethodMetrics {
    Method method = Method::ML;
    double c_stat = 0.0;
    double slope = 0.0;  // raw, pre-winsorization
    std::optional<double> lambda;
    std::optional<double> shrinkage_factor;
    int n_selected = 0;
    int n_noise_selected = 0;
    bool converged = true;
    Eigen::VectorXd betas;
    double intercept = 0.0;
};

/// One simulation run. Runs whose ML fit is separated (or that fail for any
/// other reason, recorded verbatim) carry no metrics and are excluded from
/// summaries.
struct RunRecord {
    int run_index = 0;
    bool excluded = false;
    std::string reason;                  // "separation" or the failure text
    std::vector<MethodMetrics> metrics;  // empty when excluded
};

/// Per-method aggregate over the retained runs of a scenario.
struct MethodSummary {
    Method method = Method::ML;
    SlopeSummary slopes;
    double median_c = 0.0;
    std::optional<double> shrinkage_corr;  // absent for ML itself
    BiasSummary bias;
    SelectionSummary selection;
};

/// A scenario's complete output: run-level records and method summaries.
struct ScenarioResult {
    Scenario scenario;
    double true_intercept = 0.0;
    double true_c = 0.0;  // c-statistic of the true linear predictor
    int n_runs = 0;
    int n_excluded = 0;
    std::vector<RunRecord> runs;
    std::vector<MethodSummary> summaries;
};

/// Context shared by every run of a scenario: the solved intercept, the
/// development pool, and the validation sample.
struct ScenarioContext {
    Scenario scenario;
    TrueModel model;
    Population dev_pool;
    Dataset validation;
    double true_c = 0.0;
};

/// Solves the intercept and generates the shared populations for a
/// scenario. The intercept depends only on (predictor set, rho, event
/// rate), so callers sweeping a factorial may pass a cached value via
/// `intercept_hint` to skip re-solving; pool sizes must be at least ten
/// times the scenario's sample size.
ScenarioContext prepare_scenario(const Scenario& scenario, const HarnessConfig& config,
                                 std::optional<double> intercept_hint = std::nullopt);

/// The solved intercept for a scenario's (predictor set, rho, event rate)
/// family; identical for every EPV level of the family.
double scenario_intercept(const Scenario& scenario, const HarnessConfig& config);

/// Fits every configured method on one development draw and evaluates on
/// the validation set. Exposed for tests; `run_scenario` drives it.
RunRecord simulate_run(const ScenarioContext& ctx, const HarnessConfig& config, int run_index);

/// Runs the full simulation for one scenario. Results are byte-identical
/// for any thread count: per-run seeds depend only on (master seed,
/// scenario, run index) and aggregation is serial in run order.
ScenarioResult run_scenario(const Scenario& scenario, const HarnessConfig& config);

ScenarioResult run_scenario(const ScenarioContext& ctx, const HarnessConfig& config);

/// Writes runs.csv and summary.csv under `dir` (created if absent).
void write_results(const std::vector<ScenarioResult>& results, const std::string& dir,
                   const HarnessConfig& config);

}  // namespace shrinklab
