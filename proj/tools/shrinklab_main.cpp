#include <algorithm>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "shrinklab/checks.hpp"
#include "shrinklab/harness.hpp"

namespace {

using namespace shrinklab;

Method parse_method(const std::string& name) {
    for (Method m : kAllMethods) {
        if (name == method_name(m)) {
            return m;
        }
    }
    throw CLI::ValidationError("--methods", "unknown method '" + name + "'");
}

PredictorSet parse_predictor_set(const std::string& name) {
    for (PredictorSet set : {PredictorSet::FiveTrue, PredictorSet::FiveTrueFiveNoise,
                             PredictorSet::TenTrue}) {
        if (name == predictor_set_name(set)) {
            return set;
        }
    }
    throw CLI::ValidationError("--predictors", "unknown predictor set '" + name + "'");
}

/// Simulation options shared by the `run` and `scenario` subcommands.
struct SimOptions {
    HarnessConfig config;
    std::string out = "results";
    std::vector<std::string> methods;
};

void add_sim_options(CLI::App* cmd, SimOptions* opts) {
    cmd->add_option("--out", opts->out, "Output directory for runs.csv / summary.csv")
        ->capture_default_str();
    cmd->add_option("--seed", opts->config.master_seed, "Master RNG seed")
        ->capture_default_str();
    cmd->add_option("--runs", opts->config.runs, "Simulation runs per scenario")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--threads", opts->config.threads, "Worker threads per scenario")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--dev-pool", opts->config.dev_pool_size,
                    "Development population size")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--validation", opts->config.validation_size, "Validation sample size")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--bootstrap", opts->config.bootstrap_reps,
                    "Bootstrap replicates for the bootstrap uniform factor")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--cv-folds", opts->config.cv_folds, "Cross-validation folds")
        ->check(CLI::Range(2, 1000))
        ->capture_default_str();
    cmd->add_option("--intercept-mc", opts->config.intercept_mc_size,
                    "Monte Carlo size for intercept solving")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--methods", opts->methods,
                    "Subset of methods to fit (ml always included): "
                    "ml,lu,bu,ridge,pml,lasso,alasso,garrote,firth")
        ->delimiter(',');
    cmd->set_config("--config", "", "Key=value config file (flags override it)");
}

void finalize_methods(SimOptions* opts) {
    if (opts->methods.empty()) {
        return;  // keep the default: every method
    }
    opts->config.methods.clear();
    for (const std::string& name : opts->methods) {
        opts->config.methods.push_back(parse_method(name));
    }
}

/// Runs a list of cells with a per-family intercept cache and writes CSVs.
int execute_cells(const std::vector<Scenario>& cells, SimOptions& opts) {
    finalize_methods(&opts);
    std::map<std::tuple<int, long long, long long>, double> intercepts;
    std::vector<ScenarioResult> results;
    results.reserve(cells.size());
    for (const Scenario& s : cells) {
        const auto key = std::make_tuple(static_cast<int>(s.predictors),
                                         std::llround(s.rho * 1e9),
                                         std::llround(s.event_rate * 1e9));
        auto found = intercepts.find(key);
        if (found == intercepts.end()) {
            found = intercepts.emplace(key, scenario_intercept(s, opts.config)).first;
        }
        const ScenarioContext ctx = prepare_scenario(s, opts.config, found->second);
        results.push_back(run_scenario(ctx, opts.config));
        const ScenarioResult& res = results.back();
        std::printf("%s  n=%d  runs=%d  excluded=%d\n", s.code().c_str(), s.n_total(),
                    res.n_runs, res.n_excluded);
        std::fflush(stdout);
    }
    write_results(results, opts.out, opts.config);
    std::printf("wrote %s/runs.csv and %s/summary.csv\n", opts.out.c_str(),
                opts.out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shrinkage strategies for clinical prediction models: penalized "
                 "logistic regression fitters and a Monte Carlo simulation harness"};
    app.require_subcommand(1);

    // --- run: the factorial design, optionally filtered ---------------------
    SimOptions run_opts;
    std::vector<std::string> filter_sets;
    std::vector<double> filter_rhos;
    std::vector<double> filter_rates;
    std::vector<int> filter_epvs;
    CLI::App* run_cmd = app.add_subcommand(
        "run", "Simulate the full factorial design (or a filtered subset)");
    add_sim_options(run_cmd, &run_opts);
    run_cmd->add_option("--predictors", filter_sets,
                        "Keep only these predictor sets: five_true, "
                        "five_true_five_noise, ten_true")
        ->delimiter(',');
    run_cmd->add_option("--rho", filter_rhos, "Keep only these correlations (0, 0.5)")
        ->delimiter(',');
    run_cmd->add_option("--event-rate", filter_rates, "Keep only these event rates")
        ->delimiter(',');
    run_cmd->add_option("--epv", filter_epvs, "Keep only these events-per-variable levels")
        ->delimiter(',');

    // --- scenario: one cell -------------------------------------------------
    SimOptions cell_opts;
    std::string cell_set = "five_true";
    double cell_rho = 0.0;
    double cell_rate = 0.1;
    int cell_epv = 3;
    CLI::App* cell_cmd = app.add_subcommand("scenario", "Simulate a single design cell");
    add_sim_options(cell_cmd, &cell_opts);
    cell_cmd->add_option("--predictors", cell_set, "Predictor set of the cell")
        ->required();
    cell_cmd->add_option("--rho", cell_rho, "Pairwise predictor correlation")->required();
    cell_cmd->add_option("--event-rate", cell_rate, "Marginal outcome rate")->required();
    cell_cmd->add_option("--epv", cell_epv, "Events per candidate predictor")->required();

    // --- check: behavioural acceptance suite --------------------------------
    CheckSettings check_settings;
    bool check_all = false;
    std::vector<int> check_only;
    CLI::App* check_cmd = app.add_subcommand(
        "check", "Run the fast behavioural checks (exit 0 only if all pass)");
    check_cmd->add_option("--seed", check_settings.master_seed, "Master RNG seed")
        ->capture_default_str();
    check_cmd->add_option("--threads", check_settings.threads, "Worker threads")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    check_cmd->add_flag("--all", check_all, "Run every check, not just the fast subset");
    check_cmd->add_option("--only", check_only, "Run only these check numbers")
        ->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            std::vector<Scenario> cells;
            for (const Scenario& s : enumerate_scenarios()) {
                const auto keeps = [](const auto& values, const auto& value) {
                    return values.empty() ||
                           std::find(values.begin(), values.end(), value) != values.end();
                };
                if (!keeps(filter_rhos, s.rho) || !keeps(filter_rates, s.event_rate) ||
                    !keeps(filter_epvs, s.epv)) {
                    continue;
                }
                if (!filter_sets.empty()) {
                    bool match = false;
                    for (const std::string& name : filter_sets) {
                        match = match || parse_predictor_set(name) == s.predictors;
                    }
                    if (!match) {
                        continue;
                    }
                }
                cells.push_back(s);
            }
            if (cells.empty()) {
                std::fprintf(stderr, "error: scenario filter matched no cells\n");
                return 2;
            }
            return execute_cells(cells, run_opts);
        }

        if (cell_cmd->parsed()) {
            const Scenario cell{parse_predictor_set(cell_set), cell_rho, cell_rate,
                                cell_epv};
            return execute_cells({cell}, cell_opts);
        }

        // check
        std::vector<int> ids = check_all ? all_check_ids() : quick_check_ids();
        if (!check_only.empty()) {
            ids = check_only;
        }
        bool ok = true;
        for (int id : ids) {
            const CheckOutcome outcome = run_check(id, check_settings);
            std::printf("%s\n", format_outcome(outcome).c_str());
            std::fflush(stdout);
            ok = ok && outcome.passed;
        }
        return ok ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
