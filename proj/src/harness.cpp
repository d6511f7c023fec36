#include "shrinklab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "shrinklab/common.hpp"
#include "shrinklab/csv.hpp"
#include "shrinklab/firth.hpp"
#include "shrinklab/glm.hpp"
#include "shrinklab/penalized.hpp"
#include "shrinklab/rng.hpp"
#include "shrinklab/uniform.hpp"

namespace shrinklab {

const char* method_name(Method m) {
    switch (m) {
        case Method::ML: return "ml";
        case Method::LU: return "lu";
        case Method::BU: return "bu";
        case Method::Ridge: return "ridge";
        case Method::PML: return "pml";
        case Method::Lasso: return "lasso";
        case Method::AdaptiveLasso: return "alasso";
        case Method::Garrote: return "garrote";
        case Method::Firth: return "firth";
    }
    throw std::logic_error("unreachable method");
}

const char* predictor_set_name(PredictorSet set) {
    switch (set) {
        case PredictorSet::FiveTrue: return "five_true";
        case PredictorSet::FiveTrueFiveNoise: return "five_true_five_noise";
        case PredictorSet::TenTrue: return "ten_true";
    }
    throw std::logic_error("unreachable predictor set");
}

Eigen::VectorXd true_betas(PredictorSet set) {
    switch (set) {
        case PredictorSet::FiveTrue: {
            Eigen::VectorXd b(5);
            b << 0.2, 0.2, 0.2, 0.5, 0.8;
            return b;
        }
        case PredictorSet::FiveTrueFiveNoise: {
            Eigen::VectorXd b = Eigen::VectorXd::Zero(10);
            b.head(5) << 0.2, 0.2, 0.2, 0.5, 0.8;
            return b;
        }
        case PredictorSet::TenTrue: {
            Eigen::VectorXd b(10);
            b << 0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.5, 0.5, 0.8, 0.8;
            return b;
        }
    }
    throw std::logic_error("unreachable predictor set");
}

int Scenario::df() const { return static_cast<int>(true_betas(predictors).size()); }

int Scenario::n_events() const { return epv * df(); }

int Scenario::n_total() const {
    return static_cast<int>(std::llround(n_events() / event_rate));
}

std::string Scenario::code() const {
    const char* set_code = predictors == PredictorSet::FiveTrue          ? "p5t"
                           : predictors == PredictorSet::FiveTrueFiveNoise ? "p5n"
                                                                           : "p10";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s-r%02d-e%02d-v%02d", set_code,
                  static_cast<int>(std::llround(rho * 10)),
                  static_cast<int>(std::llround(event_rate * 100)), epv);
    return buf;
}

std::vector<Scenario> enumerate_scenarios() {
    std::vector<Scenario> all;
    for (PredictorSet set : {PredictorSet::FiveTrue, PredictorSet::FiveTrueFiveNoise,
                             PredictorSet::TenTrue}) {
        for (double rho : {0.0, 0.5}) {
            for (double rate : {0.1, 0.5}) {
                for (int epv : {3, 5, 10, 20, 50}) {
                    all.push_back(Scenario{set, rho, rate, epv});
                }
            }
        }
    }
    return all;
}

namespace {

/// Stable tag for the scenario family an intercept belongs to: every EPV
/// level of (predictor set, rho, event rate) shares one solved intercept.
std::uint64_t family_tag(const Scenario& s) {
    return derive_seed(0xfa111e5u,
                       {static_cast<std::uint64_t>(s.predictors),
                        static_cast<std::uint64_t>(std::llround(s.rho * 1e9)),
                        static_cast<std::uint64_t>(std::llround(s.event_rate * 1e9))});
}

/// Stable tag for one cell, fed into every per-run seed derivation so
/// streams never collide across cells.
std::uint64_t scenario_tag(const Scenario& s) {
    return derive_seed(0x5ce2a210u, {family_tag(s), static_cast<std::uint64_t>(s.epv)});
}

/// Methods to fit, in canonical order, with ML always present: exclusion
/// decisions and shrinkage comparisons both need the ML fit.
std::vector<Method> effective_methods(const HarnessConfig& config) {
    std::vector<Method> out{Method::ML};
    for (Method m : kAllMethods) {
        if (m == Method::ML) {
            continue;
        }
        if (std::find(config.methods.begin(), config.methods.end(), m) !=
            config.methods.end()) {
            out.push_back(m);
        }
    }
    return out;
}

/// Coefficients back on the original predictor scale, so they are
/// comparable to the data-generating values.
void destandardize(const StandardizationParams& params, double alpha_std,
                   const Eigen::VectorXd& betas_std, double* alpha, Eigen::VectorXd* betas) {
    *betas = betas_std.cwiseQuotient(params.sds);
    *alpha = alpha_std - betas->dot(params.means);
}

}  // namespace

double scenario_intercept(const Scenario& scenario, const HarnessConfig& config) {
    return solve_intercept(
        true_betas(scenario.predictors), scenario.rho, scenario.event_rate,
        config.intercept_mc_size,
        derive_seed(config.master_seed, {streams::kIntercept, family_tag(scenario)}));
}

ScenarioContext prepare_scenario(const Scenario& scenario, const HarnessConfig& config,
                                 std::optional<double> intercept_hint) {
    if (config.dev_pool_size < 10 * scenario.n_total() ||
        config.validation_size < 10 * scenario.n_total()) {
        throw std::invalid_argument("prepare_scenario: pool sizes must be at least 10x the "
                                    "scenario sample size " +
                                    std::to_string(scenario.n_total()));
    }
    ScenarioContext ctx;
    ctx.scenario = scenario;
    const std::uint64_t tag = scenario_tag(scenario);

    ctx.model.betas = true_betas(scenario.predictors);
    ctx.model.rho = scenario.rho;
    ctx.model.intercept =
        intercept_hint ? *intercept_hint : scenario_intercept(scenario, config);

    ctx.dev_pool = generate_population(
        ctx.model, config.dev_pool_size,
        derive_seed(config.master_seed, {streams::kDevPool, tag}));

    const Population val = generate_population(
        ctx.model, config.validation_size,
        derive_seed(config.master_seed, {streams::kValidation, tag}));
    ctx.validation.X = val.X;
    ctx.validation.y = val.y;
    ctx.true_c = c_statistic(
        linear_predictor(ctx.model.intercept, ctx.model.betas, ctx.validation.X),
        ctx.validation.y);
    return ctx;
}

RunRecord simulate_run(const ScenarioContext& ctx, const HarnessConfig& config,
                       int run_index) {
    RunRecord record;
    record.run_index = run_index;
    const std::uint64_t tag = scenario_tag(ctx.scenario);
    const std::uint64_t run = static_cast<std::uint64_t>(run_index);

    try {
        const Dataset dev = draw_development_sample(
            ctx.dev_pool, ctx.scenario.n_events(), ctx.scenario.n_total(),
            derive_seed(config.master_seed, {streams::kDraw, tag, run}));
        const auto [sdev, params] = standardize(dev);
        const Dataset sval = apply_standardization(params, ctx.validation);

        const FitOptions& opts = config.fit_options;
        const FitResult ml = fit_ml(sdev, opts);
        if (ml.separation_detected) {
            record.excluded = true;
            record.reason = "separation";
            return record;
        }

        // Tuning machinery shared across the penalized methods of this run.
        const std::vector<Method> methods = effective_methods(config);
        const bool needs_cv = std::any_of(methods.begin(), methods.end(), [](Method m) {
            return m == Method::Ridge || m == Method::Lasso ||
                   m == Method::AdaptiveLasso || m == Method::Garrote;
        });
        const bool needs_grid =
            needs_cv ||
            std::find(methods.begin(), methods.end(), Method::PML) != methods.end();
        LambdaGrid grid;
        CvPlan plan;
        if (needs_grid) {
            grid = lambda_grid();
        }
        if (needs_cv) {
            plan = make_cv_plan(
                sdev, config.cv_folds,
                derive_seed(config.master_seed, {streams::kCvPlan, tag, run}));
        }

        for (Method m : methods) {
            FitResult fit;
            switch (m) {
                case Method::ML:
                    fit = ml;
                    break;
                case Method::LU:
                    fit = likelihood_uniform(ml, sdev, ctx.scenario.df(), opts);
                    break;
                case Method::BU:
                    fit = bootstrap_uniform(
                        sdev, ml, config.bootstrap_reps, opts,
                        derive_seed(config.master_seed, {streams::kBootstrap, tag, run}));
                    break;
                case Method::Ridge:
                    fit = fit_ridge(sdev, grid, plan, opts);
                    break;
                case Method::PML:
                    fit = fit_pml(sdev, grid, opts);
                    break;
                case Method::Lasso:
                    fit = fit_lasso(sdev, grid, plan, opts);
                    break;
                case Method::AdaptiveLasso:
                    fit = fit_adaptive_lasso(sdev, grid, plan, ml, opts);
                    break;
                case Method::Garrote:
                    fit = fit_garrote(sdev, grid, plan, ml, opts);
                    break;
                case Method::Firth:
                    fit = fit_firth(sdev);
                    break;
            }

            MethodMetrics metrics;
            metrics.method = m;
            metrics.slope = slope_for_run(fit, sval);
            metrics.c_stat = c_statistic(linear_predictor(fit, sval.X), sval.y);
            metrics.lambda = fit.lambda;
            metrics.shrinkage_factor = fit.shrinkage_factor;
            metrics.n_selected = fit.n_selected();
            for (Eigen::Index j = 0; j < fit.betas.size(); ++j) {
                if (fit.betas[j] != 0.0 && ctx.model.betas[j] == 0.0) {
                    ++metrics.n_noise_selected;
                }
            }
            metrics.converged = fit.converged;
            destandardize(params, fit.intercept, fit.betas, &metrics.intercept,
                          &metrics.betas);
            record.metrics.push_back(std::move(metrics));
        }
    } catch (const std::exception& e) {
        // A fitter failure invalidates the run, never the scenario.
        record.excluded = true;
        record.reason = e.what();
        record.metrics.clear();
    }
    return record;
}

ScenarioResult run_scenario(const ScenarioContext& ctx, const HarnessConfig& config) {
    ScenarioResult result;
    result.scenario = ctx.scenario;
    result.true_intercept = ctx.model.intercept;
    result.true_c = ctx.true_c;
    result.n_runs = config.runs;
    result.runs.resize(config.runs);

    // Work-stealing over run indices; each run writes its own slot, so the
    // record sequence is independent of scheduling.
    std::atomic<int> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    const auto worker = [&]() {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= config.runs) {
                return;
            }
            try {
                result.runs[i] = simulate_run(ctx, config, i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
                return;
            }
        }
    };
    const int pool = std::clamp(config.threads, 1, std::max(1, config.runs));
    if (pool == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(pool);
        for (int t = 0; t < pool; ++t) {
            threads.emplace_back(worker);
        }
        for (std::thread& t : threads) {
            t.join();
        }
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }

    // Serial aggregation in run order.
    const std::vector<Method> methods = effective_methods(config);
    std::vector<std::vector<double>> slopes(methods.size());
    std::vector<std::vector<double>> c_stats(methods.size());
    std::vector<std::vector<Eigen::VectorXd>> estimates(methods.size());
    int retained = 0;
    for (const RunRecord& record : result.runs) {
        if (record.excluded) {
            ++result.n_excluded;
            continue;
        }
        ++retained;
        for (std::size_t k = 0; k < methods.size(); ++k) {
            slopes[k].push_back(record.metrics[k].slope);
            c_stats[k].push_back(record.metrics[k].c_stat);
            estimates[k].push_back(record.metrics[k].betas);
        }
    }
    if (retained > 0) {
        for (std::size_t k = 0; k < methods.size(); ++k) {
            MethodSummary summary;
            summary.method = methods[k];
            summary.slopes = aggregate_slopes(slopes[k]);
            summary.median_c = percentile(c_stats[k], 0.5);
            if (methods[k] != Method::ML) {
                summary.shrinkage_corr = shrinkage_correlation(slopes[k], slopes[0]);
            }
            summary.bias = coefficient_bias(estimates[k], ctx.model.betas);
            summary.selection = selection_stats(estimates[k], ctx.model.betas);
            result.summaries.push_back(std::move(summary));
        }
    }
    return result;
}

ScenarioResult run_scenario(const Scenario& scenario, const HarnessConfig& config) {
    return run_scenario(prepare_scenario(scenario, config), config);
}

namespace {

std::string config_line(const HarnessConfig& config) {
    std::string methods;
    for (Method m : effective_methods(config)) {
        if (!methods.empty()) {
            methods += '+';
        }
        methods += method_name(m);
    }
    // Deliberately excludes the thread count: output is identical for any.
    return "#config=runs=" + std::to_string(config.runs) +
           ",dev_pool=" + std::to_string(config.dev_pool_size) +
           ",validation=" + std::to_string(config.validation_size) +
           ",bootstrap=" + std::to_string(config.bootstrap_reps) +
           ",cv_folds=" + std::to_string(config.cv_folds) +
           ",intercept_mc=" + std::to_string(config.intercept_mc_size) +
           ",seed=" + std::to_string(config.master_seed) + ",methods=" + methods;
}

/// CSV-safe failure reason: commas, quotes and newlines replaced so every
/// row stays a flat one-line record.
std::string sanitize_reason(const std::string& reason) {
    std::string out = reason;
    for (char& c : out) {
        if (c == ',' || c == '"' || c == '\n' || c == '\r') {
            c = ';';
        }
    }
    return out;
}

}  // namespace

void write_results(const std::vector<ScenarioResult>& results, const std::string& dir,
                   const HarnessConfig& config) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    std::ofstream runs(fs::path(dir) / "runs.csv", std::ios::binary);
    if (!runs) {
        throw std::runtime_error("write_results: cannot open runs.csv under " + dir);
    }
    runs << "#schema=shrinklab.runs.v1\n" << config_line(config) << "\n";
    runs << "scenario,run,method,slope_raw,slope_winsorized,c_stat,lambda,"
            "shrinkage_factor,n_selected,n_noise_selected,excluded,reason\n";
    for (const ScenarioResult& res : results) {
        for (const RunRecord& record : res.runs) {
            if (record.excluded) {
                runs << res.scenario.code() << ',' << record.run_index << ",,,,,,,,,1,"
                     << sanitize_reason(record.reason) << "\n";
                continue;
            }
            for (const MethodMetrics& mm : record.metrics) {
                runs << res.scenario.code() << ',' << record.run_index << ','
                     << method_name(mm.method) << ',' << format_double(mm.slope) << ','
                     << format_double(std::max(mm.slope, kSlopeFloor)) << ','
                     << format_double(mm.c_stat) << ',' << format_optional(mm.lambda) << ','
                     << format_optional(mm.shrinkage_factor) << ',' << mm.n_selected << ','
                     << mm.n_noise_selected << ",0,\n";
            }
        }
    }
    runs.close();

    std::ofstream summary(fs::path(dir) / "summary.csv", std::ios::binary);
    if (!summary) {
        throw std::runtime_error("write_results: cannot open summary.csv under " + dir);
    }
    summary << "#schema=shrinklab.summary.v1\n" << config_line(config) << "\n";
    summary << "scenario,predictors,rho,event_rate,epv,n_total,n_events,true_intercept,"
               "true_c,n_runs_included,n_runs_excluded,method,median_slope,slope_p5,"
               "slope_p95,mad_log_slope,rmsd_log_slope,median_cstat,spearman_vs_optimal,"
               "mean_coef_bias_true,mean_coef_bias_noise,mean_n_selected,"
               "mean_n_noise_selected\n";
    for (const ScenarioResult& res : results) {
        const Scenario& s = res.scenario;
        for (const MethodSummary& ms : res.summaries) {
            summary << s.code() << ',' << predictor_set_name(s.predictors) << ','
                    << format_double(s.rho) << ',' << format_double(s.event_rate) << ','
                    << s.epv << ',' << s.n_total() << ',' << s.n_events() << ','
                    << format_double(res.true_intercept) << ',' << format_double(res.true_c)
                    << ',' << (res.n_runs - res.n_excluded) << ',' << res.n_excluded << ','
                    << method_name(ms.method) << ',' << format_double(ms.slopes.median)
                    << ',' << format_double(ms.slopes.p5) << ','
                    << format_double(ms.slopes.p95) << ','
                    << format_double(ms.slopes.mad_log) << ','
                    << format_double(ms.slopes.rmsd_log) << ','
                    << format_double(ms.median_c) << ','
                    << format_optional(ms.shrinkage_corr) << ','
                    << format_double(ms.bias.mean_bias_true) << ','
                    << format_optional(ms.bias.mean_bias_noise) << ','
                    << format_double(ms.selection.mean_n_selected) << ','
                    << format_double(ms.selection.mean_n_noise_selected) << "\n";
        }
    }
}

}  // namespace shrinklab
