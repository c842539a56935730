#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "krigreg/io.hpp"
#include "krigreg/kriging.hpp"
#include "krigreg/regularizer.hpp"
#include "krigreg/testlab.hpp"
#include "krigreg/version.hpp"

namespace krigreg {

// One experiment batch: which function, which training-set sizes, the seed
// shared by sampling and the length-scale search, the evaluation grid, the
// regularizer settings and where files go.
struct ExperimentConfig {
    std::string function = "griewank";
    std::vector<int> counts{16, 36, 64, 121};
    std::uint64_t rng_seed = 2;
    std::array<int, 2> grid{101, 101};
    RegularizerConfig reg;
    std::filesystem::path out_dir = "out";

    RegularizerConfig effective_reg() const {
        RegularizerConfig r = reg;
        r.rng_seed = rng_seed;
        return r;
    }
};

inline nlohmann::json config_to_json(const ExperimentConfig& config) {
    const RegularizerConfig reg = config.effective_reg();
    return nlohmann::json{
        {"function", config.function},
        {"counts", config.counts},
        {"rng_seed", config.rng_seed},
        {"grid", {config.grid[0], config.grid[1]}},
        {"regularizer",
         {{"theta0", vector_to_json(reg.theta0)},
          {"n_seeds", reg.n_seeds},
          {"seed_factor_range", {reg.seed_factor_range[0], reg.seed_factor_range[1]}},
          {"theta_bounds", {reg.theta_bounds[0], reg.theta_bounds[1]}},
          {"initial_step", reg.initial_step},
          {"step_shrink", reg.step_shrink},
          {"step_tol", reg.step_tol},
          {"max_iters", reg.max_iters},
          {"rng_seed", reg.rng_seed}}},
    };
}

inline std::string config_hash(const ExperimentConfig& config) {
    const std::string dump = config_to_json(config).dump();
    return to_hex(fnv1a64(dump.data(), dump.size()));
}

// Common stamp carried by every output file (inline for JSON, sidecar for CSV).
inline nlohmann::json metadata_json(const ExperimentConfig& config) {
    const RegularizerConfig reg = config.effective_reg();
    return nlohmann::json{
        {"tool_version", kVersion},
        {"config_hash", config_hash(config)},
        {"rng_seed", config.rng_seed},
        {"theta_bounds", {reg.theta_bounds[0], reg.theta_bounds[1]}},
        {"condition_norm", kConditionNorm},
    };
}

// ---- compare experiment (reconstruction with and without regularization) --

struct VariantResult {
    Eigen::VectorXd theta;
    double kappa = 0.0;
    bool eigen_fallback = false;
    testlab::GridField surface;
    testlab::ErrorReport report;
};

struct CompareResult {
    std::string points_hash;
    double kappa0 = 0.0;  // at theta0, from the regularization trace
    ConvergenceTrace trace;
    std::optional<VariantResult> baseline;
    std::string baseline_error;
    std::optional<VariantResult> regularized;
    std::string regularized_error;

    bool ok() const { return baseline_error.empty() && regularized_error.empty(); }
};

namespace detail {

inline VariantResult make_variant(const TrainingSet& training, const KernelParams& params,
                                  const testlab::GridField& truth,
                                  std::array<int, 2> resolution) {
    KrigingModel model = KrigingModel::fit(training, params);
    testlab::GridField surface = testlab::evaluate_grid(model, resolution);
    testlab::ErrorReport report = testlab::error_report(truth, surface);
    return VariantResult{params.theta(), model.kappa(), model.system().used_eigen_fallback(),
                         std::move(surface), std::move(report)};
}

}  // namespace detail

// Fits the same training set with theta0 (baseline) and with the tuned
// parameters, and evaluates both against the analytic truth on the grid.
// Fit failures are captured per variant rather than thrown, so one singular
// system does not lose the other half of the comparison.
inline CompareResult compare_on(const testlab::TestFunction& fn, const TrainingSet& training,
                                const RegularizerConfig& reg, std::array<int, 2> resolution) {
    const testlab::GridField truth = testlab::evaluate_grid(fn, resolution);

    CompareResult result;
    result.points_hash = point_set_hash(training);

    RegularizeResult tuned = regularize(training, reg);
    result.kappa0 = tuned.trace.kappa0();
    result.trace = std::move(tuned.trace);

    const KernelParams baseline_params(reg.initial_theta(training.dim()));
    try {
        result.baseline.emplace(detail::make_variant(training, baseline_params, truth, resolution));
    } catch (const factorization_error& e) {
        result.baseline_error = e.what();
    }
    try {
        result.regularized.emplace(detail::make_variant(training, tuned.params, truth, resolution));
    } catch (const factorization_error& e) {
        result.regularized_error = e.what();
    }
    return result;
}

// ---- file-producing runners ----------------------------------------------

namespace detail {

inline std::string count_tag(const std::string& function, int count) {
    return function + "_n" + std::to_string(count);
}

inline void write_csv_with_sidecar(const std::filesystem::path& path, const std::string& csv,
                                   nlohmann::json sidecar) {
    atomic_write_file(path, csv);
    std::filesystem::path meta = path;
    meta += ".meta.json";
    atomic_write_file(meta, sidecar.dump(2) + "\n");
}

inline nlohmann::json variant_report_json(const ExperimentConfig& config,
                                          const CompareResult& outcome,
                                          const std::optional<VariantResult>& variant,
                                          const std::string& error, const std::string& name,
                                          int count, const Eigen::VectorXd& theta0,
                                          const Eigen::VectorXd& theta_reg) {
    nlohmann::json j{
        {"meta", metadata_json(config)},
        {"function", config.function},
        {"count", count},
        {"variant", name},
        {"point_set_hash", outcome.points_hash},
        {"kappa_theta0", outcome.kappa0},
        {"kappa_regularized", outcome.trace.final_kappa()},
        {"theta0", vector_to_json(theta0)},
        {"theta_regularized", vector_to_json(theta_reg)},
    };
    if (variant) {
        j["rmse"] = variant->report.rmse;
        j["max_abs"] = variant->report.max_abs;
        j["roughness"] = variant->report.roughness;
        j["kappa"] = variant->kappa;
        j["solver"] = variant->eigen_fallback ? "eigendecomposition" : "cholesky";
    } else {
        j["error"] = error;
    }
    return j;
}

}  // namespace detail

// Figure-1 style experiment: tuning traces for each training-set size.
// Returns the number of failed sub-runs.
inline int run_convergence(const ExperimentConfig& config, std::ostream& log) {
    const testlab::TestFunction& fn = testlab::find_function(config.function);
    const RegularizerConfig reg = config.effective_reg();
    int failures = 0;
    for (const int count : config.counts) {
        const std::string tag = detail::count_tag(config.function, count);
        try {
            TrainingSet training = testlab::sample_random(fn, count, config.rng_seed);
            RegularizeResult tuned = regularize(training, reg);

            nlohmann::json sidecar{
                {"meta", metadata_json(config)},
                {"function", config.function},
                {"count", count},
                {"point_set_hash", point_set_hash(training)},
                {"kappa0", tuned.kappa0()},
                {"kappa_final", tuned.final_kappa()},
                {"theta_final", vector_to_json(tuned.theta())},
            };
            detail::write_csv_with_sidecar(config.out_dir / ("convergence_" + tag + ".csv"),
                                           trace_to_csv(tuned.trace), std::move(sidecar));
            log << "convergence " << tag << ": kappa0=" << format_double(tuned.kappa0())
                << " kappa_final=" << format_double(tuned.final_kappa()) << " kappa_ratio="
                << format_double(tuned.final_kappa() / tuned.kappa0()) << " iters="
                << tuned.trace.entries().back().iter << "\n";
        } catch (const std::exception& e) {
            ++failures;
            log << "convergence " << tag << ": FAILED: " << e.what() << "\n";
        }
    }
    return failures;
}

// Figure-2/3 style experiment: surfaces and error fields with and without
// regularization.  Returns the number of failed sub-runs (a variant whose
// fit is singular counts as one).
inline int run_compare(const ExperimentConfig& config, std::ostream& log) {
    const testlab::TestFunction& fn = testlab::find_function(config.function);
    const RegularizerConfig reg = config.effective_reg();
    int failures = 0;
    for (const int count : config.counts) {
        const std::string tag = detail::count_tag(config.function, count);
        try {
            TrainingSet training = testlab::sample_random(fn, count, config.rng_seed);
            CompareResult outcome = compare_on(fn, training, reg, config.grid);

            const Eigen::VectorXd theta0 = reg.initial_theta(training.dim());
            const Eigen::VectorXd theta_reg = outcome.trace.entries().back().theta;
            const std::array<std::pair<std::string, const std::optional<VariantResult>*>, 2>
                variants{{{"baseline", &outcome.baseline}, {"regularized", &outcome.regularized}}};

            for (const auto& [name, variant] : variants) {
                const std::string& error =
                    name == "baseline" ? outcome.baseline_error : outcome.regularized_error;
                const std::filesystem::path report_path =
                    config.out_dir / ("compare_" + tag + "_" + name + "_report.json");
                atomic_write_file(report_path,
                                  detail::variant_report_json(config, outcome, *variant, error,
                                                              name, count, theta0, theta_reg)
                                          .dump(2) +
                                      "\n");
                if (!*variant) {
                    ++failures;
                    log << "compare " << tag << " " << name << ": FAILED: " << error << "\n";
                    continue;
                }
                nlohmann::json sidecar{
                    {"meta", metadata_json(config)},
                    {"function", config.function},
                    {"count", count},
                    {"variant", name},
                    {"domain", domain_to_json(fn.domain)},
                    {"resolution", {config.grid[0], config.grid[1]}},
                    {"point_set_hash", outcome.points_hash},
                };
                detail::write_csv_with_sidecar(
                    config.out_dir / ("compare_" + tag + "_" + name + "_surface.csv"),
                    grid_to_csv((*variant)->surface), sidecar);
                detail::write_csv_with_sidecar(
                    config.out_dir / ("compare_" + tag + "_" + name + "_error.csv"),
                    grid_to_csv((*variant)->report.difference), sidecar);
                log << "compare " << tag << " " << name
                    << ": kappa=" << format_double((*variant)->kappa)
                    << " rmse=" << format_double((*variant)->report.rmse)
                    << " max_abs=" << format_double((*variant)->report.max_abs)
                    << " roughness=" << format_double((*variant)->report.roughness) << "\n";
            }
        } catch (const std::exception& e) {
            ++failures;
            log << "compare " << tag << ": FAILED: " << e.what() << "\n";
        }
    }
    return failures;
}

// ---- fit / predict -------------------------------------------------------

struct FitOptions {
    std::filesystem::path points_csv;
    std::filesystem::path model_out;
    std::string function;               // names a benchmark domain box
    std::optional<DomainBox> domain;    // explicit box; wins over bounding box
    Eigen::VectorXd theta0;             // empty -> all ones
    bool run_regularizer = false;
    RegularizerConfig reg;
};

inline DomainBox bounding_box(const Eigen::MatrixXd& locations) {
    Eigen::VectorXd lo = locations.colwise().minCoeff().transpose();
    Eigen::VectorXd hi = locations.colwise().maxCoeff().transpose();
    for (Eigen::Index j = 0; j < lo.size(); ++j)
        if (!(lo[j] < hi[j]))
            throw std::invalid_argument(
                "cannot infer a domain box: points are degenerate along axis " +
                std::to_string(j + 1) + "; pass an explicit domain");
    return DomainBox(std::move(lo), std::move(hi));
}

inline int run_fit(const FitOptions& options, std::ostream& log) {
    PointsCsv points = parse_points_csv(read_file(options.points_csv));
    DomainBox domain = options.domain             ? *options.domain
                       : !options.function.empty() ? testlab::find_function(options.function).domain
                                                   : bounding_box(points.locations);
    TrainingSet training(std::move(points.locations), std::move(points.values), std::move(domain));

    Eigen::VectorXd theta;
    if (options.theta0.size() == 0)
        theta = Eigen::VectorXd::Ones(training.dim());
    else if (options.theta0.size() == 1 && training.dim() > 1)
        theta = Eigen::VectorXd::Constant(training.dim(), options.theta0[0]);
    else
        theta = options.theta0;
    if (options.run_regularizer) {
        RegularizerConfig reg = options.reg;
        reg.theta0 = theta;
        RegularizeResult tuned = regularize(training, reg);
        theta = tuned.theta();
        log << "regularized: kappa " << format_double(tuned.kappa0()) << " -> "
            << format_double(tuned.final_kappa()) << "\n";
    }

    KrigingModel model = KrigingModel::fit(std::move(training), KernelParams(theta));
    save_model(model, options.model_out);
    log << "model written to " << options.model_out.string() << " (n=" << model.training().size()
        << ", kappa=" << format_double(model.kappa()) << ")\n";
    return 0;
}

struct PredictOptions {
    std::filesystem::path model_path;
    std::vector<Eigen::VectorXd> queries;
};

inline int run_predict(const PredictOptions& options, std::ostream& out) {
    if (options.queries.empty()) return 0;
    const KrigingModel model = load_model(options.model_path);

    out << "# krigreg-model n=" << model.training().size() << " k=" << model.training().dim()
        << " kappa=" << format_double(model.kappa()) << " condition_norm=" << kConditionNorm
        << "\n";
    for (Eigen::Index j = 0; j < model.training().dim(); ++j)
        out << "x" << (j + 1) << ",";
    out << "value,extrapolated\n";
    for (const Eigen::VectorXd& query : options.queries) {
        const Prediction prediction = model.predict(query);
        for (Eigen::Index j = 0; j < query.size(); ++j) out << format_double(query[j]) << ",";
        out << format_double(prediction.value) << "," << (prediction.extrapolated ? 1 : 0)
            << "\n";
    }
    return 0;
}

}  // namespace krigreg
