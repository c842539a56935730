// Command-line runner for the kriging regularization experiments.
//
//   krigreg convergence  ... tuning traces per training-set size
//   krigreg compare      ... surfaces and error fields, with/without tuning
//   krigreg fit          ... build a model file from a points CSV
//   krigreg predict      ... evaluate a model file at query points
//
// Every flag can also be supplied through `--config <file>` holding
// `key=value` lines (the key is the flag name without dashes); explicit
// flags override the file.

#include <CLI11.hpp>

#include <Eigen/Core>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "krigreg/experiments.hpp"

namespace {

using ConfigMap = std::map<std::string, std::vector<std::string>>;

std::vector<std::string> split_commas(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        out.push_back(text.substr(
            start, comma == std::string::npos ? std::string::npos : comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::vector<double> parse_doubles(const std::string& text) {
    std::vector<double> out;
    for (const std::string& field : split_commas(text)) out.push_back(krigreg::parse_double(field));
    return out;
}

std::vector<int> parse_ints(const std::string& text) {
    std::vector<int> out;
    for (const std::string& field : split_commas(text))
        out.push_back(static_cast<int>(std::stol(field)));
    return out;
}

Eigen::VectorXd to_eigen(const std::vector<double>& values) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
    return v;
}

ConfigMap read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    ConfigMap map;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::size_t begin = line.find_first_not_of(" \t");
        if (begin == std::string::npos) continue;
        const std::size_t end = line.find_last_not_of(" \t");
        line = line.substr(begin, end - begin + 1);
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config file " + path + " line " +
                                        std::to_string(line_no) + ": expected key=value");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        const std::size_t vbegin = value.find_first_not_of(" \t");
        value = vbegin == std::string::npos ? "" : value.substr(vbegin);
        map[key].push_back(value);
    }
    return map;
}

// Fish `--config <file>` (or --config=<file>) out of argv before CLI11 runs,
// so file values become the defaults that explicit flags then override.
std::string prescan_config_path(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) return argv[i + 1];
        if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
    }
    return {};
}

const std::string* single(const ConfigMap& map, const std::string& key) {
    const auto it = map.find(key);
    return it == map.end() ? nullptr : &it->second.back();
}

struct ExperimentFlags {
    std::string function = "griewank";
    std::vector<int> counts{16, 36, 64, 121};
    std::uint64_t seed = 2;
    std::vector<int> grid{101, 101};
    std::vector<double> theta0;
    std::vector<double> theta_bounds{1e-3, 1e3};
    int seeds_n = 50;
    int max_iters = 200;
    double step_tol = 1e-4;
    double initial_step = 0.5;
    double step_shrink = 0.5;
    std::string out_dir = "out";
    std::string config_path;

    void apply(const ConfigMap& file) {
        if (const auto* v = single(file, "function")) function = *v;
        if (const auto* v = single(file, "counts")) counts = parse_ints(*v);
        if (const auto* v = single(file, "seed")) seed = std::stoull(*v);
        if (const auto* v = single(file, "grid")) grid = parse_ints(*v);
        if (const auto* v = single(file, "theta0")) theta0 = parse_doubles(*v);
        if (const auto* v = single(file, "theta-bounds")) theta_bounds = parse_doubles(*v);
        if (const auto* v = single(file, "seeds-n")) seeds_n = std::stoi(*v);
        if (const auto* v = single(file, "max-iters")) max_iters = std::stoi(*v);
        if (const auto* v = single(file, "step-tol")) step_tol = krigreg::parse_double(*v);
        if (const auto* v = single(file, "initial-step"))
            initial_step = krigreg::parse_double(*v);
        if (const auto* v = single(file, "step-shrink"))
            step_shrink = krigreg::parse_double(*v);
        if (const auto* v = single(file, "out-dir")) out_dir = *v;
    }

    void attach(CLI::App& cmd) {
        cmd.add_option("--function", function, "Test function name");
        cmd.add_option("--counts", counts, "Training-set sizes")->delimiter(',');
        cmd.add_option("--seed", seed, "RNG seed for sampling and tuning");
        cmd.add_option("--grid", grid, "Evaluation grid resolution m1,m2")
            ->delimiter(',')
            ->expected(1, 2);
        cmd.add_option("--theta0", theta0,
                       "Starting/baseline theta (one value or one per dimension)")
            ->delimiter(',');
        cmd.add_option("--theta-bounds", theta_bounds, "Search bounds theta_min,theta_max")
            ->delimiter(',')
            ->expected(2);
        cmd.add_option("--seeds-n", seeds_n, "Perturbation candidates before the local search");
        cmd.add_option("--max-iters", max_iters, "Poll-iteration cap of the local search");
        cmd.add_option("--step-tol", step_tol, "Stop when the poll step falls below this");
        cmd.add_option("--initial-step", initial_step, "Initial poll step in ln(theta)");
        cmd.add_option("--step-shrink", step_shrink, "Step factor after a failed poll sweep");
        cmd.add_option("--out-dir", out_dir, "Output directory");
        cmd.add_option("--config", config_path, "Key-value config file mirroring every flag");
    }

    krigreg::ExperimentConfig to_config() const {
        krigreg::ExperimentConfig config;
        config.function = function;
        config.counts = counts;
        config.rng_seed = seed;
        config.grid = {grid.at(0), grid.size() > 1 ? grid.at(1) : grid.at(0)};
        config.out_dir = out_dir;
        config.reg.n_seeds = seeds_n;
        config.reg.max_iters = max_iters;
        config.reg.step_tol = step_tol;
        config.reg.initial_step = initial_step;
        config.reg.step_shrink = step_shrink;
        config.reg.theta_bounds = {theta_bounds.at(0), theta_bounds.at(1)};
        if (theta0.size() == 1)
            config.reg.theta0 = Eigen::VectorXd::Constant(2, theta0[0]);
        else if (!theta0.empty())
            config.reg.theta0 = to_eigen(theta0);
        return config;
    }
};

struct FitFlags {
    std::string points;
    std::string out = "model.json";
    std::string function;
    std::vector<double> domain;
    std::vector<double> theta0;
    std::vector<double> theta_bounds{1e-3, 1e3};
    bool regularize = false;
    std::uint64_t seed = 2;
    int seeds_n = 50;
    int max_iters = 200;
    double step_tol = 1e-4;
    std::string config_path;

    void apply(const ConfigMap& file) {
        if (const auto* v = single(file, "points")) points = *v;
        if (const auto* v = single(file, "out")) out = *v;
        if (const auto* v = single(file, "function")) function = *v;
        if (const auto* v = single(file, "domain")) domain = parse_doubles(*v);
        if (const auto* v = single(file, "theta0")) theta0 = parse_doubles(*v);
        if (const auto* v = single(file, "theta-bounds")) theta_bounds = parse_doubles(*v);
        if (const auto* v = single(file, "regularize")) regularize = (*v == "true" || *v == "1");
        if (const auto* v = single(file, "seed")) seed = std::stoull(*v);
        if (const auto* v = single(file, "seeds-n")) seeds_n = std::stoi(*v);
        if (const auto* v = single(file, "max-iters")) max_iters = std::stoi(*v);
        if (const auto* v = single(file, "step-tol")) step_tol = krigreg::parse_double(*v);
    }

    void attach(CLI::App& cmd) {
        cmd.add_option("--points", points, "Input CSV with columns x1,..,xk,value");
        cmd.add_option("--out", out, "Model file to write");
        cmd.add_option("--function", function, "Take the domain box from this test function");
        cmd.add_option("--domain", domain,
                       "Domain box as lo1,hi1,lo2,hi2,... (default: bounding box of the points)")
            ->delimiter(',');
        cmd.add_option("--theta0", theta0, "Kernel theta (one value or one per dimension)")
            ->delimiter(',');
        cmd.add_option("--theta-bounds", theta_bounds, "Search bounds theta_min,theta_max")
            ->delimiter(',')
            ->expected(2);
        cmd.add_flag("--regularize", regularize,
                     "Tune theta by condition-number minimization before fitting");
        cmd.add_option("--seed", seed, "RNG seed for the tuning stage");
        cmd.add_option("--seeds-n", seeds_n, "Perturbation candidates before the local search");
        cmd.add_option("--max-iters", max_iters, "Poll-iteration cap of the local search");
        cmd.add_option("--step-tol", step_tol, "Stop when the poll step falls below this");
        cmd.add_option("--config", config_path, "Key-value config file mirroring every flag");
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kriging interpolation with condition-number kernel tuning"};
    app.require_subcommand(1);
    app.set_version_flag("--version", krigreg::kVersion);

    ConfigMap file_config;
    try {
        const std::string config_path = prescan_config_path(argc, argv);
        if (!config_path.empty()) file_config = read_config_file(config_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    ExperimentFlags convergence_flags;
    ExperimentFlags compare_flags;
    FitFlags fit_flags;
    std::string predict_model;
    std::vector<std::string> predict_queries;
    std::string predict_config;

    try {
        convergence_flags.apply(file_config);
        compare_flags.apply(file_config);
        fit_flags.apply(file_config);
        if (const auto* v = single(file_config, "model")) predict_model = *v;
        if (const auto it = file_config.find("query"); it != file_config.end())
            predict_queries = it->second;
    } catch (const std::exception& e) {
        std::cerr << "error: config file: " << e.what() << "\n";
        return 1;
    }

    CLI::App* convergence = app.add_subcommand(
        "convergence", "Write normalized condition-number tuning traces per training-set size");
    convergence_flags.attach(*convergence);

    CLI::App* compare = app.add_subcommand(
        "compare", "Write reconstruction surfaces and error fields with and without tuning");
    compare_flags.attach(*compare);

    CLI::App* fit = app.add_subcommand("fit", "Fit a model from a points CSV and save it");
    fit_flags.attach(*fit);

    CLI::App* predict = app.add_subcommand("predict", "Evaluate a saved model at query points");
    predict->add_option("--model", predict_model, "Model file written by 'fit'");
    predict->add_option("--query", predict_queries, "Query point as x1,x2,... (repeatable)");
    predict->add_option("queries", predict_queries, "Query points as x1,x2,...");
    predict->add_option("--config", predict_config, "Key-value config file mirroring every flag");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*convergence) {
            const int failures = krigreg::run_convergence(convergence_flags.to_config(), std::cout);
            return failures > 0 ? 1 : 0;
        }
        if (*compare) {
            const int failures = krigreg::run_compare(compare_flags.to_config(), std::cout);
            return failures > 0 ? 1 : 0;
        }
        if (*fit) {
            if (fit_flags.points.empty())
                throw std::invalid_argument("fit: --points is required");
            krigreg::FitOptions options;
            options.points_csv = fit_flags.points;
            options.model_out = fit_flags.out;
            options.function = fit_flags.function;
            if (!fit_flags.domain.empty()) {
                if (fit_flags.domain.size() % 2 != 0)
                    throw std::invalid_argument("--domain needs an even number of values");
                const Eigen::Index dim = static_cast<Eigen::Index>(fit_flags.domain.size() / 2);
                Eigen::VectorXd lo(dim), hi(dim);
                for (Eigen::Index j = 0; j < dim; ++j) {
                    lo[j] = fit_flags.domain[static_cast<std::size_t>(2 * j)];
                    hi[j] = fit_flags.domain[static_cast<std::size_t>(2 * j + 1)];
                }
                options.domain = krigreg::DomainBox(lo, hi);
            }
            if (!fit_flags.theta0.empty()) options.theta0 = to_eigen(fit_flags.theta0);
            options.run_regularizer = fit_flags.regularize;
            options.reg.rng_seed = fit_flags.seed;
            options.reg.n_seeds = fit_flags.seeds_n;
            options.reg.max_iters = fit_flags.max_iters;
            options.reg.step_tol = fit_flags.step_tol;
            options.reg.theta_bounds = {fit_flags.theta_bounds.at(0),
                                        fit_flags.theta_bounds.at(1)};
            return krigreg::run_fit(options, std::cout);
        }
        if (*predict) {
            if (predict_model.empty())
                throw std::invalid_argument("predict: --model is required");
            krigreg::PredictOptions options;
            options.model_path = predict_model;
            for (const std::string& q : predict_queries) {
                options.queries.push_back(to_eigen(parse_doubles(q)));
            }
            return krigreg::run_predict(options, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
