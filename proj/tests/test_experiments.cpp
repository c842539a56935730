#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "krigreg/experiments.hpp"
#include "krigreg/random.hpp"

using Catch::Approx;
using namespace krigreg;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "krigreg_exp_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

ExperimentConfig small_config(const std::string& function, const fs::path& out) {
    ExperimentConfig config;
    config.function = function;
    config.counts = {6, 9};
    config.rng_seed = 11;
    config.grid = {13, 13};
    config.out_dir = out;
    config.reg.max_iters = 15;
    config.reg.n_seeds = 10;
    return config;
}

int run_cli(const std::string& args, const fs::path& log_path) {
    const std::string cmd =
        std::string(KRIGREG_CLI_PATH) + " " + args + " > " + log_path.string() + " 2>&1";
    return std::system(cmd.c_str());
}

}  // namespace

TEST_CASE("run_convergence") {
    SECTION("writes one trace per count with normalized first row") {
        const fs::path out = fresh_dir("conv");
        std::ostringstream log;
        CHECK(run_convergence(small_config("franke", out), log) == 0);
        for (const int n : {6, 9}) {
            const fs::path csv = out / ("convergence_franke_n" + std::to_string(n) + ".csv");
            REQUIRE(fs::exists(csv));
            REQUIRE(fs::exists(csv.string() + ".meta.json"));
            std::ifstream in(csv);
            std::string header, first;
            std::getline(in, header);
            std::getline(in, first);
            CHECK(header == "iter,iter_norm,kappa,kappa_norm,theta_1,theta_2");
            CHECK(first.find("0,0,") == 0);
            CHECK(first.substr(first.size() - 4) == ",1,1");  // kappa_norm, theta_1 start
        }
        CHECK(log.str().find("kappa_ratio=") != std::string::npos);
    }
    SECTION("traces are value-blind: byte-identical across functions") {
        const fs::path out_a = fresh_dir("conv_a");
        const fs::path out_b = fresh_dir("conv_b");
        std::ostringstream log;
        REQUIRE(run_convergence(small_config("griewank", out_a), log) == 0);
        REQUIRE(run_convergence(small_config("cosin2", out_b), log) == 0);
        CHECK(read_file(out_a / "convergence_griewank_n9.csv") ==
              read_file(out_b / "convergence_cosin2_n9.csv"));
    }
    SECTION("reruns are byte-identical") {
        const fs::path out_a = fresh_dir("conv_rep_a");
        const fs::path out_b = fresh_dir("conv_rep_b");
        std::ostringstream log;
        REQUIRE(run_convergence(small_config("sasena", out_a), log) == 0);
        REQUIRE(run_convergence(small_config("sasena", out_b), log) == 0);
        for (const int n : {6, 9}) {
            const std::string name = "convergence_sasena_n" + std::to_string(n) + ".csv";
            CHECK(read_file(out_a / name) == read_file(out_b / name));
            CHECK(read_file(out_a / (name + ".meta.json")) ==
                  read_file(out_b / (name + ".meta.json")));
        }
    }
}

TEST_CASE("run_compare") {
    SECTION("produces surfaces, error fields and matching reports") {
        const fs::path out = fresh_dir("cmp");
        ExperimentConfig config = small_config("griewank", out);
        config.counts = {9};
        config.reg.theta0 = Eigen::VectorXd::Constant(2, 2.0);
        std::ostringstream log;
        CHECK(run_compare(config, log) == 0);

        for (const std::string variant : {"baseline", "regularized"}) {
            CHECK(fs::exists(out / ("compare_griewank_n9_" + variant + "_surface.csv")));
            CHECK(fs::exists(out / ("compare_griewank_n9_" + variant + "_error.csv")));
            REQUIRE(fs::exists(out / ("compare_griewank_n9_" + variant + "_report.json")));
        }
        const auto base =
            nlohmann::json::parse(read_file(out / "compare_griewank_n9_baseline_report.json"));
        const auto reg = nlohmann::json::parse(
            read_file(out / "compare_griewank_n9_regularized_report.json"));
        CHECK(base.at("point_set_hash") == reg.at("point_set_hash"));
        CHECK(base.at("kappa_theta0") == reg.at("kappa_theta0"));
        CHECK(base.at("meta").at("condition_norm") == "2-norm");
        CHECK(reg.at("kappa_regularized").get<double>() <=
              base.at("kappa_theta0").get<double>());
        CHECK(base.at("rmse").is_number());
        CHECK(reg.at("roughness").is_number());
    }
    SECTION("constant values give a flat surface and zero rmse") {
        const auto& fn = testlab::find_function("gfunction");
        Rng rng(8);
        Eigen::MatrixXd unit(12, 2);
        for (Eigen::Index i = 0; i < 12; ++i)
            unit.row(i) << uniform01(rng), uniform01(rng);
        const TrainingSet training =
            TrainingSet::from_unit(unit, Eigen::VectorXd::Constant(12, 4.25), fn.domain);

        RegularizerConfig reg;
        reg.rng_seed = 3;
        reg.max_iters = 10;
        const CompareResult outcome = compare_on(fn, training, reg, {9, 9});
        REQUIRE(outcome.ok());
        // Truth is not constant, so compare surfaces against the constant directly.
        CHECK((outcome.baseline->surface.values().array() - 4.25).abs().maxCoeff() < 1e-10);
        CHECK((outcome.regularized->surface.values().array() - 4.25).abs().maxCoeff() < 1e-10);
    }
    SECTION("training on lattice nodes pins both error fields to zero there") {
        const auto& fn = testlab::find_function("franke");
        Eigen::MatrixXd unit(9, 2);
        Eigen::VectorXd values(9);
        int row = 0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                unit.row(row) << i / 2.0, j / 2.0;
                const Eigen::VectorXd x = fn.domain.from_unit(unit.row(row).transpose());
                values[row++] = fn.evaluator(x[0], x[1]);
            }
        const TrainingSet training = TrainingSet::from_unit(unit, values, fn.domain);
        RegularizerConfig reg;
        reg.rng_seed = 4;
        reg.max_iters = 15;
        const CompareResult outcome = compare_on(fn, training, reg, {5, 5});
        REQUIRE(outcome.ok());
        const double scale =
            std::max(1.0, training.values().cwiseAbs().maxCoeff());
        for (const auto* variant : {&outcome.baseline, &outcome.regularized})
            for (int i = 0; i < 5; i += 2)
                for (int j = 0; j < 5; j += 2)
                    CHECK(std::abs((**variant).report.difference.values()(i, j)) <=
                          1e-8 * scale);
    }
    SECTION("a singular baseline is isolated, reported and survives") {
        // 121 random points at theta0 = 1 sit far below the double-precision
        // positive-definiteness floor; the baseline fit fails while the tuned
        // fit succeeds.
        const fs::path out = fresh_dir("cmp_singular");
        ExperimentConfig config = small_config("griewank", out);
        config.counts = {121};
        config.grid = {9, 9};
        config.rng_seed = 2;
        std::ostringstream log;
        CHECK(run_compare(config, log) == 1);

        const auto base = nlohmann::json::parse(
            read_file(out / "compare_griewank_n121_baseline_report.json"));
        CHECK(base.contains("error"));
        CHECK(base.at("kappa_theta0").get<double>() == kKappaSingular);
        CHECK_FALSE(fs::exists(out / "compare_griewank_n121_baseline_surface.csv"));
        const auto reg = nlohmann::json::parse(
            read_file(out / "compare_griewank_n121_regularized_report.json"));
        CHECK(reg.contains("rmse"));
        CHECK(fs::exists(out / "compare_griewank_n121_regularized_surface.csv"));
    }
}

TEST_CASE("fit and predict runners") {
    const fs::path dir = fresh_dir("fitpredict");
    const auto& fn = testlab::find_function("irregular");
    const TrainingSet training = testlab::sample_random(fn, 14, 9);
    atomic_write_file(dir / "points.csv", points_to_csv(training));

    SECTION("fit from csv, predict at a training point") {
        FitOptions options;
        options.points_csv = dir / "points.csv";
        options.model_out = dir / "model.json";
        options.function = "irregular";
        std::ostringstream log;
        REQUIRE(run_fit(options, log) == 0);
        REQUIRE(fs::exists(options.model_out));

        const KrigingModel loaded = load_model(options.model_out);
        const Eigen::Vector2d q = training.locations().row(3).transpose();
        CHECK(loaded.predict(q).value ==
              Approx(training.values()[3]).margin(1e-8));

        PredictOptions predict;
        predict.model_path = options.model_out;
        predict.queries = {q};
        std::ostringstream out;
        REQUIRE(run_predict(predict, out) == 0);
        CHECK(out.str().find("# krigreg-model") == 0);
        CHECK(out.str().find("kappa=") != std::string::npos);
        CHECK(out.str().find("condition_norm=2-norm") != std::string::npos);
        CHECK(out.str().find("value,extrapolated") != std::string::npos);
    }
    SECTION("empty query list produces empty output and success") {
        FitOptions options;
        options.points_csv = dir / "points.csv";
        options.model_out = dir / "model2.json";
        options.function = "irregular";
        std::ostringstream log;
        REQUIRE(run_fit(options, log) == 0);
        PredictOptions predict;
        predict.model_path = options.model_out;
        std::ostringstream out;
        CHECK(run_predict(predict, out) == 0);
        CHECK(out.str().empty());
    }
    SECTION("bounding-box domain inference") {
        FitOptions options;
        options.points_csv = dir / "points.csv";
        options.model_out = dir / "model3.json";
        std::ostringstream log;
        REQUIRE(run_fit(options, log) == 0);
        const auto j = nlohmann::json::parse(read_file(options.model_out));
        const DomainBox box = domain_from_json(j.at("domain"));
        CHECK(box.lower()[0] == training.locations().col(0).minCoeff());
        CHECK(box.upper()[1] == training.locations().col(1).maxCoeff());
    }
}

TEST_CASE("command-line interface") {
    const fs::path dir = fresh_dir("cli");
    const fs::path log = dir / "log.txt";

    SECTION("help and version") {
        CHECK(run_cli("--help", log) == 0);
        CHECK(run_cli("--version", log) == 0);
    }
    SECTION("fit then predict through the binary") {
        const auto& fn = testlab::find_function("cosin2");
        const TrainingSet training = testlab::sample_random(fn, 10, 4);
        atomic_write_file(dir / "pts.csv", points_to_csv(training));

        REQUIRE(run_cli("fit --points " + (dir / "pts.csv").string() + " --out " +
                            (dir / "m.json").string() + " --function cosin2 --theta0 3",
                        log) == 0);
        REQUIRE(fs::exists(dir / "m.json"));

        const Eigen::Vector2d q = training.locations().row(0).transpose();
        const std::string query =
            format_double(q[0]) + "," + format_double(q[1]);
        REQUIRE(run_cli("predict --model " + (dir / "m.json").string() + " --query " + query,
                        log) == 0);
        const std::string output = read_file(log);
        CHECK(output.find("# krigreg-model") != std::string::npos);

        // Last CSV field of the data row is the extrapolation flag; the value
        // before it must reproduce the training value.
        const KrigingModel model = load_model(dir / "m.json");
        const double expected = model.predict(q).value;
        CHECK(output.find(format_double(expected)) != std::string::npos);
    }
    SECTION("convergence through the binary with a config file") {
        atomic_write_file(dir / "run.conf",
                          "function=franke\ncounts=5,7\nseed=13\nmax-iters=8\nseeds-n=5\n"
                          "out-dir=" + (dir / "out").string() + "\n");
        REQUIRE(run_cli("convergence --config " + (dir / "run.conf").string(), log) == 0);
        CHECK(fs::exists(dir / "out" / "convergence_franke_n5.csv"));
        CHECK(fs::exists(dir / "out" / "convergence_franke_n7.csv"));

        // Command-line flags override the config file.
        REQUIRE(run_cli("convergence --config " + (dir / "run.conf").string() +
                            " --counts 6 --out-dir " + (dir / "out2").string(),
                        log) == 0);
        CHECK(fs::exists(dir / "out2" / "convergence_franke_n6.csv"));
        CHECK_FALSE(fs::exists(dir / "out2" / "convergence_franke_n5.csv"));
    }
    SECTION("unknown function is a clean error") {
        CHECK(run_cli("convergence --function nope --counts 5", log) != 0);
    }
}
