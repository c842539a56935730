#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <limits>

#include "krigreg/io.hpp"
#include "krigreg/random.hpp"
#include "krigreg/testlab.hpp"

using Catch::Approx;
using namespace krigreg;

namespace {

std::filesystem::path temp_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "krigreg_io_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("format_double round-trips exactly") {
    Rng rng(1001);
    for (int trial = 0; trial < 1000; ++trial) {
        const double exponent = uniform(rng, -300.0, 300.0);
        const double value = (uniform01(rng) - 0.5) * std::pow(10.0, exponent);
        CHECK(parse_double(format_double(value)) == value);
    }
    CHECK(parse_double(format_double(0.0)) == 0.0);
    CHECK(parse_double(format_double(std::numeric_limits<double>::max())) ==
          std::numeric_limits<double>::max());
    CHECK(format_double(0.1) == "0.1");
    CHECK_THROWS_AS(parse_double("1.0x"), std::invalid_argument);
    CHECK_THROWS_AS(parse_double(""), std::invalid_argument);
}

TEST_CASE("fnv1a64 known vectors") {
    CHECK(to_hex(fnv1a64("", 0)) == "cbf29ce484222325");
    CHECK(to_hex(fnv1a64("a", 1)) == "af63dc4c8601ec8c");
}

TEST_CASE("model serialization") {
    const auto& fn = testlab::find_function("sasena");
    const TrainingSet training = testlab::sample_random(fn, 12, 31);
    const KrigingModel model =
        KrigingModel::fit(training, KernelParams::isotropic(2, 6.0));
    const auto path = temp_dir() / "model.json";

    SECTION("save, load, predict round trip") {
        save_model(model, path);
        const KrigingModel loaded = load_model(path);
        CHECK(loaded.kappa() == Approx(model.kappa()).epsilon(1e-12));
        Rng rng(32);
        for (int trial = 0; trial < 100; ++trial) {
            const Eigen::Vector2d q{uniform(rng, 0.0, 5.0), uniform(rng, 0.0, 5.0)};
            const double a = model.predict(q).value;
            const double b = loaded.predict(q).value;
            CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
        }
    }
    SECTION("metadata fields are present and stable") {
        const nlohmann::json j = model_to_json(model);
        CHECK(j.at("format") == "krigreg-model");
        CHECK(j.at("condition_norm") == "2-norm");
        CHECK(j.at("theta").size() == 2);
        CHECK(j.at("p") == nlohmann::json::array({2.0, 2.0}));
        CHECK(j.at("kappa").get<double>() == model.kappa());
    }
    SECTION("malformed files are reported with context") {
        atomic_write_file(path, "{ not json");
        CHECK_THROWS_AS(load_model(path), std::invalid_argument);
        atomic_write_file(path, "{\"format\": \"other\"}");
        CHECK_THROWS_AS(load_model(path), std::invalid_argument);
        atomic_write_file(path, "{\"format\": \"krigreg-model\"}");
        CHECK_THROWS_AS(load_model(path), std::invalid_argument);
    }
}

TEST_CASE("grid and trace CSV") {
    SECTION("grid csv golden format") {
        testlab::GridField grid(DomainBox::square(0.0, 1.0), 2, 2);
        grid.values() << 1.0, 2.5, -3.0, 0.125;
        CHECK(grid_to_csv(grid) ==
              "x1,x2,value\n"
              "0,0,1\n"
              "0,1,2.5\n"
              "1,0,-3\n"
              "1,1,0.125\n");
    }
    SECTION("trace csv golden format") {
        ConvergenceTrace trace;
        trace.append(Eigen::Vector2d{1.0, 1.0}, 8.0);
        trace.append(Eigen::Vector2d{2.0, 1.0}, 4.0);
        trace.append(Eigen::Vector2d{2.0, 2.0}, 2.0);
        CHECK(trace_to_csv(trace) ==
              "iter,iter_norm,kappa,kappa_norm,theta_1,theta_2\n"
              "0,0,8,1,1,1\n"
              "1,0.5,4,0.5,2,1\n"
              "2,1,2,0.25,2,2\n");
    }
    SECTION("points csv round trip") {
        const auto& fn = testlab::find_function("griewank");
        const TrainingSet training = testlab::sample_random(fn, 8, 77);
        const PointsCsv parsed = parse_points_csv(points_to_csv(training));
        CHECK(parsed.locations == training.locations());
        CHECK(parsed.values == training.values());
    }
    SECTION("points csv rejects bad rows") {
        CHECK_THROWS_AS(parse_points_csv("x1,x2,value\n5\n"), std::invalid_argument);
        CHECK_THROWS_AS(parse_points_csv("x1,x2,value\n1,2,3\n1,2\n"), std::invalid_argument);
        CHECK_THROWS_AS(parse_points_csv("x1,x2,value\n1,2,3\n1,oops,3\n"),
                        std::invalid_argument);
        CHECK_THROWS_AS(parse_points_csv(""), std::invalid_argument);
        CHECK_THROWS_AS(parse_points_csv("header,only\n"), std::invalid_argument);
    }
}

TEST_CASE("atomic_write_file") {
    const auto path = temp_dir() / "nested" / "file.txt";
    std::filesystem::remove_all(temp_dir() / "nested");
    atomic_write_file(path, "hello\n");
    CHECK(read_file(path) == "hello\n");
    atomic_write_file(path, "replaced\n");
    CHECK(read_file(path) == "replaced\n");
    CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
}

TEST_CASE("point_set_hash distinguishes data") {
    const auto& fn = testlab::find_function("franke");
    const TrainingSet a = testlab::sample_random(fn, 10, 1);
    const TrainingSet b = testlab::sample_random(fn, 10, 2);
    CHECK(point_set_hash(a) == point_set_hash(a));
    CHECK(point_set_hash(a) != point_set_hash(b));

    Eigen::VectorXd other = a.values();
    other[0] += 1.0;
    const TrainingSet c = TrainingSet::from_unit(a.unit_locations(), other, a.domain());
    CHECK(point_set_hash(a) != point_set_hash(c));
}
