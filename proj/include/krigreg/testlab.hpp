#pragma once

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "krigreg/domain.hpp"
#include "krigreg/kriging.hpp"
#include "krigreg/random.hpp"

namespace krigreg::testlab {

// The 2D benchmark suite.  Formulas are transcribed literally; no clamping
// or reparameterization.

inline double griewank(double x1, double x2) {
    return x1 * x1 / 4000.0 + x2 * x2 / 4000.0 -
           std::cos(x1) * std::cos(x2 / std::sqrt(2.0)) + 1.0;
}

inline double sasena(double x1, double x2) {
    return 2.0 + 0.01 * (x2 - x1 * x1) * (x2 - x1 * x1) + (1.0 - x1) * (1.0 - x1) +
           2.0 * (2.0 - x2) * (2.0 - x2) +
           7.0 * std::sin(0.5 * x1) * std::sin(0.7 * x1 * x2);
}

inline double franke(double x1, double x2) {
    // Second exponential keeps the non-squared (9*x2+1)/10 term.
    return 0.75 * std::exp(-(9.0 * x1 - 2.0) * (9.0 * x1 - 2.0) / 4.0 -
                           (9.0 * x2 - 2.0) * (9.0 * x2 - 2.0) / 4.0) +
           0.75 * std::exp(-(9.0 * x1 + 1.0) * (9.0 * x1 + 1.0) / 49.0 -
                           (9.0 * x2 + 1.0) / 10.0) +
           0.5 * std::exp(-(9.0 * x1 - 7.0) * (9.0 * x1 - 7.0) / 4.0 -
                          (9.0 * x2 - 3.0) * (9.0 * x2 - 3.0) / 4.0) -
           0.2 * std::exp(-(9.0 * x1 - 4.0) * (9.0 * x1 - 4.0) -
                          (9.0 * x2 - 7.0) * (9.0 * x2 - 7.0));
}

inline double gfunction(double x1, double x2) {
    // a_i = (i - 2) / 2 for i = 1, 2; the a_1 = -0.5 factor may go negative.
    const double a1 = -0.5, a2 = 0.0;
    return (std::abs(4.0 * x1 - 2.0) + a1) / (1.0 + a1) *
           ((std::abs(4.0 * x2 - 2.0) + a2) / (1.0 + a2));
}

inline double irregular(double x1, double x2) {
    return std::exp(x1) / 5.0 - x2 / 5.0 + std::pow(x2, 6) / 3.0 + 4.0 * std::pow(x2, 4) -
           4.0 * x2 * x2 + 7.0 / 10.0 * x1 * x1 + std::pow(x1, 4) +
           3.0 / (4.0 * x1 * x1 + 4.0 * x2 * x2 + 1.0);
}

inline double cosin2(double x1, double x2) {
    return std::cos(10.0 * x1) + std::sin(10.0 * x2) + x1 * x2;
}

struct TestFunction {
    std::string name;
    DomainBox domain;
    std::function<double(double, double)> evaluator;
};

inline const std::vector<TestFunction>& all_functions() {
    static const std::vector<TestFunction> functions = {
        {"griewank", DomainBox::square(-5.0, 5.0), griewank},
        {"sasena", DomainBox::square(0.0, 5.0), sasena},
        {"franke", DomainBox::square(0.0, 1.0), franke},
        {"gfunction", DomainBox::square(0.0, 1.0), gfunction},
        {"irregular", DomainBox::square(-1.0, 1.0), irregular},
        {"cosin2", DomainBox::square(0.0, 1.0), cosin2},
    };
    return functions;
}

inline const TestFunction& find_function(std::string_view name) {
    for (const auto& fn : all_functions())
        if (fn.name == name) return fn;
    throw std::invalid_argument("unknown test function: " + std::string(name));
}

// Formula value at x; rejects queries outside the closed domain box.
inline double evaluate(const TestFunction& fn, const Eigen::VectorXd& x) {
    if (x.size() != 2) throw std::invalid_argument("evaluate: expected a 2-vector");
    if (!x.allFinite()) throw std::invalid_argument("evaluate: non-finite query");
    if (!fn.domain.contains(x, 1e-12))
        throw std::invalid_argument("evaluate: query outside the domain of " + fn.name);
    return fn.evaluator(x[0], x[1]);
}

// n i.i.d. uniform samples of fn over its domain box.  The unit-cube draws
// are stored as the normalized coordinates verbatim, so equal seeds give
// bit-identical normalized locations across functions regardless of their
// raw boxes.  Redraws on (never observed in practice) duplicate collisions.
inline TrainingSet sample_random(const TestFunction& fn, int count, std::uint64_t rng_seed) {
    if (count < 1) throw std::invalid_argument("sample_random: count must be positive");
    Rng rng(rng_seed);
    Eigen::MatrixXd unit(count, 2);
    int accepted = 0;
    while (accepted < count) {
        Eigen::RowVector2d u{uniform01(rng), uniform01(rng)};
        bool collides = false;
        for (int i = 0; i < accepted && !collides; ++i)
            collides = (unit.row(i) - u).norm() < kDuplicateTol;
        if (collides) continue;
        unit.row(accepted++) = u;
    }
    Eigen::VectorXd values(count);
    for (int i = 0; i < count; ++i) {
        const Eigen::VectorXd x = fn.domain.from_unit(unit.row(i).transpose());
        values[i] = fn.evaluator(x[0], x[1]);
    }
    return TrainingSet::from_unit(unit, std::move(values), fn.domain);
}

// Values on a uniform lattice over a 2D domain box; the lattice includes
// both corners of each axis.
class GridField {
public:
    GridField(DomainBox domain, int rows, int cols)
        : domain_(std::move(domain)), values_(Eigen::MatrixXd::Zero(rows, cols)) {
        if (domain_.dim() != 2) throw std::invalid_argument("GridField: domain must be 2D");
        if (rows < 2 || cols < 2)
            throw std::invalid_argument("GridField: resolution must be at least 2 per axis");
    }

    const DomainBox& domain() const { return domain_; }
    int rows() const { return static_cast<int>(values_.rows()); }
    int cols() const { return static_cast<int>(values_.cols()); }
    Eigen::MatrixXd& values() { return values_; }
    const Eigen::MatrixXd& values() const { return values_; }

    double x1_at(int i) const { return coord(domain_.lower()[0], domain_.upper()[0], i, rows()); }
    double x2_at(int j) const { return coord(domain_.lower()[1], domain_.upper()[1], j, cols()); }

private:
    static double coord(double lo, double hi, int index, int count) {
        if (index == count - 1) return hi;
        return lo + (hi - lo) * (static_cast<double>(index) / (count - 1));
    }

    DomainBox domain_;
    Eigen::MatrixXd values_;
};

template <typename Evaluator>
GridField evaluate_grid_with(const DomainBox& domain, std::array<int, 2> resolution,
                             Evaluator&& evaluator) {
    GridField grid(domain, resolution[0], resolution[1]);
    for (int i = 0; i < grid.rows(); ++i)
        for (int j = 0; j < grid.cols(); ++j)
            grid.values()(i, j) = evaluator(grid.x1_at(i), grid.x2_at(j));
    return grid;
}

inline GridField evaluate_grid(const TestFunction& fn, std::array<int, 2> resolution) {
    return evaluate_grid_with(fn.domain, resolution,
                              [&](double x1, double x2) { return fn.evaluator(x1, x2); });
}

inline GridField evaluate_grid(const KrigingModel& model, std::array<int, 2> resolution) {
    if (model.training().dim() != 2)
        throw std::invalid_argument("evaluate_grid: model must be 2D");
    return evaluate_grid_with(model.training().domain(), resolution, [&](double x1, double x2) {
        return model.predict(Eigen::Vector2d{x1, x2}).value;
    });
}

// Mean squared discrete second difference of a field along both axes;
// zero for any affine field, invariant under adding a constant.
inline double roughness(const GridField& field) {
    const auto& v = field.values();
    const Eigen::Index m1 = v.rows(), m2 = v.cols();
    double sum = 0.0;
    std::int64_t count = 0;
    for (Eigen::Index i = 1; i + 1 < m1; ++i)
        for (Eigen::Index j = 0; j < m2; ++j) {
            const double d = v(i + 1, j) - 2.0 * v(i, j) + v(i - 1, j);
            sum += d * d;
            ++count;
        }
    for (Eigen::Index i = 0; i < m1; ++i)
        for (Eigen::Index j = 1; j + 1 < m2; ++j) {
            const double d = v(i, j + 1) - 2.0 * v(i, j) + v(i, j - 1);
            sum += d * d;
            ++count;
        }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

struct ErrorReport {
    double rmse = 0.0;
    double max_abs = 0.0;
    double roughness = 0.0;     // of the estimate field
    GridField difference;       // estimate - truth, cell by cell
};

inline ErrorReport error_report(const GridField& truth, const GridField& estimate) {
    if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols())
        throw std::invalid_argument("error_report: resolution mismatch");
    if (!(truth.domain() == estimate.domain()))
        throw std::invalid_argument("error_report: domain mismatch");

    ErrorReport report{0.0, 0.0, testlab::roughness(estimate),
                       GridField(truth.domain(), truth.rows(), truth.cols())};
    report.difference.values() = estimate.values() - truth.values();
    const auto& diff = report.difference.values();
    report.max_abs = diff.cwiseAbs().maxCoeff();
    report.rmse = std::sqrt(diff.array().square().mean());
    return report;
}

}  // namespace krigreg::testlab
