#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "krigreg/correlation.hpp"
#include "krigreg/errors.hpp"
#include "krigreg/kriging.hpp"
#include "krigreg/random.hpp"

namespace krigreg {

// Settings of the two-stage length-scale search: a seeded multiplicative
// perturbation around theta0 followed by a compass search in log-theta
// space.  All moves are multiplicative, which keeps theta positive without
// projection; the box [theta_min, theta_max] stops the search from driving
// the correlation matrix to the identity.
struct RegularizerConfig {
    Eigen::VectorXd theta0;                       // empty -> all ones
    int n_seeds = 50;                             // perturbation candidates
    std::array<double, 2> seed_factor_range{0.1, 10.0};  // log-uniform factors
    std::array<double, 2> theta_bounds{1e-3, 1e3};
    double initial_step = 0.5;                    // compass step in ln(theta)
    double step_shrink = 0.5;                     // factor on a failed poll sweep
    double step_tol = 1e-4;                       // stop when step falls below
    int max_iters = 200;                          // poll-iteration cap
    std::uint64_t rng_seed = 0;

    Eigen::VectorXd initial_theta(Eigen::Index dim) const {
        if (theta0.size() == 0) return Eigen::VectorXd::Ones(dim);
        if (theta0.size() != dim)
            throw std::invalid_argument("RegularizerConfig: theta0 dimension mismatch");
        return theta0;
    }

    void validate(Eigen::Index dim) const {
        if (!(theta_bounds[0] > 0.0) || !(theta_bounds[0] < theta_bounds[1]))
            throw std::invalid_argument("RegularizerConfig: invalid theta bounds");
        if (!(seed_factor_range[0] > 0.0) || !(seed_factor_range[0] <= seed_factor_range[1]))
            throw std::invalid_argument("RegularizerConfig: invalid seed factor range");
        if (n_seeds < 0) throw std::invalid_argument("RegularizerConfig: negative n_seeds");
        if (max_iters < 0) throw std::invalid_argument("RegularizerConfig: negative max_iters");
        if (!(initial_step > 0.0) || !(step_tol > 0.0))
            throw std::invalid_argument("RegularizerConfig: steps must be positive");
        if (!(step_shrink > 0.0) || !(step_shrink < 1.0))
            throw std::invalid_argument("RegularizerConfig: step_shrink must be in (0,1)");
        const Eigen::VectorXd t0 = initial_theta(dim);
        for (Eigen::Index j = 0; j < t0.size(); ++j)
            if (t0[j] < theta_bounds[0] || t0[j] > theta_bounds[1])
                throw std::invalid_argument("RegularizerConfig: theta0 outside theta bounds");
    }
};

struct TraceEntry {
    int iter = 0;
    Eigen::VectorXd theta;
    double kappa = 0.0;
};

// Iteration history of one regularization run.  kappa0 is the value at the
// starting parameters; the normalized view divides iterations by the run's
// last iteration index and kappa by kappa0, so every trace starts at (0, 1).
class ConvergenceTrace {
public:
    void append(Eigen::VectorXd theta, double kappa) {
        const int iter = entries_.empty() ? 0 : entries_.back().iter + 1;
        entries_.push_back({iter, std::move(theta), kappa});
    }

    bool empty() const { return entries_.empty(); }
    const std::vector<TraceEntry>& entries() const { return entries_; }
    double kappa0() const { return entries_.front().kappa; }
    double final_kappa() const { return entries_.back().kappa; }

    double iter_norm(std::size_t i) const {
        const int last = entries_.back().iter;
        return last == 0 ? 0.0 : static_cast<double>(entries_[i].iter) / last;
    }

    double kappa_norm(std::size_t i) const {
        if (i == 0) return 1.0;
        return entries_[i].kappa / kappa0();
    }

private:
    std::vector<TraceEntry> entries_;
};

// kappa of the self-correlation matrix for the given unit-cube locations and
// Gaussian-kernel theta.  Total: numerically non-SPD parameters rate as
// kKappaSingular rather than raising.
inline double kappa_for_theta(const Eigen::MatrixXd& unit_points,
                              const Eigen::VectorXd& theta) {
    return condition_number(correlation_matrix(unit_points, KernelParams(theta)));
}

struct SeedSearchResult {
    Eigen::VectorXd theta;
    double kappa = 0.0;
    ConvergenceTrace trace;
};

// Stage one: evaluate kappa at theta0 and at n_seeds multiplicative
// perturbations theta0_j * f_j with f_j log-uniform in seed_factor_range
// (clamped to the bounds), and keep the best.  Ties go to the earliest
// candidate, so theta0 wins when nothing improves on it.
inline SeedSearchResult seed_search(const Eigen::MatrixXd& unit_points,
                                    const RegularizerConfig& config) {
    if (unit_points.rows() < 2)
        throw std::invalid_argument("seed_search: need at least two points");
    const Eigen::Index dim = unit_points.cols();
    config.validate(dim);

    SeedSearchResult result;
    result.theta = config.initial_theta(dim);
    result.kappa = kappa_for_theta(unit_points, result.theta);
    result.trace.append(result.theta, result.kappa);
    if (config.n_seeds == 0) return result;

    Rng rng(config.rng_seed);
    const Eigen::VectorXd theta0 = config.initial_theta(dim);
    bool any_usable = result.kappa < kKappaSingular;
    for (int c = 0; c < config.n_seeds; ++c) {
        Eigen::VectorXd candidate(dim);
        for (Eigen::Index j = 0; j < dim; ++j) {
            const double factor =
                log_uniform(rng, config.seed_factor_range[0], config.seed_factor_range[1]);
            candidate[j] = std::clamp(theta0[j] * factor, config.theta_bounds[0],
                                      config.theta_bounds[1]);
        }
        const double kappa = kappa_for_theta(unit_points, candidate);
        any_usable = any_usable || kappa < kKappaSingular;
        if (kappa < result.kappa) {
            result.theta = std::move(candidate);
            result.kappa = kappa;
        }
    }
    if (!any_usable)
        throw regularization_error(
            "seed_search: every candidate produced a numerically singular system");

    result.trace.append(result.theta, result.kappa);
    return result;
}

struct DirectSearchResult {
    Eigen::VectorXd theta;
    ConvergenceTrace trace;
};

namespace detail {

// Compass search on ln(theta): each iteration polls +/-step along every
// coordinate, greedily accepts the best strictly improving poll, and shrinks
// the step when no poll improves.  Singular-kappa candidates are never
// accepted.  Appends one trace entry per iteration; continues the iteration
// numbering of the trace it is handed.
inline Eigen::VectorXd compass_search(const Eigen::MatrixXd& unit_points,
                                      const Eigen::VectorXd& theta_start,
                                      double kappa_start,
                                      const RegularizerConfig& config,
                                      ConvergenceTrace& trace) {
    const Eigen::Index dim = theta_start.size();
    const double log_lo = std::log(config.theta_bounds[0]);
    const double log_hi = std::log(config.theta_bounds[1]);

    auto theta_of = [&](const Eigen::VectorXd& log_theta) {
        Eigen::VectorXd theta(dim);
        for (Eigen::Index j = 0; j < dim; ++j)
            theta[j] = std::clamp(std::exp(log_theta[j]), config.theta_bounds[0],
                                  config.theta_bounds[1]);
        return theta;
    };

    Eigen::VectorXd log_theta(dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        log_theta[j] = std::clamp(std::log(theta_start[j]), log_lo, log_hi);
    Eigen::VectorXd theta = theta_start;
    double kappa = kappa_start;

    double step = config.initial_step;
    int iter = 0;
    while (iter < config.max_iters && step >= config.step_tol) {
        ++iter;
        double best_kappa = kappa;
        Eigen::VectorXd best_log;
        Eigen::VectorXd best_theta;
        for (Eigen::Index j = 0; j < dim; ++j) {
            for (const double sign : {+1.0, -1.0}) {
                Eigen::VectorXd poll_log = log_theta;
                poll_log[j] = std::clamp(poll_log[j] + sign * step, log_lo, log_hi);
                if (poll_log[j] == log_theta[j]) continue;  // clamped into no move
                const Eigen::VectorXd poll_theta = theta_of(poll_log);
                const double poll_kappa = kappa_for_theta(unit_points, poll_theta);
                if (poll_kappa < best_kappa) {
                    best_kappa = poll_kappa;
                    best_log = poll_log;
                    best_theta = poll_theta;
                }
            }
        }
        if (best_log.size() > 0) {
            log_theta = best_log;
            theta = best_theta;
            kappa = best_kappa;
        } else {
            step *= config.step_shrink;
        }
        trace.append(theta, kappa);
    }
    return theta;
}

}  // namespace detail

// Stage two as a standalone operation, starting a fresh trace at theta_start.
inline DirectSearchResult direct_search(const Eigen::MatrixXd& unit_points,
                                        const Eigen::VectorXd& theta_start,
                                        const RegularizerConfig& config) {
    if (unit_points.rows() < 2)
        throw std::invalid_argument("direct_search: need at least two points");
    config.validate(unit_points.cols());
    for (Eigen::Index j = 0; j < theta_start.size(); ++j)
        if (theta_start[j] < config.theta_bounds[0] || theta_start[j] > config.theta_bounds[1])
            throw std::invalid_argument("direct_search: theta_start outside bounds");

    DirectSearchResult result;
    const double kappa_start = kappa_for_theta(unit_points, theta_start);
    result.trace.append(theta_start, kappa_start);
    result.theta =
        detail::compass_search(unit_points, theta_start, kappa_start, config, result.trace);
    return result;
}

struct RegularizeResult {
    KernelParams params;
    ConvergenceTrace trace;

    const Eigen::VectorXd& theta() const { return params.theta(); }
    double kappa0() const { return trace.kappa0(); }
    double final_kappa() const { return trace.final_kappa(); }
};

// Full procedure: seeded perturbation search, then compass fine tuning from
// the best seed.  Depends on the sample locations only, never on the values,
// so identical location sets give identical results for any objective.
inline RegularizeResult regularize(const TrainingSet& training,
                                   const RegularizerConfig& config) {
    if (training.size() < 2)
        throw std::invalid_argument("regularize: need at least two samples");
    const Eigen::MatrixXd& points = training.unit_locations();

    SeedSearchResult seeded = seed_search(points, config);
    ConvergenceTrace trace = std::move(seeded.trace);
    const Eigen::VectorXd theta =
        detail::compass_search(points, seeded.theta, seeded.kappa, config, trace);
    return RegularizeResult{KernelParams(theta), std::move(trace)};
}

}  // namespace krigreg
