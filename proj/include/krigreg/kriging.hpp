#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <utility>

#include "krigreg/correlation.hpp"
#include "krigreg/domain.hpp"

namespace krigreg {

// Normalized-space tolerance under which two sample locations count as
// duplicates and are rejected at construction.
inline constexpr double kDuplicateTol = 1e-12;

// Sample locations, sampled values and the box used to map locations into
// the unit cube.  The normalized coordinates are fixed at construction;
// factories that already know them (from_unit) store them verbatim so that
// identical unit-space draws stay bit-identical regardless of the raw box.
class TrainingSet {
public:
    TrainingSet(Eigen::MatrixXd locations, Eigen::VectorXd values, DomainBox domain)
        : TrainingSet(std::move(locations), Eigen::MatrixXd(), std::move(values),
                      std::move(domain)) {}

    static TrainingSet from_unit(const Eigen::MatrixXd& unit_locations,
                                 Eigen::VectorXd values, DomainBox domain) {
        Eigen::MatrixXd raw(unit_locations.rows(), unit_locations.cols());
        for (Eigen::Index i = 0; i < unit_locations.rows(); ++i) {
            Eigen::VectorXd x = domain.from_unit(unit_locations.row(i).transpose());
            // Guard against the unit->raw map rounding just past an inexact bound.
            x = x.cwiseMax(domain.lower()).cwiseMin(domain.upper());
            raw.row(i) = x.transpose();
        }
        return TrainingSet(std::move(raw), unit_locations, std::move(values),
                           std::move(domain));
    }

    Eigen::Index size() const { return locations_.rows(); }
    Eigen::Index dim() const { return locations_.cols(); }
    const Eigen::MatrixXd& locations() const { return locations_; }
    const Eigen::MatrixXd& unit_locations() const { return unit_; }
    const Eigen::VectorXd& values() const { return values_; }
    const DomainBox& domain() const { return domain_; }

private:
    TrainingSet(Eigen::MatrixXd locations, Eigen::MatrixXd unit,
                Eigen::VectorXd values, DomainBox domain)
        : locations_(std::move(locations)),
          unit_(std::move(unit)),
          values_(std::move(values)),
          domain_(std::move(domain)) {
        const Eigen::Index n = locations_.rows();
        if (n < 1) throw std::invalid_argument("TrainingSet: need at least one sample");
        if (locations_.cols() != domain_.dim())
            throw std::invalid_argument("TrainingSet: location/domain dimension mismatch");
        if (values_.size() != n)
            throw std::invalid_argument("TrainingSet: values/locations size mismatch");
        if (!locations_.allFinite() || !values_.allFinite())
            throw std::invalid_argument("TrainingSet: non-finite data");
        for (Eigen::Index i = 0; i < n; ++i)
            if (!domain_.contains(locations_.row(i).transpose()))
                throw std::invalid_argument("TrainingSet: location outside its domain box");

        if (unit_.size() == 0) {
            unit_.resize(n, locations_.cols());
            for (Eigen::Index i = 0; i < n; ++i)
                unit_.row(i) = domain_.to_unit(locations_.row(i).transpose()).transpose();
        }
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < i; ++j)
                if ((unit_.row(i) - unit_.row(j)).norm() < kDuplicateTol)
                    throw std::invalid_argument(
                        "TrainingSet: duplicate sample locations (normalized distance below 1e-12)");
    }

    Eigen::MatrixXd locations_;
    Eigen::MatrixXd unit_;
    Eigen::VectorXd values_;
    DomainBox domain_;
};

struct Prediction {
    double value = 0.0;
    Eigen::VectorXd weights;
    bool extrapolated = false;
};

// Interpolator with weights from
//
//   lambda = R^-1 [ r + 1 (1 - 1' R^-1 r) / (1' R^-1 1) ]
//
// so that predictions reproduce training values exactly and the weights sum
// to one for every query.  Immutable once fitted; safe to share across
// threads.
class KrigingModel {
public:
    static KrigingModel fit(TrainingSet training, KernelParams params) {
        if (params.dim() != training.dim())
            throw std::invalid_argument("fit: params/training dimension mismatch");
        CorrelationSystem system = build_self_correlation(training.unit_locations(), params);
        Eigen::VectorXd r_inv_ones = system.solve(Eigen::VectorXd::Ones(training.size()));
        const double ones_rinv_ones = r_inv_ones.sum();
        if (!(ones_rinv_ones > 0.0))
            throw factorization_error("fit: 1'R^-1 1 is not positive", ones_rinv_ones,
                                      system.kappa());
        return KrigingModel(std::move(training), std::move(params), std::move(system),
                            std::move(r_inv_ones), ones_rinv_ones);
    }

    const TrainingSet& training() const { return training_; }
    const KernelParams& params() const { return params_; }
    const CorrelationSystem& system() const { return system_; }
    double kappa() const { return system_.kappa(); }
    const Eigen::VectorXd& r_inv_ones() const { return r_inv_ones_; }
    double ones_rinv_ones() const { return ones_rinv_ones_; }

    Eigen::VectorXd weights(const Eigen::VectorXd& query) const {
        return predict(query).weights;
    }

    Prediction predict(const Eigen::VectorXd& query) const {
        if (query.size() != training_.dim())
            throw std::invalid_argument("predict: query dimension mismatch");
        if (!query.allFinite())
            throw std::invalid_argument("predict: non-finite query");

        const Eigen::VectorXd unit_query = training_.domain().to_unit(query);
        const CrossCorrelation cross =
            build_cross_correlation(training_.unit_locations(), unit_query, params_);

        Prediction prediction;
        const Eigen::VectorXd base = system_.solve(cross.values);
        prediction.weights =
            base + r_inv_ones_ * ((1.0 - base.sum()) / ones_rinv_ones_);
        prediction.value = prediction.weights.dot(training_.values());
        prediction.extrapolated = cross.extrapolated;
        return prediction;
    }

private:
    KrigingModel(TrainingSet training, KernelParams params, CorrelationSystem system,
                 Eigen::VectorXd r_inv_ones, double ones_rinv_ones)
        : training_(std::move(training)),
          params_(std::move(params)),
          system_(std::move(system)),
          r_inv_ones_(std::move(r_inv_ones)),
          ones_rinv_ones_(ones_rinv_ones) {}

    TrainingSet training_;
    KernelParams params_;
    CorrelationSystem system_;
    Eigen::VectorXd r_inv_ones_;
    double ones_rinv_ones_;
};

}  // namespace krigreg
