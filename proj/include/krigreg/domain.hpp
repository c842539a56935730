#pragma once

#include <Eigen/Core>
#include <stdexcept>

namespace krigreg {

// Axis-aligned box of the raw design space.  All kernel math happens in the
// unit cube obtained by mapping each coordinate through to_unit().
class DomainBox {
public:
    DomainBox(Eigen::VectorXd lower, Eigen::VectorXd upper)
        : lower_(std::move(lower)), upper_(std::move(upper)) {
        if (lower_.size() == 0 || lower_.size() != upper_.size())
            throw std::invalid_argument("DomainBox: empty or mismatched bounds");
        if (!lower_.allFinite() || !upper_.allFinite())
            throw std::invalid_argument("DomainBox: non-finite bounds");
        for (Eigen::Index j = 0; j < lower_.size(); ++j)
            if (!(lower_[j] < upper_[j]))
                throw std::invalid_argument("DomainBox: lower bound must be below upper bound");
    }

    static DomainBox square(double lo, double hi, Eigen::Index dim = 2) {
        return DomainBox(Eigen::VectorXd::Constant(dim, lo), Eigen::VectorXd::Constant(dim, hi));
    }

    Eigen::Index dim() const { return lower_.size(); }
    const Eigen::VectorXd& lower() const { return lower_; }
    const Eigen::VectorXd& upper() const { return upper_; }
    Eigen::VectorXd span() const { return upper_ - lower_; }

    Eigen::VectorXd to_unit(const Eigen::VectorXd& x) const {
        return (x - lower_).cwiseQuotient(upper_ - lower_);
    }

    Eigen::VectorXd from_unit(const Eigen::VectorXd& u) const {
        return lower_ + u.cwiseProduct(upper_ - lower_);
    }

    // Closed-box membership.
    bool contains(const Eigen::VectorXd& x, double tol = 0.0) const {
        for (Eigen::Index j = 0; j < dim(); ++j) {
            const double slack = tol * (upper_[j] - lower_[j]);
            if (x[j] < lower_[j] - slack || x[j] > upper_[j] + slack) return false;
        }
        return true;
    }

    bool operator==(const DomainBox& other) const {
        return lower_ == other.lower_ && upper_ == other.upper_;
    }

private:
    Eigen::VectorXd lower_;
    Eigen::VectorXd upper_;
};

}  // namespace krigreg
