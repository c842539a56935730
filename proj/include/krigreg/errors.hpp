#pragma once

#include <stdexcept>
#include <string>

namespace krigreg {

// Raised when the self-correlation matrix cannot be factorized as SPD
// (numerically singular or indefinite).  Carries the smallest computed
// eigenvalue and the condition-number estimate at the point of failure.
class factorization_error : public std::runtime_error {
public:
    factorization_error(const std::string& what, double min_eigenvalue, double kappa)
        : std::runtime_error(what), min_eigenvalue_(min_eigenvalue), kappa_(kappa) {}

    double min_eigenvalue() const noexcept { return min_eigenvalue_; }
    double kappa() const noexcept { return kappa_; }

private:
    double min_eigenvalue_;
    double kappa_;
};

// Raised when the length-scale search cannot produce any usable candidate.
class regularization_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace krigreg
