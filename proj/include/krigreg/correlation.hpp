#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "krigreg/errors.hpp"

namespace krigreg {

// Sentinel condition number for matrices whose computed spectrum is not
// strictly positive.  Using the largest finite double (rather than infinity
// or an exception) keeps kappa-minimization total: such parameters simply
// compare as maximally bad.
inline constexpr double kKappaSingular = std::numeric_limits<double>::max();

// Relative tolerance accepted on |R - R^T| before condition_number rejects
// its input as asymmetric.
inline constexpr double kSymmetryTol = 1e-12;

// Slack on the unit cube beyond which a query counts as extrapolated.
inline constexpr double kUnitBoxTol = 1e-12;

// Per-dimension parameters of the correlation law
//
//   rho(h) = exp(-sum_j theta_j * h_j^p_j)
//
// theta_j weighs the decay along input j; larger theta_j means correlation
// dies off faster in that direction.  The exponents p_j are kept as a field
// for generality but every experiment in this project fixes p_j = 2, the
// infinitely differentiable member of the family.
class KernelParams {
public:
    KernelParams(Eigen::VectorXd theta, Eigen::VectorXd p)
        : theta_(std::move(theta)), p_(std::move(p)) {
        if (theta_.size() == 0 || theta_.size() != p_.size())
            throw std::invalid_argument("KernelParams: empty or mismatched theta/p");
        if (!theta_.allFinite() || !p_.allFinite())
            throw std::invalid_argument("KernelParams: non-finite parameters");
        for (Eigen::Index j = 0; j < theta_.size(); ++j)
            if (!(theta_[j] > 0.0))
                throw std::invalid_argument("KernelParams: theta must be positive");
    }

    // Gaussian family: p_j = 2 everywhere.
    explicit KernelParams(const Eigen::VectorXd& theta)
        : KernelParams(theta, Eigen::VectorXd::Constant(theta.size(), 2.0)) {}

    static KernelParams ones(Eigen::Index dim) {
        return KernelParams(Eigen::VectorXd::Ones(dim));
    }

    static KernelParams isotropic(Eigen::Index dim, double theta) {
        return KernelParams(Eigen::VectorXd::Constant(dim, theta));
    }

    Eigen::Index dim() const { return theta_.size(); }
    const Eigen::VectorXd& theta() const { return theta_; }
    const Eigen::VectorXd& p() const { return p_; }

private:
    Eigen::VectorXd theta_;
    Eigen::VectorXd p_;
};

// rho(h) for a componentwise non-negative lag h in unit-cube coordinates.
// Result is in (0, 1], underflowing to an exact 0 for extreme exponents;
// rho(0) = 1.
inline double correlate(const Eigen::VectorXd& lag, const KernelParams& params) {
    if (lag.size() != params.dim())
        throw std::invalid_argument("correlate: lag/params dimension mismatch");
    if (!lag.allFinite())
        throw std::invalid_argument("correlate: non-finite lag");
    double s = 0.0;
    for (Eigen::Index j = 0; j < lag.size(); ++j) {
        const double h = lag[j];
        if (h < 0.0) throw std::invalid_argument("correlate: negative lag component");
        const double pj = params.p()[j];
        s += params.theta()[j] * (pj == 2.0 ? h * h : std::pow(h, pj));
    }
    return std::exp(-s);
}

// Dense symmetric matrix of pairwise correlations between the rows of
// `points` (n x k, unit-cube coordinates).  Unit diagonal by construction.
inline Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& points,
                                          const KernelParams& params) {
    if (points.rows() < 1)
        throw std::invalid_argument("correlation_matrix: need at least one point");
    if (points.cols() != params.dim())
        throw std::invalid_argument("correlation_matrix: points/params dimension mismatch");
    if (!points.allFinite())
        throw std::invalid_argument("correlation_matrix: non-finite coordinates");

    const Eigen::Index n = points.rows();
    Eigen::MatrixXd correlations = Eigen::MatrixXd::Ones(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            const Eigen::VectorXd lag = (points.row(i) - points.row(j)).cwiseAbs().transpose();
            const double rho = correlate(lag, params);
            correlations(i, j) = rho;
            correlations(j, i) = rho;
        }
    }
    return correlations;
}

// 2-norm condition number of a symmetric matrix via its eigenvalues.
// Returns kKappaSingular when the computed spectrum is not strictly positive.
inline double condition_number(const Eigen::MatrixXd& matrix) {
    if (matrix.rows() != matrix.cols() || matrix.rows() < 1)
        throw std::invalid_argument("condition_number: matrix must be square and non-empty");
    if (!matrix.allFinite())
        throw std::invalid_argument("condition_number: non-finite entries");
    const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
    const double asym = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTol * scale)
        throw std::invalid_argument("condition_number: matrix is not symmetric");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        return kKappaSingular;
    const auto& eigenvalues = solver.eigenvalues();  // ascending
    const double lambda_min = eigenvalues[0];
    const double lambda_max = eigenvalues[eigenvalues.size() - 1];
    if (!(lambda_min > 0.0)) return kKappaSingular;
    const double kappa = lambda_max / lambda_min;
    return std::isfinite(kappa) ? kappa : kKappaSingular;
}

// Cross-correlation of every training point against one query location.
// `extrapolated` is set when the query leaves the unit cube.
struct CrossCorrelation {
    Eigen::VectorXd values;
    bool extrapolated = false;
};

inline CrossCorrelation build_cross_correlation(const Eigen::MatrixXd& points,
                                                const Eigen::VectorXd& query,
                                                const KernelParams& params) {
    if (query.size() != points.cols())
        throw std::invalid_argument("build_cross_correlation: query dimension mismatch");
    if (!query.allFinite())
        throw std::invalid_argument("build_cross_correlation: non-finite query");

    CrossCorrelation result;
    result.values.resize(points.rows());
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const Eigen::VectorXd lag = (points.row(i).transpose() - query).cwiseAbs();
        result.values[i] = correlate(lag, params);
    }
    result.extrapolated = (query.array() < -kUnitBoxTol).any() ||
                          (query.array() > 1.0 + kUnitBoxTol).any();
    return result;
}

// Factorized self-correlation system: the matrix R, an SPD solve, and the
// 2-norm condition number.  Solves go through a Cholesky factorization when
// it succeeds and fall back to the symmetric eigendecomposition when the
// matrix is numerically positive definite but too ill-conditioned for LLT.
// Construction fails (factorization_error) when the computed spectrum is
// not strictly positive; no diagonal repair is ever applied.
class CorrelationSystem {
public:
    CorrelationSystem(Eigen::MatrixXd correlations, double kappa)
        : matrix_(std::move(correlations)), kappa_(kappa) {
        llt_.compute(matrix_);
        if (llt_.info() == Eigen::Success) {
            cholesky_ok_ = true;
            return;
        }
        eigen_.compute(matrix_, Eigen::ComputeEigenvectors);
        const double lambda_min =
            eigen_.info() == Eigen::Success ? eigen_.eigenvalues()[0] : -1.0;
        if (eigen_.info() != Eigen::Success || !(lambda_min > 0.0)) {
            char detail[64];
            std::snprintf(detail, sizeof(detail), "%.6e", lambda_min);
            throw factorization_error(
                "self-correlation matrix is numerically singular (min eigenvalue " +
                    std::string(detail) + ")",
                lambda_min, kappa_);
        }
    }

    const Eigen::MatrixXd& matrix() const { return matrix_; }
    double kappa() const { return kappa_; }
    Eigen::Index size() const { return matrix_.rows(); }
    bool used_eigen_fallback() const { return !cholesky_ok_; }

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
        if (cholesky_ok_) return llt_.solve(rhs);
        // V diag(1/lambda) V^T rhs
        return eigen_.eigenvectors() *
               (eigen_.eigenvectors().transpose() * rhs).cwiseQuotient(eigen_.eigenvalues());
    }

private:
    Eigen::MatrixXd matrix_;
    double kappa_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen_;
    bool cholesky_ok_ = false;
};

inline CorrelationSystem build_self_correlation(const Eigen::MatrixXd& points,
                                                const KernelParams& params) {
    Eigen::MatrixXd correlations = correlation_matrix(points, params);
    const double kappa = condition_number(correlations);
    return CorrelationSystem(std::move(correlations), kappa);
}

}  // namespace krigreg
