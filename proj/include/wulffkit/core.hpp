#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>

namespace wulffkit {

/// Ambient dimensions are 2 or 3; storage is dynamic-sized but bounded so
/// that small vectors never touch the heap.
inline constexpr int kMaxDim = 3;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

inline constexpr double kPi = std::numbers::pi;

// Error hierarchy. Every failure the library reports derives from Error so
// callers (the CLI in particular) can map categories onto exit codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract input (non-finite values, non-SPD matrices,
/// bad resolutions, overlapping scene bodies, ...).
struct InputError : Error {
    using Error::Error;
};

/// Evaluation outside the domain of a map (e.g. the gradient of F at 0).
struct DomainError : Error {
    using Error::Error;
};

/// Iterative solver did not converge; carries the best value found and the
/// remaining stationarity gap.
struct SolverError : Error {
    SolverError(const std::string& what, double best, double residual_gap)
        : Error(what), best_value(best), gap(residual_gap) {}
    double best_value;
    double gap;
};

struct NotStarShapedError : Error {
    using Error::Error;
};

struct QuadratureInconsistencyError : Error {
    using Error::Error;
};

struct NonEllipticError : Error {
    using Error::Error;
};

struct DegeneratePointError : Error {
    using Error::Error;
};

/// A theorem hypothesis does not hold on the input (e.g. H <= 0 at a node).
struct HypothesisViolation : Error {
    HypothesisViolation(const std::string& what, std::size_t node_index)
        : Error(what), node(node_index) {}
    std::size_t node;
};

struct StepTooLargeError : Error {
    using Error::Error;
};

struct TruncationError : Error {
    using Error::Error;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw InputError(message);
}

inline void require_dimension(int dim) {
    require(dim == 2 || dim == 3, "ambient dimension must be 2 or 3, got " + std::to_string(dim));
}

inline void require_finite(const Vec& x, const char* what) {
    if (!x.allFinite()) throw InputError(std::string(what) + " has non-finite components");
}

inline Vec make_vec(std::initializer_list<double> values) {
    Vec v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double value : values) v(i++) = value;
    return v;
}

inline Mat diag(std::initializer_list<double> values) {
    const auto n = static_cast<Eigen::Index>(values.size());
    Mat m = Mat::Zero(n, n);
    Eigen::Index i = 0;
    for (double value : values) { m(i, i) = value; ++i; }
    return m;
}

/// Orthonormal basis (as columns) of the hyperplane orthogonal to `v`.
inline Mat orthogonal_complement(const Vec& v) {
    const Eigen::Index d = v.size();
    const Vec n = v.normalized();
    Mat basis(d, d - 1);
    if (d == 2) {
        basis.col(0) = make_vec({-n(1), n(0)});
        return basis;
    }
    // Start from the coordinate axis least aligned with n.
    Eigen::Index axis = 0;
    n.cwiseAbs().minCoeff(&axis);
    Vec e = Vec::Zero(3);
    e(axis) = 1.0;
    Vec t1 = (e - e.dot(n) * n).normalized();
    Eigen::Vector3d t2 = Eigen::Vector3d(n(0), n(1), n(2)).cross(Eigen::Vector3d(t1(0), t1(1), t1(2)));
    basis.col(0) = t1;
    basis.col(1) = Vec(t2);
    return basis;
}

}  // namespace wulffkit
