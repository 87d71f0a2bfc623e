#pragma once

// Euclidean shape operators, F-principal curvatures via the symmetrized
// eigenproblem C B C (A = C C), F-mean curvature, and umbilicity fitting.

#include "wulffkit/core.hpp"
#include "wulffkit/hypersurface.hpp"
#include "wulffkit/integrand.hpp"
#include "wulffkit/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace wulffkit {

/// Eigenvalues of a symmetric 1x1 or 2x2 matrix, ascending, closed form.
inline Vec symmetric_eigenvalues(const Mat& m) {
    if (m.rows() == 1) return make_vec({m(0, 0)});
    require(m.rows() == 2 && m.cols() == 2, "closed-form eigenvalues need a 1x1 or 2x2 matrix");
    const double mean = 0.5 * (m(0, 0) + m(1, 1));
    const double half = 0.5 * (m(0, 0) - m(1, 1));
    const double off = 0.5 * (m(0, 1) + m(1, 0));
    const double rad = std::hypot(half, off);
    return make_vec({mean - rad, mean + rad});
}

/// Symmetric square root of an SPD 1x1 or 2x2 matrix:
/// sqrt(M) = (M + sqrt(det M) I) / sqrt(tr M + 2 sqrt(det M)).
inline Mat symmetric_sqrt(const Mat& m) {
    if (m.rows() == 1) {
        Mat r(1, 1);
        r(0, 0) = std::sqrt(m(0, 0));
        return r;
    }
    require(m.rows() == 2 && m.cols() == 2, "closed-form square root needs a 1x1 or 2x2 matrix");
    const double s = std::sqrt(m.determinant());
    const double t = std::sqrt(m.trace() + 2.0 * s);
    return (m + s * Mat::Identity(2, 2)) / t;
}

struct ShapeOperator {
    Mat frame;  // d x n orthonormal tangent basis
    Mat b;      // n x n, symmetric
};

/// B = T^T D^2 phi T / |grad phi| at a boundary point, T a tangent frame.
inline ShapeOperator shape_operator(const StarBody& body, const Vec& x) {
    const Vec g = body.grad_phi(x);
    const double gn = g.norm();
    if (!(gn >= 1e-12)) throw DegeneratePointError("|grad phi| below 1e-12 at a boundary point");
    ShapeOperator s;
    s.frame = orthogonal_complement(g / gn);
    const Mat b = s.frame.transpose() * body.hess_phi(x) * s.frame / gn;
    s.b = 0.5 * (b + b.transpose());
    return s;
}

struct CurvatureSample {
    Mat frame;
    Mat b;
    Mat a;       // T^T D^2F(nu) T
    Vec kappa;   // F-principal curvatures, ascending
    double h = 0.0;
    Vec eta;     // G(nu)
};

/// Tangent restriction of D^2F(nu); throws NonEllipticError unless positive definite.
inline Mat tangential_hessian(const Integrand& f, const Vec& normal, const Mat& frame) {
    Mat a = frame.transpose() * f.hessian(normal) * frame;
    a = 0.5 * (a + a.transpose());
    const Vec ev = symmetric_eigenvalues(a);
    if (!(ev(0) > 1e-12 * std::max(1.0, ev(ev.size() - 1))))
        throw NonEllipticError("tangential Hessian of F is not positive definite");
    return a;
}

/// Eigenvalues of A B computed as eigenvalues of C B C with A = C C.
inline Vec f_principal_curvatures(const Mat& a, const Mat& b) {
    const Mat c = symmetric_sqrt(a);
    return symmetric_eigenvalues(c * b * c);
}

inline Vec f_principal_curvatures(const Integrand& f, const Vec& normal, const ShapeOperator& s) {
    return f_principal_curvatures(tangential_hessian(f, normal, s.frame), s.b);
}

/// H = trace(A B); h_bar = -nu H and h = h_bar / F(nu).
inline double f_mean_curvature(const Integrand& f, const Vec& normal, const ShapeOperator& s) {
    return (tangential_hessian(f, normal, s.frame) * s.b).trace();
}

inline Vec mean_curvature_vector(const Vec& normal, double h) { return -h * normal; }

inline CurvatureSample curvature_at(const StarBody& body, const Integrand& f, const QuadratureNode& node) {
    const ShapeOperator s = shape_operator(body, node.x);
    CurvatureSample c;
    c.frame = s.frame;
    c.b = s.b;
    c.a = tangential_hessian(f, node.normal, s.frame);
    c.kappa = f_principal_curvatures(c.a, c.b);
    c.h = (c.a * c.b).trace();
    c.eta = f.gradient(node.normal);
    return c;
}

/// Per-node curvature over a (possibly multi-body) quadrature; node.body
/// indexes into `bodies`.
inline std::vector<CurvatureSample> curvature_samples(const std::vector<StarBody>& bodies, const Integrand& f,
                                                      const SurfaceQuadrature& q) {
    std::vector<CurvatureSample> out(q.nodes.size());
    parallel_for(q.nodes.size(), [&](std::size_t i) {
        const QuadratureNode& node = q.nodes[i];
        require(node.body < bodies.size(), "quadrature node refers to an unknown body");
        out[i] = curvature_at(bodies[node.body], f, node);
    });
    return out;
}

struct UmbilicityOptions {
    double tol_umb_rel = 1e-3;  // tol_umb = tol_umb_rel |lambda|
    double tol_fit = 1e-3;
};

struct UmbilicityReport {
    double lambda = 0.0;
    Vec center;
    double radius = 0.0;
    double dispersion = 0.0;     // max |eta - lambda x - c| (dimensionless)
    double max_residual = 0.0;   // max_i max_j |kappa_j - lambda|
    std::string verdict;         // wulff | umbilical-unresolved | not-umbilical | hyperplane-like
};

/// Fits eta(x) - lambda x = c over the nodes of one body. The center spread
/// |x - eta/lambda - center| equals dispersion / |lambda| = dispersion * radius,
/// so "dispersion <= tol_fit" is the center test at relative tolerance tol_fit.
inline UmbilicityReport umbilicity_classify(const SurfaceQuadrature& q, const std::vector<CurvatureSample>& samples,
                                            std::size_t body, const UmbilicityOptions& opts = {}) {
    require(samples.size() == q.nodes.size(), "one curvature sample per node required");
    const int n = q.dim - 1;
    double wsum = 0.0;
    double lsum = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        if (q.nodes[i].body != body) continue;
        wsum += q.nodes[i].weight;
        lsum += samples[i].kappa.sum() / n * q.nodes[i].weight;
    }
    require(wsum > 0.0, "body has no quadrature nodes");
    UmbilicityReport r;
    r.lambda = lsum / wsum;
    r.center = Vec::Zero(q.dim);
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        if (q.nodes[i].body != body) continue;
        r.max_residual = std::max(r.max_residual, (samples[i].kappa.array() - r.lambda).abs().maxCoeff());
    }
    const bool umbilical = r.max_residual <= opts.tol_umb_rel * std::abs(r.lambda);
    if (std::abs(r.lambda) < 1e-10) {
        r.verdict = r.max_residual <= 1e-10 ? "hyperplane-like" : "not-umbilical";
        return r;
    }
    if (!umbilical) {
        r.verdict = "not-umbilical";
        return r;
    }
    Vec c = Vec::Zero(q.dim);
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        if (q.nodes[i].body != body) continue;
        c += (samples[i].eta - r.lambda * q.nodes[i].x) * q.nodes[i].weight;
    }
    c /= wsum;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        if (q.nodes[i].body != body) continue;
        r.dispersion = std::max(r.dispersion, (samples[i].eta - r.lambda * q.nodes[i].x - c).norm());
    }
    r.center = -c / r.lambda;
    r.radius = 1.0 / std::abs(r.lambda);
    r.verdict = r.dispersion <= opts.tol_fit ? "wulff" : "umbilical-unresolved";
    return r;
}

}  // namespace wulffkit
