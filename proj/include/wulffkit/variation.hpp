#pragma once

// First variation of the anisotropic perimeter, flows of quadratures under
// x -> x + t g(x), volume derivatives and criticality residuals.

#include "wulffkit/core.hpp"
#include "wulffkit/curvature.hpp"
#include "wulffkit/hypersurface.hpp"
#include "wulffkit/integrand.hpp"

#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace wulffkit {

/// g(x) = b + L x + q(x), q_i(x) = sum_{jk} Q_i[j][k] x_j x_k with Q_i symmetric.
class VectorField {
public:
    enum class Kind { constant, linear, quadratic };

    static VectorField constant(const Vec& b) {
        VectorField g(Kind::constant, static_cast<int>(b.size()));
        g.b_ = b;
        return g;
    }

    static VectorField linear(const Mat& l, const Vec& b = Vec()) {
        require(l.rows() == l.cols(), "linear field matrix must be square");
        VectorField g(Kind::linear, static_cast<int>(l.rows()));
        g.l_ = l;
        if (b.size() == l.rows()) g.b_ = b;
        return g;
    }

    static VectorField quadratic(const Vec& b, const Mat& l, const std::vector<Mat>& q) {
        require(l.rows() == b.size() && l.cols() == b.size() && q.size() == static_cast<std::size_t>(b.size()),
                "quadratic field parts have inconsistent sizes");
        VectorField g(Kind::quadratic, static_cast<int>(b.size()));
        g.b_ = b;
        g.l_ = l;
        for (const Mat& qi : q) {
            require(qi.rows() == b.size() && qi.cols() == b.size(), "quadratic field block must be d x d");
            g.q_.push_back(0.5 * (qi + qi.transpose()));
        }
        return g;
    }

    /// Entries drawn from N(0, scale^2).
    static VectorField random(int dim, std::mt19937_64& rng, double scale = 1.0) {
        require_dimension(dim);
        std::normal_distribution<double> n(0.0, scale);
        Vec b(dim);
        Mat l(dim, dim);
        std::vector<Mat> q(static_cast<std::size_t>(dim), Mat(dim, dim));
        for (int i = 0; i < dim; ++i) b(i) = n(rng);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) l(i, j) = n(rng);
        for (auto& qi : q)
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j) qi(i, j) = n(rng);
        return quadratic(b, l, q);
    }

    Kind kind() const { return kind_; }
    int dimension() const { return dim_; }

    Vec operator()(const Vec& x) const {
        Vec v = b_;
        if (kind_ != Kind::constant) v += l_ * x;
        for (std::size_t i = 0; i < q_.size(); ++i) v(static_cast<Eigen::Index>(i)) += x.dot(q_[i] * x);
        return v;
    }

    Mat jacobian(const Vec& x) const {
        Mat j = kind_ == Kind::constant ? Mat(Mat::Zero(dim_, dim_)) : l_;
        for (std::size_t i = 0; i < q_.size(); ++i) j.row(static_cast<Eigen::Index>(i)) += 2.0 * (q_[i] * x).transpose();
        return j;
    }

private:
    VectorField(Kind kind, int dim) : kind_(kind), dim_(dim), b_(Vec::Zero(dim)), l_(Mat::Zero(dim, dim)) {}

    Kind kind_;
    int dim_;
    Vec b_;
    Mat l_;
    std::vector<Mat> q_;
};

/// B_F(nu) = F(nu) I - nu G(nu)^T, so B_F(nu) u = F(nu) u - nu (u . G(nu)).
inline Mat stress_tensor(const Integrand& f, const Vec& normal) {
    const auto d = normal.size();
    return f.evaluate(normal) * Mat::Identity(d, d) - normal * f.gradient(normal).transpose();
}

/// sum <Dg(x), B_F(nu)> w with the entrywise matrix pairing.
inline double first_variation(const SurfaceQuadrature& q, const Integrand& f, const VectorField& g) {
    double s = 0.0;
    for (const auto& node : q.nodes)
        s += g.jacobian(node.x).cwiseProduct(stress_tensor(f, node.normal)).sum() * node.weight;
    return s;
}

/// sum (g . nu) w.
inline double volume_derivative(const SurfaceQuadrature& q, const VectorField& g) {
    double s = 0.0;
    for (const auto& node : q.nodes) s += g(node.x).dot(node.normal) * node.weight;
    return s;
}

/// -sum (h_bar . g) w with h_bar = -nu H.
inline double mean_curvature_pairing(const SurfaceQuadrature& q, const std::vector<CurvatureSample>& samples,
                                     const VectorField& g) {
    require(samples.size() == q.nodes.size(), "one curvature sample per node required");
    double s = 0.0;
    for (std::size_t k = 0; k < q.nodes.size(); ++k)
        s -= mean_curvature_vector(q.nodes[k].normal, samples[k].h).dot(g(q.nodes[k].x)) * q.nodes[k].weight;
    return s;
}

/// Quadrature pushed by h_t(x) = x + t g(x): tangents by (I + t Dg), weights by
/// the tangential Jacobian, normals from the pushed tangents.
inline SurfaceQuadrature push_forward(const SurfaceQuadrature& q, const VectorField& g, double t) {
    SurfaceQuadrature out = q;
    const int d = q.dim;
    for (auto& node : out.nodes) {
        const Mat tangents = orthogonal_complement(node.normal);
        const Mat pushed = (Mat::Identity(d, d) + t * g.jacobian(node.x)) * tangents;
        const double jac = std::sqrt(std::max(0.0, (pushed.transpose() * pushed).determinant()));
        if (!(jac > 1e-12)) throw StepTooLargeError("pushed tangent frame is degenerate");
        Vec normal(d);
        if (d == 2) {
            normal << pushed(1, 0), -pushed(0, 0);
        } else {
            const Eigen::Vector3d a(pushed(0, 0), pushed(1, 0), pushed(2, 0));
            const Eigen::Vector3d b(pushed(0, 1), pushed(1, 1), pushed(2, 1));
            const Eigen::Vector3d c = a.cross(b);
            normal << c(0), c(1), c(2);
        }
        normal.normalize();
        if (normal.dot(node.normal) < 0.0) normal = -normal;
        node.x = node.x + t * g(node.x);
        node.normal = normal;
        node.weight *= jac;
    }
    return out;
}

inline double node_diameter(const SurfaceQuadrature& q) {
    Vec lo = q.nodes.front().x, hi = q.nodes.front().x;
    for (const auto& node : q.nodes) {
        lo = lo.cwiseMin(node.x);
        hi = hi.cwiseMax(node.x);
    }
    return (hi - lo).norm();
}

/// Divergence-formula volume, usable on pushed quadratures.
inline double flux_volume(const SurfaceQuadrature& q) {
    double s = 0.0;
    for (const auto& node : q.nodes) s += (node.x - q.centers[node.body]).dot(node.normal) * node.weight;
    return s / q.dim;
}

/// (P_F(h) - P_F(-h)) / 2h along the flow.
inline double flow_energy_derivative(const SurfaceQuadrature& q, const Integrand& f, const VectorField& g, double h) {
    require(h > 0.0 && h <= 1e-3 * node_diameter(q), "flow step must satisfy 0 < h <= 1e-3 diameter");
    return (perimeter_F(push_forward(q, g, h), f) - perimeter_F(push_forward(q, g, -h), f)) / (2 * h);
}

struct CriticalityResidual {
    double residual = 0.0;           // (n+1) first variation - n (p/v) volume derivative
    double rescaled_residual = 0.0;  // (n+1) d/dt of the volume-normalized perimeter, by differences
    double perimeter = 0.0;
    double volume = 0.0;
    double first_variation = 0.0;
    double volume_derivative = 0.0;
};

inline CriticalityResidual criticality_residual(const SurfaceQuadrature& q, const Integrand& f, const VectorField& g,
                                                double h_rel = 1e-4) {
    const int n = q.dim - 1;
    CriticalityResidual r;
    r.perimeter = perimeter_F(q, f);
    r.volume = volume(q);
    r.first_variation = first_variation(q, f, g);
    r.volume_derivative = volume_derivative(q, g);
    r.residual = (n + 1) * r.first_variation - n * (r.perimeter / r.volume) * r.volume_derivative;
    // f_t = (v(0)/v(t))^{1/(n+1)} h_t scales the perimeter by (v(0)/v(t))^{n/(n+1)}.
    const double h = h_rel * node_diameter(q);
    const auto rescaled = [&](double t) {
        const SurfaceQuadrature p = push_forward(q, g, t);
        return std::pow(r.volume / flux_volume(p), static_cast<double>(n) / (n + 1)) * perimeter_F(p, f);
    };
    r.rescaled_residual = (n + 1) * (rescaled(h) - rescaled(-h)) / (2 * h);
    return r;
}

}  // namespace wulffkit
