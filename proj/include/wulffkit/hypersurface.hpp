#pragma once

// Star-shaped bodies with implicit boundaries {phi = 0} and oriented
// boundary quadratures generated by radial projection of a sphere grid.

#include "wulffkit/core.hpp"
#include "wulffkit/duality.hpp"
#include "wulffkit/integrand.hpp"
#include "wulffkit/parallel.hpp"
#include "wulffkit/sphere_grid.hpp"

#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

namespace wulffkit {

class StarBody {
public:
    enum class Kind { ellipsoid, wulff, superellipse };

    /// phi(x) = (x-c)^T Q (x-c) - 1.
    static StarBody ellipsoid(const Vec& center, const Mat& q) {
        require(q.rows() == q.cols() && q.rows() == center.size(), "ellipsoid matrix must be d x d");
        require_dimension(static_cast<int>(center.size()));
        require_finite(center, "body center");
        require(q.allFinite() && (q - q.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, q.cwiseAbs().maxCoeff()),
                "ellipsoid matrix must be finite and symmetric");
        Eigen::SelfAdjointEigenSolver<Mat> eig(q);
        require(eig.eigenvalues().minCoeff() > 0.0, "ellipsoid matrix must be positive definite");
        StarBody b(Kind::ellipsoid, center);
        b.q_ = 0.5 * (q + q.transpose());
        b.bound_ = 1.0 / std::sqrt(eig.eigenvalues().minCoeff());
        return b;
    }

    static StarBody ball(const Vec& center, double radius) {
        require(std::isfinite(radius) && radius > 0.0, "ball radius must be > 0");
        const auto d = center.size();
        return ellipsoid(center, Mat::Identity(d, d) / (radius * radius));
    }

    /// phi(x) = F*(x - c) - r.
    static StarBody wulff(const DualNorm& dual, const Vec& center, double radius) {
        require(center.size() == dual.dimension(), "Wulff center has wrong dimension");
        require_finite(center, "body center");
        require(std::isfinite(radius) && radius > 0.0, "Wulff radius must be > 0");
        StarBody b(Kind::wulff, center);
        b.dual_ = std::make_shared<const DualNorm>(dual);
        b.radius_ = radius;
        // F*(v) >= |v| / sup F, so the shape lies within |v| <= r sup F.
        b.bound_ = radius / dual.sphere_inf_bound();
        return b;
    }

    /// phi(x) = |x1/a|^p + |x2/b|^p - 1, p > 2 (d = 2 only).
    static StarBody superellipse(const Vec& center, double exponent, const Vec& semi_axes) {
        require(center.size() == 2 && semi_axes.size() == 2, "superellipse is defined in d = 2 only");
        require_finite(center, "body center");
        require(std::isfinite(exponent) && exponent > 2.0, "superellipse exponent must be > 2");
        require(semi_axes.allFinite() && semi_axes.minCoeff() > 0.0, "superellipse semi-axes must be > 0");
        StarBody b(Kind::superellipse, center);
        b.p_ = exponent;
        b.axes_ = semi_axes;
        b.bound_ = semi_axes.norm();
        return b;
    }

    Kind kind() const { return kind_; }
    int dimension() const { return static_cast<int>(center_.size()); }
    const Vec& center() const { return center_; }
    /// Radius of a Euclidean ball about the center containing the body.
    double bounding_radius() const { return bound_; }

    const Mat& matrix() const { return q_; }
    double wulff_radius() const { return radius_; }
    const DualNorm* dual() const { return dual_.get(); }
    double exponent() const { return p_; }
    const Vec& semi_axes() const { return axes_; }

    double phi(const Vec& x) const {
        const Vec y = x - center_;
        switch (kind_) {
            case Kind::ellipsoid: return y.dot(q_ * y) - 1.0;
            case Kind::wulff: return dual_->conjugate(y) - radius_;
            case Kind::superellipse:
                return std::pow(std::abs(y(0) / axes_(0)), p_) + std::pow(std::abs(y(1) / axes_(1)), p_) - 1.0;
        }
        return 0.0;
    }

    Vec grad_phi(const Vec& x) const {
        const Vec y = x - center_;
        switch (kind_) {
            case Kind::ellipsoid: return 2.0 * q_ * y;
            case Kind::wulff: return dual_->grad_conjugate(y);
            case Kind::superellipse: {
                Vec g(2);
                for (int i = 0; i < 2; ++i) {
                    const double s = y(i) / axes_(i);
                    g(i) = p_ * std::copysign(std::pow(std::abs(s), p_ - 1.0), s) / axes_(i);
                }
                return g;
            }
        }
        return y;
    }

    Mat hess_phi(const Vec& x) const {
        const Vec y = x - center_;
        switch (kind_) {
            case Kind::ellipsoid: return 2.0 * q_;
            case Kind::wulff: return dual_->hessian_conjugate(y);
            case Kind::superellipse: {
                Mat h = Mat::Zero(2, 2);
                for (int i = 0; i < 2; ++i) {
                    const double s = std::abs(y(i) / axes_(i));
                    h(i, i) = p_ * (p_ - 1.0) * std::pow(s, p_ - 2.0) / (axes_(i) * axes_(i));
                }
                return h;
            }
        }
        return Mat();
    }

    bool contains(const Vec& x) const { return phi(x) < 0.0; }

    /// Boundary distance along the unit ray `omega` from the center: the root
    /// of t -> phi(c + t omega), bracketed by doubling and refined by
    /// safeguarded Newton to 1e-12 relative.
    double ray_radius(const Vec& omega) const {
        const auto f = [&](double t) { return phi(center_ + t * omega); };
        if (!(f(0.0) < 0.0)) throw NotStarShapedError("body center is not interior");
        double lo = 0.0;
        double hi = bound_ > 0.0 ? bound_ : 1.0;
        int doublings = 0;
        while (f(hi) <= 0.0) {
            lo = hi;
            hi *= 2.0;
            if (++doublings > 60) throw NotStarShapedError("boundary root not bracketed along a ray");
        }
        double t = 0.5 * (lo + hi);
        for (int it = 0; it < 200; ++it) {
            const double ft = f(t);
            if (ft == 0.0) break;
            (ft < 0.0 ? lo : hi) = t;
            const double slope = grad_phi(center_ + t * omega).dot(omega);
            double next = slope > 0.0 ? t - ft / slope : 0.5 * (lo + hi);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            const double moved = std::abs(next - t);
            t = next;
            if (moved <= 1e-12 * t || hi - lo <= 1e-12 * t) break;
        }
        if (!(grad_phi(center_ + t * omega).dot(omega) > 0.0))
            throw NotStarShapedError("ray meets the boundary non-transversally");
        return t;
    }

private:
    StarBody(Kind kind, Vec center) : kind_(kind), center_(std::move(center)) {}

    Kind kind_;
    Vec center_;
    double bound_ = 0.0;
    Mat q_;
    std::shared_ptr<const DualNorm> dual_;
    double radius_ = 0.0;
    double p_ = 0.0;
    Vec axes_;
};

inline std::string to_string(StarBody::Kind k) {
    switch (k) {
        case StarBody::Kind::ellipsoid: return "ellipsoid";
        case StarBody::Kind::wulff: return "wulff";
        case StarBody::Kind::superellipse: return "superellipse";
    }
    return "unknown";
}

struct QuadratureNode {
    Vec x;
    Vec normal;         // outward unit normal
    Vec ray;            // generating direction omega
    double weight = 0;  // area element
    double radius = 0;  // rho(omega)
    double sigma = 0;   // sphere-grid weight of omega
    std::size_t body = 0;
};

struct SurfaceQuadrature {
    int dim = 0;
    std::size_t resolution = 0;
    std::vector<QuadratureNode> nodes;
    std::vector<std::array<int, 4>> neighbors;  // grid adjacency, -1 when absent
    std::vector<Vec> centers;                   // per-body center
};

/// Smallest admissible resolution (node count) per dimension.
inline std::size_t min_surface_resolution(int dim) { return dim == 2 ? 64 : 32 * 64; }

inline SurfaceQuadrature sample_surface(const StarBody& body, std::size_t resolution) {
    const int d = body.dimension();
    require(resolution >= min_surface_resolution(d),
            "surface resolution must be >= " + std::to_string(min_surface_resolution(d)));
    const SphereGrid grid = SphereGrid::with_node_count(d, resolution);
    SurfaceQuadrature q;
    q.dim = d;
    q.resolution = grid.size();
    q.nodes.resize(grid.size());
    q.centers.push_back(body.center());
    parallel_for(grid.size(), [&](std::size_t i) {
        const Vec& omega = grid.direction(i);
        const double rho = body.ray_radius(omega);
        QuadratureNode node;
        node.ray = omega;
        node.radius = rho;
        node.sigma = grid.weight(i);
        node.x = body.center() + rho * omega;
        const Vec g = body.grad_phi(node.x);
        const double gn = g.norm();
        if (!(gn > 1e-12)) throw DegeneratePointError("vanishing boundary gradient");
        node.normal = g / gn;
        const double cosine = omega.dot(node.normal);
        if (!(cosine > 0.0)) throw NotStarShapedError("boundary normal not outward along its ray");
        node.weight = std::pow(rho, d - 1) * node.sigma / cosine;
        q.nodes[i] = std::move(node);
    });
    for (std::size_t i = 0; i < grid.size(); ++i) q.neighbors.push_back(grid.neighbors(i));
    return q;
}

/// Concatenation of per-body quadratures (a scene of disjoint bodies).
inline SurfaceQuadrature concatenate(const std::vector<SurfaceQuadrature>& parts) {
    require(!parts.empty(), "nothing to concatenate");
    SurfaceQuadrature out;
    out.dim = parts.front().dim;
    out.resolution = parts.front().resolution;
    for (const auto& part : parts) {
        require(part.dim == out.dim, "quadratures of different dimensions");
        const int offset = static_cast<int>(out.nodes.size());
        const std::size_t body_offset = out.centers.size();
        for (QuadratureNode node : part.nodes) {
            node.body += body_offset;
            out.nodes.push_back(std::move(node));
        }
        for (auto nb : part.neighbors) {
            for (int& k : nb) if (k >= 0) k += offset;
            out.neighbors.push_back(nb);
        }
        out.centers.insert(out.centers.end(), part.centers.begin(), part.centers.end());
    }
    return out;
}

struct VolumeEstimate {
    double radial = 0.0;
    double divergence = 0.0;
};

/// Radial formula (1/d) sum rho^d sigma and divergence formula
/// (1/d) sum (x - c).nu w, c the body center.
inline VolumeEstimate volume_estimates(const SurfaceQuadrature& q) {
    VolumeEstimate v;
    for (const auto& node : q.nodes) {
        v.radial += std::pow(node.radius, q.dim) * node.sigma;
        v.divergence += (node.x - q.centers[node.body]).dot(node.normal) * node.weight;
    }
    v.radial /= q.dim;
    v.divergence /= q.dim;
    return v;
}

inline double volume(const SurfaceQuadrature& q) {
    const VolumeEstimate v = volume_estimates(q);
    if (std::abs(v.radial - v.divergence) > 1e-6 * std::abs(v.radial))
        throw QuadratureInconsistencyError("radial and divergence volumes disagree");
    return v.radial;
}

inline double volume(const StarBody& body, std::size_t resolution) {
    return volume(sample_surface(body, resolution));
}

inline double area(const SurfaceQuadrature& q) {
    double s = 0.0;
    for (const auto& node : q.nodes) s += node.weight;
    return s;
}

/// P_F = sum F(nu) w.
inline double perimeter_F(const SurfaceQuadrature& q, const Integrand& f) {
    require(!q.nodes.empty(), "empty quadrature");
    double s = 0.0;
    for (const auto& node : q.nodes) s += f.evaluate(node.normal) * node.weight;
    return s;
}

}  // namespace wulffkit
