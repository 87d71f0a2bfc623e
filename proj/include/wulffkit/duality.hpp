#pragma once

// Conjugate norm F*(w) = sup{w.u : F(u) <= 1}, its gradient G*, its Hessian
// via the inverse-map identity, and exact Wulff-shape boundary samples.

#include "wulffkit/core.hpp"
#include "wulffkit/integrand.hpp"
#include "wulffkit/sphere_grid.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace wulffkit {

struct SolverOptions {
    int max_iterations = 100;
    double tolerance = 1e-10;  // relative
};

/// Result of maximizing w.u over the unit sphere {N = 1} of a norm N.
struct Maximizer {
    Vec u;                 // maximizer, N(u) = 1
    double value = 0.0;    // w.u = N*(w)
    int iterations = 0;
    double gap = 0.0;      // relative stationarity gap |w - value G(u)| / |w|
};

namespace detail {

inline double golden_ratio_step() { return 0.5 * (3.0 - std::sqrt(5.0)); }

/// d = 2 fallback: golden-section search of the angle maximizing w.u/N(u)
/// on the half circle around w.
template <class Norm>
Maximizer golden_section_ratio(const Norm& norm, const Vec& w) {
    const double base = std::atan2(w(1), w(0));
    const auto ratio = [&](double theta) {
        const Vec u = make_vec({std::cos(theta), std::sin(theta)});
        return w.dot(u) / norm.value(u);
    };
    double lo = base - 0.5 * kPi;
    double hi = base + 0.5 * kPi;
    const double g = golden_ratio_step();
    double a = lo + g * (hi - lo);
    double b = hi - g * (hi - lo);
    double fa = ratio(a);
    double fb = ratio(b);
    int it = 0;
    for (; it < 200 && hi - lo > 1e-13; ++it) {
        if (fa < fb) {
            lo = a; a = b; fa = fb;
            b = hi - g * (hi - lo); fb = ratio(b);
        } else {
            hi = b; b = a; fb = fa;
            a = lo + g * (hi - lo); fa = ratio(a);
        }
    }
    const double theta = 0.5 * (lo + hi);
    Vec u = make_vec({std::cos(theta), std::sin(theta)});
    u /= norm.value(u);
    Maximizer m;
    m.u = u;
    m.value = w.dot(u);
    m.iterations = it;
    m.gap = (w - m.value * norm.gradient(u)).norm() / w.norm();
    return m;
}

}  // namespace detail

/// Maximizes R(u) = w.u / N(u) over directions by Riemannian Newton on the
/// Euclidean sphere with backtracking. `Norm` needs dimension(), value(),
/// gradient() and hessian(); the same routine computes F* from F and F**
/// from F*.
template <class Norm>
Maximizer maximize_ratio(const Norm& norm, const Vec& w, const SolverOptions& opts = {}) {
    require(w.size() == norm.dimension(), "conjugate argument has wrong dimension");
    require_finite(w, "conjugate argument");
    const double wn = w.norm();
    if (wn == 0.0) throw DomainError("conjugate maximizer undefined at w = 0");

    const auto ratio = [&](const Vec& v) { return w.dot(v) / norm.value(v); };
    Vec u = w / wn;
    double r = ratio(u);
    double gap = std::numeric_limits<double>::infinity();
    int small_steps = 0;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        const double nu = norm.value(u);
        const Vec residual = w - r * norm.gradient(u);
        gap = residual.norm() / wn;
        const Mat t = orthogonal_complement(u);
        const Mat h = (r / nu) * (t.transpose() * norm.hessian(u) * t);
        const Vec step = t * Vec(h.ldlt().solve(t.transpose() * residual / nu));
        // Near the maximizer R is flat to rounding, so a decrease of a few
        // ulps is accepted; the stationarity gap decides convergence.
        double alpha = 1.0;
        Vec candidate = u;
        double rc = r;
        bool accepted = false;
        for (int k = 0; k < 50; ++k) {
            candidate = (u + alpha * step).normalized();
            rc = ratio(candidate);
            if (rc >= r - 8 * std::numeric_limits<double>::epsilon() * std::abs(r)) { accepted = true; break; }
            alpha *= 0.5;
        }
        const double moved = accepted ? (candidate - u).norm() : 0.0;
        if (accepted) { u = candidate; r = rc; }
        // One extra Newton step after the first small one polishes to rounding level.
        if (moved <= opts.tolerance) ++small_steps;
        if (small_steps >= 2 || !accepted || gap <= 1e-15) {
            Maximizer m;
            m.u = u / norm.value(u);
            m.value = w.dot(m.u);
            m.iterations = it;
            m.gap = (w - m.value * norm.gradient(m.u)).norm() / wn;
            if (m.gap <= std::sqrt(opts.tolerance)) return m;
            break;
        }
    }
    if (w.size() == 2) {
        Maximizer m = detail::golden_section_ratio(norm, w);
        if (m.gap <= std::sqrt(opts.tolerance)) return m;
        gap = m.gap;
    }
    throw SolverError("conjugate solver did not converge", r, gap);
}

/// F* of an elliptic integrand. Single-term integrands use the closed form
/// sqrt(w^T M^{-1} w); sums go through maximize_ratio.
class DualNorm {
public:
    explicit DualNorm(Integrand f, SolverOptions opts = {}) : f_(std::move(f)), opts_(opts) {
        require(opts_.max_iterations > 0 && opts_.tolerance > 0.0, "invalid conjugate solver options");
    }

    const Integrand& integrand() const { return f_; }
    const SolverOptions& options() const { return opts_; }
    int dimension() const { return f_.dimension(); }
    bool has_closed_form() const { return f_.terms().size() == 1; }

    double conjugate(const Vec& w) const {
        require(w.size() == dimension(), "conjugate argument has wrong dimension");
        require_finite(w, "conjugate argument");
        if (w.squaredNorm() == 0.0) return 0.0;
        if (has_closed_form()) return closed_form(w);
        return solve(w).value;
    }

    /// G*(w), 0-homogeneous; lies on {F = 1}.
    Vec grad_conjugate(const Vec& w) const {
        require(w.size() == dimension(), "conjugate argument has wrong dimension");
        require_finite(w, "conjugate argument");
        if (w.squaredNorm() == 0.0) throw DomainError("G* is not defined at the origin");
        if (has_closed_form()) {
            const Integrand::Term& t = f_.terms().front();
            return Vec(t.inverse * w) / closed_form(w);
        }
        return solve(w).u;
    }

    /// D^2 F*(y) from the inverse-map identity: with s = F*(y), y^ = y/s and
    /// x = G*(y^), D G*(y^) restricted to tangents is the inverse of
    /// D G(x) = D^2F(x) restricted to tangents, mapping y^-perp to x-perp.
    Mat hessian_conjugate(const Vec& y) const {
        const double s = conjugate(y);
        if (s == 0.0) throw DomainError("D^2 F* is not defined at the origin");
        const Vec yhat = y / s;
        const Vec x = grad_conjugate(yhat);
        const Mat h = f_.hessian(x);
        const Mat tx = orthogonal_complement(x);
        const Mat sy = orthogonal_complement(yhat);
        const Mat d = tx.transpose() * h * sy;
        const Eigen::Index n = d.rows();
        Mat p = Mat::Identity(n + 1, n + 1) - yhat * x.transpose();
        Mat result = sy * Mat(d.inverse()) * tx.transpose() * p / s;
        return 0.5 * (result + result.transpose());
    }

    /// Iterative path; always runs the solver, even when a closed form exists.
    Maximizer solve(const Vec& w) const { return maximize_ratio(f_view(), w, opts_); }

    /// Bounds of F* on the Euclidean unit sphere: |w| / sup F <= F*(w) <= |w| / inf F.
    double sphere_inf_bound() const { return 1.0 / f_.sphere_sup_bound(); }
    double sphere_sup_bound() const { return 1.0 / f_.sphere_inf_bound(); }

    // Norm interface so that maximize_ratio(DualNorm) computes F**.
    double value(const Vec& w) const { return conjugate(w); }
    Vec gradient(const Vec& w) const { return grad_conjugate(w); }
    Mat hessian(const Vec& w) const { return hessian_conjugate(w); }

private:
    struct FView {
        const Integrand* f;
        int dimension() const { return f->dimension(); }
        double value(const Vec& x) const { return f->evaluate(x); }
        Vec gradient(const Vec& x) const { return f->gradient(x); }
        Mat hessian(const Vec& x) const { return f->hessian(x); }
    };
    FView f_view() const { return FView{&f_}; }

    double closed_form(const Vec& w) const {
        const Integrand::Term& t = f_.terms().front();
        return std::sqrt(std::max(0.0, w.dot(t.inverse * w)));
    }

    Integrand f_;
    SolverOptions opts_;
};

struct WulffNode {
    Vec x;
    Vec normal;
};

struct WulffSample {
    Vec center;
    double radius = 0.0;
    std::vector<WulffNode> nodes;
    std::size_t resolution = 0;
};

/// Boundary of B^{F*}(center, r): for each grid direction u, x = center + r G(u)
/// with exact outward unit normal u/|u|. A d=3 resolution is a node count.
inline WulffSample wulff_sample(const DualNorm& dual, const Vec& center, double r, std::size_t resolution) {
    const int d = dual.dimension();
    require(center.size() == d, "Wulff center has wrong dimension");
    require_finite(center, "Wulff center");
    require(std::isfinite(r) && r > 0.0, "Wulff radius must be > 0");
    require(resolution >= (d == 2 ? 16u : 256u), "Wulff sample resolution too small");
    const SphereGrid grid = SphereGrid::with_node_count(d, resolution);
    WulffSample sample;
    sample.center = center;
    sample.radius = r;
    sample.resolution = grid.size();
    sample.nodes.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vec& u = grid.direction(i);
        sample.nodes.push_back(WulffNode{center + r * dual.integrand().gradient(u), u});
    }
    return sample;
}

}  // namespace wulffkit
