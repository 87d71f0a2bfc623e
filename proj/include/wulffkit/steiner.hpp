#pragma once

// Tube volumes of distance fields, Steiner polynomial fits, the
// positive-reach test, and closed-form coefficients from F-mean curvature.

#include "wulffkit/core.hpp"
#include "wulffkit/curvature.hpp"
#include "wulffkit/distance.hpp"
#include "wulffkit/hypersurface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace wulffkit {

struct TubeCurve {
    std::vector<double> t;
    std::vector<double> volume;
};

/// Largest t for which the F*-tube around A provably stays inside the grid
/// box. Complement tubes lie inside the bodies, so only containment matters.
inline double tube_margin(const DistanceField& field) {
    const Grid& g = field.grid();
    double euclid = std::numeric_limits<double>::infinity();
    for (const auto& p : field.source().points) {
        for (int a = 0; a < g.dim; ++a) {
            euclid = std::min(euclid, p(a) - g.lower(a));
            euclid = std::min(euclid, g.lower(a) + g.cells[static_cast<std::size_t>(a)] * g.h - p(a));
        }
    }
    if (euclid < 0.0) return 0.0;
    if (field.source().kind == SetKind::complement) return std::numeric_limits<double>::infinity();
    // F*(v) >= |v| / sup F, so the tube of F*-radius t lies within |v| <= t sup F.
    return euclid / field.dual().integrand().sphere_sup_bound();
}

/// V(t) = cell volume x #{cells : 0 < delta <= t}.
inline TubeCurve tube_volumes(const DistanceField& field, const std::vector<double>& ts) {
    require(!ts.empty(), "tube_volumes needs at least one t");
    for (std::size_t i = 1; i < ts.size(); ++i) require(ts[i] > ts[i - 1], "t samples must be increasing");
    require(ts.front() > 0.0, "t samples must be > 0");
    const double margin = tube_margin(field);
    if (ts.back() > margin)
        throw TruncationError("tube radius " + std::to_string(ts.back()) + " exceeds the grid margin " + std::to_string(margin));
    std::vector<double> sorted;
    for (double v : field.delta())
        if (v > 0.0) sorted.push_back(v);
    std::sort(sorted.begin(), sorted.end());
    TubeCurve c;
    c.t = ts;
    const double cell = field.grid().cell_volume();
    for (double t : ts) {
        const auto count = std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
        c.volume.push_back(cell * static_cast<double>(count));
    }
    return c;
}

/// 40 equispaced radii in [lo r, hi r].
inline std::vector<double> steiner_t_grid(double r, std::size_t count = 40, double lo = 0.05, double hi = 0.9) {
    require(r > 0.0 && count >= 2 && 0.0 < lo && lo < hi, "invalid Steiner t grid");
    std::vector<double> ts;
    for (std::size_t k = 0; k < count; ++k)
        ts.push_back(r * (lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1)));
    return ts;
}

struct SteinerFit {
    std::vector<double> coefficients;  // c_1 .. c_degree
    double residual = 0.0;
    double t_min = 0.0;
    double t_max = 0.0;

    double evaluate(double t) const {
        double v = 0.0;
        double p = t;
        for (double c : coefficients) { v += c * p; p *= t; }
        return v;
    }
};

/// Least squares V(t) ~ sum_{j=1}^{degree} c_j t^j (no constant term).
inline SteinerFit fit_polynomial(const TubeCurve& curve, int degree) {
    require(degree >= 1, "Steiner degree must be >= 1");
    const auto m = curve.t.size();
    require(curve.volume.size() == m, "tube curve arrays differ in length");
    require(m >= static_cast<std::size_t>(3 * degree), "Steiner fit needs at least 3 x degree samples");
    Eigen::MatrixXd a(static_cast<Eigen::Index>(m), degree);
    Eigen::VectorXd b(static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < m; ++k) {
        double p = curve.t[k];
        for (int j = 0; j < degree; ++j) { a(static_cast<Eigen::Index>(k), j) = p; p *= curve.t[k]; }
        b(static_cast<Eigen::Index>(k)) = curve.volume[k];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-12);
    if (qr.rank() < degree) throw InputError("rank-deficient Steiner design (degenerate t grid)");
    const Eigen::VectorXd c = qr.solve(b);
    SteinerFit fit;
    fit.coefficients.assign(c.data(), c.data() + c.size());
    fit.t_min = *std::min_element(curve.t.begin(), curve.t.end());
    fit.t_max = *std::max_element(curve.t.begin(), curve.t.end());
    double err = 0.0;
    double vmax = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        err = std::max(err, std::abs(fit.evaluate(curve.t[k]) - curve.volume[k]));
        vmax = std::max(vmax, std::abs(curve.volume[k]));
    }
    fit.residual = vmax > 0.0 ? err / vmax : err;
    return fit;
}

/// c_i = (-1/n)^{i-1} n! / (i! (n-i+1)!) sum F(nu) H^{i-1} w, i = 1..n+1, for
/// the inward tube of a smooth body (A = complement).
inline std::vector<double> claim5_coefficients(const SurfaceQuadrature& q, const std::vector<CurvatureSample>& samples,
                                               const Integrand& f) {
    require(samples.size() == q.nodes.size(), "one curvature sample per node required");
    const int n = q.dim - 1;
    std::vector<double> moments(static_cast<std::size_t>(n) + 1, 0.0);
    for (std::size_t k = 0; k < q.nodes.size(); ++k) {
        const double base = f.evaluate(q.nodes[k].normal) * q.nodes[k].weight;
        double hp = 1.0;
        for (int i = 0; i <= n; ++i) { moments[static_cast<std::size_t>(i)] += base * hp; hp *= samples[k].h; }
    }
    const auto factorial = [](int k) { double r = 1; for (int j = 2; j <= k; ++j) r *= j; return r; };
    std::vector<double> c;
    for (int i = 1; i <= n + 1; ++i) {
        const double sign_scale = std::pow(-1.0 / n, i - 1);
        c.push_back(sign_scale * factorial(n) / (factorial(i) * factorial(n - i + 1)) * moments[static_cast<std::size_t>(i - 1)]);
    }
    return c;
}

struct ReachVerdict {
    bool consistent = false;
    std::string verdict;                 // consistent-with-reach>=r | inconsistent
    double residual = 0.0;
    double max_coefficient_deviation = -1.0;  // relative, when reference coefficients are given
};

inline ReachVerdict positive_reach_test(const SteinerFit& fit, double tol = 1e-2,
                                        const std::vector<double>& reference = {}) {
    ReachVerdict v;
    v.residual = fit.residual;
    v.consistent = fit.residual <= tol;
    v.verdict = v.consistent ? "consistent-with-reach>=r" : "inconsistent";
    if (!reference.empty()) {
        require(reference.size() == fit.coefficients.size(), "reference coefficients have the wrong length");
        v.max_coefficient_deviation = 0.0;
        for (std::size_t i = 0; i < reference.size(); ++i)
            v.max_coefficient_deviation = std::max(
                v.max_coefficient_deviation, std::abs(fit.coefficients[i] - reference[i]) / std::abs(reference[i]));
    }
    return v;
}

}  // namespace wulffkit
