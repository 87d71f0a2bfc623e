#pragma once

// Anisotropic Heintze-Karcher ratio, the Montiel-Ros tube integral and the
// Wulff-union equality classifier.

#include "wulffkit/core.hpp"
#include "wulffkit/curvature.hpp"
#include "wulffkit/hypersurface.hpp"
#include "wulffkit/integrand.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace wulffkit {

/// Throws InputError unless the bounding spheres of all bodies are disjoint.
inline void require_disjoint(const std::vector<StarBody>& bodies) {
    for (std::size_t i = 0; i < bodies.size(); ++i)
        for (std::size_t j = i + 1; j < bodies.size(); ++j)
            if ((bodies[i].center() - bodies[j].center()).norm() <= bodies[i].bounding_radius() + bodies[j].bounding_radius())
                throw InputError("bodies " + std::to_string(i) + " and " + std::to_string(j) + " may overlap");
}

/// int_0^T prod_i (1 - t kappa_i) dt with T = 1 / max kappa, by expanding the
/// product (degree n) and integrating term by term.
inline double montiel_ros_inner(const Vec& kappa) {
    const double kmax = kappa.maxCoeff();
    if (!(kmax > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    std::vector<double> poly{1.0};
    for (Eigen::Index i = 0; i < kappa.size(); ++i) {
        std::vector<double> next(poly.size() + 1, 0.0);
        for (std::size_t k = 0; k < poly.size(); ++k) {
            next[k] += poly[k];
            next[k + 1] -= kappa(i) * poly[k];
        }
        poly = std::move(next);
    }
    const double t = 1.0 / kmax;
    double value = 0.0;
    double p = t;
    for (std::size_t k = 0; k < poly.size(); ++k) {
        value += poly[k] * p / static_cast<double>(k + 1);
        p *= t;
    }
    return value;
}

struct MontielRos {
    double value = 0.0;
    std::size_t excluded = 0;  // nodes with no positive principal curvature
};

inline MontielRos montiel_ros_integral(const SurfaceQuadrature& q, const std::vector<CurvatureSample>& samples,
                                       const Integrand& f) {
    require(samples.size() == q.nodes.size(), "one curvature sample per node required");
    MontielRos mr;
    for (std::size_t k = 0; k < q.nodes.size(); ++k) {
        const double inner = montiel_ros_inner(samples[k].kappa);
        if (std::isnan(inner)) { ++mr.excluded; continue; }
        mr.value += f.evaluate(q.nodes[k].normal) * q.nodes[k].weight * inner;
    }
    return mr;
}

struct HKOptions {
    double tol_eq = 1e-3;
    UmbilicityOptions umbilicity;
};

struct HKReport {
    double vol = 0.0;
    double integral = 0.0;      // sum F(nu) / H w
    double ratio = 0.0;         // vol / (n/(n+1) integral)
    double h_min = 0.0;
    double h_max = 0.0;
    double mr_integral = 0.0;
    std::size_t mr_excluded = 0;
    double amgm_gap = 0.0;      // max over umbilic nodes of |mr inner - n/((n+1)H)| relative
    double umbilic_spread = 0.0;  // max over nodes of max_j |kappa_j - H/n| / (H/n)
    std::vector<UmbilicityReport> bodies;
    double dispersion = 0.0;
    std::size_t nodes = 0;
    std::string verdict;        // equality | strict
};

inline HKReport hk_evaluate(const std::vector<StarBody>& bodies, const Integrand& f, std::size_t resolution,
                            const HKOptions& opts = {}) {
    require(!bodies.empty(), "hk_evaluate needs at least one body");
    require_disjoint(bodies);
    std::vector<SurfaceQuadrature> parts;
    for (const auto& b : bodies) parts.push_back(sample_surface(b, resolution));
    const SurfaceQuadrature q = concatenate(parts);
    const auto samples = curvature_samples(bodies, f, q);
    const int n = q.dim - 1;

    HKReport r;
    r.nodes = q.nodes.size();
    r.h_min = std::numeric_limits<double>::infinity();
    r.h_max = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < q.nodes.size(); ++k) {
        const double h = samples[k].h;
        if (!(h > 0.0))
            throw HypothesisViolation("mean curvature H = " + std::to_string(h) + " <= 0 at node " + std::to_string(k), k);
        r.h_min = std::min(r.h_min, h);
        r.h_max = std::max(r.h_max, h);
        const double fw = f.evaluate(q.nodes[k].normal) * q.nodes[k].weight;
        r.integral += fw / h;
        const double mean = h / n;
        const double spread = (samples[k].kappa.array() - mean).abs().maxCoeff() / mean;
        r.umbilic_spread = std::max(r.umbilic_spread, spread);
        if (spread <= 1e-9) {
            const double amgm = n / ((n + 1) * h);
            r.amgm_gap = std::max(r.amgm_gap, std::abs(montiel_ros_inner(samples[k].kappa) - amgm) / amgm);
        }
    }
    r.vol = volume(q);
    r.ratio = r.vol / (static_cast<double>(n) / (n + 1) * r.integral);
    const MontielRos mr = montiel_ros_integral(q, samples, f);
    r.mr_integral = mr.value;
    r.mr_excluded = mr.excluded;
    for (std::size_t b = 0; b < bodies.size(); ++b) {
        r.bodies.push_back(umbilicity_classify(q, samples, b, opts.umbilicity));
        r.dispersion = std::max(r.dispersion, r.bodies.back().dispersion);
    }
    r.verdict = std::abs(r.ratio - 1.0) <= opts.tol_eq ? "equality" : "strict";
    return r;
}

struct ClassifierOptions {
    double tol_eq = 1e-3;
    double tol_umb_rel = 1e-3;  // tol_umb = tol_umb_rel H / n
    double tol_r = 0.02;        // relative
};

struct Classification {
    std::string verdict;        // wulff-union | strict
    std::vector<std::string> failing;
    std::vector<double> radii;
    std::vector<Vec> centers;
    bool equal_radii = false;
};

/// Equality case: ratio 1, every node F-umbilic, and every fitted Wulff
/// radius at least n / c (c an upper bound for H).
inline Classification equality_classifier(const HKReport& r, int dim, double c, const ClassifierOptions& opts = {}) {
    require(c >= r.h_max * (1 - 1e-12), "classifier bound c must be >= max H");
    const int n = dim - 1;
    Classification out;
    if (std::abs(r.ratio - 1.0) > opts.tol_eq) out.failing.push_back("ratio");
    // Pointwise umbilicity is vacuous for curves (n = 1); the per-body fit
    // (constant lambda, eta - lambda x = c) carries the rigidity test there.
    if (r.umbilic_spread > opts.tol_umb_rel) out.failing.push_back("pointwise-umbilicity");
    bool umbilic = true;
    bool fitted = true;
    for (const auto& b : r.bodies) {
        if (b.verdict == "not-umbilical" || b.verdict == "hyperplane-like") umbilic = false;
        if (b.verdict != "wulff") { fitted = false; continue; }
        out.radii.push_back(b.radius);
        out.centers.push_back(b.center);
    }
    if (!umbilic) out.failing.push_back("umbilicity");
    else if (!fitted) out.failing.push_back("wulff-fit");
    for (double radius : out.radii)
        if (radius < n / c * (1 - opts.tol_r)) { out.failing.push_back("radius-bound"); break; }
    if (!out.radii.empty()) {
        const auto [lo, hi] = std::minmax_element(out.radii.begin(), out.radii.end());
        out.equal_radii = *hi - *lo <= opts.tol_r * *hi;
    }
    out.verdict = out.failing.empty() ? "wulff-union" : "strict";
    return out;
}

}  // namespace wulffkit
