#pragma once

// Elliptic integrands F: even, positively 1-homogeneous norms built from
// closed-form families so that gradients and Hessians are exact.

#include "wulffkit/core.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace wulffkit {

enum class Family { euclidean, quadratic, weighted_sum };

inline std::string to_string(Family f) {
    switch (f) {
        case Family::euclidean: return "euclidean";
        case Family::quadratic: return "quadratic";
        case Family::weighted_sum: return "weighted-sum";
    }
    return "unknown";
}

/// F(x) = sum_k sqrt(x^T M_k x). Euclidean and single quadratic integrands
/// are one-term sums; weighted sums are flattened into the term list with the
/// weights folded into the matrices (w sqrt(x^T M x) = sqrt(x^T (w^2 M) x)).
class Integrand {
public:
    struct Term {
        Mat matrix;          // effective SPD matrix (weight already folded in)
        Mat inverse;
        double lambda_min;   // extreme eigenvalues of `matrix`
        double lambda_max;
        bool identity;       // exactly the Euclidean norm
    };

    static Integrand euclidean(int dim) {
        require_dimension(dim);
        Integrand f(Family::euclidean, dim);
        f.terms_.push_back(Term{Mat::Identity(dim, dim), Mat::Identity(dim, dim), 1.0, 1.0, true});
        return f;
    }

    /// Throws InputError unless `m` is square, finite, symmetric and positive definite.
    static Integrand quadratic(const Mat& m) {
        require(m.rows() == m.cols(), "quadratic integrand matrix must be square");
        require_dimension(static_cast<int>(m.rows()));
        require(m.allFinite(), "quadratic integrand matrix has non-finite entries");
        const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
        require((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
                "quadratic integrand matrix must be symmetric");
        Integrand f(Family::quadratic, static_cast<int>(m.rows()));
        f.terms_.push_back(make_term(0.5 * (m + m.transpose())));
        return f;
    }

    /// Positive combination sum_k w_k F_k; nested sums are flattened.
    static Integrand weighted_sum(const std::vector<std::pair<double, Integrand>>& parts) {
        require(!parts.empty(), "weighted-sum integrand needs at least one term");
        const int dim = parts.front().second.dimension();
        Integrand f(Family::weighted_sum, dim);
        for (const auto& [weight, part] : parts) {
            require(std::isfinite(weight) && weight > 0.0, "weighted-sum weights must be finite and > 0");
            require(part.dimension() == dim, "weighted-sum terms must share one dimension");
            for (const Term& t : part.terms_) {
                Term scaled = make_term(weight * weight * t.matrix);
                scaled.identity = false;
                f.terms_.push_back(std::move(scaled));
            }
        }
        return f;
    }

    int dimension() const { return dim_; }
    Family family() const { return family_; }
    const std::vector<Term>& terms() const { return terms_; }

    /// F(x); F(0) = 0 by homogeneity.
    double evaluate(const Vec& x) const {
        check_input(x);
        double value = 0.0;
        for (const Term& t : terms_) value += term_norm(t, x);
        return value;
    }

    /// G(x) = grad F(x); 0-homogeneous. Throws DomainError at x = 0.
    Vec gradient(const Vec& x) const {
        check_nonzero(x);
        Vec g = Vec::Zero(dim_);
        for (const Term& t : terms_) {
            if (t.identity) {
                g += x / x.norm();
            } else {
                const Vec mx = t.matrix * x;
                g += mx / std::sqrt(x.dot(mx));
            }
        }
        return g;
    }

    /// D^2 F(x); symmetric, kernel contains x, scales as 1/|x|.
    Mat hessian(const Vec& x) const {
        check_nonzero(x);
        Mat h = Mat::Zero(dim_, dim_);
        for (const Term& t : terms_) {
            const Vec mx = t.identity ? Vec(x) : Vec(t.matrix * x);
            const double f = std::sqrt(x.dot(mx));
            h += (t.matrix - mx * mx.transpose() / (f * f)) / f;
        }
        return 0.5 * (h + h.transpose());
    }

    /// Upper bound on sup F over the Euclidean unit sphere.
    double sphere_sup_bound() const {
        double s = 0.0;
        for (const Term& t : terms_) s += std::sqrt(t.lambda_max);
        return s;
    }

    /// Lower bound on inf F over the Euclidean unit sphere.
    double sphere_inf_bound() const {
        double s = 0.0;
        for (const Term& t : terms_) s += std::sqrt(t.lambda_min);
        return s;
    }

private:
    Integrand(Family family, int dim) : family_(family), dim_(dim) {}

    static Term make_term(const Mat& m) {
        Eigen::SelfAdjointEigenSolver<Mat> eig(m);
        require(eig.info() == Eigen::Success, "integrand matrix eigen-decomposition failed");
        const double lmin = eig.eigenvalues().minCoeff();
        const double lmax = eig.eigenvalues().maxCoeff();
        require(lmin > 1e-14 * std::max(1.0, lmax), "integrand matrix must be positive definite");
        return Term{m, m.inverse(), lmin, lmax, false};
    }

    static double term_norm(const Term& t, const Vec& x) {
        return t.identity ? x.norm() : std::sqrt(std::max(0.0, x.dot(t.matrix * x)));
    }

    void check_input(const Vec& x) const {
        require(x.size() == dim_, "integrand argument has wrong dimension");
        require_finite(x, "integrand argument");
    }

    void check_nonzero(const Vec& x) const {
        check_input(x);
        if (x.squaredNorm() == 0.0) throw DomainError("F is not differentiable at the origin");
    }

    Family family_;
    int dim_;
    std::vector<Term> terms_;
};

struct EllipticityReport {
    double gamma_estimate = 0.0;   // min over probes of <(v,v), D^2F(u)>, |u|=|v|=1, v _|_ u
    double cf_estimate = 0.0;      // max{1/gamma, sup F / inf F, max ||D^2F(u)||}
    std::size_t sample_count = 0;
    bool elliptic = false;
};

/// Probes `samples` unit directions u (uniform angles in d=2, seeded Gaussian
/// directions in d=3) and takes the exact minimum over v _|_ u, i.e. the
/// smallest eigenvalue of D^2F(u) restricted to u^perp.
inline EllipticityReport estimate_ellipticity(const Integrand& f, std::size_t samples,
                                              std::uint64_t seed = 0x5eed) {
    require(samples >= 100, "estimate_ellipticity needs at least 100 samples");
    const int d = f.dimension();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;

    double gamma = std::numeric_limits<double>::infinity();
    double fmax = 0.0;
    double fmin = std::numeric_limits<double>::infinity();
    double hess_norm = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        Vec u(d);
        if (d == 2) {
            const double theta = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(samples);
            u << std::cos(theta), std::sin(theta);
        } else {
            for (int i = 0; i < d; ++i) u(i) = normal(rng);
            u.normalize();
        }
        const Mat h = f.hessian(u);
        const Mat t = orthogonal_complement(u);
        const Mat restricted = t.transpose() * h * t;
        Eigen::SelfAdjointEigenSolver<Mat> tangential(restricted);
        gamma = std::min(gamma, tangential.eigenvalues().minCoeff());
        Eigen::SelfAdjointEigenSolver<Mat> full(h);
        hess_norm = std::max(hess_norm, full.eigenvalues().cwiseAbs().maxCoeff());
        const double fu = f.evaluate(u);
        fmax = std::max(fmax, fu);
        fmin = std::min(fmin, fu);
    }
    EllipticityReport report;
    report.sample_count = samples;
    report.gamma_estimate = std::max(0.0, gamma);
    report.elliptic = gamma > 0.0;
    const double inv_gamma = report.elliptic ? 1.0 / gamma : std::numeric_limits<double>::infinity();
    report.cf_estimate = std::max({inv_gamma, fmax / fmin, hess_norm, 1.0});
    return report;
}

}  // namespace wulffkit
