#include "wulffkit/duality.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace wulffkit;

namespace {

Vec random_vec(std::mt19937_64& rng, int d) {
    std::normal_distribution<double> n;
    Vec v(d);
    for (int i = 0; i < d; ++i) v(i) = n(rng);
    return v;
}

Integrand mixed2() {
    return Integrand::weighted_sum({{1.0, Integrand::quadratic(diag({4, 1}))}, {0.7, Integrand::euclidean(2)}});
}

Integrand mixed3() {
    Mat m(3, 3);
    m << 3, 0.5, 0.2, 0.5, 2, 0.1, 0.2, 0.1, 1;
    return Integrand::weighted_sum({{1.0, Integrand::quadratic(m)}, {0.5, Integrand::quadratic(diag({1, 4, 2}))}});
}

}  // namespace

TEST(Conjugate, ClosedForms) {
    EXPECT_NEAR(DualNorm(Integrand::euclidean(2)).conjugate(make_vec({3, 4})), 5.0, 1e-15);
    // Frozen brute-force oracle over 1e5 points of {F = 1}: 0.5.
    const DualNorm q(Integrand::quadratic(diag({4, 1})));
    EXPECT_NEAR(q.conjugate(make_vec({1, 0})), 0.5, 1e-15);
    EXPECT_NEAR(q.solve(make_vec({1, 0})).value, 0.5, 1e-12);
    EXPECT_EQ(q.conjugate(make_vec({0, 0})), 0.0);
}

TEST(Conjugate, GradientClosedForms) {
    const Vec e = DualNorm(Integrand::euclidean(2)).grad_conjugate(make_vec({0, 2}));
    EXPECT_NEAR((e - make_vec({0, 1})).norm(), 0.0, 1e-15);
    const DualNorm q(Integrand::quadratic(diag({4, 1})));
    EXPECT_NEAR((q.grad_conjugate(make_vec({1, 0})) - make_vec({0.5, 0})).norm(), 0.0, 1e-15);
    EXPECT_NEAR((q.solve(make_vec({1, 0})).u - make_vec({0.5, 0})).norm(), 0.0, 1e-9);
    EXPECT_THROW(q.grad_conjugate(make_vec({0, 0})), DomainError);
}

TEST(Conjugate, SolverMatchesClosedFormOn360Directions) {
    const Mat m = diag({4, 1});
    const DualNorm q(Integrand::quadratic(m));
    double worst = 0.0;
    for (int k = 0; k < 360; ++k) {
        const double th = 2 * kPi * k / 360.0;
        const Vec w = make_vec({std::cos(th), std::sin(th)});
        worst = std::max(worst, std::abs(q.solve(w).value - std::sqrt(w.dot(m.inverse() * w))));
    }
    EXPECT_LE(worst, 1e-6);
}

TEST(Conjugate, UnitLevelAndInversePair) {
    std::mt19937_64 rng(1);
    for (const auto& f : {Integrand::quadratic(diag({4, 1})), mixed2(), Integrand::quadratic(diag({4, 1, 1})), mixed3()}) {
        const DualNorm dual(f);
        const int points = dual.has_closed_form() ? 1000 : 200;
        for (int k = 0; k < points; ++k) {
            const Vec x = random_vec(rng, f.dimension());
            const Vec gx = f.gradient(x);
            EXPECT_NEAR(dual.conjugate(gx), 1.0, 1e-8);
            const Vec u = x / f.evaluate(x);
            EXPECT_LE((dual.grad_conjugate(gx) - u).norm(), 1e-8);
            const Vec w = random_vec(rng, f.dimension());
            const Vec gw = dual.grad_conjugate(w);
            EXPECT_NEAR(f.evaluate(gw), 1.0, 1e-8);
            EXPECT_NEAR(w.dot(gw), dual.conjugate(w), 1e-8 * dual.conjugate(w));
            EXPECT_LE((f.gradient(gw) - w / dual.conjugate(w)).norm(), 1e-8);
        }
    }
}

TEST(Conjugate, DoubleConjugationRecoversF) {
    std::mt19937_64 rng(2);
    for (const auto& f : {Integrand::quadratic(diag({4, 1})), mixed2(), Integrand::quadratic(diag({4, 1, 1}))}) {
        const DualNorm dual(f);
        for (int k = 0; k < 500; ++k) {
            const Vec x = random_vec(rng, f.dimension());
            const double fx = f.evaluate(x);
            EXPECT_LE(std::abs(maximize_ratio(dual, x).value - fx), 1e-8 * fx);
        }
    }
}

TEST(Conjugate, StrictConvexityAndEvenness) {
    std::mt19937_64 rng(3);
    for (const auto& f : {Integrand::quadratic(diag({4, 1})), mixed2(), mixed3()}) {
        const DualNorm dual(f);
        for (int k = 0; k < 200; ++k) {
            const Vec x = random_vec(rng, f.dimension());
            const Vec y = random_vec(rng, f.dimension());
            EXPECT_LT(dual.conjugate(x + y), dual.conjugate(x) + dual.conjugate(y));
            EXPECT_NEAR(dual.conjugate(-x), dual.conjugate(x), 1e-10 * dual.conjugate(x));
            const double s = x.norm();
            EXPECT_GE(dual.conjugate(x), s * dual.sphere_inf_bound() * (1 - 1e-12));
            EXPECT_LE(dual.conjugate(x), s * dual.sphere_sup_bound() * (1 + 1e-12));
        }
    }
}

TEST(Conjugate, InverseMapHessianMatchesClosedForm) {
    std::mt19937_64 rng(4);
    for (const Mat& m : {diag({4, 1}), diag({4, 1, 1}), Mat(diag({2, 3, 5}))}) {
        const DualNorm dual(Integrand::quadratic(m));
        const Mat inv = m.inverse();
        for (int k = 0; k < 100; ++k) {
            const Vec w = random_vec(rng, static_cast<int>(m.rows()));
            const double s = std::sqrt(w.dot(inv * w));
            const Vec iw = inv * w;
            const Mat exact = (inv - iw * iw.transpose() / (s * s)) / s;
            EXPECT_LE((dual.hessian_conjugate(w) - exact).norm(), 1e-10 * exact.norm());
        }
    }
}

TEST(Conjugate, InverseMapHessianMatchesDifferencesForSums) {
    std::mt19937_64 rng(6);
    for (const auto& f : {mixed2(), mixed3()}) {
        const DualNorm dual(f);
        const int d = f.dimension();
        for (int k = 0; k < 10; ++k) {
            const Vec w = random_vec(rng, d);
            const Mat h = dual.hessian_conjugate(w);
            Mat fd(d, d);
            for (int j = 0; j < d; ++j) {
                Vec e = Vec::Zero(d);
                e(j) = 1e-4;
                fd.col(j) = (dual.grad_conjugate(w + e) - dual.grad_conjugate(w - e)) / 2e-4;
            }
            EXPECT_LE((fd - h).norm(), 1e-5 * h.norm());
            EXPECT_LE((h * w).norm(), 1e-10 * h.norm() * w.norm());
        }
    }
}

TEST(Conjugate, GoldenSectionFallbackAgrees) {
    const DualNorm dual(mixed2());
    struct View {
        const Integrand* f;
        int dimension() const { return 2; }
        double value(const Vec& x) const { return f->evaluate(x); }
        Vec gradient(const Vec& x) const { return f->gradient(x); }
    };
    const Vec w = make_vec({0.3, -0.8});
    const Maximizer g = detail::golden_section_ratio(View{&dual.integrand()}, w);
    EXPECT_NEAR(g.value, dual.conjugate(w), 1e-10);
}

TEST(Conjugate, SolverErrorCarriesBestValue) {
    SolverOptions opts;
    opts.max_iterations = 1;
    opts.tolerance = 1e-300;
    const DualNorm dual(Integrand::quadratic(Mat(diag({1, 50, 1000}))), opts);
    try {
        dual.solve(make_vec({1, 1, 1}));
        FAIL() << "expected SolverError";
    } catch (const SolverError& e) {
        EXPECT_GT(e.best_value, 0.0);
        EXPECT_GT(e.gap, 0.0);
    }
}

TEST(WulffSample, EuclideanNodesOnUnitCircle) {
    const WulffSample s = wulff_sample(DualNorm(Integrand::euclidean(2)), make_vec({0, 0}), 1.0, 64);
    ASSERT_EQ(s.nodes.size(), 64u);
    for (const auto& n : s.nodes) {
        EXPECT_NEAR(n.x.norm(), 1.0, 1e-15);
        EXPECT_LE((n.x - n.normal).norm(), 1e-15);
    }
}

TEST(WulffSample, QuadraticNodesOnEllipse) {
    const DualNorm dual(Integrand::quadratic(diag({4, 1})));
    const Vec c = make_vec({1, -2});
    const WulffSample s = wulff_sample(dual, c, 1.0, 256);
    for (const auto& n : s.nodes) {
        const Vec y = n.x - c;
        EXPECT_NEAR(y(0) * y(0) / 4 + y(1) * y(1), 1.0, 1e-12);
        EXPECT_NEAR(dual.conjugate(y), 1.0, 1e-10);
        EXPECT_LE((dual.integrand().gradient(n.normal) - y).norm(), 1e-8);
        // outward normal is the normalized gradient of F* at x - c
        EXPECT_LE((dual.grad_conjugate(y).normalized() - n.normal).norm(), 1e-12);
    }
}

TEST(WulffSample, ThreeDimensionalRadius) {
    const DualNorm dual(Integrand::quadratic(diag({4, 1, 1})));
    const WulffSample s = wulff_sample(dual, make_vec({0, 0, 0}), 2.5, 512);
    ASSERT_EQ(s.nodes.size(), 16u * 32u);
    for (const auto& n : s.nodes) EXPECT_NEAR(dual.conjugate(n.x), 2.5, 1e-10);
}

TEST(WulffSample, Validation) {
    const DualNorm dual(Integrand::euclidean(2));
    EXPECT_THROW(wulff_sample(dual, make_vec({0, 0}), 1.0, 15), InputError);
    EXPECT_THROW(wulff_sample(dual, make_vec({0, 0}), 0.0, 64), InputError);
    EXPECT_THROW(wulff_sample(DualNorm(Integrand::euclidean(3)), make_vec({0, 0, 0}), 1.0, 255), InputError);
}
