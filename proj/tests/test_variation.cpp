#include "wulffkit/variation.hpp"

#include <gtest/gtest.h>

using namespace wulffkit;

namespace {

const DualNorm& quad41() {
    static const DualNorm d(Integrand::quadratic(diag({4, 1})));
    return d;
}

SurfaceQuadrature ellipse(std::size_t res) { return sample_surface(StarBody::ellipsoid(make_vec({0, 0}), diag({0.25, 1})), res); }

}  // namespace

TEST(VectorField, JacobianMatchesDifferences) {
    std::mt19937_64 rng(1);
    for (int d : {2, 3}) {
        const auto g = VectorField::random(d, rng);
        Vec x(d);
        for (int i = 0; i < d; ++i) x(i) = 0.3 * i - 0.2;
        double err[2];
        const double hs[2] = {1e-3, 1e-4};
        for (int s = 0; s < 2; ++s) {
            Mat fd(d, d);
            for (int j = 0; j < d; ++j) {
                Vec e = Vec::Zero(d);
                e(j) = hs[s];
                fd.col(j) = (g(x + e) - g(x - e)) / (2 * hs[s]);
            }
            err[s] = (fd - g.jacobian(x)).norm();
        }
        // quadratic fields: central differences are exact up to rounding
        EXPECT_LE(err[0], 1e-9);
        EXPECT_LE(err[1], 1e-9);
    }
    EXPECT_EQ(VectorField::constant(make_vec({1, 2})).jacobian(make_vec({3, 4})).norm(), 0.0);
}

TEST(StressTensor, DirectFormula) {
    const Integrand& f = quad41().integrand();
    const Vec nu = make_vec({0.6, 0.8});
    const Vec u = make_vec({-1.5, 0.25});
    const Vec expected = f.evaluate(nu) * u - nu * u.dot(f.gradient(nu));
    EXPECT_LE((stress_tensor(f, nu) * u - expected).norm(), 1e-15);
}

TEST(FirstVariation, ConstantDilationAndHomogeneity) {
    const Integrand& f = quad41().integrand();
    const auto q = ellipse(2048);
    EXPECT_EQ(first_variation(q, f, VectorField::constant(make_vec({1, -2}))), 0.0);
    const double p = perimeter_F(q, f);
    EXPECT_NEAR(first_variation(q, f, VectorField::linear(diag({1, 1}))), p, 1e-6 * p);
    // oracle: finite difference of P_F on scaled bodies, n-homogeneity
    const double s = 1e-4;
    const auto up = sample_surface(StarBody::ellipsoid(make_vec({0, 0}), diag({0.25, 1}) / ((1 + s) * (1 + s))), 2048);
    const auto down = sample_surface(StarBody::ellipsoid(make_vec({0, 0}), diag({0.25, 1}) / ((1 - s) * (1 - s))), 2048);
    EXPECT_NEAR(first_variation(q, f, VectorField::linear(diag({1, 1}))), (perimeter_F(up, f) - perimeter_F(down, f)) / (2 * s), 1e-6 * p);

    const auto q3 = sample_surface(StarBody::ellipsoid(make_vec({0, 0, 0}), diag({1, 0.25, 0.5})), 8192);
    const Integrand f3 = Integrand::quadratic(diag({4, 1, 1}));
    const double p3 = perimeter_F(q3, f3);
    EXPECT_NEAR(first_variation(q3, f3, VectorField::linear(diag({1, 1, 1}))), 2 * p3, 1e-6 * p3);
}

TEST(FlowDerivative, MatchesFirstVariationOnRandomFields) {
    std::mt19937_64 rng(7);
    const auto mixed = Integrand::weighted_sum({{1.0, Integrand::quadratic(diag({4, 1}))}, {0.5, Integrand::euclidean(2)}});
    const auto mixed3 = Integrand::weighted_sum({{1.0, Integrand::quadratic(diag({4, 1, 1}))}, {0.5, Integrand::euclidean(3)}});
    const std::vector<std::pair<SurfaceQuadrature, Integrand>> cases = {
        {ellipse(1024), Integrand::euclidean(2)},
        {sample_surface(StarBody::wulff(quad41(), make_vec({0.5, 0}), 1), 1024), quad41().integrand()},
        {sample_surface(StarBody::superellipse(make_vec({0, 0}), 4.0, make_vec({2, 1})), 1024), mixed},
        {sample_surface(StarBody::ellipsoid(make_vec({0, 0, 0}), diag({1, 0.25, 0.5})), 2048), mixed3},
    };
    for (const auto& [q, f] : cases) {
        const double h = 1e-4 * node_diameter(q);
        for (int k = 0; k < 10; ++k) {
            const auto g = VectorField::random(q.dim, rng);
            const double fv = first_variation(q, f, g);
            EXPECT_LE(std::abs(fv - flow_energy_derivative(q, f, g, h)), 1e-4 * (1 + std::abs(fv)));
        }
    }
}

TEST(FlowDerivative, DilationOfUnitCircleAndStepGuard) {
    const auto q = sample_surface(StarBody::ball(make_vec({0, 0}), 1), 1024);
    EXPECT_NEAR(flow_energy_derivative(q, Integrand::euclidean(2), VectorField::linear(diag({1, 1})), 1e-4), 2 * kPi, 1e-8);
    EXPECT_NEAR(flow_energy_derivative(q, Integrand::euclidean(2), VectorField::constant(make_vec({1, 1})), 1e-4), 0.0, 1e-9);
    EXPECT_THROW(flow_energy_derivative(q, Integrand::euclidean(2), VectorField::linear(diag({1, 1})), 0.1), InputError);
    EXPECT_THROW(push_forward(q, VectorField::linear(diag({1, 1})), -1.0), StepTooLargeError);
}

TEST(VolumeDerivative, FluxIdentities) {
    const auto disk = sample_surface(StarBody::ball(make_vec({0.2, 0.1}), 1), 2048);
    EXPECT_NEAR(volume_derivative(disk, VectorField::constant(make_vec({1, 2}))), 0.0, 1e-8);
    EXPECT_NEAR(volume_derivative(disk, VectorField::linear(diag({1, 1}))), 2 * kPi, 1e-8);
    EXPECT_NEAR(volume_derivative(disk, VectorField::linear(diag({1, 0}))), kPi, 1e-8);
}

TEST(MeanCurvaturePairing, MatchesFirstVariation) {
    std::mt19937_64 rng(8);
    const auto body = StarBody::ellipsoid(make_vec({0, 0}), diag({0.25, 1}));
    const auto q = sample_surface(body, 2048);
    const auto samples = curvature_samples({body}, quad41().integrand(), q);
    for (int k = 0; k < 10; ++k) {
        const auto g = VectorField::random(2, rng);
        const double fv = first_variation(q, quad41().integrand(), g);
        EXPECT_NEAR(mean_curvature_pairing(q, samples, g), fv, 1e-3 * std::max(1.0, std::abs(fv)));
    }
}

TEST(Criticality, WulffAndBallAreCritical) {
    std::mt19937_64 rng(9);
    const auto w = sample_surface(StarBody::wulff(quad41(), make_vec({1, 1}), 1.5), 4096);
    const double p = perimeter_F(w, quad41().integrand());
    const auto b = sample_surface(StarBody::ball(make_vec({0, 0, 0}), 1.0), 8192);
    for (int k = 0; k < 10; ++k) {
        const auto g = VectorField::random(2, rng);
        const auto r = criticality_residual(w, quad41().integrand(), g);
        EXPECT_LE(std::abs(r.residual), 1e-3 * p);
        EXPECT_LE(std::abs(r.rescaled_residual), 1e-3 * p);
        const auto g3 = VectorField::random(3, rng);
        const auto r3 = criticality_residual(b, Integrand::euclidean(3), g3);
        EXPECT_LE(std::abs(r3.residual), 1e-3 * r3.perimeter);
        EXPECT_LE(std::abs(r3.rescaled_residual), 1e-3 * r3.perimeter);
    }
}

TEST(Criticality, EllipseShearIsNotCritical) {
    // Frozen quadrature oracle: first variation 4.64599691424802974170790533372,
    // residual 2 x that = 9.29199382849605948341581066744.
    const auto r = criticality_residual(ellipse(4096), Integrand::euclidean(2), VectorField::linear(diag({1, -1})));
    EXPECT_NEAR(r.first_variation, 4.64599691424802974170790533372, 1e-8);
    EXPECT_NEAR(r.volume_derivative, 0.0, 1e-10);
    EXPECT_NEAR(r.residual, 9.29199382849605948341581066744, 1e-7);
    EXPECT_GT(std::abs(r.residual), 0.1);
    EXPECT_NEAR(r.rescaled_residual, r.residual, 1e-5);
}
